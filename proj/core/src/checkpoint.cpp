#include "confbandit/checkpoint.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "confbandit/errors.hpp"

namespace confbandit {
namespace {

nlohmann::json layer_to_json(const DenseLayer& layer) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) row.push_back(layer.weight(r, c));
    rows.push_back(std::move(row));
  }
  nlohmann::json bias = nlohmann::json::array();
  for (Eigen::Index i = 0; i < layer.bias.size(); ++i) bias.push_back(layer.bias[i]);
  return {{"weight", std::move(rows)}, {"bias", std::move(bias)}};
}

double finite_number(const nlohmann::json& v, const std::string& where) {
  // Non-finite doubles are written by nlohmann as null.
  if (!v.is_number()) throw CheckpointError(where + ": non-finite or non-numeric weight");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw CheckpointError(where + ": non-finite weight");
  return x;
}

DenseLayer layer_from_json(const nlohmann::json& j, const std::string& where) {
  const auto& rows = j.at("weight");
  const auto& bias = j.at("bias");
  if (!rows.is_array() || rows.empty() || !bias.is_array()) {
    throw CheckpointError(where + ": malformed layer");
  }
  const auto out = static_cast<Eigen::Index>(rows.size());
  const auto in = static_cast<Eigen::Index>(rows.front().size());
  if (in == 0 || static_cast<Eigen::Index>(bias.size()) != out) {
    throw CheckpointError(where + ": weight/bias shape mismatch");
  }
  DenseLayer layer{Eigen::MatrixXd(out, in), Eigen::VectorXd(out)};
  for (Eigen::Index r = 0; r < out; ++r) {
    const auto& row = rows[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != in) {
      throw CheckpointError(where + ": ragged weight matrix");
    }
    for (Eigen::Index c = 0; c < in; ++c) {
      layer.weight(r, c) = finite_number(row[static_cast<std::size_t>(c)], where);
    }
    layer.bias[r] = finite_number(bias[static_cast<std::size_t>(r)], where);
  }
  return layer;
}

}  // namespace

std::string checkpoint_save(const PolicyParams& params, const ActionSpace& space,
                            const EmbedderConfig& embedder, const nlohmann::json& metadata) {
  if (!params.all_finite()) throw ValidationError("refusing to save non-finite parameters");
  nlohmann::json heads = nlohmann::json::object();
  for (Axis axis : kAxes) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& layer : params.head(axis)) layers.push_back(layer_to_json(layer));
    heads[std::string(axis_name(axis))] = std::move(layers);
  }
  nlohmann::json doc = {
      {"format", kCheckpointFormat},
      {"action_space", space},
      {"embedder", embedder},
      {"policy",
       {{"input_width", params.input_width},
        {"hidden_width", params.hidden_width},
        {"input_gain", params.input_gain},
        {"shared", layer_to_json(params.shared)},
        {"heads", std::move(heads)}}},
      {"metadata", metadata.is_null() ? nlohmann::json::object() : metadata},
  };
  return doc.dump(1) + "\n";
}

Checkpoint checkpoint_load(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  try {
    const auto format = doc.at("format").get<std::string>();
    if (format != kCheckpointFormat) {
      throw CheckpointError("unsupported checkpoint format '" + format + "' (expected " +
                            std::string(kCheckpointFormat) + ")");
    }
    ActionSpace space = action_space_from_json(doc.at("action_space"));
    EmbedderConfig embedder = doc.at("embedder").get<EmbedderConfig>();
    const auto& policy = doc.at("policy");

    PolicyParams p;
    p.input_width = policy.at("input_width").get<std::size_t>();
    p.hidden_width = policy.at("hidden_width").get<std::size_t>();
    p.input_gain = finite_number(policy.at("input_gain"), "input_gain");
    p.shared = layer_from_json(policy.at("shared"), "shared");
    if (p.shared.inputs() != p.input_width || p.shared.outputs() != p.hidden_width) {
      throw CheckpointError("shared layer shape does not match input/hidden width");
    }
    if (embedder.width != p.input_width) {
      throw CheckpointError("embedder width does not match policy input width");
    }
    for (Axis axis : kAxes) {
      const std::string name(axis_name(axis));
      const auto& layers = policy.at("heads").at(name);
      if (!layers.is_array() || layers.empty()) throw CheckpointError("head " + name + " is empty");
      std::size_t in = p.hidden_width;
      for (std::size_t l = 0; l < layers.size(); ++l) {
        auto layer = layer_from_json(layers[l], name + "[" + std::to_string(l) + "]");
        if (layer.inputs() != in) throw CheckpointError("head " + name + " layers do not chain");
        in = layer.outputs();
        p.head(axis).push_back(std::move(layer));
      }
      if (in != space.axis_size(axis)) {
        throw CheckpointError("head " + name + " has " + std::to_string(in) +
                              " outputs but the action space has " +
                              std::to_string(space.axis_size(axis)));
      }
    }
    return Checkpoint{std::move(p), std::move(space), std::move(embedder),
                      doc.value("metadata", nlohmann::json::object())};
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("malformed checkpoint: ") + e.what());
  } catch (const CheckpointError&) {
    throw;
  } catch (const Error& e) {
    throw CheckpointError(std::string("invalid checkpoint: ") + e.what());
  }
}

void write_checkpoint(const std::filesystem::path& path, const PolicyParams& params,
                      const ActionSpace& space, const EmbedderConfig& embedder,
                      const nlohmann::json& metadata) {
  const std::string text = checkpoint_save(params, space, embedder, metadata);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  out << text;
  if (!out) throw Error("failed writing checkpoint " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return checkpoint_load(buf.str());
}

}  // namespace confbandit
