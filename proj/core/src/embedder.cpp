#include "confbandit/embedder.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "confbandit/errors.hpp"
#include "confbandit/seeding.hpp"

namespace confbandit {
namespace {

std::vector<std::string> lowercase_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : text) {
    const auto uc = static_cast<unsigned char>(c);
    if (std::isspace(uc) != 0) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      // ASCII-only folding keeps the hash independent of the C locale.
      current.push_back(uc < 0x80 ? static_cast<char>(std::tolower(uc)) : c);
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

void add_feature(Eigen::VectorXd& v, std::string_view feature, std::uint64_t seed) {
  const std::uint64_t h = feature_hash(feature, seed);
  const auto bucket = static_cast<Eigen::Index>(h % static_cast<std::uint64_t>(v.size()));
  v[bucket] += (h >> 63) != 0 ? -1.0 : 1.0;
}

double parse_real(std::string_view text, const std::string& where) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front())) != 0) {
    text.remove_prefix(1);
  }
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back())) != 0) {
    text.remove_suffix(1);
  }
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw FormatError(where + ": not a number: '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

std::string_view source_name(EmbeddingSource source) noexcept {
  switch (source) {
    case EmbeddingSource::hashed: return "hashed";
    case EmbeddingSource::precomputed: return "precomputed";
    case EmbeddingSource::remote: return "remote";
  }
  return "unknown";
}

Embedding make_embedding(std::vector<double> raw, EmbeddingSource source) {
  if (raw.empty()) throw FormatError("embedding is empty");
  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(raw.data(), static_cast<Eigen::Index>(raw.size()));
  if (!v.allFinite()) throw FormatError("embedding contains a non-finite value");
  const double norm = v.norm();
  if (!(norm > 0.0)) throw FormatError("embedding has zero norm");
  return Embedding{v / norm, source};
}

std::uint64_t feature_hash(std::string_view text, std::uint64_t seed) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ splitmix64(seed);
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(h);
}

Embedding embed_hashed(std::string_view question, std::size_t width, std::uint64_t seed) {
  if (width < kMinEmbeddingWidth) {
    throw ValidationError("embedding width must be at least " + std::to_string(kMinEmbeddingWidth));
  }
  const auto tokens = lowercase_tokens(question);
  if (tokens.empty()) throw ValidationError("question must not be empty");

  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(width));
  std::string feature;
  for (const auto& token : tokens) {
    feature = "w:" + token;
    add_feature(v, feature, seed);
    const std::string padded = "^" + token + "$";
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
      feature = "c:" + padded.substr(i, 3);
      add_feature(v, feature, seed);
    }
  }
  const double norm = v.norm();
  if (!(norm > 0.0)) {
    // Every feature cancelled; fall back to a fixed bucket so the contract holds.
    v[static_cast<Eigen::Index>(feature_hash(question, seed) % width)] = 1.0;
    return Embedding{v, EmbeddingSource::hashed};
  }
  return Embedding{v / norm, EmbeddingSource::hashed};
}

std::map<std::string, Embedding> load_precomputed(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open embedding file " + path.string());
  std::map<std::string, Embedding> out;
  std::size_t width = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) throw FormatError(where + ": expected id<TAB>values");
    std::string id = line.substr(0, tab);
    std::vector<double> values;
    std::string_view rest(line);
    rest.remove_prefix(tab + 1);
    while (true) {
      const auto comma = rest.find(',');
      values.push_back(parse_real(rest.substr(0, comma), where));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (width == 0) {
      width = values.size();
    } else if (values.size() != width) {
      throw FormatError(where + ": width " + std::to_string(values.size()) +
                        " differs from earlier records (" + std::to_string(width) + ")");
    }
    Embedding e;
    try {
      e = make_embedding(std::move(values), EmbeddingSource::precomputed);
    } catch (const FormatError& err) {
      throw FormatError(where + ": " + err.what());
    }
    if (!out.emplace(std::move(id), std::move(e)).second) {
      throw FormatError(where + ": duplicate id");
    }
  }
  return out;
}

Embedding embed_remote(std::string_view question, const RemoteEmbedderOptions& options,
                       HttpTransport& transport) {
  if (question.empty()) throw ValidationError("question must not be empty");
  const auto reply = post_json(transport, options.endpoint, {{"input", std::string(question)}},
                               options.api_key, options.retry, "embedding endpoint");
  std::vector<double> values;
  try {
    values = reply.at("embedding").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("embedding endpoint: ") + e.what());
  }
  if (values.size() != options.expected_width) {
    throw FormatError("embedding endpoint returned width " + std::to_string(values.size()) +
                      ", expected " + std::to_string(options.expected_width));
  }
  return make_embedding(std::move(values), EmbeddingSource::remote);
}

void to_json(nlohmann::json& j, const EmbedderConfig& config) {
  j = nlohmann::json{{"kind", source_name(config.kind)},
                     {"width", config.width},
                     {"hash_seed", config.hash_seed}};
  if (!config.precomputed_path.empty()) j["precomputed_path"] = config.precomputed_path;
  if (!config.endpoint.empty()) j["endpoint"] = config.endpoint;
}

void from_json(const nlohmann::json& j, EmbedderConfig& config) {
  const auto kind = j.value("kind", std::string("hashed"));
  if (kind == "hashed") {
    config.kind = EmbeddingSource::hashed;
  } else if (kind == "precomputed") {
    config.kind = EmbeddingSource::precomputed;
  } else if (kind == "remote") {
    config.kind = EmbeddingSource::remote;
  } else {
    throw FormatError("unknown embedder kind '" + kind + "'");
  }
  config.width = j.value("width", kDefaultEmbeddingWidth);
  config.hash_seed = j.value("hash_seed", kDefaultHashSeed);
  config.precomputed_path = j.value("precomputed_path", std::string());
  config.endpoint = j.value("endpoint", std::string());
}

ContextEncoder::ContextEncoder(EmbedderConfig config, HttpTransport* transport, std::string api_key)
    : config_(std::move(config)), transport_(transport), api_key_(std::move(api_key)) {
  if (config_.width < kMinEmbeddingWidth) throw ValidationError("embedding width too small");
  if (config_.kind == EmbeddingSource::precomputed) {
    for (auto& [id, e] : load_precomputed(config_.precomputed_path)) {
      if (e.width() != config_.width) {
        throw FormatError("precomputed embeddings have width " + std::to_string(e.width()) +
                          ", configured width is " + std::to_string(config_.width));
      }
      precomputed_.emplace(id, std::move(e));
    }
  }
  if (config_.kind == EmbeddingSource::remote && transport_ == nullptr) {
    throw ValidationError("remote embedder requires an HTTP transport");
  }
}

Embedding ContextEncoder::encode(std::string_view id, std::string_view question) const {
  switch (config_.kind) {
    case EmbeddingSource::hashed:
      return embed_hashed(question, config_.width, config_.hash_seed);
    case EmbeddingSource::precomputed: {
      const auto it = precomputed_.find(id);
      if (it == precomputed_.end()) {
        throw ValidationError("no precomputed embedding for id '" + std::string(id) + "'");
      }
      return it->second;
    }
    case EmbeddingSource::remote: {
      RemoteEmbedderOptions options{config_.endpoint, api_key_, config_.width, {}};
      return embed_remote(question, options, *transport_);
    }
  }
  throw ValidationError("unknown embedder kind");
}

}  // namespace confbandit
