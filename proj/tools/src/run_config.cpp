#include <fstream>
#include <set>
#include <sstream>

#include "confbandit/errors.hpp"
#include "confbandit/seeding.hpp"
#include "confbandit_cli/app.hpp"

namespace confbandit::cli {
namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string scoring_name(ScoringMode mode) { return mode == ScoringMode::scalar ? "scalar" : "judge"; }

}  // namespace

std::vector<QAPair> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset '" + path.string() + "'");
  std::vector<QAPair> out;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw FormatError(where + ": not a JSON object");
    QAPair pair;
    for (auto [key, field] : {std::pair{"id", &pair.id}, std::pair{"question", &pair.question},
                              std::pair{"reference", &pair.reference}}) {
      const auto it = j.find(key);
      if (it == j.end() || !it->is_string()) {
        throw FormatError(where + ": missing string field '" + key + "'");
      }
      *field = it->get<std::string>();
      if (field->empty()) throw ValidationError(where + ": field '" + key + "' is empty");
    }
    if (!ids.insert(pair.id).second) throw ValidationError(where + ": duplicate id '" + pair.id + "'");
    out.push_back(std::move(pair));
  }
  return out;
}

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
  j["seed"] = c.seed;
  j["train"] = c.train;
  j["sim"] = c.sim;
  j["embedder"] = c.embedder;
  j["architecture"] = {{"hidden_width", c.architecture.hidden_width},
                       {"head_interior", c.architecture.head_interior},
                       {"input_gain", c.architecture.input_gain}};
  j["space"] = c.space ? nlohmann::json(*c.space) : nlohmann::json(nullptr);
  j["simulate"] = {{"train_questions", c.simulate.train_questions},
                   {"eval_questions", c.simulate.eval_questions}};
  j["live"] = {{"scoring", scoring_name(c.live.scoring)}, {"transcript", c.live.transcript}};
  return j;
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw FormatError("run config must be a JSON object");
  RunConfig c;
  try {
    c.seed = j.value("seed", c.seed);
    if (j.contains("train")) c.train = j.at("train").get<TrainConfig>();
    if (j.contains("sim")) c.sim = j.at("sim").get<SimConfig>();
    if (j.contains("embedder")) c.embedder = j.at("embedder").get<EmbedderConfig>();
    if (auto it = j.find("architecture"); it != j.end()) {
      c.architecture.hidden_width = it->value("hidden_width", c.architecture.hidden_width);
      c.architecture.head_interior = it->value("head_interior", c.architecture.head_interior);
      c.architecture.input_gain = it->value("input_gain", c.architecture.input_gain);
    }
    if (auto it = j.find("space"); it != j.end() && !it->is_null()) {
      c.space = it->is_string() ? load_action_space(it->get<std::string>()) : action_space_from_json(*it);
    }
    if (auto it = j.find("simulate"); it != j.end()) {
      c.simulate.train_questions = it->value("train_questions", c.simulate.train_questions);
      c.simulate.eval_questions = it->value("eval_questions", c.simulate.eval_questions);
    }
    if (auto it = j.find("live"); it != j.end()) {
      const auto scoring = it->value("scoring", std::string("scalar"));
      if (scoring == "scalar") {
        c.live.scoring = ScoringMode::scalar;
      } else if (scoring == "judge") {
        c.live.scoring = ScoringMode::judge;
      } else {
        throw FormatError("live.scoring must be 'scalar' or 'judge'");
      }
      c.live.transcript = it->value("transcript", std::string());
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("run config: ") + e.what());
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  const auto j = nlohmann::json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) throw FormatError("'" + path.string() + "' is not valid JSON");
  return run_config_from_json(j);
}

void finalize(RunConfig& c, const Overrides& o) {
  if (o.seed) c.seed = *o.seed;
  if (o.shuffle) c.train.shuffle_seed = *o.shuffle;
  if (o.trials) c.train.trials_per_question = *o.trials;
  if (o.lr) c.train.learning_rate = *o.lr;
  if (o.tau0) c.train.tau0 = *o.tau0;
  if (o.tau_min) c.train.tau_min = *o.tau_min;
  c.train.seed = derive_seed(c.seed, "train");
  c.sim.seed = derive_seed(c.seed, "sim");
  c.train.validate();
}

}  // namespace confbandit::cli
