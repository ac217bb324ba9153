#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "confbandit/config_space.hpp"
#include "confbandit/embedder.hpp"
#include "confbandit/environment.hpp"
#include "confbandit/policy_net.hpp"
#include "confbandit/trainer.hpp"

namespace confbandit::cli {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitRuntime = 2 };

/// One JSON object per line with non-empty string fields id, question,
/// reference; ids unique. Blank lines are skipped.
std::vector<QAPair> load_dataset(const std::filesystem::path& path);

struct SimulateSettings {
  std::size_t train_questions = 100;
  std::size_t eval_questions = 50;
};

struct LiveSettings {
  ScoringMode scoring = ScoringMode::scalar;
  std::string transcript;  // JSONL log of live calls, optional
};

/// Everything a run needs. Sub-seeds for training, the simulator and
/// initialization are derived from `seed`.
struct RunConfig {
  std::uint64_t seed = 0;
  TrainConfig train;
  SimConfig sim;
  EmbedderConfig embedder;
  PolicyArchitecture architecture;
  std::optional<ActionSpace> space;  // the default space when empty
  SimulateSettings simulate;
  LiveSettings live;

  ActionSpace resolved_space() const { return space ? *space : build_default_space(); }
};

nlohmann::json to_json(const RunConfig& config);
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

/// Command-line overrides; unset fields keep the config value.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> shuffle;
  std::optional<std::size_t> trials;
  std::optional<double> lr;
  std::optional<double> tau0;
  std::optional<double> tau_min;
};

/// Applies overrides, then derives train.seed and sim.seed from the root seed.
void finalize(RunConfig& config, const Overrides& overrides);

struct TrainOptions {
  std::filesystem::path dataset;
  std::optional<std::filesystem::path> config;
  std::string env = "sim";
  std::optional<std::filesystem::path> checkpoint;
  std::optional<std::filesystem::path> out_dir;
  Overrides overrides;
};

struct InferOptions {
  std::filesystem::path checkpoint;
  std::optional<std::string> question;
  std::optional<std::filesystem::path> dataset;
  bool live = false;
  bool json = false;
};

struct SimulateOptions {
  std::optional<std::filesystem::path> config;
  std::optional<std::filesystem::path> manifest;
  std::filesystem::path out_dir;
  Overrides overrides;
};

struct AnalyzeOptions {
  std::filesystem::path transitions;
  std::optional<std::filesystem::path> config;
  std::optional<std::filesystem::path> manifest;
  std::filesystem::path out_dir;
};

// Each command throws confbandit::Error (or std::exception) on failure;
// run_cli maps those to exit codes.
void cmd_train(const TrainOptions& options, std::ostream& out);
void cmd_infer(const InferOptions& options, std::ostream& out);
void cmd_simulate(const SimulateOptions& options, std::ostream& out);
void cmd_analyze(const AnalyzeOptions& options, std::ostream& out);

/// Parses arguments and dispatches. Returns 0 on success, 1 on a usage
/// error and 2 on a runtime error (diagnostic on `err`).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace confbandit::cli
