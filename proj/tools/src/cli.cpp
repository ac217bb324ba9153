#include <CLI11.hpp>

#include "confbandit/errors.hpp"
#include "confbandit_cli/app.hpp"

namespace confbandit::cli {
namespace {

template <typename T>
void optional_flag(CLI::App* cmd, const std::string& name, std::optional<T>& target, const std::string& help) {
  cmd->add_option_function<T>(name, [&target](const T& v) { target = v; }, help);
}

void add_overrides(CLI::App* cmd, Overrides& o) {
  optional_flag(cmd, "--seed", o.seed, "Root seed for every random stream");
  optional_flag(cmd, "--shuffle", o.shuffle, "Shuffle the training order with this seed");
  optional_flag(cmd, "--trials", o.trials, "Trials per question (T)");
  optional_flag(cmd, "--lr", o.lr, "Learning rate");
  optional_flag(cmd, "--tau0", o.tau0, "Initial Boltzmann temperature");
  optional_flag(cmd, "--tau-min", o.tau_min, "Temperature floor");
}

template <typename T>
void optional_path(CLI::App* cmd, const std::string& name, std::optional<T>& target, const std::string& help) {
  cmd->add_option_function<std::string>(name, [&target](const std::string& v) { target = T(v); }, help);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Learns per-question LLM configuration triples with a contextual bandit policy"};
  app.require_subcommand(1);

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Train a policy on a JSONL dataset");
  train_cmd->add_option("--dataset", train.dataset, "JSONL file with id, question, reference")->required();
  optional_path(train_cmd, "--config", train.config, "Run configuration (JSON)");
  train_cmd->add_option("--env", train.env, "Reward source: sim or live")
      ->check(CLI::IsMember({"sim", "live"}))
      ->capture_default_str();
  optional_path(train_cmd, "--checkpoint", train.checkpoint, "Checkpoint output path");
  optional_path(train_cmd, "--out", train.out_dir, "Directory for manifest and transitions");
  add_overrides(train_cmd, train.overrides);

  InferOptions infer;
  auto* infer_cmd = app.add_subcommand("infer", "Print the greedy configuration per question");
  infer_cmd->add_option("--checkpoint", infer.checkpoint, "Trained checkpoint")->required();
  optional_flag(infer_cmd, "--question", infer.question, "A single question");
  optional_path(infer_cmd, "--dataset", infer.dataset, "JSONL file of questions");
  infer_cmd->add_flag("--live", infer.live, "Also generate the answer with the LLM endpoint");
  infer_cmd->add_flag("--json", infer.json, "One JSON object per line");

  SimulateOptions simulate;
  auto* sim_cmd = app.add_subcommand("simulate", "End-to-end simulated run with diagnostics");
  optional_path(sim_cmd, "--config", simulate.config, "Run configuration (JSON)");
  optional_path(sim_cmd, "--manifest", simulate.manifest, "Replay the configuration of a previous run");
  sim_cmd->add_option("--out", simulate.out_dir, "Output directory")->required();
  add_overrides(sim_cmd, simulate.overrides);

  AnalyzeOptions analyze;
  auto* analyze_cmd = app.add_subcommand("analyze", "Recompute diagnostics from stored transitions");
  analyze_cmd->add_option("--transitions", analyze.transitions, "transitions.csv of a run")->required();
  optional_path(analyze_cmd, "--config", analyze.config, "Run configuration of a simulated run");
  optional_path(analyze_cmd, "--manifest", analyze.manifest, "Manifest of a simulated run");
  analyze_cmd->add_option("--out", analyze.out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (train_cmd->parsed()) cmd_train(train, out);
    if (infer_cmd->parsed()) cmd_infer(infer, out);
    if (sim_cmd->parsed()) cmd_simulate(simulate, out);
    if (analyze_cmd->parsed()) cmd_analyze(analyze, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace confbandit::cli
