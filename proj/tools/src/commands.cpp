#include <chrono>
#include <ctime>
#include <fstream>
#include <memory>
#include <sstream>

#include "confbandit/analysis.hpp"
#include "confbandit/checkpoint.hpp"
#include "confbandit/errors.hpp"
#include "confbandit/http.hpp"
#include "confbandit/seeding.hpp"
#include "confbandit_cli/app.hpp"

namespace confbandit::cli {
namespace {

constexpr std::string_view kManifestFormat = "confbandit-manifest-1";

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

nlohmann::json endpoint_json(const Endpoint& e) {
  return {{"url", e.url}, {"api_key", e.api_key.empty() ? "" : "<redacted>"}};
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create directory '" + dir.string() + "': " + ec.message());
}

template <typename Fn>
void write_with(const std::filesystem::path& path, Fn&& fn) {
  std::ostringstream ss;
  fn(ss);
  write_text_file(path, ss.str());
}

std::vector<TrainingExample> encode_all(const ContextEncoder& encoder, const std::vector<QAPair>& pairs) {
  std::vector<TrainingExample> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back({p, encoder.encode(p.id, p.question)});
  return out;
}

std::string embed_key() {
  const char* key = std::getenv("CONFBANDIT_EMBED_KEY");
  return key == nullptr ? std::string() : std::string(key);
}

// Owns the pieces of a live environment.
struct LiveBundle {
  std::unique_ptr<HttpTransport> transport;
  std::unique_ptr<std::ofstream> transcript;
  std::unique_ptr<LiveEnvironment> env;
  Endpoint llm;
  Endpoint reward;
};

LiveBundle make_live(const RunConfig& config, const ActionSpace& space) {
  LiveBundle b;
  b.llm = llm_endpoint_from_env();
  b.reward = reward_endpoint_from_env();
  if (b.llm.url.empty()) throw ValidationError("CONFBANDIT_LLM_URL is not set");
  if (b.reward.url.empty()) throw ValidationError("CONFBANDIT_REWARD_URL is not set");
  b.transport = make_http_transport();
  if (!config.live.transcript.empty()) {
    b.transcript = std::make_unique<std::ofstream>(config.live.transcript, std::ios::app);
    if (!*b.transcript) throw Error("cannot open transcript '" + config.live.transcript + "'");
  }
  b.env = std::make_unique<LiveEnvironment>(space, *b.transport, b.llm, b.reward, config.live.scoring,
                                            GenerationOptions{}, b.transcript.get());
  return b;
}

nlohmann::json stats_json(const ActionStats& s, const ActionSpace& space) {
  nlohmann::json j = s;
  for (auto& entry : j["top_instructions"]) {
    entry["text"] = space.instruction_text(entry["instruction"].get<std::size_t>());
  }
  return j;
}

struct SimArtifacts {
  nlohmann::json regret;
  nlohmann::json sublinearity;
};

SimArtifacts regret_artifacts(std::span<const Transition> transitions, const SimSpec& spec,
                              const std::filesystem::path& out_dir) {
  SimArtifacts a;
  const RegretTrace trace = compute_regret(transitions, spec);
  write_with(out_dir / "regret.csv", [&](std::ostream& os) { write_step_csv(os, transitions, &trace); });
  a.regret = {{"steps", trace.steps()}, {"total", trace.total()}, {"arms", trace.arm_count}};
  a.sublinearity = trace.steps() >= kMinSublinearityHorizon ? nlohmann::json(sublinearity_check(trace))
                                                            : nlohmann::json(nullptr);
  return a;
}

}  // namespace

void cmd_train(const TrainOptions& options, std::ostream& out) {
  const std::string started = utc_now();
  RunConfig config = options.config ? load_run_config(*options.config) : RunConfig{};
  finalize(config, options.overrides);
  const auto pairs = load_dataset(options.dataset);
  if (pairs.empty()) throw ValidationError("dataset '" + options.dataset.string() + "' is empty");
  if (options.env != "sim" && options.env != "live") {
    throw ValidationError("--env must be 'sim' or 'live'");
  }

  const ActionSpace space = config.resolved_space();
  const auto checkpoint = options.checkpoint.value_or(options.out_dir.value_or(".") / "checkpoint.json");
  const auto out_dir = options.out_dir.value_or(checkpoint.parent_path().empty() ? "." : checkpoint.parent_path());
  ensure_dir(out_dir);

  std::unique_ptr<HttpTransport> embed_transport;
  if (config.embedder.kind == EmbeddingSource::remote) embed_transport = make_http_transport();
  const ContextEncoder encoder(config.embedder, embed_transport.get(), embed_key());
  const auto examples = encode_all(encoder, pairs);

  std::unique_ptr<SimEnvironment> sim;
  LiveBundle live;
  Environment* env = nullptr;
  nlohmann::json endpoints = nlohmann::json::object();
  if (options.env == "sim") {
    sim = std::make_unique<SimEnvironment>(SimSpec(space, config.sim));
    env = sim.get();
  } else {
    live = make_live(config, space);
    env = live.env.get();
    endpoints = {{"llm", endpoint_json(live.llm)}, {"reward", endpoint_json(live.reward)}};
  }

  const PolicyParams init =
      init_params(space, encoder.config().width, derive_seed(config.seed, "init"), config.architecture);
  TrainReport report;
  try {
    report = train(init, examples, *env, config.train);
  } catch (const TrainingError& e) {
    write_with(out_dir / "transitions.partial.csv",
               [&](std::ostream& os) { write_transitions_csv(os, e.partial().transitions); });
    throw;
  }

  const nlohmann::json metadata = {{"command", "train"},
                                   {"env", options.env},
                                   {"questions", pairs.size()},
                                   {"steps", report.transitions.size()},
                                   {"final_mean_reward", report.mean_reward_curve.back()},
                                   {"config", to_json(config)}};
  write_checkpoint(checkpoint, report.final_params, space, encoder.config(), metadata);
  write_with(out_dir / "transitions.csv",
             [&](std::ostream& os) { write_transitions_csv(os, report.transitions); });
  const nlohmann::json manifest = {{"format", kManifestFormat},
                                   {"command", "train"},
                                   {"env", options.env},
                                   {"dataset", options.dataset.string()},
                                   {"config", to_json(config)},
                                   {"endpoints", endpoints},
                                   {"checkpoint", checkpoint.string()},
                                   {"started_at", started},
                                   {"finished_at", utc_now()}};
  write_text_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
  out << "trained " << report.transitions.size() << " steps over " << pairs.size()
      << " questions; mean reward " << format_number(report.mean_reward_curve.back()) << "\n"
      << "checkpoint: " << checkpoint.string() << "\n";
}

void cmd_infer(const InferOptions& options, std::ostream& out) {
  if (options.question.has_value() == options.dataset.has_value()) {
    throw ValidationError("give exactly one of --question or --dataset");
  }
  const Checkpoint ckpt = read_checkpoint(options.checkpoint);
  std::vector<QAPair> pairs;
  if (options.question) {
    if (options.question->empty()) throw ValidationError("question must not be empty");
    pairs.push_back({"q0", *options.question, ""});
  } else {
    pairs = load_dataset(*options.dataset);
  }

  std::unique_ptr<HttpTransport> transport;
  if (ckpt.embedder.kind == EmbeddingSource::remote || options.live) transport = make_http_transport();
  const ContextEncoder encoder(ckpt.embedder, transport.get(), embed_key());
  Endpoint llm;
  if (options.live) {
    llm = llm_endpoint_from_env();
    if (llm.url.empty()) throw ValidationError("CONFBANDIT_LLM_URL is not set");
  }

  for (const auto& pair : pairs) {
    const ActionTriple triple = greedy(ckpt.params, encoder.encode(pair.id, pair.question));
    const RenderedConfig rc = ckpt.space.resolve(triple);
    std::optional<std::string> answer;
    if (options.live) answer = llm_generate(*transport, llm, pair, rc, GenerationOptions{});
    if (options.json) {
      nlohmann::json j = {{"id", pair.id},
                          {"instruction_index", triple.instruction_index},
                          {"instruction", rc.instruction_text},
                          {"temperature", rc.temperature},
                          {"steps", rc.steps}};
      if (answer) j["answer"] = *answer;
      out << j.dump() << "\n";
    } else {
      out << pair.id << "\tinstruction=" << triple.instruction_index
          << "\ttemperature=" << format_number(rc.temperature) << "\tsteps=" << rc.steps << "\n";
      if (answer) out << *answer << "\n";
    }
  }
}

void cmd_simulate(const SimulateOptions& options, std::ostream& out) {
  const std::string started = utc_now();
  RunConfig config;
  if (options.manifest) {
    std::ifstream in(*options.manifest);
    if (!in) throw Error("cannot open manifest '" + options.manifest->string() + "'");
    const auto m = nlohmann::json::parse(in, nullptr, false);
    if (m.is_discarded() || m.value("format", "") != kManifestFormat || !m.contains("config")) {
      throw FormatError("'" + options.manifest->string() + "' is not a run manifest");
    }
    config = run_config_from_json(m.at("config"));
  } else if (options.config) {
    config = load_run_config(*options.config);
  }
  finalize(config, options.overrides);
  if (config.simulate.train_questions == 0 || config.simulate.eval_questions == 0) {
    throw ValidationError("simulate needs at least one training and one evaluation question");
  }
  ensure_dir(options.out_dir);

  const ActionSpace space = config.resolved_space();
  SimEnvironment env{SimSpec(space, config.sim)};
  const SimSpec& spec = env.spec();
  std::unique_ptr<HttpTransport> embed_transport;
  if (config.embedder.kind == EmbeddingSource::remote) embed_transport = make_http_transport();
  const ContextEncoder encoder(config.embedder, embed_transport.get(), embed_key());
  const auto train_set = encode_all(
      encoder, generate_sim_questions(spec, config.simulate.train_questions, "train",
                                      derive_seed(config.seed, "train-questions")));
  const auto eval_set = encode_all(
      encoder, generate_sim_questions(spec, config.simulate.eval_questions, "eval",
                                      derive_seed(config.seed, "eval-questions")));

  const bool small = space.joint_size() <= kJointOracleLimit;
  TrainConfig train_config = config.train;
  const std::size_t horizon = train_set.size() * train_config.trials_per_question;
  if (small && train_config.snapshot_stride == 0) train_config.snapshot_stride = std::max<std::size_t>(1, horizon / 50);
  const PolicyParams init =
      init_params(space, encoder.config().width, derive_seed(config.seed, "init"), config.architecture);
  const TrainReport report = train(init, train_set, env, train_config);

  write_with(options.out_dir / "transitions.csv",
             [&](std::ostream& os) { write_transitions_csv(os, report.transitions); });
  const SimArtifacts regret = regret_artifacts(report.transitions, spec, options.out_dir);

  std::vector<ActionTriple> decisions;
  std::size_t correct = 0;
  for (const auto& e : eval_set) {
    decisions.push_back(greedy(report.final_params, e.context));
    correct += decisions.back() == spec.optimal_arm(spec.bucket_of(e.pair.id)) ? 1 : 0;
  }

  nlohmann::json convergence = nullptr;
  if (small) {
    const std::size_t probes = std::min<std::size_t>(train_set.size(), 32);
    ConvergenceProbe probe;
    probe.probes = std::span(train_set).first(probes);
    probe.env = &env;
    probe.learning_rate = train_config.learning_rate;
    probe.variance_snapshots = 5;
    probe.seed = derive_seed(config.seed, "convergence");
    convergence = convergence_report(report, probe);
  }

  nlohmann::json summary = {
      {"steps", report.transitions.size()},
      {"final_mean_reward", report.mean_reward_curve.back()},
      {"anneal_alpha", report.alpha},
      {"greedy_accuracy", static_cast<double>(correct) / static_cast<double>(eval_set.size())},
      {"regret", regret.regret},
      {"sublinearity", regret.sublinearity},
      {"convergence", convergence},
      {"training_actions", stats_json(action_stats(report.transitions, space), space)},
      {"greedy_actions", stats_json(action_stats(decisions, space), space)}};
  nlohmann::json optima = nlohmann::json::array();
  for (std::size_t b = 0; b < spec.bucket_count(); ++b) {
    optima.push_back({{"bucket", b}, {"triple", spec.optimal_arm(b)}, {"mean", spec.optimal_mean(b)}});
  }
  summary["optima"] = optima;
  write_text_file(options.out_dir / "summary.json", summary.dump(2) + "\n");

  const auto checkpoint = options.out_dir / "checkpoint.json";
  write_checkpoint(checkpoint, report.final_params, space, encoder.config(),
                   {{"command", "simulate"}, {"config", to_json(config)}});
  const nlohmann::json manifest = {{"format", kManifestFormat},
                                   {"command", "simulate"},
                                   {"env", "sim"},
                                   {"config", to_json(config)},
                                   {"endpoints", nlohmann::json::object()},
                                   {"checkpoint", checkpoint.string()},
                                   {"started_at", started},
                                   {"finished_at", utc_now()}};
  write_text_file(options.out_dir / "manifest.json", manifest.dump(2) + "\n");
  out << "simulated " << report.transitions.size() << " steps; greedy accuracy "
      << format_number(summary["greedy_accuracy"].get<double>()) << "; cumulative regret "
      << format_number(regret.regret["total"].get<double>()) << "\n"
      << "artifacts: " << options.out_dir.string() << "\n";
}

void cmd_analyze(const AnalyzeOptions& options, std::ostream& out) {
  std::ifstream in(options.transitions);
  if (!in) throw Error("cannot open '" + options.transitions.string() + "'");
  const auto transitions = read_transitions_csv(in);
  if (transitions.empty()) throw ValidationError("no transitions in '" + options.transitions.string() + "'");

  std::optional<RunConfig> config;
  if (options.manifest) {
    std::ifstream min(*options.manifest);
    const auto m = nlohmann::json::parse(min, nullptr, false);
    if (m.is_discarded() || !m.contains("config")) {
      throw FormatError("'" + options.manifest->string() + "' is not a run manifest");
    }
    config = run_config_from_json(m.at("config"));
  } else if (options.config) {
    config = load_run_config(*options.config);
    finalize(*config, {});
  }
  const ActionSpace space = config ? config->resolved_space() : build_default_space();
  ensure_dir(options.out_dir);

  nlohmann::json summary = {{"steps", transitions.size()},
                            {"actions", stats_json(action_stats(transitions, space), space)}};
  const bool simulated = std::all_of(transitions.begin(), transitions.end(),
                                     [](const Transition& t) { return t.source == RewardSource::sim; });
  if (simulated && config) {
    const SimSpec spec(space, config->sim);
    const SimArtifacts a = regret_artifacts(transitions, spec, options.out_dir);
    summary["regret"] = a.regret;
    summary["sublinearity"] = a.sublinearity;
  } else {
    write_with(options.out_dir / "regret.csv",
               [&](std::ostream& os) { write_step_csv(os, transitions, nullptr); });
    summary["regret"] = nullptr;
    summary["regret_note"] = simulated ? "no simulator config given" : "regret needs a simulated run";
  }
  write_text_file(options.out_dir / "summary.json", summary.dump(2) + "\n");
  out << "analyzed " << transitions.size() << " transitions into " << options.out_dir.string() << "\n";
}

}  // namespace confbandit::cli
