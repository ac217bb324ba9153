// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Oracles live here, not in the library.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "confbandit/analysis.hpp"
#include "confbandit/checkpoint.hpp"
#include "confbandit/config_space.hpp"
#include "confbandit/environment.hpp"
#include "confbandit/policy_net.hpp"
#include "confbandit/trainer.hpp"
#include "confbandit_cli/app.hpp"
#include "test_support.hpp"

using namespace confbandit;
namespace ct = confbandit::testing;
using nlohmann::json;

namespace {

constexpr int kSeeds = 10;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

// ---------------------------------------------------------------------------
// Simulated pipeline shared by criteria 3-6. Mirrors `confbandit simulate`:
// sub-seeds derived from one root seed, hashed 768-d contexts, default
// architecture.

struct SimSetup {
  ActionSpace space = ct::small_space(2, 3, 3);
  TableKind table = TableKind::dominant;
  std::size_t buckets = 4;
  double sigma = 0.05;
  std::size_t train_questions = 100;
  std::size_t eval_questions = 50;
  std::size_t trials = 4;
  double learning_rate = 0.01;
  double tau0 = 1.0;
  double tau_min = 0.1;
  std::size_t snapshot_stride = 0;
};

struct SimRun {
  std::unique_ptr<SimEnvironment> env;
  std::vector<TrainingExample> train_set;
  std::vector<TrainingExample> eval_set;
  TrainReport report;
  TrainConfig config;
};

std::vector<TrainingExample> embed_all(const std::vector<QAPair>& pairs) {
  std::vector<TrainingExample> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back({p, embed_hashed(p.question)});
  return out;
}

SimRun run_sim(const SimSetup& s, std::uint64_t seed) {
  SimRun run;
  SimConfig sc;
  sc.buckets = s.buckets;
  sc.noise_sigma = s.sigma;
  sc.table = s.table;
  sc.seed = derive_seed(seed, "sim");
  run.env = std::make_unique<SimEnvironment>(SimSpec(s.space, sc));
  const SimSpec& spec = run.env->spec();
  run.train_set = embed_all(generate_sim_questions(spec, s.train_questions, "train", derive_seed(seed, "train-questions")));
  run.eval_set = embed_all(generate_sim_questions(spec, s.eval_questions, "eval", derive_seed(seed, "eval-questions")));
  run.config.learning_rate = s.learning_rate;
  run.config.trials_per_question = s.trials;
  run.config.tau0 = s.tau0;
  run.config.tau_min = s.tau_min;
  run.config.seed = derive_seed(seed, "train");
  run.config.snapshot_stride = s.snapshot_stride;
  const PolicyParams init = init_params(s.space, kDefaultEmbeddingWidth, derive_seed(seed, "init"));
  run.report = train(init, run.train_set, *run.env, run.config);
  return run;
}

// Best arm of a bucket by a direct scan of the mean table.
std::size_t table_argmax(const SimSpec& spec, std::size_t bucket) {
  const auto& row = spec.bucket_table(bucket);
  return static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
}

// Independent softmax(z / tau) with plain loops.
std::vector<double> oracle_softmax(const std::vector<double>& z, double tau) {
  double m = z[0];
  for (double v : z) m = std::max(m, v);
  std::vector<double> p(z.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) sum += p[i] = std::exp((z[i] - m) / tau);
  for (double& v : p) v /= sum;
  return p;
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(20240601);
  auto pick = [&](std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(unit_uniform(rng) * static_cast<double>(hi - lo + 1));
  };
  const double eps = 1e-5;
  const double kink_margin = 1e-3;
  int cases = 0;
  int redraws = 0;
  std::size_t coords = 0;
  double worst = 0.0;
  while (cases < 200) {
    const ActionSpace space = ct::small_space(pick(2, 6), pick(2, 5), pick(2, 5));
    PolicyArchitecture arch;
    arch.hidden_width = pick(3, 8);
    arch.head_interior.assign(pick(1, 2), 0);
    for (auto& w : arch.head_interior) w = pick(3, 8);
    arch.input_gain = 1.0 + 3.0 * unit_uniform(rng);
    const std::size_t width = pick(8, 16);
    PolicyParams p = init_params(space, width, rng(), arch);
    ct::jitter_biases(p, 0.3, rng());
    const Embedding ctx = ct::random_context(width, rng());
    const ActionTriple a = ct::random_triple(space, rng);
    const double tau = std::array<double, 3>{0.5, 1.0, 2.0}[pick(0, 2)];

    // Redraw cases with a ReLU input near its kink: the finite difference
    // would straddle the non-differentiable point.
    const auto trace = ct::reference_log_prob(p, ctx, a, tau);
    if (std::any_of(trace.preactivations.begin(), trace.preactivations.end(),
                    [&](double z) { return std::abs(z) < kink_margin; })) {
      ++redraws;
      continue;
    }
    ++cases;
    const Eigen::VectorXd analytic = grad_log_prob(p, ctx, a, tau).flatten();
    Eigen::VectorXd flat = p.flatten();
    PolicyParams probe = p;
    for (Eigen::Index i = 0; i < flat.size(); ++i) {
      const double x = flat[i];
      flat[i] = x + eps;
      probe.unflatten(flat);
      const double up = ct::reference_log_prob(probe, ctx, a, tau).log_prob;
      flat[i] = x - eps;
      probe.unflatten(flat);
      const double down = ct::reference_log_prob(probe, ctx, a, tau).log_prob;
      flat[i] = x;
      const double fd = (up - down) / (2 * eps);
      const double denom = std::max({std::abs(fd), std::abs(analytic[i]), 1e-6});
      worst = std::max(worst, std::abs(fd - analytic[i]) / denom);
      ++coords;
    }
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-4 && secs < 30.0,
          "200 cases, " + std::to_string(coords) + " coordinates, max rel err " + fmt(worst) + " (< 1e-4), " +
              std::to_string(redraws) + " kink redraws, " + fmt(secs, 3) + " s (< 30 s)"};
}

Outcome criterion2() {
  const auto t0 = std::chrono::steady_clock::now();
  const ActionSpace space = build_default_space();  // heads of 100, 11 and 8 arms
  PolicyArchitecture arch;
  arch.hidden_width = 2;
  arch.head_interior = {2};
  constexpr int kSamples = 100000;
  double worst = 0.0;
  Rng rng(77);
  for (int v = 0; v < 10; ++v) {
    // Zero final weights make each head's logits equal its final bias.
    PolicyParams p = init_params(space, 8, 1000 + v, arch);
    std::array<std::vector<double>, 3> logits;
    for (Axis axis : kAxes) {
      auto& last = p.head(axis).back();
      last.weight.setZero();
      auto& z = logits[static_cast<std::size_t>(axis)];
      z.resize(space.axis_size(axis));
      for (std::size_t i = 0; i < z.size(); ++i) {
        z[i] = 2.0 * standard_normal(rng);
        last.bias[static_cast<Eigen::Index>(i)] = z[i];
      }
    }
    const Embedding ctx = ct::random_context(8, 5000 + v);
    for (const double tau : {0.3, 1.0, 3.0}) {
      const auto stream = static_cast<std::uint64_t>(v) * 10 + static_cast<std::uint64_t>(tau * 3);
      std::array<std::vector<double>, 3> counts;
      for (Axis axis : kAxes) counts[static_cast<std::size_t>(axis)].assign(space.axis_size(axis), 0.0);
      for (int n = 0; n < kSamples; ++n) {
        const PolicyDecision d = sample(p, ctx, tau, derive_seed(stream, "boltzmann", static_cast<std::uint64_t>(n)));
        for (Axis axis : kAxes) counts[static_cast<std::size_t>(axis)][d.triple[axis]] += 1.0;
      }
      for (std::size_t h = 0; h < 3; ++h) {
        const auto expected = oracle_softmax(logits[h], tau);
        for (std::size_t i = 0; i < expected.size(); ++i) {
          worst = std::max(worst, std::abs(counts[h][i] / kSamples - expected[i]));
        }
      }
    }
  }
  const double secs = seconds_since(t0);
  return {worst < 0.01 && secs < 30.0,
          "10 logit sets x 3 temperatures x {100, 11, 8} arms, max |freq - p| " + fmt(worst) + " (< 0.01), " +
              fmt(secs, 3) + " s (< 30 s)"};
}

Outcome criterion3() {
  const auto t0 = std::chrono::steady_clock::now();
  SimSetup s;
  int good_seeds = 0;
  std::string accs;
  for (int seed = 1; seed <= kSeeds; ++seed) {
    const SimRun run = run_sim(s, static_cast<std::uint64_t>(seed));
    const SimSpec& spec = run.env->spec();
    int correct = 0;
    for (const auto& e : run.eval_set) {
      const ActionTriple g = greedy(run.report.final_params, e.context);
      correct += s.space.flat_index(g) == table_argmax(spec, spec.bucket_of(e.pair.id)) ? 1 : 0;
    }
    const double acc = static_cast<double>(correct) / static_cast<double>(run.eval_set.size());
    good_seeds += acc >= 0.9 ? 1 : 0;
    accs += (accs.empty() ? "" : " ") + fmt(acc, 3);
  }
  const double secs = seconds_since(t0);
  return {good_seeds >= 8 && secs < 120.0,
          std::to_string(good_seeds) + "/10 seeds with >= 90% greedy accuracy (need >= 8); per seed: " + accs + "; " +
              fmt(secs, 3) + " s (< 120 s)"};
}

Outcome criterion4() {
  const auto t0 = std::chrono::steady_clock::now();
  SimSetup s;
  s.train_questions = 5000;  // K = 20,000 with T = 4
  int trained_ok = 0;
  int uniform_ok = 0;
  std::string trained_ratios;
  std::string uniform_ratios;
  for (int seed = 1; seed <= kSeeds; ++seed) {
    const SimRun run = run_sim(s, static_cast<std::uint64_t>(seed));
    const SimSpec& spec = run.env->spec();
    const SublinearityReport trained = sublinearity_check(compute_regret(run.report.transitions, spec));
    std::vector<QAPair> pairs;
    for (const auto& e : run.train_set) pairs.push_back(e.pair);
    const auto uniform_tr = uniform_policy_run(spec, pairs, s.trials, derive_seed(seed, "uniform"));
    const SublinearityReport uniform = sublinearity_check(compute_regret(uniform_tr, spec));
    trained_ok += trained.doublings() >= 3 && trained.mean_ratio <= 1.6 ? 1 : 0;
    uniform_ok += uniform.doublings() >= 3 && uniform.mean_ratio >= 1.9 ? 1 : 0;
    trained_ratios += (trained_ratios.empty() ? "" : " ") + fmt(trained.mean_ratio, 3);
    uniform_ratios += (uniform_ratios.empty() ? "" : " ") + fmt(uniform.mean_ratio, 3);
  }
  const double secs = seconds_since(t0);
  return {trained_ok == kSeeds && uniform_ok == kSeeds && secs < 180.0 * kSeeds,
          "K=20000, 4 doublings; trained mean ratio <= 1.6 on " + std::to_string(trained_ok) + "/10 seeds [" +
              trained_ratios + "]; uniform >= 1.9 on " + std::to_string(uniform_ok) + "/10 [" + uniform_ratios +
              "]; " + fmt(secs, 3) + " s (" + fmt(secs / kSeeds, 3) + " s per seed, < 180 s)"};
}

Outcome criterion5() {
  const auto t0 = std::chrono::steady_clock::now();
  SimSetup s;
  // Fixed tau = 1: the bound is stated for unbiased SGD on J at tau = 1.
  s.tau0 = 1.0;
  s.tau_min = 1.0;
  s.snapshot_stride = 8;
  int ok = 0;
  std::string rows;
  for (int seed = 1; seed <= kSeeds; ++seed) {
    SimRun run = run_sim(s, static_cast<std::uint64_t>(seed));
    ConvergenceProbe probe;
    probe.probes = run.train_set;
    probe.env = run.env.get();
    probe.learning_rate = s.learning_rate;
    probe.seed = derive_seed(seed, "convergence");
    const ConvergenceReport r = convergence_report(run.report, probe);
    const bool pass = r.step_size_ok && r.within_bound;
    ok += pass ? 1 : 0;
    rows += "\n      seed " + std::to_string(seed) + ": lhs " + fmt(r.mean_sq_grad) + " bound " + fmt(r.bound) +
            " (+tol " + fmt(r.tolerance) + ") L " + fmt(r.lipschitz) + " eta*L " + fmt(r.lipschitz * r.learning_rate) +
            " sigma2 " + fmt(r.sigma_sq) + (pass ? " ok" : " MISS");
  }
  const double secs = seconds_since(t0);
  return {ok >= 8, std::to_string(ok) + "/10 seeds with eta <= 1/L and lhs <= bound (need >= 8); " + fmt(secs, 3) +
                       " s" + rows};
}

Outcome criterion6() {
  const auto t0 = std::chrono::steady_clock::now();
  SimSetup s;
  s.space = ct::small_space(2, 2, 2);
  s.table = TableKind::additive;
  s.train_questions = 4000;
  int buckets = 0;
  int matched = 0;
  for (int seed = 1; seed <= 10; ++seed) {
    const SimRun run = run_sim(s, static_cast<std::uint64_t>(seed));
    const SimSpec& spec = run.env->spec();
    // A bucket matches when every held-out question in it gets the
    // oracle's triple.
    std::vector<int> seen(spec.bucket_count(), 0);
    std::vector<int> hits(spec.bucket_count(), 0);
    for (const auto& e : run.eval_set) {
      const std::size_t b = spec.bucket_of(e.pair.id);
      ++seen[b];
      hits[b] += greedy(run.report.final_params, e.context) == joint_oracle(spec, b) ? 1 : 0;
    }
    for (std::size_t b = 0; b < spec.bucket_count(); ++b) {
      if (seen[b] == 0) continue;
      ++buckets;
      matched += hits[b] == seen[b] ? 1 : 0;
    }
  }
  return {buckets > 0 && matched == buckets,
          std::to_string(matched) + "/" + std::to_string(buckets) + " buckets over 10 seeds match joint_oracle; " +
              fmt(seconds_since(t0), 3) + " s"};
}

Outcome criterion7() {
  const ActionSpace space = build_default_space();
  const bool ok = space.axis_size(Axis::steps) == 8 && space.axis_size(Axis::temperature) == 11 &&
                  space.axis_size(Axis::instruction) == 100 && space.joint_size() == 8800 &&
                  space.base_instructions().size() == 10 && space.variation_instructions().size() == 10;
  return {ok, "steps " + std::to_string(space.axis_size(Axis::steps)) + ", temperature " +
                  std::to_string(space.axis_size(Axis::temperature)) + ", instructions " +
                  std::to_string(space.axis_size(Axis::instruction)) + ", joint " + std::to_string(space.joint_size())};
}

Outcome criterion8() {
  const std::filesystem::path dir = CONFBANDIT_GOLDEN_DIR;
  const json fixtures = json::parse(ct::read_bytes(dir / "fixtures.json"));
  const ActionSpace space = build_default_space();
  int matched = 0;
  int total = 0;
  std::string misses;
  for (const auto& f : fixtures) {
    const auto name = f.at("name").get<std::string>();
    const ActionTriple triple{f["triple"][0], f["triple"][1], f["triple"][2]};
    const std::string gen = render_generation_prompt(f.at("question").get<std::string>(), space.resolve(triple));
    const std::string judge = render_judge_prompt(f.at("question").get<std::string>(), f.at("reference").get<std::string>(),
                                                  f.at("reasoning").get<std::string>());
    for (const auto& [kind, text] : {std::pair{"generation", gen}, std::pair{"judge", judge}}) {
      ++total;
      if (ct::read_bytes(dir / (std::string(kind) + "_" + name + ".txt")) == text) {
        ++matched;
      } else {
        misses += " " + std::string(kind) + "_" + name;
      }
    }
  }
  return {total == 6 && matched == total,
          std::to_string(matched) + "/" + std::to_string(total) + " golden files byte-identical" +
              (misses.empty() ? "" : "; mismatched:" + misses)};
}

Outcome criterion9() {
  const auto dir = ct::scratch_dir("acceptance-replay");
  json config = {{"seed", 11},
                 {"space", json(ct::small_space(2, 3, 3))},
                 {"simulate", {{"train_questions", 40}, {"eval_questions", 20}}}};
  std::ofstream(dir / "config.json") << config.dump(2);
  std::ostringstream sink;
  cli::SimulateOptions first;
  first.config = dir / "config.json";
  first.out_dir = dir / "first";
  cli::cmd_simulate(first, sink);
  cli::SimulateOptions replay;
  replay.manifest = dir / "first" / "manifest.json";
  replay.out_dir = dir / "replay";
  cli::cmd_simulate(replay, sink);
  bool csv_same = true;
  for (const char* f : {"transitions.csv", "regret.csv"}) {
    const std::string a = ct::read_bytes(dir / "first" / f);
    csv_same = csv_same && !a.empty() && a == ct::read_bytes(dir / "replay" / f);
  }

  // Checkpoint round trip on trained parameters.
  SimSetup s;
  s.train_questions = 20;
  const SimRun run = run_sim(s, 5);
  EmbedderConfig emb;
  const std::string saved = checkpoint_save(run.report.final_params, s.space, emb, json::object());
  const Checkpoint loaded = checkpoint_load(saved);
  const bool params_same = loaded.params == run.report.final_params && loaded.space == s.space;
  const bool file_same = read_checkpoint(dir / "first" / "checkpoint.json").params ==
                         read_checkpoint(dir / "replay" / "checkpoint.json").params;
  return {csv_same && params_same && file_same,
          std::string("replayed CSVs ") + (csv_same ? "byte-identical" : "DIFFER") + "; checkpoint round trip " +
              (params_same ? "bit-exact" : "NOT exact") + "; replayed checkpoints " + (file_same ? "equal" : "DIFFER")};
}

Outcome criterion10() {
  const ActionSpace space = ct::small_space(10, 11, 8);
  int zero_ok = 0;
  int increase_ok = 0;
  int linear_ok = 0;
  constexpr int kCases = 50;
  for (int c = 0; c < kCases; ++c) {
    const PolicyParams start = init_params(space, 32, 900 + c);
    const TrainingExample ex{QAPair{"q" + std::to_string(c), "question", "ref"}, ct::random_context(32, 1900 + c)};
    TrainConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(c);

    PolicyParams p0 = start;
    ct::ConstantEnvironment zero(0.0);
    reinforce_step(p0, ex, zero, cfg, 0, 1.0);
    zero_ok += p0 == start ? 1 : 0;

    PolicyParams p1 = start;
    ct::ConstantEnvironment one(1.0);
    cfg.learning_rate = 1e-4;
    const Transition t = reinforce_step(p1, ex, one, cfg, 0, 1.0);
    increase_ok += ct::reference_log_prob(p1, ex.context, t.triple).log_prob >
                           ct::reference_log_prob(start, ex.context, t.triple).log_prob
                       ? 1
                       : 0;

    // Same sampled triple for every r (same step seed), so deltas compare.
    cfg.learning_rate = 0.01;
    std::vector<Eigen::VectorXd> deltas;
    for (double r : {0.2, 0.5, 1.0}) {
      PolicyParams p = start;
      ct::ConstantEnvironment env(r);
      reinforce_step(p, ex, env, cfg, 0, 1.0);
      deltas.push_back((p.flatten() - start.flatten()) / r);
    }
    const double scale = deltas[2].cwiseAbs().maxCoeff();
    const double dev = std::max((deltas[0] - deltas[2]).cwiseAbs().maxCoeff(), (deltas[1] - deltas[2]).cwiseAbs().maxCoeff());
    linear_ok += scale > 0.0 && dev <= 1e-9 * scale ? 1 : 0;
  }
  return {zero_ok == kCases && increase_ok == kCases && linear_ok == kCases,
          "r=0 unchanged " + std::to_string(zero_ok) + "/50; r=1, eta=1e-4 raises log pi " + std::to_string(increase_ok) +
              "/50; delta/r constant " + std::to_string(linear_ok) + "/50"};
}

}  // namespace

// Optional arguments select criteria by number; no arguments runs all of them.
int main(int argc, char** argv) {
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
      {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4},  {5, criterion5},
      {6, criterion6}, {7, criterion7}, {8, criterion8}, {9, criterion9}, {10, criterion10}};
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failures = 0;
  int ran = 0;
  for (const auto& [id, fn] : criteria) {
    if (!only.empty() && !only.count(id)) continue;
    ++ran;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("criterion %2d: %s  %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", ran - failures, ran);
  return failures == 0 ? 0 : 1;
}
