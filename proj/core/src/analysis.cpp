#include "confbandit/analysis.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>

#include <nlohmann/json.hpp>

#include "confbandit/errors.hpp"
#include "confbandit/seeding.hpp"

namespace confbandit {
namespace {

void require_sim(const Transition& t) {
  if (t.source != RewardSource::sim) {
    throw UnsupportedError("regret needs a mean table; step " + std::to_string(t.step) +
                           " came from " + std::string(reward_source_name(t.source)));
  }
}

// E[clamp(mu + sigma Z, 0, 1)^2] for Z ~ N(0, 1) truncated to [-3, 3].
double reward_second_moment(double mu, double sigma) {
  if (sigma <= 0.0) return mu * mu;
  constexpr int kIntervals = 600;  // even, for Simpson
  const double h = 6.0 / kIntervals;
  double num = 0.0;
  double den = 0.0;
  for (int i = 0; i <= kIntervals; ++i) {
    const double z = -3.0 + h * i;
    const double w = (i == 0 || i == kIntervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    const double density = std::exp(-0.5 * z * z);
    const double r = std::clamp(mu + sigma * z, 0.0, 1.0);
    num += w * density * r * r;
    den += w * density;
  }
  return num / den;
}

void require_small(const ActionSpace& space) {
  if (space.joint_size() > kJointOracleLimit) {
    throw ValidationError("exhaustive evaluation needs |A| <= " + std::to_string(kJointOracleLimit) +
                          ", got " + std::to_string(space.joint_size()));
  }
}

PolicyParams perturbed(const PolicyParams& base, double scale, Rng& rng) {
  PolicyParams out = base;
  out.for_each_block([&](Eigen::Map<Eigen::VectorXd> block) {
    for (Eigen::Index i = 0; i < block.size(); ++i) block[i] += scale * standard_normal(rng);
  });
  return out;
}

double distance(const PolicyParams& a, const PolicyParams& b) {
  return (a.flatten() - b.flatten()).norm();
}

// --- CSV helpers -----------------------------------------------------------

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  if (quoted) throw FormatError("unterminated quote in CSV line");
  return fields;
}

double parse_double(const std::string& s, std::string_view column) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw FormatError("CSV column " + std::string(column) + ": not a number: '" + s + "'");
  }
  return v;
}

std::uint64_t parse_uint(const std::string& s, std::string_view column) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw FormatError("CSV column " + std::string(column) + ": not an integer: '" + s + "'");
  }
  return v;
}

// Reads the header and checks it; returns data rows split into fields.
std::vector<std::vector<std::string>> read_csv(std::istream& in, const std::vector<std::string_view>& header) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("CSV input is empty");
  const auto got = split_csv_line(line);
  if (!std::equal(got.begin(), got.end(), header.begin(), header.end())) {
    throw FormatError("unexpected CSV header: " + line);
  }
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw FormatError("CSV row has " + std::to_string(fields.size()) + " fields, expected " +
                        std::to_string(header.size()));
    }
    rows.push_back(std::move(fields));
  }
  return rows;
}

const std::vector<std::string_view> kTransitionHeader = {
    "k",    "question_id", "instruction",      "temperature",      "steps",        "tau",
    "reward", "logp_instruction", "logp_temperature", "logp_steps", "grad_sq_norm", "source"};
const std::vector<std::string_view> kStepHeader = {"k", "tau", "reward", "regret", "cum_regret",
                                                   "grad_sq_norm"};

template <typename Range>
std::string join_header(const Range& header) {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i > 0) out += ',';
    out += header[i];
  }
  return out;
}

}  // namespace

RegretTrace compute_regret(std::span<const Transition> transitions, const SimSpec& spec) {
  RegretTrace trace;
  const ActionSpace& space = spec.space();
  trace.arm_count = space.joint_size();
  trace.pulls.assign(trace.arm_count, 0);
  trace.instantaneous.reserve(transitions.size());
  trace.cumulative.reserve(transitions.size());
  double total = 0.0;
  for (const Transition& t : transitions) {
    require_sim(t);
    const std::size_t bucket = spec.bucket_of(t.question_id);
    const double delta = spec.optimal_mean(bucket) - spec.mean(bucket, t.triple);
    total += delta;
    trace.instantaneous.push_back(delta);
    trace.cumulative.push_back(total);
    ++trace.pulls[space.flat_index(t.triple)];
  }
  return trace;
}

RegretTrace compute_regret(std::span<const Transition> transitions, const Environment& env) {
  const SimSpec* spec = env.sim_spec();
  if (spec == nullptr) throw UnsupportedError("regret is defined only for simulated environments");
  return compute_regret(transitions, *spec);
}

std::vector<Transition> uniform_policy_run(const SimSpec& spec, std::span<const QAPair> questions,
                                           std::size_t trials, std::uint64_t seed) {
  const ActionSpace& space = spec.space();
  std::vector<Transition> out;
  out.reserve(questions.size() * trials);
  std::uint64_t step = 0;
  for (const QAPair& q : questions) {
    for (std::size_t t = 0; t < trials; ++t, ++step) {
      Rng rng(derive_seed(seed, "uniform-policy", step));
      const auto flat = static_cast<std::size_t>(unit_uniform(rng) * static_cast<double>(space.joint_size()));
      Transition tr;
      tr.question_id = q.id;
      tr.triple = space.from_flat(flat);
      tr.reward = sim_reward(spec, q, tr.triple, derive_seed(seed, "uniform-reward", step)).reward;
      for (Axis axis : kAxes) {
        tr.logp[static_cast<std::size_t>(axis)] = -std::log(static_cast<double>(space.axis_size(axis)));
      }
      tr.step = step;
      out.push_back(std::move(tr));
    }
  }
  return out;
}

SublinearityReport sublinearity_check(const RegretTrace& trace) {
  const std::size_t k = trace.steps();
  if (k < kMinSublinearityHorizon) {
    throw ValidationError("sublinearity check needs at least " + std::to_string(kMinSublinearityHorizon) +
                          " steps, got " + std::to_string(k));
  }
  // Up to four doublings, never letting the smallest prefix drop below 125.
  const auto depth = std::min<std::size_t>(
      4, static_cast<std::size_t>(std::floor(std::log2(static_cast<double>(k) / 125.0))));
  SublinearityReport report;
  for (std::size_t j = depth + 1; j-- > 0;) report.prefixes.push_back(k >> j);
  const auto cum = [&](std::size_t prefix) { return trace.cumulative[prefix - 1]; };
  for (std::size_t i = 0; i + 1 < report.prefixes.size(); ++i) {
    const double lo = cum(report.prefixes[i]);
    const double hi = cum(report.prefixes[i + 1]);
    double ratio = 0.0;
    if (lo > 0.0) {
      ratio = hi / lo;
    } else {
      ratio = hi > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
    }
    report.ratios.push_back(ratio);
  }
  report.mean_ratio =
      std::accumulate(report.ratios.begin(), report.ratios.end(), 0.0) / static_cast<double>(report.ratios.size());

  const double arms = static_cast<double>(trace.arm_count);
  const double scale = arms > 1.0 ? arms * std::log(arms) : 0.0;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t p : report.prefixes) {
    const double x = std::sqrt(static_cast<double>(p) * scale);
    sxy += x * cum(p);
    sxx += x * x;
  }
  report.fitted_c = sxx > 0.0 ? sxy / sxx : 0.0;
  report.sublinear = report.doublings() >= 3 && report.mean_ratio <= kSublinearRatioThreshold;
  return report;
}

double exact_objective(const PolicyParams& params, std::span<const TrainingExample> probes,
                       const SimSpec& spec) {
  if (probes.empty()) throw ValidationError("need at least one probe question");
  const ActionSpace& space = spec.space();
  require_small(space);
  double total = 0.0;
  for (const auto& probe : probes) {
    const std::size_t bucket = spec.bucket_of(probe.pair.id);
    const PolicyOutput out = forward(params, probe.context);
    for (std::size_t flat = 0; flat < space.joint_size(); ++flat) {
      const ActionTriple a = space.from_flat(flat);
      double p = 1.0;
      for (Axis axis : kAxes) p *= out.head(axis).probabilities[static_cast<Eigen::Index>(a[axis])];
      total += p * spec.mean_flat(bucket, flat);
    }
  }
  return total / static_cast<double>(probes.size());
}

PolicyGradient exact_objective_gradient(const PolicyParams& params,
                                        std::span<const TrainingExample> probes, const SimSpec& spec) {
  if (probes.empty()) throw ValidationError("need at least one probe question");
  require_small(spec.space());
  PolicyGradient total = params.zeros_like();
  for (const auto& probe : probes) {
    const std::size_t bucket = spec.bucket_of(probe.pair.id);
    total.add_scaled(expected_gradient(params, probe.context, spec.space(),
                                       [&](const ActionTriple& a) { return spec.mean(bucket, a); }),
                     1.0);
  }
  total.add_scaled(total, 1.0 / static_cast<double>(probes.size()) - 1.0);
  return total;
}

ConvergenceReport convergence_report(const TrainReport& report, const ConvergenceProbe& probe) {
  if (probe.env == nullptr) throw ValidationError("convergence report needs a simulated environment");
  if (report.snapshots.size() < 2) throw ValidationError("convergence report needs parameter snapshots");
  if (probe.probes.empty()) throw ValidationError("need at least one probe question");
  const SimSpec& spec = probe.env->spec();
  const ActionSpace& space = spec.space();
  require_small(space);

  ConvergenceReport out;
  out.steps = report.transitions.size();
  out.learning_rate = probe.learning_rate;
  const double eta = probe.learning_rate;
  const double k = static_cast<double>(out.steps);

  // Snapshots taken before the update of step s, for s < K.
  std::vector<const ParamSnapshot*> trajectory;
  for (const auto& snap : report.snapshots) {
    if (snap.step < out.steps) trajectory.push_back(&snap);
  }
  if (trajectory.empty()) throw ValidationError("no snapshot precedes the final step");

  std::vector<double> sq_norms;
  sq_norms.reserve(trajectory.size());
  for (const auto* snap : trajectory) {
    sq_norms.push_back(exact_objective_gradient(snap->params, probe.probes, spec).squared_norm());
  }
  const double n_snap = static_cast<double>(sq_norms.size());
  out.mean_sq_grad = std::accumulate(sq_norms.begin(), sq_norms.end(), 0.0) / n_snap;
  if (sq_norms.size() < out.steps && sq_norms.size() > 1) {
    double ss = 0.0;
    for (double v : sq_norms) ss += (v - out.mean_sq_grad) * (v - out.mean_sq_grad);
    out.mean_sq_grad_stderr = std::sqrt(ss / (n_snap - 1.0) / n_snap);
  }
  if (!report.gradient_sq_norm_curve.empty()) {
    out.recorded_sq_grad = std::accumulate(report.gradient_sq_norm_curve.begin(),
                                           report.gradient_sq_norm_curve.end(), 0.0) /
                           static_cast<double>(report.gradient_sq_norm_curve.size());
  }

  double j_star = 0.0;
  for (const auto& p : probe.probes) j_star += spec.optimal_mean(spec.bucket_of(p.pair.id));
  out.j_star = j_star / static_cast<double>(probe.probes.size());
  const ObjectiveEstimate j0 = estimate_objective(trajectory.front()->params, probe.probes, *probe.env,
                                                  probe.objective_samples, derive_seed(probe.seed, "j0"));
  out.j0 = j0.mean;
  out.j0_stderr = j0.std_error;

  // L-hat: alternate random pairs around a snapshot with consecutive
  // snapshot pairs along the trajectory.
  for (std::size_t i = 0; i < probe.lipschitz_pairs; ++i) {
    Rng rng(derive_seed(probe.seed, "lipschitz", i));
    const auto s = static_cast<std::size_t>(unit_uniform(rng) * static_cast<double>(trajectory.size()));
    PolicyParams a;
    PolicyParams b;
    if (i % 2 == 1 && s + 1 < report.snapshots.size()) {
      a = trajectory[s]->params;
      const auto next = std::find_if(report.snapshots.begin(), report.snapshots.end(),
                                     [&](const ParamSnapshot& snap) { return snap.step > trajectory[s]->step; });
      b = next->params;
    } else {
      a = perturbed(trajectory[s]->params, probe.perturbation, rng);
      b = perturbed(trajectory[s]->params, probe.perturbation, rng);
    }
    const double dist = distance(a, b);
    if (dist == 0.0) continue;
    PolicyGradient diff = exact_objective_gradient(a, probe.probes, spec);
    diff.add_scaled(exact_objective_gradient(b, probe.probes, spec), -1.0);
    out.lipschitz = std::max(out.lipschitz, std::sqrt(diff.squared_norm()) / dist);
  }

  // sigma-hat^2 = max over evenly spaced snapshots of E||g||^2 - ||grad J||^2
  // with g = r grad log pi(a|q), q uniform over probes, a ~ pi, r ~ table + noise.
  std::map<std::pair<std::size_t, std::size_t>, double> second_moment;
  const double sigma = spec.config().noise_sigma;
  const std::size_t picks = std::min(probe.variance_snapshots, trajectory.size());
  for (std::size_t i = 0; i < picks; ++i) {
    const std::size_t idx = picks == 1 ? 0 : i * (trajectory.size() - 1) / (picks - 1);
    const PolicyParams& params = trajectory[idx]->params;
    double e_sq = 0.0;
    for (const auto& p : probe.probes) {
      const std::size_t bucket = spec.bucket_of(p.pair.id);
      const PolicyOutput fwd = forward(params, p.context);
      for (std::size_t flat = 0; flat < space.joint_size(); ++flat) {
        const ActionTriple a = space.from_flat(flat);
        double prob = 1.0;
        for (Axis axis : kAxes) prob *= fwd.head(axis).probabilities[static_cast<Eigen::Index>(a[axis])];
        auto [it, fresh] = second_moment.try_emplace({bucket, flat}, 0.0);
        if (fresh) it->second = reward_second_moment(spec.mean_flat(bucket, flat), sigma);
        if (it->second == 0.0 || prob == 0.0) continue;
        e_sq += prob * it->second * grad_log_prob(params, p.context, a).squared_norm();
      }
    }
    e_sq /= static_cast<double>(probe.probes.size());
    out.sigma_sq = std::max(out.sigma_sq, std::max(0.0, e_sq - sq_norms[idx]));
  }

  out.optimality_term = 2.0 * (out.j_star - out.j0) / (eta * k);
  out.noise_term = out.lipschitz * eta * out.sigma_sq;
  out.bound = out.optimality_term + out.noise_term;
  out.tolerance = 2.0 * (2.0 * out.j0_stderr) / (eta * k) + 2.0 * out.mean_sq_grad_stderr;
  out.step_size_ok = out.lipschitz * eta <= 1.0;
  out.within_bound = out.mean_sq_grad <= out.bound + out.tolerance;
  return out;
}

ActionStats action_stats(std::span<const ActionTriple> decisions, const ActionSpace& space,
                         std::size_t top_n) {
  if (decisions.empty()) throw ValidationError("action statistics need at least one decision");
  ActionStats stats;
  for (Axis axis : kAxes) stats.histograms[static_cast<std::size_t>(axis)].assign(space.axis_size(axis), 0);
  double steps_sum = 0.0;
  double temp_sum = 0.0;
  for (const auto& d : decisions) {
    space.check(d);
    for (Axis axis : kAxes) ++stats.histograms[static_cast<std::size_t>(axis)][d[axis]];
    steps_sum += space.steps_values()[d.steps_index];
    temp_sum += space.temperature_values()[d.temperature_index];
  }
  const auto n = static_cast<double>(decisions.size());
  stats.decisions = decisions.size();
  stats.steps_mean = steps_sum / n;
  stats.temperature_mean = temp_sum / n;
  double steps_ss = 0.0;
  double temp_ss = 0.0;
  for (const auto& d : decisions) {
    const double ds = space.steps_values()[d.steps_index] - stats.steps_mean;
    const double dt = space.temperature_values()[d.temperature_index] - stats.temperature_mean;
    steps_ss += ds * ds;
    temp_ss += dt * dt;
  }
  stats.steps_std = std::sqrt(steps_ss / n);
  stats.temperature_std = std::sqrt(temp_ss / n);

  const auto& hist = stats.histograms[static_cast<std::size_t>(Axis::instruction)];
  for (std::size_t i = 0; i < hist.size(); ++i) {
    if (hist[i] > 0) stats.top_instructions.emplace_back(i, hist[i]);
  }
  std::stable_sort(stats.top_instructions.begin(), stats.top_instructions.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (stats.top_instructions.size() > top_n) stats.top_instructions.resize(top_n);
  return stats;
}

ActionStats action_stats(std::span<const Transition> transitions, const ActionSpace& space,
                         std::size_t top_n) {
  std::vector<ActionTriple> decisions;
  decisions.reserve(transitions.size());
  for (const auto& t : transitions) decisions.push_back(t.triple);
  return action_stats(decisions, space, top_n);
}

ActionTriple joint_oracle(const SimSpec& spec, std::size_t bucket) {
  require_small(spec.space());
  const auto& row = spec.bucket_table(bucket);
  std::size_t best = 0;
  for (std::size_t flat = 1; flat < row.size(); ++flat) {
    if (row[flat] > row[best]) best = flat;
  }
  return spec.space().from_flat(best);
}

std::vector<ActionTriple> joint_oracle(const SimSpec& spec, std::span<const QAPair> questions) {
  require_small(spec.space());
  std::vector<ActionTriple> out;
  out.reserve(questions.size());
  for (const auto& q : questions) out.push_back(joint_oracle(spec, spec.bucket_of(q.id)));
  return out;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_transitions_csv(std::ostream& out, std::span<const Transition> transitions) {
  out << join_header(kTransitionHeader) << '\n';
  for (const auto& t : transitions) {
    out << t.step << ',' << csv_field(t.question_id) << ',' << t.triple.instruction_index << ','
        << t.triple.temperature_index << ',' << t.triple.steps_index << ',' << format_number(t.tau_used)
        << ',' << format_number(t.reward) << ',' << format_number(t.logp[0]) << ','
        << format_number(t.logp[1]) << ',' << format_number(t.logp[2]) << ','
        << format_number(t.grad_sq_norm) << ',' << reward_source_name(t.source) << '\n';
  }
}

std::vector<Transition> read_transitions_csv(std::istream& in) {
  std::vector<Transition> out;
  for (const auto& f : read_csv(in, kTransitionHeader)) {
    Transition t;
    t.step = parse_uint(f[0], "k");
    t.question_id = f[1];
    t.triple.instruction_index = parse_uint(f[2], "instruction");
    t.triple.temperature_index = parse_uint(f[3], "temperature");
    t.triple.steps_index = parse_uint(f[4], "steps");
    t.tau_used = parse_double(f[5], "tau");
    t.reward = parse_double(f[6], "reward");
    t.logp = {parse_double(f[7], "logp_instruction"), parse_double(f[8], "logp_temperature"),
              parse_double(f[9], "logp_steps")};
    t.grad_sq_norm = parse_double(f[10], "grad_sq_norm");
    t.source = reward_source_from_name(f[11]);
    out.push_back(std::move(t));
  }
  return out;
}

void write_step_csv(std::ostream& out, std::span<const Transition> transitions,
                    const RegretTrace* regret) {
  if (regret != nullptr && regret->steps() != transitions.size()) {
    throw ValidationError("regret trace and transitions differ in length");
  }
  out << join_header(kStepHeader) << '\n';
  for (std::size_t i = 0; i < transitions.size(); ++i) {
    const auto& t = transitions[i];
    out << t.step << ',' << format_number(t.tau_used) << ',' << format_number(t.reward) << ',';
    if (regret != nullptr) {
      out << format_number(regret->instantaneous[i]) << ',' << format_number(regret->cumulative[i]);
    } else {
      out << ',';
    }
    out << ',' << format_number(t.grad_sq_norm) << '\n';
  }
}

std::vector<StepRow> read_step_csv(std::istream& in) {
  std::vector<StepRow> out;
  for (const auto& f : read_csv(in, kStepHeader)) {
    StepRow row;
    row.k = parse_uint(f[0], "k");
    row.tau = parse_double(f[1], "tau");
    row.reward = parse_double(f[2], "reward");
    if (!f[3].empty()) row.regret = parse_double(f[3], "regret");
    if (!f[4].empty()) row.cum_regret = parse_double(f[4], "cum_regret");
    row.grad_sq_norm = parse_double(f[5], "grad_sq_norm");
    out.push_back(row);
  }
  return out;
}

void to_json(nlohmann::json& j, const SublinearityReport& r) {
  nlohmann::json ratios = nlohmann::json::array();
  for (double v : r.ratios) ratios.push_back(std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr));
  j = nlohmann::json{{"prefixes", r.prefixes},
                     {"doubling_ratios", ratios},
                     {"mean_ratio", std::isfinite(r.mean_ratio) ? nlohmann::json(r.mean_ratio) : nlohmann::json(nullptr)},
                     {"fitted_c", r.fitted_c},
                     {"threshold", kSublinearRatioThreshold},
                     {"sublinear", r.sublinear}};
}

void to_json(nlohmann::json& j, const ConvergenceReport& r) {
  j = nlohmann::json{{"steps", r.steps},
                     {"learning_rate", r.learning_rate},
                     {"mean_sq_grad", r.mean_sq_grad},
                     {"mean_sq_grad_stderr", r.mean_sq_grad_stderr},
                     {"recorded_sq_grad", r.recorded_sq_grad},
                     {"j_star", r.j_star},
                     {"j0", r.j0},
                     {"j0_stderr", r.j0_stderr},
                     {"lipschitz", r.lipschitz},
                     {"sigma_sq", r.sigma_sq},
                     {"optimality_term", r.optimality_term},
                     {"noise_term", r.noise_term},
                     {"bound", r.bound},
                     {"tolerance", r.tolerance},
                     {"step_size_ok", r.step_size_ok},
                     {"within_bound", r.within_bound}};
}

void to_json(nlohmann::json& j, const ActionStats& s) {
  nlohmann::json top = nlohmann::json::array();
  for (const auto& [index, count] : s.top_instructions) top.push_back({{"instruction", index}, {"count", count}});
  j = nlohmann::json{{"decisions", s.decisions},
                     {"histograms",
                      {{"instruction", s.histograms[0]},
                       {"temperature", s.histograms[1]},
                       {"steps", s.histograms[2]}}},
                     {"steps_mean", s.steps_mean},
                     {"steps_std", s.steps_std},
                     {"temperature_mean", s.temperature_mean},
                     {"temperature_std", s.temperature_std},
                     {"top_instructions", top}};
}

void write_text_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

}  // namespace confbandit
