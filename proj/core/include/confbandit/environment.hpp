#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "confbandit/config_space.hpp"
#include "confbandit/http.hpp"

namespace confbandit {

/// One (question, reference answer) example.
struct QAPair {
  std::string id;
  std::string question;
  std::string reference;
  friend bool operator==(const QAPair&, const QAPair&) = default;
};

enum class RewardSource { sim, scalar_endpoint, binary_judge };

std::string_view reward_source_name(RewardSource source) noexcept;
RewardSource reward_source_from_name(std::string_view name);

struct RewardOutcome {
  double reward = 0.0;  // always in [0, 1]
  std::optional<std::string> raw_answer;
  std::int64_t latency_ms = 0;
  RewardSource source = RewardSource::sim;
};

class SimSpec;

/// Anything that can score a configuration choice for a question.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual RewardOutcome reward(const QAPair& pair, const ActionTriple& triple,
                               std::uint64_t rng_seed) = 0;
  /// Noiseless mean table, when the environment has one.
  virtual const SimSpec* sim_spec() const noexcept { return nullptr; }
};

// ---------------------------------------------------------------------------
// Simulated environment

enum class TableKind {
  dominant,  // one planted arm at 1.0 per bucket, small per-axis partial credit elsewhere
  additive,  // per-axis utilities averaged, planted per-axis optima
};

struct SimConfig {
  std::size_t buckets = 4;
  double noise_sigma = 0.05;
  TableKind table = TableKind::dominant;
  std::uint64_t seed = 0;

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

void to_json(nlohmann::json& j, const SimConfig& config);
void from_json(const nlohmann::json& j, SimConfig& config);

/// Per-bucket mean reward table over the joint action space. Questions map
/// to buckets through a seeded hash of their id.
class SimSpec {
 public:
  SimSpec(ActionSpace space, SimConfig config);

  /// Wraps an explicit table (one row per bucket, |A| entries each, values
  /// in [0, 1]).
  static SimSpec from_table(ActionSpace space, std::vector<std::vector<double>> table,
                            double noise_sigma, std::uint64_t bucket_seed);

  const ActionSpace& space() const noexcept { return space_; }
  const SimConfig& config() const noexcept { return config_; }
  std::size_t bucket_count() const noexcept { return table_.size(); }

  std::size_t bucket_of(std::string_view question_id) const noexcept;
  double mean(std::size_t bucket, const ActionTriple& triple) const;
  double mean_flat(std::size_t bucket, std::size_t flat) const { return table_.at(bucket).at(flat); }
  const std::vector<double>& bucket_table(std::size_t bucket) const { return table_.at(bucket); }

  /// Exhaustive argmax of the bucket's table (lowest flat index on ties).
  ActionTriple optimal_arm(std::size_t bucket) const;
  double optimal_mean(std::size_t bucket) const;

 private:
  SimSpec(ActionSpace space, SimConfig config, std::vector<std::vector<double>> table);
  void derive_optima();

  ActionSpace space_;
  SimConfig config_;
  std::vector<std::vector<double>> table_;
  std::vector<std::size_t> optimal_flat_;
};

/// Mean-table value plus Gaussian noise truncated to +-3 sigma, clamped to
/// [0, 1]. Deterministic for a fixed seed.
RewardOutcome sim_reward(const SimSpec& spec, const QAPair& pair, const ActionTriple& triple,
                         std::uint64_t rng_seed);

class SimEnvironment final : public Environment {
 public:
  explicit SimEnvironment(SimSpec spec) : spec_(std::move(spec)) {}
  RewardOutcome reward(const QAPair& pair, const ActionTriple& triple,
                       std::uint64_t rng_seed) override;
  const SimSpec* sim_spec() const noexcept override { return &spec_; }
  const SimSpec& spec() const noexcept { return spec_; }

 private:
  SimSpec spec_;
};

/// Synthetic questions whose wording depends on their bucket, so hashed
/// embeddings carry the bucket signal. Ids are "<prefix>-<n>".
std::vector<QAPair> generate_sim_questions(const SimSpec& spec, std::size_t count,
                                           std::string_view id_prefix, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Live environment

struct Endpoint {
  std::string url;
  std::string api_key;
};

/// CONFBANDIT_LLM_URL / CONFBANDIT_LLM_KEY.
Endpoint llm_endpoint_from_env();
/// CONFBANDIT_REWARD_URL / CONFBANDIT_REWARD_KEY.
Endpoint reward_endpoint_from_env();

struct GenerationOptions {
  double top_p = 0.1;
  int max_tokens = 5000;
  RetryPolicy retry;
};

/// Chat request body for a single user message.
nlohmann::json chat_request(std::string_view prompt, double temperature,
                            const GenerationOptions& options);

/// Sends the rendered generation prompt; returns the completion text.
/// Throws EnvironmentError on transport failure or an empty completion.
std::string llm_generate(HttpTransport& transport, const Endpoint& endpoint, const QAPair& pair,
                         const RenderedConfig& config, const GenerationOptions& options);

/// "For <q>, the generated answer <answer> matches the ground truth <R> and is correct"
std::string reward_statement(std::string_view question, std::string_view answer,
                             std::string_view reference);

/// POST {"text": statement} -> {"score": x, "score_kind": "logit"|"unit"}.
RewardOutcome score_scalar(HttpTransport& transport, const Endpoint& endpoint, const QAPair& pair,
                           std::string_view answer, const RetryPolicy& retry);

/// The binary-judgment template with {question}, {correct_answer} and
/// {reasoning_process} placeholders.
std::string_view judge_template() noexcept;
std::string render_judge_prompt(std::string_view question, std::string_view correct_answer,
                                std::string_view reasoning_process);

/// Extracts the Yes/No verdict from a judge reply (code fences tolerated).
/// Returns nullopt when the reply holds no usable verdict.
std::optional<bool> parse_judgment(std::string_view reply);

/// Asks the judge (chat protocol); re-asks once on an unusable reply.
RewardOutcome score_binary_judge(HttpTransport& transport, const Endpoint& endpoint,
                                 const QAPair& pair, std::string_view answer,
                                 const GenerationOptions& options);

enum class ScoringMode { scalar, judge };

/// Generates with the chat endpoint, then scores the answer.
class LiveEnvironment final : public Environment {
 public:
  LiveEnvironment(ActionSpace space, HttpTransport& transport, Endpoint llm, Endpoint reward,
                  ScoringMode mode, GenerationOptions options = {},
                  std::ostream* transcript = nullptr);

  RewardOutcome reward(const QAPair& pair, const ActionTriple& triple,
                       std::uint64_t rng_seed) override;

 private:
  ActionSpace space_;
  HttpTransport& transport_;
  Endpoint llm_;
  Endpoint reward_;
  ScoringMode mode_;
  GenerationOptions options_;
  std::ostream* transcript_;
};

}  // namespace confbandit
