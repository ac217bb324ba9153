#include "confbandit/environment.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdlib>

#include <nlohmann/json.hpp>

#include "confbandit/embedder.hpp"
#include "confbandit/errors.hpp"
#include "confbandit/seeding.hpp"
#include "confbandit/templates.hpp"

namespace confbandit {
namespace {

constexpr std::string_view kJudgeTemplate =
    "Assess with rigorous precision whether the provided reasoning process matches the "
    "ground truth answer.\n"
    "\n"
    "For a given option and response, you need to match the content of the option and "
    "response. You must not rely on the option index only, as in many cases, the index is "
    "actually incorrect.\n"
    "\n"
    "Apply these criteria for judgment and carefully consider:\n"
    "\n"
    "Mandatory Evaluation Criteria\n"
    "1. Content Equivalence: Accept only fully equivalent numerical representations (e.g., "
    "0.5, 50%, 1/2) and variations in units or notation when they completely match the "
    "ground truth.\n"
    "2. Logical Inference: Verify that at least one reasoning step directly and logically "
    "deduces the entire correct answer in a mathematically or logically sound manner.\n"
    "3. Substantive Matching: For multiple-choice questions, assess the complete content of "
    "the answer (e.g., ensure \"Option B\" is fully equivalent to the correct answer, not "
    "just matching the label).\n"
    "4. Semantic and Methodological Equivalence: Recognize alternative phrasing or solution "
    "methods only if a single step unambiguously converges on the complete correct answer.\n"
    "5. Scientific and Technical Rigor: In technical contexts, differences in terminology, "
    "notation, or intermediate steps are acceptable only when they lead clearly and entirely "
    "to the correct conclusion.\n"
    "\n"
    "Using the criteria outlined above, determine whether any single rule is met--if so, the "
    "response is considered a match.\n"
    "\n"
    "Question\n"
    "{question}\n"
    "\n"
    "Ground Truth Answer\n"
    "{correct_answer}\n"
    "\n"
    "Provided Reasoning\n"
    "{reasoning_process}\n"
    "\n"
    "Provide your final judgment as a JSON object with the following structure:\n"
    "\n"
    "{\n"
    "  \"judge_explanation\": \"<brief explanation>\",\n"
    "  \"result\": \"<Yes or No>\"\n"
    "}\n"
    "\n"
    "Make sure you output JSON in plain text, not as code format.";

constexpr std::array<std::string_view, 8> kFillerWords = {"what", "is",  "the",   "value",
                                                         "of",   "how", "which", "given"};
constexpr std::size_t kSubjectWords = 3;
constexpr std::size_t kPoolWords = 6;
constexpr std::size_t kPoolDraws = 3;

std::size_t count_matches(const ActionTriple& a, const ActionTriple& b) {
  std::size_t m = 0;
  for (Axis axis : kAxes) m += a[axis] == b[axis] ? 1 : 0;
  return m;
}

ActionTriple random_triple(const ActionSpace& space, Rng& rng) {
  ActionTriple t;
  for (Axis axis : kAxes) {
    t[axis] = static_cast<std::size_t>(unit_uniform(rng) * static_cast<double>(space.axis_size(axis)));
  }
  return t;
}

std::vector<std::vector<double>> build_table(const ActionSpace& space, const SimConfig& config) {
  if (config.buckets == 0) throw ValidationError("simulation needs at least one bucket");
  Rng rng(derive_seed(config.seed, "sim-table"));
  std::vector<std::vector<double>> table(config.buckets, std::vector<double>(space.joint_size()));
  for (auto& row : table) {
    const ActionTriple planted = random_triple(space, rng);
    if (config.table == TableKind::dominant) {
      for (std::size_t flat = 0; flat < row.size(); ++flat) {
        const ActionTriple a = space.from_flat(flat);
        // Partial credit per matching axis keeps every other arm <= 0.18.
        const double jitter = 0.02 * unit_uniform(rng);
        row[flat] = a == planted ? 1.0 : 0.08 * static_cast<double>(count_matches(a, planted)) + jitter;
      }
    } else {
      // 0/1 utility per axis: an arm's mean is the fraction of axes it gets right.
      std::array<std::vector<double>, 3> utility;
      for (Axis axis : kAxes) {
        auto& u = utility[static_cast<std::size_t>(axis)];
        u.assign(space.axis_size(axis), 0.0);
        u[planted[axis]] = 1.0;
      }
      for (std::size_t flat = 0; flat < row.size(); ++flat) {
        const ActionTriple a = space.from_flat(flat);
        row[flat] = (utility[0][a.instruction_index] + utility[1][a.temperature_index] +
                     utility[2][a.steps_index]) /
                    3.0;
      }
    }
  }
  return table;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string chat_content(const nlohmann::json& reply, std::string_view what) {
  try {
    if (reply.contains("content")) return reply.at("content").get<std::string>();
    // OpenAI-compatible servers.
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string(what) + ": reply lacks content: " + e.what());
  }
}

std::string env_or_empty(const char* name) {
  const char* v = std::getenv(name);
  return v == nullptr ? std::string() : std::string(v);
}

std::int64_t elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace

std::string_view reward_source_name(RewardSource source) noexcept {
  switch (source) {
    case RewardSource::sim: return "sim";
    case RewardSource::scalar_endpoint: return "scalar_endpoint";
    case RewardSource::binary_judge: return "binary_judge";
  }
  return "unknown";
}

RewardSource reward_source_from_name(std::string_view name) {
  if (name == "sim") return RewardSource::sim;
  if (name == "scalar_endpoint") return RewardSource::scalar_endpoint;
  if (name == "binary_judge") return RewardSource::binary_judge;
  throw FormatError("unknown reward source '" + std::string(name) + "'");
}

void to_json(nlohmann::json& j, const SimConfig& config) {
  j = nlohmann::json{{"buckets", config.buckets},
                     {"noise_sigma", config.noise_sigma},
                     {"table", config.table == TableKind::dominant ? "dominant" : "additive"},
                     {"seed", config.seed}};
}

void from_json(const nlohmann::json& j, SimConfig& config) {
  config.buckets = j.value("buckets", config.buckets);
  config.noise_sigma = j.value("noise_sigma", config.noise_sigma);
  const auto table = j.value("table", std::string("dominant"));
  if (table == "dominant") {
    config.table = TableKind::dominant;
  } else if (table == "additive") {
    config.table = TableKind::additive;
  } else {
    throw FormatError("unknown simulation table kind '" + table + "'");
  }
  config.seed = j.value("seed", config.seed);
}

SimSpec::SimSpec(ActionSpace space, SimConfig config)
    : space_(std::move(space)), config_(config), table_(build_table(space_, config_)) {
  if (!(config_.noise_sigma >= 0.0)) throw ValidationError("noise_sigma must be >= 0");
  derive_optima();
}

SimSpec::SimSpec(ActionSpace space, SimConfig config, std::vector<std::vector<double>> table)
    : space_(std::move(space)), config_(config), table_(std::move(table)) {
  derive_optima();
}

SimSpec SimSpec::from_table(ActionSpace space, std::vector<std::vector<double>> table,
                            double noise_sigma, std::uint64_t bucket_seed) {
  if (table.empty()) throw ValidationError("mean table needs at least one bucket");
  if (!(noise_sigma >= 0.0)) throw ValidationError("noise_sigma must be >= 0");
  for (const auto& row : table) {
    if (row.size() != space.joint_size()) {
      throw ValidationError("mean table row does not cover the joint action space");
    }
    for (double v : row) {
      if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("mean rewards must lie in [0, 1]");
    }
  }
  SimConfig config;
  config.buckets = table.size();
  config.noise_sigma = noise_sigma;
  config.seed = bucket_seed;
  return SimSpec(std::move(space), config, std::move(table));
}

void SimSpec::derive_optima() {
  optimal_flat_.clear();
  for (const auto& row : table_) {
    optimal_flat_.push_back(static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin()));
  }
}

std::size_t SimSpec::bucket_of(std::string_view question_id) const noexcept {
  return static_cast<std::size_t>(feature_hash(question_id, derive_seed(config_.seed, "bucket")) %
                                  table_.size());
}

double SimSpec::mean(std::size_t bucket, const ActionTriple& triple) const {
  return table_.at(bucket)[space_.flat_index(triple)];
}

ActionTriple SimSpec::optimal_arm(std::size_t bucket) const {
  return space_.from_flat(optimal_flat_.at(bucket));
}

double SimSpec::optimal_mean(std::size_t bucket) const {
  return table_.at(bucket)[optimal_flat_.at(bucket)];
}

RewardOutcome sim_reward(const SimSpec& spec, const QAPair& pair, const ActionTriple& triple,
                         std::uint64_t rng_seed) {
  const double mu = spec.mean(spec.bucket_of(pair.id), triple);
  double noise = 0.0;
  const double sigma = spec.config().noise_sigma;
  if (sigma > 0.0) {
    Rng rng(rng_seed);
    do {
      noise = standard_normal(rng);
    } while (std::abs(noise) > 3.0);
    noise *= sigma;
  }
  return RewardOutcome{std::clamp(mu + noise, 0.0, 1.0), std::nullopt, 0, RewardSource::sim};
}

RewardOutcome SimEnvironment::reward(const QAPair& pair, const ActionTriple& triple,
                                     std::uint64_t rng_seed) {
  return sim_reward(spec_, pair, triple, rng_seed);
}

std::vector<QAPair> generate_sim_questions(const SimSpec& spec, std::size_t count,
                                           std::string_view id_prefix, std::uint64_t seed) {
  // Topic vocabularies depend only on the table seed so every split of one
  // simulation shares them. Each bucket has a fixed subject phrase plus a
  // pool of related words; questions mix both with a little filler.
  Rng vocab_rng(derive_seed(spec.config().seed, "sim-vocabulary"));
  std::vector<std::vector<std::string>> vocab(spec.bucket_count());
  for (auto& words : vocab) {
    while (words.size() < kSubjectWords + kPoolWords) {
      std::string w;
      const std::size_t len = 5 + static_cast<std::size_t>(unit_uniform(vocab_rng) * 4.0);
      for (std::size_t c = 0; c < len; ++c) {
        w += static_cast<char>('a' + static_cast<int>(unit_uniform(vocab_rng) * 26.0));
      }
      words.push_back(std::move(w));
    }
  }
  Rng rng(seed);
  std::vector<QAPair> out;
  out.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    QAPair pair;
    pair.id = std::string(id_prefix) + "-" + std::to_string(n);
    const auto& words = vocab[spec.bucket_of(pair.id)];
    std::string q(kFillerWords[static_cast<std::size_t>(unit_uniform(rng) * kFillerWords.size())]);
    for (std::size_t i = 0; i < kSubjectWords; ++i) q.append(" ").append(words[i]);
    for (std::size_t i = 0; i < kPoolDraws; ++i) {
      const auto pick = kSubjectWords + static_cast<std::size_t>(unit_uniform(rng) * static_cast<double>(kPoolWords));
      q.append(" ").append(words[pick]);
    }
    pair.question = std::move(q);
    pair.reference = "answer " + std::to_string(n);
    out.push_back(std::move(pair));
  }
  return out;
}

Endpoint llm_endpoint_from_env() {
  return Endpoint{env_or_empty("CONFBANDIT_LLM_URL"), env_or_empty("CONFBANDIT_LLM_KEY")};
}

Endpoint reward_endpoint_from_env() {
  return Endpoint{env_or_empty("CONFBANDIT_REWARD_URL"), env_or_empty("CONFBANDIT_REWARD_KEY")};
}

nlohmann::json chat_request(std::string_view prompt, double temperature,
                            const GenerationOptions& options) {
  return nlohmann::json{
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", std::string(prompt)}}})},
      {"temperature", temperature},
      {"top_p", options.top_p},
      {"max_tokens", options.max_tokens}};
}

std::string llm_generate(HttpTransport& transport, const Endpoint& endpoint, const QAPair& pair,
                         const RenderedConfig& config, const GenerationOptions& options) {
  const std::string prompt = render_generation_prompt(pair.question, config);
  const auto reply = post_json(transport, endpoint.url, chat_request(prompt, config.temperature, options),
                               endpoint.api_key, options.retry, "LLM endpoint");
  std::string content = chat_content(reply, "LLM endpoint");
  if (trim(content).empty()) throw EnvironmentError("LLM endpoint returned an empty completion");
  return content;
}

std::string reward_statement(std::string_view question, std::string_view answer,
                             std::string_view reference) {
  std::string s = "For ";
  s.append(question).append(", the generated answer ").append(answer);
  s.append(" matches the ground truth ").append(reference).append(" and is correct");
  return s;
}

RewardOutcome score_scalar(HttpTransport& transport, const Endpoint& endpoint, const QAPair& pair,
                           std::string_view answer, const RetryPolicy& retry) {
  const auto start = std::chrono::steady_clock::now();
  const auto reply =
      post_json(transport, endpoint.url,
                {{"text", reward_statement(pair.question, answer, pair.reference)}},
                endpoint.api_key, retry, "reward endpoint");
  double score = 0.0;
  std::string kind = "unit";
  try {
    score = reply.at("score").get<double>();
    kind = reply.value("score_kind", kind);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("reward endpoint: ") + e.what());
  }
  if (!std::isfinite(score)) throw FormatError("reward endpoint returned a non-finite score");
  double reward = 0.0;
  if (kind == "logit") {
    reward = 1.0 / (1.0 + std::exp(-score));
  } else if (kind == "unit") {
    reward = std::clamp(score, 0.0, 1.0);
  } else {
    throw FormatError("reward endpoint: unknown score_kind '" + kind + "'");
  }
  return RewardOutcome{reward, std::string(answer), elapsed_ms(start), RewardSource::scalar_endpoint};
}

std::string_view judge_template() noexcept { return kJudgeTemplate; }

std::string render_judge_prompt(std::string_view question, std::string_view correct_answer,
                                std::string_view reasoning_process) {
  if (question.empty()) throw ValidationError("question must not be empty");
  return fill_template(kJudgeTemplate, {{"question", std::string(question)},
                                        {"correct_answer", std::string(correct_answer)},
                                        {"reasoning_process", std::string(reasoning_process)}});
}

std::optional<bool> parse_judgment(std::string_view reply) {
  std::string text = trim(reply);
  if (text.rfind("```", 0) == 0) {
    const auto first_newline = text.find('\n');
    text = first_newline == std::string::npos ? std::string() : text.substr(first_newline + 1);
    const auto fence = text.rfind("```");
    if (fence != std::string::npos) text = text.substr(0, fence);
  }
  const auto open = text.find('{');
  const auto close = text.rfind('}');
  if (open == std::string::npos || close == std::string::npos || close < open) return std::nullopt;
  const auto parsed = nlohmann::json::parse(text.substr(open, close - open + 1), nullptr, false);
  if (parsed.is_discarded() || !parsed.is_object()) return std::nullopt;
  const auto it = parsed.find("result");
  if (it == parsed.end() || !it->is_string()) return std::nullopt;
  const std::string verdict = lower(trim(it->get<std::string>()));
  if (verdict == "yes") return true;
  if (verdict == "no") return false;
  return std::nullopt;
}

RewardOutcome score_binary_judge(HttpTransport& transport, const Endpoint& endpoint,
                                 const QAPair& pair, std::string_view answer,
                                 const GenerationOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const std::string prompt = render_judge_prompt(pair.question, pair.reference, answer);
  for (int attempt = 0; attempt < 2; ++attempt) {
    const auto reply = post_json(transport, endpoint.url, chat_request(prompt, 0.0, options),
                                 endpoint.api_key, options.retry, "judge endpoint");
    if (const auto verdict = parse_judgment(chat_content(reply, "judge endpoint"))) {
      return RewardOutcome{*verdict ? 1.0 : 0.0, std::string(answer), elapsed_ms(start),
                           RewardSource::binary_judge};
    }
  }
  throw EnvironmentError("judge endpoint returned no parsable Yes/No verdict after a re-ask");
}

LiveEnvironment::LiveEnvironment(ActionSpace space, HttpTransport& transport, Endpoint llm,
                                 Endpoint reward, ScoringMode mode, GenerationOptions options,
                                 std::ostream* transcript)
    : space_(std::move(space)),
      transport_(transport),
      llm_(std::move(llm)),
      reward_(std::move(reward)),
      mode_(mode),
      options_(std::move(options)),
      transcript_(transcript) {}

RewardOutcome LiveEnvironment::reward(const QAPair& pair, const ActionTriple& triple,
                                      std::uint64_t /*rng_seed*/) {
  const auto start = std::chrono::steady_clock::now();
  const RenderedConfig config = space_.resolve(triple);
  const std::string answer = llm_generate(transport_, llm_, pair, config, options_);
  RewardOutcome outcome = mode_ == ScoringMode::scalar
                              ? score_scalar(transport_, reward_, pair, answer, options_.retry)
                              : score_binary_judge(transport_, reward_, pair, answer, options_);
  outcome.latency_ms = elapsed_ms(start);
  if (transcript_ != nullptr) {
    *transcript_ << nlohmann::json{{"id", pair.id},
                                   {"triple", triple},
                                   {"temperature", config.temperature},
                                   {"steps", config.steps},
                                   {"answer", answer},
                                   {"reward", outcome.reward},
                                   {"source", reward_source_name(outcome.source)}}
                        .dump()
                 << '\n';
  }
  return outcome;
}

}  // namespace confbandit
