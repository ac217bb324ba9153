#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "confbandit/http.hpp"

namespace confbandit {

enum class EmbeddingSource { hashed, precomputed, remote };

std::string_view source_name(EmbeddingSource source) noexcept;

/// Unit-norm question context. Construct through make_embedding (or one of
/// the embedders) so the norm invariant always holds.
struct Embedding {
  Eigen::VectorXd values;
  EmbeddingSource source = EmbeddingSource::hashed;

  std::size_t width() const noexcept { return static_cast<std::size_t>(values.size()); }
};

inline constexpr std::size_t kDefaultEmbeddingWidth = 768;
inline constexpr std::uint64_t kDefaultHashSeed = 0x5eedc0de2024ULL;
inline constexpr std::size_t kMinEmbeddingWidth = 8;

/// Validates finiteness and non-zero norm, then L2-normalizes.
/// Throws FormatError otherwise.
Embedding make_embedding(std::vector<double> raw, EmbeddingSource source);

/// Seeded FNV-1a 64 followed by a SplitMix64 finalizer.
std::uint64_t feature_hash(std::string_view text, std::uint64_t seed) noexcept;

/// Signed feature hashing of lowercased whitespace tokens and of the
/// character trigrams of each "^token$", L2-normalized.
Embedding embed_hashed(std::string_view question, std::size_t width = kDefaultEmbeddingWidth,
                       std::uint64_t seed = kDefaultHashSeed);

/// Reads `id<TAB>v1,v2,...` lines. All records must share one width.
std::map<std::string, Embedding> load_precomputed(const std::filesystem::path& path);

struct RemoteEmbedderOptions {
  std::string endpoint;
  std::string api_key;
  std::size_t expected_width = kDefaultEmbeddingWidth;
  RetryPolicy retry;
};

/// POST {"input": question} -> {"embedding": [...]}.
Embedding embed_remote(std::string_view question, const RemoteEmbedderOptions& options,
                       HttpTransport& transport);

/// Serializable description of which embedder a policy was trained with.
struct EmbedderConfig {
  EmbeddingSource kind = EmbeddingSource::hashed;
  std::size_t width = kDefaultEmbeddingWidth;
  std::uint64_t hash_seed = kDefaultHashSeed;
  std::string precomputed_path;  // kind == precomputed
  std::string endpoint;          // kind == remote

  friend bool operator==(const EmbedderConfig&, const EmbedderConfig&) = default;
};

void to_json(nlohmann::json& j, const EmbedderConfig& config);
void from_json(const nlohmann::json& j, EmbedderConfig& config);

/// Produces contexts for (id, question) pairs according to an EmbedderConfig.
class ContextEncoder {
 public:
  explicit ContextEncoder(EmbedderConfig config, HttpTransport* transport = nullptr,
                          std::string api_key = {});

  const EmbedderConfig& config() const noexcept { return config_; }
  Embedding encode(std::string_view id, std::string_view question) const;

 private:
  EmbedderConfig config_;
  HttpTransport* transport_;
  std::string api_key_;
  std::map<std::string, Embedding, std::less<>> precomputed_;
};

}  // namespace confbandit
