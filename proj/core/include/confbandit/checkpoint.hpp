#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "confbandit/config_space.hpp"
#include "confbandit/embedder.hpp"
#include "confbandit/policy_net.hpp"

namespace confbandit {

inline constexpr std::string_view kCheckpointFormat = "confbandit-ckpt-1";

struct Checkpoint {
  PolicyParams params;
  ActionSpace space;
  EmbedderConfig embedder;
  nlohmann::json metadata;
};

/// JSON document: format version, action space, embedder config, every
/// weight as a shortest round-trip decimal, and free-form metadata.
/// Throws ValidationError if a parameter is non-finite.
std::string checkpoint_save(const PolicyParams& params, const ActionSpace& space,
                            const EmbedderConfig& embedder, const nlohmann::json& metadata);

/// Throws CheckpointError on a version mismatch, a shape inconsistent with
/// the stored action space, or a non-finite weight.
Checkpoint checkpoint_load(std::string_view text);

void write_checkpoint(const std::filesystem::path& path, const PolicyParams& params,
                      const ActionSpace& space, const EmbedderConfig& embedder,
                      const nlohmann::json& metadata);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace confbandit
