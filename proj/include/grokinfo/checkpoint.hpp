// Checkpoints: a JSON header next to a sidecar of little-endian float64
// arrays. Loading reproduces every tensor bit for bit.
#pragma once

#include "grokinfo/optimizer.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace grokinfo {

struct CheckpointMeta {
    long long epoch = 0;
    std::uint64_t split_seed = 0;
    std::uint64_t init_seed = 0;
    std::string config_hash;
};

struct Checkpoint {
    CheckpointMeta meta;
    MlpParams params;
    std::optional<AdamWState> optimizer;
};

/// Writes <stem>.json and <stem>.bin.
void save_checkpoint(const std::filesystem::path& stem, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& stem);

}  // namespace grokinfo
