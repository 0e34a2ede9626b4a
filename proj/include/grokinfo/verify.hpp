// Self-checks behind the `verify` subcommand.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace grokinfo {

struct VerifyCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Fast numerical invariants: closed-form entropies, O-Information
/// identities, estimator consistency, gradient check, Ward monotonicity and
/// the multiplet count.
std::vector<VerifyCheck> verify_numerics(std::uint64_t seed = 7);

/// Artifact invariants of a run directory. With `rerun` the config is
/// trained again in a scratch directory and progress.csv compared byte for byte.
std::vector<VerifyCheck> verify_run(const std::filesystem::path& dir, bool rerun = false);

}  // namespace grokinfo
