// Run configuration: a flat, typed key-value text format with section
// prefixes (run., task., model., optim., schedule., analysis.).
//
//   # comment
//   task.p = 97
//   optim.weight_decay = 2.0
//
// Unknown keys are errors. Unless task.split_seed / model.init_seed are
// given explicitly they are derived from run.seed with derive_seed(seed,
// "split") and derive_seed(seed, "init"). Serialised snapshots always carry
// the resolved seeds.
#pragma once

#include "grokinfo/mlp.hpp"
#include "grokinfo/optimizer.hpp"
#include "grokinfo/phases.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace grokinfo {

struct ScheduleConfig {
    /// 0 selects the default budget: 30000 epochs when weight_decay <= 0.1, else 10000.
    long long max_epochs = 0;
    long long dense_until = 1000;  // analyse every epoch below this
    long long stride = 10;         // then every stride-th epoch
    long long checkpoint_every = 1000;  // 0 disables periodic checkpoints
    std::string resume_from;       // checkpoint stem; empty trains from init

    bool is_analysis_epoch(long long epoch) const { return epoch < dense_until || epoch % stride == 0; }
};

struct AnalysisConfig {
    bool enabled = true;
    int k_bins = 10;
    Split activation_split = Split::Train;
    bool bias_correction = false;
    int threads = 1;
    GrokOptions grok;
    PhaseOptions phases;
    double prominence_min = 0.2;
    double peak_window_fraction = 0.2;
};

struct RunConfig {
    std::uint64_t seed = 0;
    TaskSpec task;
    bool split_seed_explicit = false;
    int n_hidden = 250;
    InitSpec init;
    bool init_seed_explicit = false;
    HiddenGate mask;  // empty = unmasked
    AdamWConfig optim;
    bool constrain_norm = false;
    bool norm_include_biases = false;
    ScheduleConfig schedule;
    AnalysisConfig analysis;
    std::filesystem::path output_dir = "runs/default";

    /// Fills derived seeds; call after editing run.seed.
    void resolve_seeds();
    long long effective_max_epochs() const;
    void validate() const;
};

/// Applies one key = value assignment; throws on unknown keys or bad values.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::filesystem::path& path);

/// Canonical text form with resolved seeds, one key per line.
std::string serialize_config(const RunConfig& cfg);

/// FNV-1a over the canonical form, excluding output location and thread
/// counts (which never change results). 16 hex digits.
std::string config_hash(const RunConfig& cfg);

std::string split_name(Split split);

}  // namespace grokinfo
