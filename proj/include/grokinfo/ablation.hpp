// Sub-network ablation: masks built from synergistic bins, retraining with
// all other hidden neurons held at zero, and comparison against the base
// run and the inverse sub-network.
#pragma once

#include "grokinfo/experiment.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace grokinfo {

enum class MaskSource { SynergySubset, Inverse, Full, Custom };
const char* mask_source_name(MaskSource source);

struct NeuronMask {
    HiddenGate mask;
    MaskSource source = MaskSource::Custom;
    long long source_epoch = -1;
    std::vector<int> source_subset;

    std::size_t active() const;
    static NeuronMask full(int n_hidden);
};

/// True exactly for neurons whose bin is in `subset`.
NeuronMask mask_from_bins(const BinAssignment& assignment, std::span<const int> subset);

NeuronMask invert_mask(const NeuronMask& mask);

struct MaskedRun {
    RunResult run;
    bool degenerate = false;  // all-false mask
};

/// Same task, seeds, optimizer and schedule as `config`, with the hidden
/// layer gated by `mask` in every forward pass. Weights attached to masked
/// neurons receive no gradient and no decay. `config.output_dir` is used
/// as the run directory.
MaskedRun train_masked(RunConfig config, const NeuronMask& mask, const RunOptions& opts = {});

struct RunTrace {
    std::string name;
    std::vector<long long> epochs;
    std::vector<double> test_acc;

    static RunTrace from_run(const std::string& name, const RunResult& run);
};

enum class AblationVerdict { Synergistic, Inverse, Tie };
const char* verdict_name(AblationVerdict v);

struct AblationComparison {
    double tau = 0.95;
    std::optional<long long> base_cross, syn_cross, inv_cross;
    double base_final = 0.0, syn_final = 0.0, inv_final = 0.0;
    /// Crossing-epoch deltas relative to the base run (negative = earlier).
    std::optional<long long> syn_delay_delta, inv_delay_delta;
    double syn_final_delta = 0.0, inv_final_delta = 0.0;
    /// Epoch at which the sub-networks are compared head to head.
    long long matched_epoch = 0;
    double syn_at_matched = 0.0, inv_at_matched = 0.0;
    AblationVerdict verdict = AblationVerdict::Tie;
};

/// The matched epoch is the base run's test crossing (its last epoch if it
/// never crosses). Verdict: a sub-network that crosses tau beats one that
/// does not; if both cross the earlier one wins; otherwise the higher test
/// accuracy at the matched epoch wins.
AblationComparison compare_ablation(const RunTrace& base, const RunTrace& syn, const RunTrace& inv, double tau = 0.95);

enum class AblationKind { LowDecayDelayed, HighDecayEmergence, AlphaEmergence };
const char* ablation_kind_name(AblationKind kind);
AblationKind parse_ablation_kind(const std::string& name);
/// The phase whose synergistic subset feeds the mask.
Phase source_phase(AblationKind kind);

class MissingPhaseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Mask chosen from the base run: syn_subset at the point of maximum
/// normalised synergy inside the first interval of the source phase.
/// Throws MissingPhaseError when the base run has no such interval.
NeuronMask select_synergy_mask(const RunResult& base, AblationKind kind);

struct AblationOptions {
    /// Resume from the latest base checkpoint at or before the source epoch
    /// instead of retraining from the original initialisation.
    bool resume = false;
    bool write_artifacts = true;
    std::filesystem::path output_dir;  // defaults to <base dir>/ablation_<kind>
};

struct AblationOutcome {
    NeuronMask syn_mask;
    NeuronMask inv_mask;
    RunResult syn_run;
    RunResult inv_run;
    AblationComparison comparison;
};

/// Builds the masks (before any training, so a missing phase starts
/// nothing), trains the synergistic and inverse sub-networks and compares
/// them with the base run.
AblationOutcome run_ablation(const RunResult& base, AblationKind kind, const AblationOptions& opts = {});

void write_masks_json(const std::filesystem::path& path, const std::vector<NeuronMask>& masks);
void write_comparison(const std::filesystem::path& dir, const AblationComparison& cmp, const RunTrace& base,
                      const RunTrace& syn, const RunTrace& inv);

}  // namespace grokinfo
