// Grokking detection, rule-based phase segmentation of progress series,
// and the early-synergy-peak predictor.
#pragma once

#include "grokinfo/progress.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace grokinfo {

struct GrokOptions {
    double tau = 0.95;
    /// Threshold for the train curve; defaults to tau.
    std::optional<double> train_tau;
    long long min_gap = 100;
};

struct GrokReport {
    std::optional<long long> train_cross_epoch;
    std::optional<long long> test_cross_epoch;
    std::optional<long long> gap;
    bool grokked = false;
    double tau = 0.95;
    double train_tau = 0.95;
    long long min_gap = 100;
    std::vector<std::string> reasons;  // why grokked is false
};

/// First-crossing semantics on aligned series.
GrokReport detect_grokking(std::span<const long long> epochs, std::span<const double> train_acc,
                           std::span<const double> test_acc, const GrokOptions& opts = {});

enum class Phase { FeatureLearning, Emergence, Divergence, DelayedEmergence, Decoupling, Finalizing };

const char* phase_name(Phase phase);
Phase parse_phase(const std::string& name);

struct PhaseInterval {
    long long start_epoch = 0;
    long long end_epoch = 0;  // inclusive, last analysed epoch of the interval
    std::size_t start_index = 0;
    std::size_t end_index = 0;  // inclusive
    Phase label = Phase::FeatureLearning;
    /// Mean derivative sign of syn, red, size, test_loss, test_acc inside.
    std::vector<double> mean_signs;
    std::size_t rule_hits = 0;  // points where the label's own rule fired
};

struct PhaseSegmentation {
    std::vector<PhaseInterval> intervals;
    int smoothing_window = 25;

    std::optional<PhaseInterval> find(Phase phase) const;
};

struct PhaseOptions {
    int smoothing_window = 25;
    /// A derivative counts as non-zero above slope_tol * range / window.
    double slope_tol = 0.01;
    /// Test loss is converged once it stays within this fraction of its range of the final value.
    double convergence_tol = 0.02;
    /// Test accuracy has "risen" once it passes this fraction of its range.
    double acc_rise_fraction = 0.5;
    /// Intervals shorter than this many points are absorbed; 0 means smoothing_window.
    int min_interval = 0;
};

/// Moving-average smoothing, sign classification of discrete derivatives
/// and the rule table:
///   Emergence        syn up, red down, size up
///   DelayedEmergence syn up, red up, size up, after a Divergence
///   Divergence       syn down, red down, size down, before test accuracy rises
///   Decoupling       syn down, red up, test accuracy up
///   Finalizing       everything flat after test loss converged
///   FeatureLearning  anything unmatched before the first synergy rise
/// Points matching no rule keep the previous label. Only valid points are used.
PhaseSegmentation segment_phases(const ProgressSeries& series, const PhaseOptions& opts = {});

struct PeakPrediction {
    bool predicted = false;
    std::optional<long long> peak_epoch;
    double peak_height = 0.0;
    double prominence = 0.0;
    long long window = 0;
    double prominence_min = 0.2;
};

/// Window covering the first `fraction` of the recorded epochs.
long long default_peak_window(std::span<const long long> epochs, double fraction = 0.2);

/// Topographic prominence of the local maximum at index i of `values`.
double peak_prominence(std::span<const double> values, std::size_t i);

/// Looks for local maxima of the (normalised) synergy among epochs <= window
/// with prominence >= prominence_min, computed on the windowed prefix only.
/// Reports the highest such peak (earliest on ties).
PeakPrediction predict_from_early_peak(std::span<const long long> epochs, std::span<const double> syn_norm,
                                       long long window, double prominence_min = 0.2);

}  // namespace grokinfo
