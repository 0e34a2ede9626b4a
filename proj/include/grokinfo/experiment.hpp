// Training runs, sweeps and their on-disk artifacts.
#pragma once

#include "grokinfo/config.hpp"
#include "grokinfo/phases.hpp"
#include "grokinfo/progress.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace grokinfo {

inline constexpr int kSchemaVersion = 1;

struct EpochMetrics {
    long long epoch = 0;
    double train_loss = 0.0;
    double test_loss = 0.0;
    double train_acc = 0.0;
    double test_acc = 0.0;
};

struct RunResult {
    RunConfig config;
    std::string config_hash;
    std::vector<EpochMetrics> metrics;     // one record per trained epoch
    ProgressSeries progress;               // analysis epochs only
    std::vector<BinAssignment> assignments;  // aligned with progress.points
    GrokReport grok;
    PeakPrediction peak;
    std::optional<PhaseSegmentation> phases;
    std::string phase_error;
    bool partial = false;  // training aborted (divergence)
    std::string status_message;
    std::filesystem::path dir;

    std::vector<long long> epochs() const;
    std::vector<double> train_acc() const;
    std::vector<double> test_acc() const;
};

struct RunOptions {
    bool write_artifacts = true;
    /// Called after every epoch with its metrics.
    std::function<void(const EpochMetrics&)> on_epoch;
};

/// Trains one model and records metrics every epoch, progress points at
/// the analysis cadence, then runs grok detection, the early-peak predictor
/// and phase segmentation. Epoch e's record describes the parameters after
/// e optimizer steps. Divergence stops training and marks the run partial.
RunResult run_experiment(const RunConfig& config, const RunOptions& opts = {});

/// Grok report, peak prediction and phases from recorded series.
void finalize_analysis(RunResult& run);

/// Reads a run directory back (config, metrics, progress, assignments,
/// reports). Throws on schema mismatch, or on mixed config hashes unless
/// `force` is set.
RunResult load_run(const std::filesystem::path& dir, bool force = false);

void write_run_artifacts(const RunResult& run, const std::filesystem::path& dir);

enum class SweepAxis { WeightDecay, Alpha };
const char* axis_name(SweepAxis axis);

struct SweepCell {
    double value = 0.0;
    std::uint64_t seed = 0;
    std::string config_hash;
    std::filesystem::path dir;
    GrokReport grok;
    PeakPrediction peak;
    bool failed = false;
    std::string error;
};

struct SweepRow {
    double value = 0.0;
    int runs = 0;
    int failed = 0;
    int grokked = 0;
    std::optional<double> train_cross_mean, train_cross_std;
    std::optional<double> test_cross_mean, test_cross_std;
};

struct Contingency {
    int peak_and_grok = 0;
    int peak_no_grok = 0;
    int no_peak_grok = 0;
    int no_peak_no_grok = 0;
};

struct SweepSummary {
    SweepAxis axis = SweepAxis::WeightDecay;
    std::vector<SweepCell> cells;  // value-major, then seed
    std::vector<SweepRow> rows;
    Contingency contingency;
};

struct SweepOptions {
    int jobs = 1;
    bool write_artifacts = true;
    std::function<void(const SweepCell&)> on_cell;
};

/// Cartesian product of axis values and master seeds; run directories are
/// <output_dir>/<axis>_<value>/seed_<seed>. Failed runs are recorded and
/// the sweep continues.
SweepSummary run_sweep(const RunConfig& base, SweepAxis axis, const std::vector<double>& values,
                       const std::vector<std::uint64_t>& seeds, const SweepOptions& opts = {});

SweepSummary summarize_sweep(SweepAxis axis, std::vector<SweepCell> cells);
void write_sweep_summary(const SweepSummary& summary, const std::filesystem::path& dir);
SweepSummary load_sweep_summary(const std::filesystem::path& dir);

std::string format_value(double v);

}  // namespace grokinfo
