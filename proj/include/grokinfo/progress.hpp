// Per-epoch synergy/redundancy progress measures: exhaustive multiplet
// search over bins, normalisation across a run, and Pareto data.
#pragma once

#include "grokinfo/binning.hpp"
#include "grokinfo/hoi.hpp"

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace grokinfo {

struct MultipletResult {
    std::vector<int> subset;  // sorted bin ids
    double omega = 0.0;
};

struct SearchResult {
    MultipletResult min;  // most synergistic
    MultipletResult max;  // most redundant
    std::vector<MultipletResult> all;  // enumeration order: size, then lexicographic
    std::size_t evaluated = 0;
};

struct SearchOptions {
    int threads = 1;
    /// Two values closer than this count as tied.
    double tie_tolerance = 1e-12;
    bool keep_all = true;
};

/// Number of subsets of size 2..k: 2^k - k - 1.
std::size_t multiplet_count(int k);

/// Evaluates Omega on every subset of size 2..k of the covariance's usable
/// columns (k_bins caps the largest multiplet size). Ties in the argmin and
/// argmax go to the smaller subset, then the lexicographically smaller one.
///
/// Entropies of all 2^m column subsets are computed once and shared between
/// multiplets, so the per-subset cost is a sum rather than new
/// factorisations. Requires at least 3 usable columns.
SearchResult exhaustive_search(const CopulaCovariance& cov, int k_bins, const SearchOptions& opts = {});

enum class NormalizeMode { Synergy, Redundancy };

/// Min-max normalisation over the whole series. Synergy mode inverts the
/// scale so the most negative Omega maps to 1. Constant series map to 0.
std::vector<double> normalize_series(const std::vector<double>& raw, NormalizeMode mode);

struct ProgressPoint {
    long long epoch = 0;
    double syn_omega = 0.0;
    double red_omega = 0.0;
    std::vector<int> syn_subset;
    std::vector<int> red_subset;
    int syn_size_bins = 0;
    int syn_size_neurons = 0;
    double train_loss = 0.0;
    double test_loss = 0.0;
    double train_acc = 0.0;
    double test_acc = 0.0;
    bool valid = true;
    std::string invalid_reason;
};

struct ProgressSeries {
    std::vector<ProgressPoint> points;
    std::vector<double> syn_norm;
    std::vector<double> red_norm;

    /// Recomputes syn_norm / red_norm over the valid points; invalid points get 0.
    void normalize();
};

struct AnalysisOptions {
    int k_bins = 10;
    bool bias_correction = false;
    int threads = 1;
};

struct EpochAnalysis {
    ProgressPoint point;
    BinAssignment assignment;
};

/// ward_cluster -> bin_reduce -> copula_transform -> build_covariance ->
/// exhaustive_search. Loss/accuracy fields are left for the caller to fill.
/// Degenerate inputs yield an invalid point instead of throwing.
EpochAnalysis analyze_epoch(const Eigen::Ref<const Eigen::MatrixXd>& activations, const AnalysisOptions& opts,
                            long long epoch = 0);

struct ParetoPoint {
    double syn_norm = 0.0;
    double red_norm = 0.0;
    long long epoch = 0;
    bool on_front = false;
};

/// Every point of the series, with the non-dominated set (maximising both
/// coordinates) flagged.
std::vector<ParetoPoint> pareto_points(const ProgressSeries& series);

std::string join_subset(const std::vector<int>& subset);
std::vector<int> parse_subset(const std::string& text);

/// progress.csv rows; a leading comment line carries the schema version
/// and config hash.
void write_progress_csv(std::ostream& out, const ProgressSeries& series, const std::string& config_hash);
ProgressSeries read_progress_csv(std::istream& in, std::string* config_hash = nullptr);

}  // namespace grokinfo
