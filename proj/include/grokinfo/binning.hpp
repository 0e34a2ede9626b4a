// Grouping of hidden-neuron feature vectors into bins by Ward
// agglomerative clustering, and reduction of each bin to one variable.
#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <vector>

namespace grokinfo {

struct BinAssignment {
    std::vector<int> labels;          // per neuron, in [0, k_bins)
    int k_bins = 10;
    long long epoch = -1;
    std::vector<double> merge_costs;  // Ward increase in within-cluster SSE per merge, in merge order

    std::vector<int> member_counts() const;
};

struct BinMatrix {
    Eigen::MatrixXd data;            // s x (non-empty bins)
    std::vector<int> member_counts;  // per column of data
    std::vector<int> bin_ids;        // bin id of each column of data
    bool dropped_empty = false;
};

/// Ward-linkage agglomerative clustering of the COLUMNS of `features`
/// under Euclidean distance, cut at k_bins clusters.
///
/// Distances are maintained with the Lance-Williams recurrence on squared
/// distances. Each step merges the closest active pair (i, j), i < j, ties
/// going to the lexicographically smallest pair; the merged cluster keeps
/// index i. Final labels are numbered by first appearance over neuron
/// index, so neuron 0 is always in bin 0.
BinAssignment ward_cluster(const Eigen::Ref<const Eigen::MatrixXd>& features, int k_bins);

/// Column j of the result is the mean of the member columns of bin j.
BinMatrix bin_reduce(const Eigen::Ref<const Eigen::MatrixXd>& features, const BinAssignment& assignment);

/// Appends rows neuron_id,bin_id,epoch; writes the header when `header` is set.
void write_assignment_csv(std::ostream& out, const BinAssignment& assignment, bool header);

}  // namespace grokinfo
