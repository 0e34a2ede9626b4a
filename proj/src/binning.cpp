#include "grokinfo/binning.hpp"

#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace grokinfo {

std::vector<int> BinAssignment::member_counts() const {
    std::vector<int> counts(static_cast<std::size_t>(k_bins), 0);
    for (int l : labels) ++counts.at(static_cast<std::size_t>(l));
    return counts;
}

BinAssignment ward_cluster(const Eigen::Ref<const Eigen::MatrixXd>& features, int k_bins) {
    const auto n = static_cast<int>(features.cols());
    if (k_bins < 1) throw std::invalid_argument("ward_cluster: k_bins must be >= 1");
    if (k_bins > n)
        throw std::invalid_argument("ward_cluster: k_bins (" + std::to_string(k_bins) + ") exceeds feature count (" +
                                    std::to_string(n) + ")");
    if (!features.allFinite()) throw std::invalid_argument("ward_cluster: non-finite features");

    // Squared Euclidean distances from the Gram matrix.
    const Eigen::MatrixXd gram = features.transpose() * features;
    Eigen::MatrixXd d2(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double v = gram(i, i) + gram(j, j) - 2.0 * gram(i, j);
            d2(i, j) = i == j ? 0.0 : std::max(v, 0.0);
        }
    }

    std::vector<int> size(static_cast<std::size_t>(n), 1);
    std::vector<bool> alive(static_cast<std::size_t>(n), true);
    std::vector<int> owner(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) owner[i] = i;

    // Cached nearest partner (j > i) per active row, refreshed on demand.
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<int> nn(static_cast<std::size_t>(n), -1);
    std::vector<double> nn_d(static_cast<std::size_t>(n), inf);
    auto refresh = [&](int i) {
        nn[i] = -1;
        nn_d[i] = inf;
        for (int j = i + 1; j < n; ++j) {
            if (alive[j] && d2(i, j) < nn_d[i]) {
                nn_d[i] = d2(i, j);
                nn[i] = j;
            }
        }
    };
    for (int i = 0; i < n; ++i) refresh(i);

    BinAssignment out;
    out.k_bins = k_bins;
    out.merge_costs.reserve(static_cast<std::size_t>(n - k_bins));
    for (int clusters = n; clusters > k_bins; --clusters) {
        int bi = -1;
        for (int i = 0; i < n; ++i) {
            if (!alive[i] || nn[i] < 0) continue;
            if (bi < 0 || nn_d[i] < nn_d[bi]) bi = i;
        }
        const int bj = nn[bi];
        const double dij = d2(bi, bj);
        const double ni = size[bi], nj = size[bj];
        // Ward cost = half of the squared Ward distance = increase in SSE.
        out.merge_costs.push_back(0.5 * dij);

        for (int k = 0; k < n; ++k) {
            if (!alive[k] || k == bi || k == bj) continue;
            const double nk = size[k];
            const double v = ((ni + nk) * d2(bi, k) + (nj + nk) * d2(bj, k) - nk * dij) / (ni + nj + nk);
            d2(bi, k) = d2(k, bi) = std::max(v, 0.0);
        }
        alive[bj] = false;
        size[bi] += size[bj];
        for (int t = 0; t < n; ++t)
            if (owner[t] == bj) owner[t] = bi;

        for (int i = 0; i < n; ++i) {
            if (!alive[i]) continue;
            if (i == bi || nn[i] == bi || nn[i] == bj) {
                refresh(i);
            } else if (i < bi && d2(i, bi) < nn_d[i]) {
                nn_d[i] = d2(i, bi);
                nn[i] = bi;
            } else if (i < bi && d2(i, bi) == nn_d[i] && bi < nn[i]) {
                nn[i] = bi;
            }
        }
    }

    std::vector<int> relabel(static_cast<std::size_t>(n), -1);
    int next = 0;
    out.labels.resize(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) {
        int& l = relabel[owner[t]];
        if (l < 0) l = next++;
        out.labels[t] = l;
    }
    return out;
}

BinMatrix bin_reduce(const Eigen::Ref<const Eigen::MatrixXd>& features, const BinAssignment& assignment) {
    if (static_cast<Eigen::Index>(assignment.labels.size()) != features.cols())
        throw std::invalid_argument("bin_reduce: assignment length does not match feature count");
    const auto counts = assignment.member_counts();
    BinMatrix out;
    for (int b = 0; b < assignment.k_bins; ++b) {
        if (counts[b] == 0) {
            out.dropped_empty = true;
            continue;
        }
        out.bin_ids.push_back(b);
        out.member_counts.push_back(counts[b]);
    }
    std::vector<int> column_of(static_cast<std::size_t>(assignment.k_bins), -1);
    for (std::size_t c = 0; c < out.bin_ids.size(); ++c) column_of[out.bin_ids[c]] = static_cast<int>(c);

    out.data = Eigen::MatrixXd::Zero(features.rows(), static_cast<Eigen::Index>(out.bin_ids.size()));
    for (Eigen::Index j = 0; j < features.cols(); ++j) out.data.col(column_of[assignment.labels[j]]) += features.col(j);
    for (std::size_t c = 0; c < out.bin_ids.size(); ++c)
        out.data.col(static_cast<Eigen::Index>(c)) /= static_cast<double>(out.member_counts[c]);
    return out;
}

void write_assignment_csv(std::ostream& out, const BinAssignment& assignment, bool header) {
    if (header) out << "neuron_id,bin_id,epoch\n";
    for (std::size_t i = 0; i < assignment.labels.size(); ++i)
        out << i << ',' << assignment.labels[i] << ',' << assignment.epoch << '\n';
}

}  // namespace grokinfo
