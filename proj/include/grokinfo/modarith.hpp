// Modular-addition task: the full (a + b) mod p table, one-hot encoded,
// with a seeded train/test split.
#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cstdint>
#include <filesystem>
#include <vector>

namespace grokinfo {

/// Row-major sparse input matrix; one-hot rows have two non-zeros.
using InputMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct TaskSpec {
    int p = 97;
    double train_fraction = 0.4;
    std::uint64_t split_seed = 0;

    void validate() const;
};

enum class Split { Train, Test, All };

struct Dataset {
    TaskSpec spec;
    InputMatrix inputs;            // p^2 x 2p
    std::vector<int> labels;       // p^2, (a + b) mod p
    std::vector<int> lhs, rhs;     // a and b per row
    std::vector<int> train_idx;    // sorted
    std::vector<int> test_idx;     // sorted

    std::size_t size() const { return labels.size(); }
    const std::vector<int>& indices(Split split) const;

    /// Input rows for the given split, in index order.
    InputMatrix rows(Split split) const;
    std::vector<int> labels_of(Split split) const;
};

/// Builds all p^2 equations in lexicographic (a, b) order and splits them
/// with a uniform permutation drawn from spec.split_seed.
Dataset generate_dataset(const TaskSpec& spec);

/// One-hot encoding of (a, b): ones at a and p + b.
Eigen::VectorXd encode_onehot(int a, int b, int p);

/// Converts a dense matrix to the sparse input representation.
InputMatrix to_input(const Eigen::MatrixXd& dense);

/// Writes columns a,b,c,split.
void write_split_csv(const Dataset& data, const std::filesystem::path& path);

}  // namespace grokinfo
