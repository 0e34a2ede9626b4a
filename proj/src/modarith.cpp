#include "grokinfo/modarith.hpp"

#include "grokinfo/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>

namespace grokinfo {

void TaskSpec::validate() const {
    if (p < 2) throw std::invalid_argument("task: modulus p must be >= 2, got " + std::to_string(p));
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("task: train_fraction must lie in (0, 1)");
}

const std::vector<int>& Dataset::indices(Split split) const {
    static const std::vector<int> empty;
    switch (split) {
        case Split::Train: return train_idx;
        case Split::Test: return test_idx;
        case Split::All: return empty;
    }
    return empty;
}

InputMatrix Dataset::rows(Split split) const {
    if (split == Split::All) return inputs;
    const auto& idx = indices(split);
    InputMatrix out(static_cast<Eigen::Index>(idx.size()), inputs.cols());
    out.reserve(Eigen::VectorXi::Constant(out.rows(), 2));
    for (std::size_t r = 0; r < idx.size(); ++r) {
        for (InputMatrix::InnerIterator it(inputs, idx[r]); it; ++it)
            out.insert(static_cast<Eigen::Index>(r), it.col()) = it.value();
    }
    out.makeCompressed();
    return out;
}

std::vector<int> Dataset::labels_of(Split split) const {
    if (split == Split::All) return labels;
    const auto& idx = indices(split);
    std::vector<int> out(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) out[r] = labels[idx[r]];
    return out;
}

Eigen::VectorXd encode_onehot(int a, int b, int p) {
    if (p < 2) throw std::invalid_argument("encode_onehot: p must be >= 2");
    if (a < 0 || a >= p || b < 0 || b >= p)
        throw std::out_of_range("encode_onehot: residue out of range");
    Eigen::VectorXd x = Eigen::VectorXd::Zero(2 * p);
    x[a] = 1.0;
    x[p + b] = 1.0;
    return x;
}

Dataset generate_dataset(const TaskSpec& spec) {
    spec.validate();
    const int p = spec.p;
    const int n = p * p;

    Dataset data;
    data.spec = spec;
    data.labels.resize(n);
    data.lhs.resize(n);
    data.rhs.resize(n);

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(2 * static_cast<std::size_t>(n));
    for (int a = 0; a < p; ++a) {
        for (int b = 0; b < p; ++b) {
            const int row = a * p + b;
            data.lhs[row] = a;
            data.rhs[row] = b;
            data.labels[row] = (a + b) % p;
            triplets.emplace_back(row, a, 1.0);
            triplets.emplace_back(row, p + b, 1.0);
        }
    }
    data.inputs.resize(n, 2 * p);
    data.inputs.setFromTriplets(triplets.begin(), triplets.end());
    data.inputs.makeCompressed();

    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(spec.split_seed);
    rng.shuffle(std::span<int>(perm));

    const auto n_train = static_cast<std::size_t>(std::floor(spec.train_fraction * n));
    data.train_idx.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
    data.test_idx.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
    std::sort(data.train_idx.begin(), data.train_idx.end());
    std::sort(data.test_idx.begin(), data.test_idx.end());
    return data;
}

InputMatrix to_input(const Eigen::MatrixXd& dense) {
    InputMatrix out = dense.sparseView(0.0, 0.0);
    out.makeCompressed();
    return out;
}

void write_split_csv(const Dataset& data, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    std::vector<char> is_train(data.size(), 0);
    for (int i : data.train_idx) is_train[i] = 1;
    out << "a,b,c,split\n";
    for (std::size_t r = 0; r < data.size(); ++r)
        out << data.lhs[r] << ',' << data.rhs[r] << ',' << data.labels[r] << ','
            << (is_train[r] ? "train" : "test") << '\n';
}

}  // namespace grokinfo
