#pragma once

#include "grokinfo/mlp.hpp"
#include "grokinfo/rng.hpp"

#include <Eigen/Core>

#include <fstream>
#include <iterator>
#include <vector>

namespace testutil {

inline grokinfo::MlpParams random_params(int p, int n, grokinfo::Rng& rng, double scale = 1.0) {
    grokinfo::MlpParams m;
    m.w1.resize(n, 2 * p);
    m.b1.resize(n);
    m.w2.resize(p, n);
    for (Eigen::Index i = 0; i < m.w1.size(); ++i) m.w1.data()[i] = scale * rng.normal();
    for (Eigen::Index i = 0; i < m.b1.size(); ++i) m.b1[i] = scale * rng.normal();
    for (Eigen::Index i = 0; i < m.w2.size(); ++i) m.w2.data()[i] = scale * rng.normal();
    return m;
}

struct Batch {
    Eigen::MatrixXd dense;
    grokinfo::InputMatrix x;
    std::vector<int> y;
};

inline Batch random_batch(int p, int s, grokinfo::Rng& rng) {
    Batch b;
    b.dense = Eigen::MatrixXd::Zero(s, 2 * p);
    for (int r = 0; r < s; ++r) {
        const int a = static_cast<int>(rng.below(p)), c = static_cast<int>(rng.below(p));
        b.dense(r, a) = 1.0;
        b.dense(r, p + c) = 1.0;
        b.y.push_back((a + c) % p);
    }
    b.x = grokinfo::to_input(b.dense);
    return b;
}

inline Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, grokinfo::Rng& rng) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
    return m;
}

/// Random SPD matrix A A^T / d + ridge.
inline Eigen::MatrixXd random_spd(int d, grokinfo::Rng& rng, double ridge = 0.1) {
    const Eigen::MatrixXd a = gaussian(d, d + 2, rng);
    return a * a.transpose() / static_cast<double>(d) + ridge * Eigen::MatrixXd::Identity(d, d);
}

}  // namespace testutil

#include "grokinfo/config.hpp"

#include <filesystem>
#include <string>

namespace testutil {

/// A run small enough to train in well under a second.
inline grokinfo::RunConfig tiny_config(const std::filesystem::path& dir, std::uint64_t seed = 0) {
    grokinfo::RunConfig c;
    c.seed = seed;
    c.task.p = 11;
    c.n_hidden = 20;
    c.optim.weight_decay = 1.0;
    c.optim.lr = 0.01;
    c.schedule.max_epochs = 60;
    c.schedule.dense_until = 30;
    c.schedule.stride = 3;
    c.schedule.checkpoint_every = 20;
    c.analysis.k_bins = 5;
    c.analysis.phases.smoothing_window = 5;
    c.output_dir = dir;
    c.resolve_seeds();
    return c;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto d = std::filesystem::temp_directory_path() / ("grokinfo_test_" + name);
    std::filesystem::remove_all(d);
    std::filesystem::create_directories(d);
    return d;
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace testutil
