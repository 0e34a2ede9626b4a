#include "grokinfo/mlp.hpp"

#include "grokinfo/rng.hpp"

#include <cmath>
#include <string>

namespace grokinfo {

MlpParams MlpParams::zeros_like() const {
    MlpParams z;
    z.w1 = Eigen::MatrixXd::Zero(w1.rows(), w1.cols());
    z.b1 = Eigen::VectorXd::Zero(b1.size());
    z.w2 = Eigen::MatrixXd::Zero(w2.rows(), w2.cols());
    return z;
}

bool MlpParams::all_finite() const {
    return w1.allFinite() && b1.allFinite() && w2.allFinite();
}

void MlpParams::check_shapes() const {
    if (w1.rows() != b1.size() || w2.cols() != b1.size())
        throw std::invalid_argument("MlpParams: inconsistent hidden dimension");
    if (w1.cols() % 2 != 0 || w1.cols() / 2 != w2.rows())
        throw std::invalid_argument("MlpParams: input width must be 2 * n_classes");
}

MlpParams init_params(const TaskSpec& task, int n_hidden, const InitSpec& spec) {
    task.validate();
    if (n_hidden < 1) throw std::invalid_argument("init_params: n_hidden must be positive");
    if (!(spec.alpha > 0.0)) throw std::invalid_argument("init_params: alpha must be > 0");

    const int p = task.p;
    Rng rng(spec.init_seed);
    MlpParams params;
    params.w1.resize(n_hidden, 2 * p);
    params.b1.resize(n_hidden);
    params.w2.resize(p, n_hidden);

    const double bound1 = 1.0 / std::sqrt(2.0 * p);
    for (int i = 0; i < n_hidden; ++i)
        for (int j = 0; j < 2 * p; ++j) params.w1(i, j) = rng.uniform(-bound1, bound1) * spec.alpha;
    for (int i = 0; i < n_hidden; ++i) params.b1[i] = rng.uniform(-bound1, bound1) * spec.alpha;

    if (spec.zero_last_layer) {
        params.w2.setZero();
    } else {
        const double bound2 = 1.0 / std::sqrt(static_cast<double>(n_hidden));
        for (int i = 0; i < p; ++i)
            for (int j = 0; j < n_hidden; ++j) params.w2(i, j) = rng.uniform(-bound2, bound2) * spec.alpha;
    }
    return params;
}

ForwardCache forward(const MlpParams& params, const InputMatrix& x, std::span<const int> labels,
                     const HiddenGate& gate) {
    ForwardCache cache;
    forward_into(params, x, labels, gate, cache);
    return cache;
}

void forward_into(const MlpParams& params, const InputMatrix& x, std::span<const int> labels, const HiddenGate& gate,
                  ForwardCache& cache) {
    params.check_shapes();
    if (x.cols() != params.n_inputs())
        throw std::invalid_argument("forward: input has " + std::to_string(x.cols()) + " columns, expected " +
                                    std::to_string(params.n_inputs()));
    if (static_cast<Eigen::Index>(labels.size()) != x.rows())
        throw std::invalid_argument("forward: label count does not match sample count");
    if (!gate.empty() && static_cast<int>(gate.size()) != params.n_hidden())
        throw std::invalid_argument("forward: gate length must equal n_hidden");

    const Eigen::Index s = x.rows();
    const int n = params.n_hidden();
    cache.gate = gate;
    cache.z1.resize(s, n);
    // x is sparse (two ones per row): gather columns of W1 per sample.
    for (Eigen::Index r = 0; r < s; ++r) {
        auto row = cache.z1.row(r);
        row = params.b1.transpose();
        for (InputMatrix::InnerIterator it(x, r); it; ++it) row.noalias() += it.value() * params.w1.col(it.col()).transpose();
        row = row.cwiseMax(0.0);
        if (!gate.empty())
            for (int j = 0; j < n; ++j)
                if (!gate[j]) row[j] = 0.0;
    }
    cache.logits.resize(s, params.n_classes());
    cache.logits.noalias() = cache.z1 * params.w2.transpose();

    cache.probs.resize(s, params.n_classes());
    double total = 0.0;
    for (Eigen::Index r = 0; r < s; ++r) {
        const double mx = cache.logits.row(r).maxCoeff();
        cache.probs.row(r) = (cache.logits.row(r).array() - mx).exp();
        const double z = cache.probs.row(r).sum();
        cache.probs.row(r) /= z;
        total += std::log(z) + mx - cache.logits(r, labels[r]);
    }
    cache.loss = s > 0 ? total / static_cast<double>(s) : 0.0;
    if (!std::isfinite(cache.loss) || !cache.logits.allFinite())
        throw DivergenceError("forward: non-finite loss or logits");
}

MlpGrads backward(const MlpParams& params, const ForwardCache& cache, const InputMatrix& x,
                  std::span<const int> labels) {
    MlpGrads g;
    BackwardScratch scratch;
    backward_into(params, cache, x, labels, g, scratch);
    return g;
}

void backward_into(const MlpParams& params, const ForwardCache& cache, const InputMatrix& x,
                   std::span<const int> labels, MlpGrads& g, BackwardScratch& scratch) {
    const Eigen::Index s = x.rows();
    if (cache.logits.rows() != s || cache.z1.cols() != params.n_hidden() ||
        static_cast<Eigen::Index>(labels.size()) != s || x.cols() != params.n_inputs())
        throw std::invalid_argument("backward: cache, inputs and parameters disagree in shape");

    RowMatrixXd& dlogits = scratch.dlogits;
    dlogits = cache.probs;
    for (Eigen::Index r = 0; r < s; ++r) dlogits(r, labels[r]) -= 1.0;
    dlogits /= static_cast<double>(s);

    g.w2.resize(params.w2.rows(), params.w2.cols());
    g.w2.noalias() = dlogits.transpose() * cache.z1;
    RowMatrixXd& dpre = scratch.dpre;
    dpre.resize(s, params.n_hidden());
    dpre.noalias() = dlogits * params.w2;
    // relu'(0) = 0; gated neurons have z1 = 0 and so pass no gradient.
    dpre.array() *= (cache.z1.array() > 0.0).cast<double>();
    g.b1 = dpre.colwise().sum().transpose();
    g.w1.setZero(params.w1.rows(), params.w1.cols());
    for (Eigen::Index r = 0; r < s; ++r)
        for (InputMatrix::InnerIterator it(x, r); it; ++it)
            g.w1.col(it.col()).noalias() += it.value() * dpre.row(r).transpose();
}

double accuracy(const RowMatrixXd& logits, std::span<const int> labels) {
    if (labels.empty()) return 0.0;
    std::size_t correct = 0;
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        Eigen::Index best = 0;
        for (Eigen::Index c = 1; c < logits.cols(); ++c)
            if (logits(r, c) > logits(r, best)) best = c;
        if (best == labels[r]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(labels.size());
}

Eigen::MatrixXd record_activations(const MlpParams& params, const Dataset& data, Split split,
                                   const HiddenGate& gate) {
    const InputMatrix x = data.rows(split);
    Eigen::MatrixXd z = x * params.w1.transpose();
    z.rowwise() += params.b1.transpose();
    z = z.cwiseMax(0.0);
    if (!gate.empty()) {
        for (int j = 0; j < params.n_hidden(); ++j)
            if (!gate[j]) z.col(j).setZero();
    }
    return z;
}

}  // namespace grokinfo
