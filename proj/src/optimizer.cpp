#include "grokinfo/optimizer.hpp"

#include <cmath>

namespace grokinfo {

namespace {

template <class Tensor, class DecayFn>
void update_tensor(Tensor& theta, const Tensor& g, Tensor& m, Tensor& v, const AdamWConfig& cfg,
                   double bias1, double bias2, DecayFn decays) {
    for (Eigen::Index c = 0; c < theta.cols(); ++c) {
        for (Eigen::Index r = 0; r < theta.rows(); ++r) {
            const double gi = g(r, c);
            double& mi = m(r, c);
            double& vi = v(r, c);
            mi = cfg.beta1 * mi + (1.0 - cfg.beta1) * gi;
            vi = cfg.beta2 * vi + (1.0 - cfg.beta2) * gi * gi;
            const double mhat = mi / bias1;
            const double vhat = vi / bias2;
            const double old = theta(r, c);
            double next = old - cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
            if (decays(r, c)) next -= cfg.lr * cfg.weight_decay * old;
            theta(r, c) = next;
        }
    }
}

bool active(const FrozenNeurons& frozen, Eigen::Index j) {
    return frozen.empty() || frozen[static_cast<std::size_t>(j)] != 0;
}

}  // namespace

void AdamWConfig::validate() const {
    if (!(lr > 0.0)) throw std::invalid_argument("adamw: lr must be > 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
        throw std::invalid_argument("adamw: betas must lie in [0, 1)");
    if (!(eps > 0.0)) throw std::invalid_argument("adamw: eps must be > 0");
    if (!(weight_decay >= 0.0)) throw std::invalid_argument("adamw: weight_decay must be >= 0");
}

AdamWState AdamWState::zeros_like(const MlpParams& params) {
    return AdamWState{params.zeros_like(), params.zeros_like(), 0};
}

void adamw_step(MlpParams& params, const MlpGrads& grads, AdamWState& state, const AdamWConfig& cfg,
                const FrozenNeurons& frozen) {
    if (!grads.all_finite()) throw DivergenceError("adamw_step: non-finite gradient, step refused");
    if (grads.w1.rows() != params.w1.rows() || grads.w1.cols() != params.w1.cols() ||
        grads.b1.size() != params.b1.size() || grads.w2.rows() != params.w2.rows() ||
        grads.w2.cols() != params.w2.cols())
        throw std::invalid_argument("adamw_step: gradient shape mismatch");

    state.t += 1;
    const double t = static_cast<double>(state.t);
    const double bias1 = 1.0 - std::pow(cfg.beta1, t);
    const double bias2 = 1.0 - std::pow(cfg.beta2, t);
    const bool decay_on = cfg.weight_decay != 0.0;

    update_tensor(params.w1, grads.w1, state.m.w1, state.v.w1, cfg, bias1, bias2,
                  [&](Eigen::Index r, Eigen::Index) { return decay_on && active(frozen, r); });
    update_tensor(params.b1, grads.b1, state.m.b1, state.v.b1, cfg, bias1, bias2,
                  [&](Eigen::Index r, Eigen::Index) { return decay_on && cfg.decay_biases && active(frozen, r); });
    update_tensor(params.w2, grads.w2, state.m.w2, state.v.w2, cfg, bias1, bias2,
                  [&](Eigen::Index, Eigen::Index c) { return decay_on && active(frozen, c); });
}

double constrained_norm(const MlpParams& params, bool include_biases, const FrozenNeurons& frozen) {
    double sq = 0.0;
    for (Eigen::Index j = 0; j < params.b1.size(); ++j) {
        if (!active(frozen, j)) continue;
        sq += params.w1.row(j).squaredNorm() + params.w2.col(j).squaredNorm();
        if (include_biases) sq += params.b1[j] * params.b1[j];
    }
    return std::sqrt(sq);
}

NormConstraint make_norm_constraint(const MlpParams& params, bool include_biases, const FrozenNeurons& frozen) {
    NormConstraint c;
    c.enabled = true;
    c.include_biases = include_biases;
    c.target_norm = constrained_norm(params, include_biases, frozen);
    if (!(c.target_norm > 0.0)) throw std::invalid_argument("norm constraint: initial norm is zero");
    return c;
}

void norm_project(MlpParams& params, const NormConstraint& constraint, const FrozenNeurons& frozen) {
    if (!constraint.enabled) return;
    if (!(constraint.target_norm > 0.0)) throw std::invalid_argument("norm_project: target_norm must be > 0");
    const double current = constrained_norm(params, constraint.include_biases, frozen);
    if (!(current > 0.0)) throw std::domain_error("norm_project: current norm is zero (degenerate model)");
    const double scale = constraint.target_norm / current;
    for (Eigen::Index j = 0; j < params.b1.size(); ++j) {
        if (!active(frozen, j)) continue;
        params.w1.row(j) *= scale;
        params.w2.col(j) *= scale;
        if (constraint.include_biases) params.b1[j] *= scale;
    }
}

}  // namespace grokinfo
