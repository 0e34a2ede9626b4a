// Full-batch AdamW with decoupled weight decay and the constant-norm
// projection used for large-alpha initialisation runs.
#pragma once

#include "grokinfo/mlp.hpp"

namespace grokinfo {

struct AdamWConfig {
    double lr = 0.03;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;
    bool decay_biases = false;

    void validate() const;
};

struct AdamWState {
    MlpParams m;
    MlpParams v;
    long long t = 0;

    static AdamWState zeros_like(const MlpParams& params);
};

struct NormConstraint {
    bool enabled = false;
    double target_norm = 0.0;
    bool include_biases = false;
};

/// Neurons excluded from decay and projection; empty means none are frozen.
/// Entry j == 0 freezes row j of W1, entry j of b1 and column j of W2.
using FrozenNeurons = HiddenGate;

/// One AdamW update in place:
///   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2,
///   theta <- theta - lr * mhat / (sqrt(vhat) + eps) - lr * wd * theta.
/// Decay touches W1 and W2 (and b1 only with decay_biases). Throws
/// DivergenceError without modifying anything if a gradient is non-finite.
void adamw_step(MlpParams& params, const MlpGrads& grads, AdamWState& state, const AdamWConfig& cfg,
                const FrozenNeurons& frozen = {});

/// L2 norm over W1, W2 and optionally b1, restricted to active neurons.
double constrained_norm(const MlpParams& params, bool include_biases, const FrozenNeurons& frozen = {});

/// Builds a constraint that pins the current norm.
NormConstraint make_norm_constraint(const MlpParams& params, bool include_biases,
                                    const FrozenNeurons& frozen = {});

/// Rescales the included parameters so their norm equals target_norm.
void norm_project(MlpParams& params, const NormConstraint& constraint, const FrozenNeurons& frozen = {});

}  // namespace grokinfo
