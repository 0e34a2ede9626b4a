// Two-layer ReLU network f(x) = W2 * relu(W1 x + b1) with manual backprop.
#pragma once

#include "grokinfo/modarith.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace grokinfo {

/// Raised when a forward pass or update produces non-finite values.
class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct MlpParams {
    Eigen::MatrixXd w1;  // n_hidden x 2p
    Eigen::VectorXd b1;  // n_hidden
    Eigen::MatrixXd w2;  // p x n_hidden

    int n_hidden() const { return static_cast<int>(b1.size()); }
    int n_inputs() const { return static_cast<int>(w1.cols()); }
    int n_classes() const { return static_cast<int>(w2.rows()); }

    /// Zero-valued tensors with the same shapes.
    MlpParams zeros_like() const;
    bool all_finite() const;
    void check_shapes() const;
};

/// Gradients share the parameter layout.
using MlpGrads = MlpParams;

enum class InitScheme { UniformFanIn };

struct InitSpec {
    InitScheme scheme = InitScheme::UniformFanIn;
    double alpha = 1.0;
    bool zero_last_layer = false;
    std::uint64_t init_seed = 0;
};

/// Per-neuron gate applied to the hidden activations; empty means "all on".
using HiddenGate = std::vector<std::uint8_t>;

using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ForwardCache {
    RowMatrixXd z1;      // s x n_hidden, relu(W1 x + b1) times the gate
    RowMatrixXd logits;  // s x p
    RowMatrixXd probs;   // s x p softmax
    double loss = 0.0;   // mean cross-entropy, nats
    HiddenGate gate;
};

/// W1 and b1 are drawn from U(-1/sqrt(2p), 1/sqrt(2p)), W2 from
/// U(-1/sqrt(n_hidden), 1/sqrt(n_hidden)); everything is then scaled by alpha.
/// W2 is zero when zero_last_layer is set. Draw order: W1 row-major, b1, W2.
MlpParams init_params(const TaskSpec& task, int n_hidden, const InitSpec& spec);

ForwardCache forward(const MlpParams& params, const InputMatrix& x, std::span<const int> labels,
                     const HiddenGate& gate = {});
/// Same as forward() but reuses the storage already held by `out`.
void forward_into(const MlpParams& params, const InputMatrix& x, std::span<const int> labels, const HiddenGate& gate,
                  ForwardCache& out);

/// Scratch buffers for backward_into().
struct BackwardScratch {
    RowMatrixXd dlogits;
    RowMatrixXd dpre;
};

MlpGrads backward(const MlpParams& params, const ForwardCache& cache, const InputMatrix& x,
                  std::span<const int> labels);
void backward_into(const MlpParams& params, const ForwardCache& cache, const InputMatrix& x,
                   std::span<const int> labels, MlpGrads& grads, BackwardScratch& scratch);

/// Argmax accuracy; ties go to the lowest class index.
double accuracy(const RowMatrixXd& logits, std::span<const int> labels);
inline double accuracy(const ForwardCache& cache, std::span<const int> labels) {
    return accuracy(cache.logits, labels);
}

/// Hidden activations (s x n_hidden) for one split of the dataset.
Eigen::MatrixXd record_activations(const MlpParams& params, const Dataset& data, Split split,
                                   const HiddenGate& gate = {});

}  // namespace grokinfo
