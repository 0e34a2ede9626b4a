// Gaussian-copula entropy estimation and the O-Information.
//
// Sign convention: Omega > 0 means the multiplet is redundancy-dominated,
// Omega < 0 means it is synergy-dominated. Entropies are in nats.
#pragma once

#include <Eigen/Core>

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace grokinfo {

/// Thrown when a covariance block cannot be factorised even after
/// regularisation. Carries the offending variable subset.
class SingularSubsetError : public std::runtime_error {
public:
    SingularSubsetError(const std::string& what, std::vector<int> subset)
        : std::runtime_error(what), subset_(std::move(subset)) {}
    const std::vector<int>& subset() const { return subset_; }

private:
    std::vector<int> subset_;
};

struct CopulaMatrix {
    Eigen::MatrixXd data;          // s x k; degenerate columns are left at zero
    std::vector<bool> degenerate;  // per column

    Eigen::Index n_samples() const { return data.rows(); }
    int n_usable() const;
};

struct CopulaCovariance {
    Eigen::MatrixXd sigma;     // m x m over usable columns only
    std::vector<int> columns;  // original column index of each row of sigma
    std::vector<int> position; // original column -> row of sigma, or -1
    Eigen::Index n_samples = 0;
    bool bias_correction = false;

    int size() const { return static_cast<int>(columns.size()); }
    /// Principal submatrix for original column indices; throws on degenerate ones.
    Eigen::MatrixXd submatrix(std::span<const int> subset) const;
};

/// Average ranks (1-based) with ties sharing the mean of their positions.
Eigen::VectorXd average_ranks(const Eigen::Ref<const Eigen::VectorXd>& column);

/// Per column: average ranks r -> r/(s+1) -> standard normal quantile.
/// Zero-range columns are flagged degenerate.
CopulaMatrix copula_transform(const Eigen::Ref<const Eigen::MatrixXd>& x);

/// Differential entropy of a Gaussian with covariance sigma:
///   H = 0.5 * log det(sigma) + k/2 * log(2 pi e),
/// with log det taken from the Cholesky diagonal. When the factorisation
/// fails, 1e-12 * mean(diag) is added to the diagonal once.
///
/// With n_samples > 0 the small-sample bias correction of the
/// Gaussian-copula estimator is subtracted:
///   k/2 (ln 2 - ln(N-1)) + 1/2 sum_{i=1..k} psi((N - i)/2).
double gaussian_entropy(const Eigen::Ref<const Eigen::MatrixXd>& sigma, std::span<const int> subset = {},
                        Eigen::Index bias_correct_samples = 0);

/// Unbiased sample covariance (divisor s - 1) over the usable columns.
CopulaCovariance build_covariance(const CopulaMatrix& cm, bool bias_correction = false);

/// Omega(S) = (n - 2) H(S) + sum_j [H(S_j) - H(S \ S_j)], n = |S| >= 2.
double o_information(std::span<const int> subset, const CopulaCovariance& cov);

/// Entropy of a subset of the covariance's original columns.
double subset_entropy(std::span<const int> subset, const CopulaCovariance& cov);

}  // namespace grokinfo
