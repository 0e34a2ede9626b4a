#include "grokinfo/hoi.hpp"

#include <Eigen/Cholesky>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/digamma.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace grokinfo {

namespace {

std::string subset_str(std::span<const int> subset) {
    std::string s = "{";
    for (std::size_t i = 0; i < subset.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(subset[i]);
    }
    return s + "}";
}

}  // namespace

int CopulaMatrix::n_usable() const {
    return static_cast<int>(std::count(degenerate.begin(), degenerate.end(), false));
}

Eigen::MatrixXd CopulaCovariance::submatrix(std::span<const int> subset) const {
    const auto k = static_cast<Eigen::Index>(subset.size());
    std::vector<int> rows(subset.size());
    for (std::size_t i = 0; i < subset.size(); ++i) {
        const int c = subset[i];
        if (c < 0 || c >= static_cast<int>(position.size()) || position[c] < 0)
            throw std::invalid_argument("variable " + std::to_string(c) + " is degenerate or unknown in subset " +
                                        subset_str(subset));
        rows[i] = position[c];
    }
    Eigen::MatrixXd out(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < k; ++j) out(i, j) = sigma(rows[i], rows[j]);
    return out;
}

Eigen::VectorXd average_ranks(const Eigen::Ref<const Eigen::VectorXd>& column) {
    const auto s = column.size();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(s));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return column[a] < column[b]; });
    Eigen::VectorXd ranks(s);
    Eigen::Index i = 0;
    while (i < s) {
        Eigen::Index j = i;
        while (j + 1 < s && column[order[j + 1]] == column[order[i]]) ++j;
        // positions i..j (0-based) share rank mean((i+1)..(j+1))
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (Eigen::Index t = i; t <= j; ++t) ranks[order[t]] = r;
        i = j + 1;
    }
    return ranks;
}

CopulaMatrix copula_transform(const Eigen::Ref<const Eigen::MatrixXd>& x) {
    const auto s = x.rows();
    if (s < 3) throw std::invalid_argument("copula_transform: need at least 3 samples");
    const boost::math::normal_distribution<double> standard;
    CopulaMatrix cm;
    cm.data = Eigen::MatrixXd::Zero(s, x.cols());
    cm.degenerate.assign(static_cast<std::size_t>(x.cols()), false);
    const double denom = static_cast<double>(s) + 1.0;
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        const auto col = x.col(c);
        if (!col.allFinite()) throw std::invalid_argument("copula_transform: non-finite input");
        if (col.maxCoeff() == col.minCoeff()) {
            cm.degenerate[static_cast<std::size_t>(c)] = true;
            continue;
        }
        const Eigen::VectorXd ranks = average_ranks(col);
        for (Eigen::Index r = 0; r < s; ++r)
            cm.data(r, c) = boost::math::quantile(standard, ranks[r] / denom);
    }
    if (cm.n_usable() == 0) throw std::invalid_argument("copula_transform: all columns are degenerate");
    return cm;
}

double gaussian_entropy(const Eigen::Ref<const Eigen::MatrixXd>& sigma, std::span<const int> subset,
                        Eigen::Index bias_correct_samples) {
    const auto k = sigma.rows();
    if (k == 0 || sigma.cols() != k) throw std::invalid_argument("gaussian_entropy: need a non-empty square matrix");
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success) {
        Eigen::MatrixXd reg = sigma;
        reg.diagonal().array() += 1e-12 * sigma.diagonal().mean();
        llt.compute(reg);
        if (llt.info() != Eigen::Success)
            throw SingularSubsetError("gaussian_entropy: covariance of subset " + subset_str(subset) +
                                          " is not positive definite",
                                      {subset.begin(), subset.end()});
    }
    const Eigen::MatrixXd& l = llt.matrixLLT();
    double logdet_half = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) logdet_half += std::log(l(i, i));
    const double dk = static_cast<double>(k);
    double h = logdet_half + 0.5 * dk * std::log(2.0 * std::numbers::pi * std::numbers::e);
    if (bias_correct_samples > 0) {
        const auto n = static_cast<double>(bias_correct_samples);
        if (n <= dk + 1.0) throw std::invalid_argument("gaussian_entropy: too few samples for bias correction");
        const double dterm = 0.5 * (std::numbers::ln2 - std::log(n - 1.0));
        double psi = 0.0;
        for (int i = 1; i <= k; ++i) psi += 0.5 * boost::math::digamma((n - i) / 2.0);
        h -= dk * dterm + psi;
    }
    return h;
}

CopulaCovariance build_covariance(const CopulaMatrix& cm, bool bias_correction) {
    CopulaCovariance cov;
    cov.n_samples = cm.n_samples();
    cov.bias_correction = bias_correction;
    cov.position.assign(cm.degenerate.size(), -1);
    for (std::size_t c = 0; c < cm.degenerate.size(); ++c) {
        if (cm.degenerate[c]) continue;
        cov.position[c] = static_cast<int>(cov.columns.size());
        cov.columns.push_back(static_cast<int>(c));
    }
    if (cov.columns.size() < 2) throw std::invalid_argument("build_covariance: fewer than 2 usable columns");
    if (cov.n_samples < 2) throw std::invalid_argument("build_covariance: need at least 2 samples");

    Eigen::MatrixXd used(cm.n_samples(), static_cast<Eigen::Index>(cov.columns.size()));
    for (std::size_t i = 0; i < cov.columns.size(); ++i) used.col(static_cast<Eigen::Index>(i)) = cm.data.col(cov.columns[i]);
    const Eigen::RowVectorXd mean = used.colwise().mean();
    used.rowwise() -= mean;
    cov.sigma.noalias() = used.transpose() * used;
    cov.sigma /= static_cast<double>(cov.n_samples - 1);
    // exact symmetry for downstream factorisations
    cov.sigma = (0.5 * (cov.sigma + cov.sigma.transpose())).eval();
    return cov;
}

double subset_entropy(std::span<const int> subset, const CopulaCovariance& cov) {
    return gaussian_entropy(cov.submatrix(subset), subset, cov.bias_correction ? cov.n_samples : 0);
}

double o_information(std::span<const int> subset, const CopulaCovariance& cov) {
    const auto n = subset.size();
    if (n < 2) throw std::invalid_argument("o_information: subset needs at least 2 variables");
    // Sorting makes the result independent of the order the caller used.
    std::vector<int> s(subset.begin(), subset.end());
    std::sort(s.begin(), s.end());
    if (std::adjacent_find(s.begin(), s.end()) != s.end())
        throw std::invalid_argument("o_information: duplicate variable in subset " + subset_str(subset));

    double omega = (static_cast<double>(n) - 2.0) * subset_entropy(s, cov);
    std::vector<int> rest;
    rest.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
        rest.clear();
        for (std::size_t i = 0; i < n; ++i)
            if (i != j) rest.push_back(s[i]);
        const int single[1] = {s[j]};
        omega += subset_entropy(single, cov) - subset_entropy(rest, cov);
    }
    return omega;
}

}  // namespace grokinfo
