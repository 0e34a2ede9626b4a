#include "grokinfo/hoi.hpp"

#include "helpers.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace grokinfo;

namespace {

constexpr double kPhiInv75 = 0.6744897501960817;
constexpr double kH1 = 1.4189385332046727;  // 0.5 ln(2 pi e)

CopulaCovariance cov_of(const Eigen::MatrixXd& sigma) {
    CopulaCovariance c;
    c.sigma = sigma;
    c.columns.resize(sigma.rows());
    std::iota(c.columns.begin(), c.columns.end(), 0);
    c.position = c.columns;
    c.n_samples = 1000;
    return c;
}

}  // namespace

TEST_CASE("copula transform of a three-sample column") {
    Eigen::MatrixXd x(3, 1);
    x << 3.2, -1.0, 0.5;
    const auto cm = copula_transform(x);
    CHECK(cm.data(0, 0) == doctest::Approx(kPhiInv75).epsilon(1e-12));
    CHECK(cm.data(1, 0) == doctest::Approx(-kPhiInv75).epsilon(1e-12));
    CHECK(std::abs(cm.data(2, 0)) < 1e-15);
}

TEST_CASE("average ranks share ties") {
    Eigen::VectorXd v(5);
    v << 2.0, 1.0, 2.0, 5.0, 2.0;
    const auto r = average_ranks(v);
    CHECK(r[1] == 1.0);
    CHECK(r[0] == 3.0);
    CHECK(r[2] == 3.0);
    CHECK(r[4] == 3.0);
    CHECK(r[3] == 5.0);
}

TEST_CASE("constant columns are flagged degenerate") {
    Rng rng(30);
    Eigen::MatrixXd x = testutil::gaussian(20, 3, rng);
    x.col(1).setConstant(4.0);
    const auto cm = copula_transform(x);
    CHECK(cm.degenerate[1]);
    CHECK_FALSE(cm.degenerate[0]);
    CHECK(cm.n_usable() == 2);
    const auto cov = build_covariance(cm);
    CHECK(cov.size() == 2);
    CHECK(cov.position[1] == -1);
    CHECK_THROWS(cov.submatrix(std::vector<int>{0, 1}));
    CHECK_THROWS(copula_transform(Eigen::MatrixXd::Ones(10, 2)));
    CHECK_THROWS(copula_transform(Eigen::MatrixXd::Random(2, 2)));
}

TEST_CASE("closed-form Gaussian entropies") {
    CHECK(std::abs(gaussian_entropy(Eigen::MatrixXd::Identity(1, 1)) - kH1) < 1e-9);
    CHECK(std::abs(gaussian_entropy(Eigen::MatrixXd::Identity(2, 2)) - 2.8378770664093453) < 1e-9);
    Eigen::MatrixXd s(2, 2);
    s << 1.0, 0.5, 0.5, 1.0;
    CHECK(std::abs(gaussian_entropy(s) - 2.6940360301834548) < 1e-9);
    CHECK(std::abs(gaussian_entropy(4.0 * Eigen::MatrixXd::Identity(1, 1)) - (kH1 + std::log(2.0))) < 1e-12);

    Rng rng(31);
    for (int d = 1; d <= 6; ++d) {
        const auto a = testutil::random_spd(d, rng);
        CHECK(std::abs(gaussian_entropy(a) - oracle::entropy_lu(a)) < 1e-10);
    }
}

TEST_CASE("bias correction matches digamma constants") {
    // N = 4, k = 2: psi(3/2) = 2 - gamma - 2 ln 2, psi(1) = -gamma
    const double gamma = 0.5772156649015329;
    const double corr = (std::log(2.0) - std::log(3.0)) + 0.5 * ((2 - gamma - 2 * std::log(2.0)) - gamma);
    CHECK(std::abs(gaussian_entropy(Eigen::MatrixXd::Identity(2, 2), {}, 4) - (2.8378770664093453 - corr)) < 1e-12);
    CHECK_THROWS(gaussian_entropy(Eigen::MatrixXd::Identity(2, 2), {}, 3));
}

TEST_CASE("pairs have zero O-Information") {
    Rng rng(32);
    const auto cov = cov_of(testutil::random_spd(5, rng));
    for (int i = 0; i < 5; ++i)
        for (int j = i + 1; j < 5; ++j) CHECK(std::abs(o_information(std::vector<int>{i, j}, cov)) < 1e-12);
}

TEST_CASE("diagonal covariance gives zero for every multiplet") {
    Eigen::VectorXd d(5);
    d << 1.0, 2.0, 0.5, 3.0, 1.5;
    const auto cov = cov_of(d.asDiagonal());
    CHECK(std::abs(o_information(std::vector<int>{0, 1, 2}, cov)) < 1e-12);
    CHECK(std::abs(o_information(std::vector<int>{0, 1, 2, 3, 4}, cov)) < 1e-12);
}

TEST_CASE("sum of two independent sources is synergistic") {
    Eigen::MatrixXd s(3, 3);
    s << 1, 0, 1,  //
        0, 1, 1,   //
        1, 1, 2.01;
    const auto cov = cov_of(s);
    const double w = o_information(std::vector<int>{0, 1, 2}, cov);
    CHECK(w < 0.0);
    CHECK(std::abs(w - oracle::o_information(s, {0, 1, 2})) < 1e-10);
}

TEST_CASE("shared common driver is redundant") {
    Eigen::MatrixXd s = Eigen::MatrixXd::Constant(3, 3, 0.8);
    s.diagonal().setOnes();
    CHECK(o_information(std::vector<int>{0, 1, 2}, cov_of(s)) > 0.0);
}

TEST_CASE("O-Information agrees with the LU reference and ignores subset order") {
    Rng rng(33);
    for (int trial = 0; trial < 10; ++trial) {
        const auto s = testutil::random_spd(6, rng);
        const auto cov = cov_of(s);
        const std::vector<int> sub{4, 0, 2, 5};
        CHECK(std::abs(o_information(sub, cov) - oracle::o_information(s, {0, 2, 4, 5})) < 1e-10);
        CHECK(o_information(sub, cov) == o_information(std::vector<int>{0, 2, 4, 5}, cov));
    }
    CHECK_THROWS(o_information(std::vector<int>{1, 1, 2}, cov_of(Eigen::MatrixXd::Identity(3, 3))));
    CHECK_THROWS(o_information(std::vector<int>{1}, cov_of(Eigen::MatrixXd::Identity(3, 3))));
}

TEST_CASE("estimates from the pooled covariance equal per-subset re-estimates") {
    Rng rng(34);
    Eigen::MatrixXd x = testutil::gaussian(300, 5, rng);
    x.col(3) += 0.7 * x.col(0) - 0.4 * x.col(1);
    x.col(4) = x.col(4).array().exp();
    const auto cm = copula_transform(x);
    const auto cov = build_covariance(cm);
    const std::vector<int> sub{0, 1, 3, 4};
    // covariance of just these columns, computed longhand
    Eigen::MatrixXd c(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            const auto a = cm.data.col(sub[i]), b = cm.data.col(sub[j]);
            const double ma = a.mean(), mb = b.mean();
            double acc = 0.0;
            for (Eigen::Index r = 0; r < a.size(); ++r) acc += (a[r] - ma) * (b[r] - mb);
            c(i, j) = acc / static_cast<double>(a.size() - 1);
        }
    CHECK(std::abs(o_information(sub, cov) - oracle::o_information(c, {0, 1, 2, 3})) < 1e-10);
}

TEST_CASE("monotone transforms of the data leave Omega unchanged") {
    Rng rng(35);
    Eigen::MatrixXd x = testutil::gaussian(200, 4, rng);
    x.col(2) += x.col(0) + x.col(1);
    Eigen::MatrixXd y = x;
    y.col(0) = x.col(0).array().exp();
    y.col(1) = x.col(1).array().cube() * 3.0 + 7.0;
    y.col(2) = x.col(2).array().sinh();
    const auto a = build_covariance(copula_transform(x)), b = build_covariance(copula_transform(y));
    const std::vector<int> sub{0, 1, 2, 3};
    CHECK(std::abs(o_information(sub, a) - o_information(sub, b)) < 1e-12);
}

TEST_CASE("identical columns stay finite through regularisation") {
    Rng rng(36);
    Eigen::MatrixXd x = testutil::gaussian(100, 3, rng);
    x.col(1) = x.col(0);
    const auto cov = build_covariance(copula_transform(x));
    const double w = o_information(std::vector<int>{0, 1, 2}, cov);
    CHECK(std::isfinite(w));
    CHECK(w > 0.0);
}

TEST_CASE("independent Gaussian data gives Omega near zero") {
    Rng rng(37);
    const auto cov = build_covariance(copula_transform(testutil::gaussian(5000, 4, rng)));
    CHECK(std::abs(o_information(std::vector<int>{0, 1, 2, 3}, cov)) < 0.02);
    CHECK(std::abs(cov.sigma(0, 1)) < 0.05);
}
