#include "grokinfo/phases.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace grokinfo;

namespace {

struct Piece {
    int length;
    double syn, red, size, loss, acc;  // per-point slopes
};

// Builds a series whose normalised syn/red and raw size/loss/acc follow
// piecewise-linear slopes.
ProgressSeries piecewise(const std::vector<Piece>& pieces) {
    ProgressSeries ps;
    double s = 0.0, r = 1.0, z = 50.0, l = 5.0, a = 0.0;
    long long e = 0;
    for (const auto& pc : pieces)
        for (int i = 0; i < pc.length; ++i) {
            ProgressPoint p;
            p.epoch = e;
            e += 10;
            p.syn_size_bins = static_cast<int>(std::lround(z));
            p.test_loss = l;
            p.test_acc = a;
            ps.points.push_back(p);
            ps.syn_norm.push_back(s);
            ps.red_norm.push_back(r);
            s += pc.syn;
            r += pc.red;
            z += pc.size;
            l += pc.loss;
            a += pc.acc;
        }
    return ps;
}

}  // namespace

TEST_CASE("grokking detection on a delayed curve") {
    const std::vector<long long> ep{0, 10, 20, 30, 300, 400};
    const std::vector<double> tr{0.1, 0.5, 0.99, 1.0, 1.0, 1.0};
    const std::vector<double> te{0.0, 0.0, 0.1, 0.2, 0.96, 0.99};
    const auto g = detect_grokking(ep, tr, te);
    CHECK(*g.train_cross_epoch == 20);
    CHECK(*g.test_cross_epoch == 300);
    CHECK(*g.gap == 280);
    CHECK(g.grokked);

    GrokOptions strict;
    strict.train_tau = 0.995;
    CHECK(*detect_grokking(ep, tr, te, strict).train_cross_epoch == 30);

    GrokOptions big_gap;
    big_gap.min_gap = 500;
    const auto g2 = detect_grokking(ep, tr, te, big_gap);
    CHECK_FALSE(g2.grokked);
    CHECK(g2.reasons.size() == 1);
}

TEST_CASE("no test crossing means no grokking") {
    const std::vector<long long> ep{0, 1, 2};
    const std::vector<double> tr{0.2, 1.0, 1.0}, te{0.1, 0.3, 0.5};
    const auto g = detect_grokking(ep, tr, te);
    CHECK_FALSE(g.grokked);
    CHECK_FALSE(g.test_cross_epoch);
    CHECK_FALSE(g.gap);
    CHECK_THROWS(detect_grokking(ep, tr, std::vector<double>{0.1}));
}

TEST_CASE("raising tau never moves a crossing earlier") {
    std::vector<long long> ep(200);
    std::vector<double> tr(200), te(200);
    for (int i = 0; i < 200; ++i) {
        ep[i] = i * 5;
        tr[i] = std::min(1.0, i / 20.0);
        te[i] = 1.0 - std::exp(-i / 60.0) + 0.02 * std::sin(i);
    }
    long long prev = -1;
    for (double tau = 0.5; tau <= 0.95; tau += 0.05) {
        GrokOptions o;
        o.tau = tau;
        const auto g = detect_grokking(ep, tr, te, o);
        REQUIRE(g.test_cross_epoch);
        CHECK(*g.test_cross_epoch >= prev);
        prev = *g.test_cross_epoch;
    }
}

TEST_CASE("piecewise synthetic series is segmented at the designed boundaries") {
    const auto ps = piecewise({
        {200, 0.004, -0.004, 0.1, -0.01, 0.0},     // Emergence
        {200, -0.004, 0.004, 0.0, -0.01, 0.004},   // Decoupling
        {200, 0.0, 0.0, 0.0, 0.0, 0.0},            // Finalizing
    });
    PhaseOptions o;
    o.smoothing_window = 15;
    const auto seg = segment_phases(ps, o);
    REQUIRE(seg.intervals.size() == 3);
    CHECK(seg.intervals[0].label == Phase::Emergence);
    CHECK(seg.intervals[1].label == Phase::Decoupling);
    CHECK(seg.intervals[2].label == Phase::Finalizing);
    CHECK(std::llabs(static_cast<long long>(seg.intervals[1].start_index) - 200) <= 15);
    CHECK(std::llabs(static_cast<long long>(seg.intervals[2].start_index) - 400) <= 15);
    CHECK(seg.intervals[0].start_index == 0);
    CHECK(seg.intervals[2].end_index == 599);
    CHECK(seg.find(Phase::Decoupling));
    CHECK_FALSE(seg.find(Phase::Divergence));
}

TEST_CASE("divergence followed by delayed emergence") {
    const auto ps = piecewise({
        {150, -0.004, -0.004, -0.1, 0.0, 0.0},    // Divergence
        {150, 0.004, 0.004, 0.1, -0.01, 0.0},     // DelayedEmergence
        {150, 0.0, 0.0, 0.0, 0.0, 0.01},
    });
    PhaseOptions o;
    o.smoothing_window = 15;
    const auto seg = segment_phases(ps, o);
    REQUIRE(seg.intervals.size() >= 2);
    CHECK(seg.intervals[0].label == Phase::Divergence);
    CHECK(seg.intervals[1].label == Phase::DelayedEmergence);
}

TEST_CASE("intervals partition the valid points") {
    const auto ps = piecewise({{120, 0.003, -0.002, 0.1, -0.01, 0.0}, {180, -0.001, 0.003, 0.0, -0.005, 0.002}});
    const auto seg = segment_phases(ps);
    REQUIRE_FALSE(seg.intervals.empty());
    CHECK(seg.intervals.front().start_index == 0);
    CHECK(seg.intervals.back().end_index == 299);
    for (std::size_t i = 1; i < seg.intervals.size(); ++i)
        CHECK(seg.intervals[i].start_index == seg.intervals[i - 1].end_index + 1);
}

TEST_CASE("a constant series is a single Finalizing interval") {
    const auto ps = piecewise({{100, 0.0, 0.0, 0.0, 0.0, 0.0}});
    const auto seg = segment_phases(ps);
    REQUIRE(seg.intervals.size() == 1);
    CHECK(seg.intervals[0].label == Phase::Finalizing);
}

TEST_CASE("monotone rise in synergy with falling redundancy is Emergence") {
    const auto ps = piecewise({{100, 0.01, -0.01, 0.1, -0.01, 0.0}});
    const auto seg = segment_phases(ps);
    REQUIRE(seg.intervals.size() == 1);
    CHECK(seg.intervals[0].label == Phase::Emergence);
}

TEST_CASE("too few points is an error") {
    CHECK_THROWS(segment_phases(piecewise({{10, 0.0, 0.0, 0.0, 0.0, 0.0}})));
}

TEST_CASE("phase names round-trip") {
    for (Phase p : {Phase::FeatureLearning, Phase::Emergence, Phase::Divergence, Phase::DelayedEmergence,
                    Phase::Decoupling, Phase::Finalizing})
        CHECK(parse_phase(phase_name(p)) == p);
    CHECK_THROWS(parse_phase("Nope"));
}

TEST_CASE("prominence") {
    const std::vector<double> v{0.0, 1.0, 0.3, 0.8, 0.5, 2.0, 0.0};
    CHECK(peak_prominence(v, 1) == doctest::Approx(0.7));
    CHECK(peak_prominence(v, 3) == doctest::Approx(0.3));
    CHECK(peak_prominence(v, 5) == doctest::Approx(2.0));
}

TEST_CASE("early peak prediction") {
    std::vector<long long> ep(100);
    std::iota(ep.begin(), ep.end(), 0);
    std::vector<double> bump(100, 0.1);
    for (int i = 5; i <= 15; ++i) bump[i] = 0.1 + 0.9 * (1.0 - std::abs(i - 10) / 5.0);
    const auto p = predict_from_early_peak(ep, bump, 20);
    CHECK(p.predicted);
    CHECK(*p.peak_epoch == 10);
    CHECK(p.peak_height == doctest::Approx(1.0));
    CHECK(p.prominence == doctest::Approx(0.9));

    // a peak outside the window does not count
    CHECK_FALSE(predict_from_early_peak(ep, bump, 9).predicted);

    std::vector<double> rising(100);
    for (int i = 0; i < 100; ++i) rising[i] = i / 99.0;
    CHECK_FALSE(predict_from_early_peak(ep, rising, 50).predicted);

    std::vector<double> small(100, 0.0);
    small[10] = 0.1;
    CHECK_FALSE(predict_from_early_peak(ep, small, 50).predicted);
    CHECK(predict_from_early_peak(ep, small, 50, 0.05).predicted);
}

TEST_CASE("plateau peaks are reported at their middle") {
    const std::vector<long long> ep{0, 1, 2, 3, 4, 5, 6};
    const std::vector<double> v{0.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0};
    const auto p = predict_from_early_peak(ep, v, 6);
    REQUIRE(p.predicted);
    CHECK(*p.peak_epoch == 2);
}

TEST_CASE("appending later points leaves the prediction unchanged") {
    std::vector<long long> ep;
    std::vector<double> v;
    for (int i = 0; i < 60; ++i) {
        ep.push_back(i * 10);
        v.push_back(i == 12 ? 0.9 : (i == 30 ? 0.7 : 0.1));
    }
    const auto a = predict_from_early_peak(ep, v, 300);
    for (int i = 60; i < 200; ++i) {
        ep.push_back(i * 10);
        v.push_back(0.5 + 0.5 * std::sin(i));
    }
    const auto b = predict_from_early_peak(ep, v, 300);
    CHECK(a.predicted == b.predicted);
    CHECK(a.peak_epoch == b.peak_epoch);
    CHECK(a.prominence == b.prominence);
    CHECK(default_peak_window(ep) == 398);
}
