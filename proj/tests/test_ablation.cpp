#include "grokinfo/ablation.hpp"
#include "grokinfo/checkpoint.hpp"
#include "grokinfo/optimizer.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <cmath>

using namespace grokinfo;
namespace fs = std::filesystem;

TEST_CASE("masks from bins and their inverse") {
    BinAssignment a;
    a.labels = {0, 1, 2, 0, 1};
    a.k_bins = 3;
    a.epoch = 12;
    const auto m = mask_from_bins(a, std::vector<int>{0, 2});
    CHECK(m.mask == HiddenGate{1, 0, 1, 1, 0});
    CHECK(m.active() == 3);
    CHECK(m.source_epoch == 12);
    const auto inv = invert_mask(m);
    CHECK(inv.mask == HiddenGate{0, 1, 0, 0, 1});
    CHECK(inv.source == MaskSource::Inverse);
    CHECK(invert_mask(inv).mask == m.mask);
    CHECK_THROWS(mask_from_bins(a, std::vector<int>{3}));
    CHECK(NeuronMask::full(4).active() == 4);
}

TEST_CASE("an all-true mask reproduces the unmasked run exactly") {
    auto cfg = testutil::tiny_config("unused");
    RunOptions ro;
    ro.write_artifacts = false;
    const auto base = run_experiment(cfg, ro);
    const auto masked = train_masked(cfg, NeuronMask::full(cfg.n_hidden), ro);
    REQUIRE(masked.run.metrics.size() == base.metrics.size());
    for (std::size_t i = 0; i < base.metrics.size(); ++i) {
        REQUIRE(masked.run.metrics[i].train_loss == base.metrics[i].train_loss);
        REQUIRE(masked.run.metrics[i].test_acc == base.metrics[i].test_acc);
    }
    CHECK(masked.run.config_hash == base.config_hash);
}

TEST_CASE("an all-false mask pins the loss at ln p") {
    auto cfg = testutil::tiny_config("unused");
    RunOptions ro;
    ro.write_artifacts = false;
    NeuronMask none;
    none.mask.assign(cfg.n_hidden, 0);
    const auto r = train_masked(cfg, none, ro);
    CHECK(r.degenerate);
    for (const auto& m : r.run.metrics) REQUIRE(std::abs(m.train_loss - std::log(11.0)) < 1e-12);
}

TEST_CASE("weights of masked neurons never change") {
    const auto dir = testutil::scratch_dir("masked_weights");
    auto cfg = testutil::tiny_config(dir / "run");
    NeuronMask m;
    m.mask.assign(cfg.n_hidden, 1);
    for (int j = 0; j < cfg.n_hidden; j += 3) m.mask[j] = 0;
    train_masked(cfg, m);
    const auto init = load_checkpoint(dir / "run" / "checkpoints" / "epoch_0");
    const auto last = load_checkpoint(dir / "run" / "checkpoints" / "epoch_59");
    for (int j = 0; j < cfg.n_hidden; ++j) {
        if (m.mask[j]) {
            CHECK(last.params.w1.row(j) != init.params.w1.row(j));
        } else {
            CHECK(last.params.w1.row(j) == init.params.w1.row(j));
            CHECK(last.params.b1[j] == init.params.b1[j]);
            CHECK(last.params.w2.col(j) == init.params.w2.col(j));
        }
    }
    fs::remove_all(dir);
}

TEST_CASE("gating neurons is equivalent to removing them") {
    Rng rng(60);
    const int p = 7, n = 9;
    auto full = testutil::random_params(p, n, rng, 0.5);
    const HiddenGate gate{1, 0, 1, 1, 0, 0, 1, 1, 0};
    std::vector<int> keep;
    for (int j = 0; j < n; ++j)
        if (gate[j]) keep.push_back(j);
    MlpParams small;
    small.w1.resize(static_cast<Eigen::Index>(keep.size()), 2 * p);
    small.b1.resize(static_cast<Eigen::Index>(keep.size()));
    small.w2.resize(p, static_cast<Eigen::Index>(keep.size()));
    for (std::size_t i = 0; i < keep.size(); ++i) {
        small.w1.row(i) = full.w1.row(keep[i]);
        small.b1[i] = full.b1[keep[i]];
        small.w2.col(i) = full.w2.col(keep[i]);
    }
    const auto b = testutil::random_batch(p, 40, rng);
    AdamWConfig cfg;
    cfg.weight_decay = 0.5;
    auto sf = AdamWState::zeros_like(full);
    auto ss = AdamWState::zeros_like(small);
    for (int step = 0; step < 5; ++step) {
        const auto cf = forward(full, b.x, b.y, gate);
        const auto cs = forward(small, b.x, b.y);
        REQUIRE(std::abs(cf.loss - cs.loss) < 1e-12);
        adamw_step(full, backward(full, cf, b.x, b.y), sf, cfg, gate);
        adamw_step(small, backward(small, cs, b.x, b.y), ss, cfg);
    }
    for (std::size_t i = 0; i < keep.size(); ++i)
        CHECK((small.w1.row(i) - full.w1.row(keep[i])).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("comparison verdicts") {
    RunTrace base{"base", {0, 10, 20, 30}, {0.1, 0.5, 0.96, 0.99}};
    RunTrace fast{"syn", {0, 10, 20, 30}, {0.1, 0.96, 0.97, 0.99}};
    RunTrace slow{"inv", {0, 10, 20, 30}, {0.1, 0.2, 0.3, 0.96}};
    RunTrace never{"inv", {0, 10, 20, 30}, {0.1, 0.2, 0.3, 0.4}};

    auto c = compare_ablation(base, fast, slow);
    CHECK(*c.syn_cross == 10);
    CHECK(*c.inv_cross == 30);
    CHECK(*c.syn_delay_delta == -10);
    CHECK(*c.inv_delay_delta == 10);
    CHECK(c.matched_epoch == 20);
    CHECK(c.verdict == AblationVerdict::Synergistic);

    c = compare_ablation(base, never, fast);
    CHECK(c.verdict == AblationVerdict::Inverse);
    CHECK_FALSE(c.syn_delay_delta);

    RunTrace low{"syn", {0, 10, 20, 30}, {0.1, 0.2, 0.35, 0.5}};
    c = compare_ablation(base, low, never);
    CHECK(c.verdict == AblationVerdict::Synergistic);
    c = compare_ablation(base, never, never);
    CHECK(c.verdict == AblationVerdict::Tie);
}

TEST_CASE("a missing source phase fails before any training") {
    const auto dir = testutil::scratch_dir("missing_phase");
    RunResult base;
    base.config = testutil::tiny_config(dir / "base");
    base.dir = dir / "base";
    PhaseSegmentation seg;
    PhaseInterval iv;
    iv.label = Phase::Decoupling;
    seg.intervals.push_back(iv);
    base.phases = seg;
    CHECK_THROWS_AS(select_synergy_mask(base, AblationKind::HighDecayEmergence), MissingPhaseError);
    CHECK_THROWS_AS(run_ablation(base, AblationKind::HighDecayEmergence), MissingPhaseError);
    CHECK_FALSE(fs::exists(dir / "base" / "ablation_high_decay_emergence"));
    base.phases.reset();
    CHECK_THROWS_AS(select_synergy_mask(base, AblationKind::LowDecayDelayed), MissingPhaseError);
    fs::remove_all(dir);
}

TEST_CASE("ablation kinds map to source phases") {
    CHECK(source_phase(AblationKind::LowDecayDelayed) == Phase::DelayedEmergence);
    CHECK(source_phase(AblationKind::HighDecayEmergence) == Phase::Emergence);
    CHECK(source_phase(AblationKind::AlphaEmergence) == Phase::Emergence);
    CHECK(parse_ablation_kind("alpha_emergence") == AblationKind::AlphaEmergence);
    CHECK_THROWS(parse_ablation_kind("other"));
}
