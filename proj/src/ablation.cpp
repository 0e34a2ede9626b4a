#include "grokinfo/ablation.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>

namespace grokinfo {

namespace fs = std::filesystem;
using nlohmann::json;

const char* mask_source_name(MaskSource source) {
    switch (source) {
        case MaskSource::SynergySubset: return "synergy_subset";
        case MaskSource::Inverse: return "inverse";
        case MaskSource::Full: return "full";
        case MaskSource::Custom: return "custom";
    }
    return "custom";
}

std::size_t NeuronMask::active() const {
    return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

NeuronMask NeuronMask::full(int n_hidden) {
    NeuronMask m;
    m.mask.assign(static_cast<std::size_t>(n_hidden), 1);
    m.source = MaskSource::Full;
    return m;
}

NeuronMask mask_from_bins(const BinAssignment& assignment, std::span<const int> subset) {
    std::vector<bool> wanted(static_cast<std::size_t>(assignment.k_bins), false);
    for (int b : subset) {
        if (b < 0 || b >= assignment.k_bins)
            throw std::invalid_argument("mask_from_bins: unknown bin id " + std::to_string(b));
        wanted[b] = true;
    }
    NeuronMask m;
    m.source = MaskSource::SynergySubset;
    m.source_epoch = assignment.epoch;
    m.source_subset.assign(subset.begin(), subset.end());
    for (int label : assignment.labels) m.mask.push_back(wanted.at(static_cast<std::size_t>(label)) ? 1 : 0);
    return m;
}

NeuronMask invert_mask(const NeuronMask& mask) {
    NeuronMask m = mask;
    for (auto& v : m.mask) v = v ? 0 : 1;
    if (mask.source == MaskSource::SynergySubset) m.source = MaskSource::Inverse;
    else if (mask.source == MaskSource::Inverse) m.source = MaskSource::SynergySubset;
    else m.source = MaskSource::Custom;
    return m;
}

MaskedRun train_masked(RunConfig config, const NeuronMask& mask, const RunOptions& opts) {
    if (static_cast<int>(mask.mask.size()) != config.n_hidden)
        throw std::invalid_argument("train_masked: mask length must equal n_hidden");
    // An all-true mask is the unmasked model; storing it empty keeps the
    // trajectory identical to the base run.
    const bool all_on = std::all_of(mask.mask.begin(), mask.mask.end(), [](auto v) { return v != 0; });
    config.mask = all_on ? HiddenGate{} : mask.mask;
    MaskedRun out;
    out.degenerate = mask.active() == 0;
    out.run = run_experiment(config, opts);
    return out;
}

RunTrace RunTrace::from_run(const std::string& name, const RunResult& run) {
    return {name, run.epochs(), run.test_acc()};
}

const char* verdict_name(AblationVerdict v) {
    switch (v) {
        case AblationVerdict::Synergistic: return "synergistic";
        case AblationVerdict::Inverse: return "inverse";
        case AblationVerdict::Tie: return "tie";
    }
    return "tie";
}

namespace {

std::optional<long long> first_cross(const RunTrace& t, double tau) {
    for (std::size_t i = 0; i < t.epochs.size(); ++i)
        if (t.test_acc[i] >= tau) return t.epochs[i];
    return std::nullopt;
}

double at_epoch(const RunTrace& t, long long epoch) {
    if (t.epochs.empty()) return 0.0;
    // last record at or before the epoch
    auto it = std::upper_bound(t.epochs.begin(), t.epochs.end(), epoch);
    if (it == t.epochs.begin()) return t.test_acc.front();
    return t.test_acc[static_cast<std::size_t>(std::distance(t.epochs.begin(), it)) - 1];
}

}  // namespace

AblationComparison compare_ablation(const RunTrace& base, const RunTrace& syn, const RunTrace& inv, double tau) {
    AblationComparison c;
    c.tau = tau;
    c.base_cross = first_cross(base, tau);
    c.syn_cross = first_cross(syn, tau);
    c.inv_cross = first_cross(inv, tau);
    c.base_final = base.test_acc.empty() ? 0.0 : base.test_acc.back();
    c.syn_final = syn.test_acc.empty() ? 0.0 : syn.test_acc.back();
    c.inv_final = inv.test_acc.empty() ? 0.0 : inv.test_acc.back();
    if (c.base_cross && c.syn_cross) c.syn_delay_delta = *c.syn_cross - *c.base_cross;
    if (c.base_cross && c.inv_cross) c.inv_delay_delta = *c.inv_cross - *c.base_cross;
    c.syn_final_delta = c.syn_final - c.base_final;
    c.inv_final_delta = c.inv_final - c.base_final;
    c.matched_epoch = c.base_cross ? *c.base_cross : (base.epochs.empty() ? 0 : base.epochs.back());
    c.syn_at_matched = at_epoch(syn, c.matched_epoch);
    c.inv_at_matched = at_epoch(inv, c.matched_epoch);

    if (c.syn_cross && !c.inv_cross) c.verdict = AblationVerdict::Synergistic;
    else if (!c.syn_cross && c.inv_cross) c.verdict = AblationVerdict::Inverse;
    else if (c.syn_cross && c.inv_cross && *c.syn_cross != *c.inv_cross)
        c.verdict = *c.syn_cross < *c.inv_cross ? AblationVerdict::Synergistic : AblationVerdict::Inverse;
    else if (c.syn_at_matched != c.inv_at_matched)
        c.verdict = c.syn_at_matched > c.inv_at_matched ? AblationVerdict::Synergistic : AblationVerdict::Inverse;
    else c.verdict = AblationVerdict::Tie;
    return c;
}

const char* ablation_kind_name(AblationKind kind) {
    switch (kind) {
        case AblationKind::LowDecayDelayed: return "low_decay_delayed";
        case AblationKind::HighDecayEmergence: return "high_decay_emergence";
        case AblationKind::AlphaEmergence: return "alpha_emergence";
    }
    return "?";
}

AblationKind parse_ablation_kind(const std::string& name) {
    for (auto k : {AblationKind::LowDecayDelayed, AblationKind::HighDecayEmergence, AblationKind::AlphaEmergence})
        if (name == ablation_kind_name(k)) return k;
    throw std::invalid_argument("unknown ablation kind '" + name + "'");
}

Phase source_phase(AblationKind kind) {
    return kind == AblationKind::LowDecayDelayed ? Phase::DelayedEmergence : Phase::Emergence;
}

NeuronMask select_synergy_mask(const RunResult& base, AblationKind kind) {
    const Phase phase = source_phase(kind);
    const std::optional<PhaseInterval> iv = base.phases ? base.phases->find(phase) : std::nullopt;
    if (!iv)
        throw MissingPhaseError(std::string("base run has no ") + phase_name(phase) + " interval" +
                                (base.phase_error.empty() ? "" : " (" + base.phase_error + ")"));

    // Phase indices count valid points only.
    std::vector<std::size_t> valid;
    for (std::size_t i = 0; i < base.progress.points.size(); ++i)
        if (base.progress.points[i].valid) valid.push_back(i);
    std::size_t best = valid.at(iv->start_index);
    for (std::size_t k = iv->start_index; k <= iv->end_index; ++k) {
        const std::size_t i = valid.at(k);
        if (base.progress.syn_norm[i] > base.progress.syn_norm[best]) best = i;
    }
    const auto& point = base.progress.points[best];
    if (best >= base.assignments.size() || base.assignments[best].epoch != point.epoch)
        throw std::runtime_error("base run has no bin assignment for epoch " + std::to_string(point.epoch));
    return mask_from_bins(base.assignments[best], point.syn_subset);
}

void write_masks_json(const fs::path& path, const std::vector<NeuronMask>& masks) {
    json arr = json::array();
    for (const auto& m : masks) {
        std::string bits;
        for (auto v : m.mask) bits += v ? '1' : '0';
        arr.push_back({{"source", mask_source_name(m.source)},
                       {"source_epoch", m.source_epoch},
                       {"source_subset", m.source_subset},
                       {"active", m.active()},
                       {"mask", bits}});
    }
    std::ofstream out(path);
    out << json{{"schema_version", kSchemaVersion}, {"masks", arr}}.dump(2) << '\n';
}

void write_comparison(const fs::path& dir, const AblationComparison& c, const RunTrace& base, const RunTrace& syn,
                      const RunTrace& inv) {
    fs::create_directories(dir);
    auto opt = [](const std::optional<long long>& v) { return v ? json(*v) : json(nullptr); };
    json j{{"schema_version", kSchemaVersion},
           {"tau", c.tau},
           {"runs",
            {{"base", {{"test_cross_epoch", opt(c.base_cross)}, {"final_test_acc", c.base_final}}},
             {"synergistic", {{"test_cross_epoch", opt(c.syn_cross)}, {"final_test_acc", c.syn_final}}},
             {"inverse", {{"test_cross_epoch", opt(c.inv_cross)}, {"final_test_acc", c.inv_final}}}}},
           {"deltas",
            {{"syn_grok_delay", opt(c.syn_delay_delta)},
             {"inv_grok_delay", opt(c.inv_delay_delta)},
             {"syn_final_acc", c.syn_final_delta},
             {"inv_final_acc", c.inv_final_delta}}},
           {"matched_epoch", c.matched_epoch},
           {"syn_at_matched", c.syn_at_matched},
           {"inv_at_matched", c.inv_at_matched},
           {"verdict", verdict_name(c.verdict)}};
    std::ofstream(dir / "comparison.json") << j.dump(2) << '\n';

    std::ofstream csv(dir / "comparison.csv");
    csv << "# schema_version=" << kSchemaVersion << '\n';
    csv << "epoch,base_test_acc,syn_test_acc,inv_test_acc\n";
    const std::size_t n = std::min({base.epochs.size(), syn.epochs.size(), inv.epochs.size()});
    for (std::size_t i = 0; i < n; ++i)
        csv << base.epochs[i] << ',' << base.test_acc[i] << ',' << syn.test_acc[i] << ',' << inv.test_acc[i] << '\n';
}

AblationOutcome run_ablation(const RunResult& base, AblationKind kind, const AblationOptions& opts) {
    AblationOutcome out;
    out.syn_mask = select_synergy_mask(base, kind);
    out.inv_mask = invert_mask(out.syn_mask);

    const fs::path dir = opts.output_dir.empty() ? base.dir / (std::string("ablation_") + ablation_kind_name(kind))
                                                 : opts.output_dir;
    RunConfig cfg = base.config;
    cfg.mask.clear();
    if (opts.resume) {
        const long long every = cfg.schedule.checkpoint_every;
        if (every <= 0) throw std::invalid_argument("run_ablation: resume needs periodic base checkpoints");
        const long long epoch = (out.syn_mask.source_epoch / every) * every;
        cfg.schedule.resume_from = (base.dir / "checkpoints" / ("epoch_" + std::to_string(epoch))).string();
    }
    if (opts.write_artifacts) {
        fs::create_directories(dir);
        write_masks_json(dir / "masks.json", {out.syn_mask, out.inv_mask});
    }
    RunOptions ro;
    ro.write_artifacts = opts.write_artifacts;
    cfg.output_dir = dir / "synergistic";
    out.syn_run = train_masked(cfg, out.syn_mask, ro).run;
    cfg.output_dir = dir / "inverse";
    out.inv_run = train_masked(cfg, out.inv_mask, ro).run;

    const RunTrace tb = RunTrace::from_run("base", base);
    const RunTrace ts = RunTrace::from_run("synergistic", out.syn_run);
    const RunTrace ti = RunTrace::from_run("inverse", out.inv_run);
    out.comparison = compare_ablation(tb, ts, ti, base.config.analysis.grok.tau);
    if (opts.write_artifacts) {
        write_comparison(dir, out.comparison, tb, ts, ti);
        std::ofstream(dir / "ablation.json")
            << json{{"schema_version", kSchemaVersion},
                    {"kind", ablation_kind_name(kind)},
                    {"base_dir", fs::absolute(base.dir).string()},
                    {"base_config_hash", base.config_hash},
                    {"source_phase", phase_name(source_phase(kind))},
                    {"resume", opts.resume}}
                       .dump(2)
            << '\n';
    }
    return out;
}

}  // namespace grokinfo
