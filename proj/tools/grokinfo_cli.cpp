// grokinfo: command-line entry point for training runs, sweeps, ablations,
// figure-data reports and invariant checks.
#include "grokinfo/ablation.hpp"
#include "grokinfo/experiment.hpp"
#include "grokinfo/report.hpp"
#include "grokinfo/verify.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

using namespace grokinfo;

namespace {

RunConfig make_config(const std::string& path, const std::vector<std::string>& sets, const std::string& out) {
    RunConfig cfg = path.empty() ? RunConfig{} : load_config(path);
    for (const auto& kv : sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
        set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!out.empty()) cfg.output_dir = out;
    cfg.resolve_seeds();
    cfg.validate();
    return cfg;
}

void print_grok(const GrokReport& g, const PeakPrediction& p) {
    auto opt = [](const std::optional<long long>& v) { return v ? std::to_string(*v) : std::string("-"); };
    std::cout << "  train_cross=" << opt(g.train_cross_epoch) << " test_cross=" << opt(g.test_cross_epoch)
              << " gap=" << opt(g.gap) << " grokked=" << (g.grokked ? "yes" : "no")
              << " early_peak=" << (p.predicted ? "yes@" + opt(p.peak_epoch) : std::string("no")) << '\n';
}

int report_checks(const std::vector<VerifyCheck>& checks) {
    bool ok = true;
    for (const auto& c : checks) {
        std::cout << (c.passed ? "[PASS] " : "[FAIL] ") << c.name;
        if (!c.detail.empty()) std::cout << " (" << c.detail << ")";
        std::cout << '\n';
        ok &= c.passed;
    }
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Information-theoretic progress measures for grokking on modular addition"};
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("gen-data", "Write the modular-addition table and its split as CSV");
    TaskSpec task;
    std::string gen_out = "split.csv";
    gen->add_option("--p", task.p, "Modulus")->capture_default_str();
    gen->add_option("--fraction", task.train_fraction, "Training fraction")->capture_default_str();
    gen->add_option("--seed", task.split_seed, "Split seed")->capture_default_str();
    gen->add_option("-o,--out", gen_out, "Output CSV")->capture_default_str();

    std::string config_path, out_dir;
    std::vector<std::string> sets;
    auto add_config_opts = [&](CLI::App* sub) {
        sub->add_option("-c,--config", config_path, "Config file (key = value)");
        sub->add_option("-s,--set", sets, "Override, e.g. --set optim.weight_decay=2.0");
        sub->add_option("-o,--out", out_dir, "Output directory (run.output_dir)");
    };

    auto* train = app.add_subcommand("train", "Train one model and write its artifacts");
    add_config_opts(train);
    bool quiet = false;
    train->add_flag("-q,--quiet", quiet, "No per-epoch log");

    auto* sweep = app.add_subcommand("sweep", "Run a weight-decay or alpha sweep over seeds");
    add_config_opts(sweep);
    std::string axis = "weight_decay";
    std::vector<double> values;
    std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
    int jobs = 1;
    sweep->add_option("--axis", axis, "weight_decay or alpha")
        ->check(CLI::IsMember({"weight_decay", "alpha"}))
        ->capture_default_str();
    sweep->add_option("--values", values, "Axis values")->delimiter(',')->required();
    sweep->add_option("--seeds", seeds, "Master seeds")->delimiter(',')->capture_default_str();
    sweep->add_option("-j,--jobs", jobs, "Parallel runs")->capture_default_str();

    auto* ablate = app.add_subcommand("ablate", "Retrain the synergistic sub-network and its inverse");
    std::string base_dir, which = "high_decay_emergence", ablate_out;
    bool resume = false;
    ablate->add_option("--base", base_dir, "Completed base run directory")->required();
    ablate->add_option("--which", which, "low_decay_delayed | high_decay_emergence | alpha_emergence")
        ->capture_default_str();
    ablate->add_flag("--resume", resume, "Resume from the base checkpoint instead of the initialisation");
    ablate->add_option("-o,--out", ablate_out, "Output directory");

    auto* rep = app.add_subcommand("report", "Collate figure-data files for plotting");
    std::vector<std::string> inputs;
    std::string rep_out = "report";
    bool force = false;
    rep->add_option("inputs", inputs, "Run, sweep or ablation directories")->required();
    rep->add_option("-o,--out", rep_out, "Bundle directory")->capture_default_str();
    rep->add_flag("--force", force, "Accept inputs with mismatched config hashes");

    auto* ver = app.add_subcommand("verify", "Run the invariant suite");
    std::string verify_dir;
    bool rerun = false;
    ver->add_option("--run", verify_dir, "Also check the artifacts of this run directory");
    ver->add_flag("--rerun", rerun, "Re-train the run and compare progress.csv bytes");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            write_split_csv(generate_dataset(task), gen_out);
            std::cout << "wrote " << gen_out << '\n';
            return 0;
        }
        if (*train) {
            const RunConfig cfg = make_config(config_path, sets, out_dir);
            RunOptions ro;
            if (!quiet) {
                ro.on_epoch = [](const EpochMetrics& m) {
                    if (m.epoch % 100 == 0)
                        std::printf("epoch %6lld  train_loss %.5f  test_loss %.5f  train_acc %.4f  test_acc %.4f\n",
                                    m.epoch, m.train_loss, m.test_loss, m.train_acc, m.test_acc);
                };
            }
            const RunResult run = run_experiment(cfg, ro);
            std::cout << "run " << run.config_hash << " -> " << run.dir.string() << " (" << run.status_message << ")\n";
            print_grok(run.grok, run.peak);
            if (run.phases)
                for (const auto& iv : run.phases->intervals)
                    std::cout << "  " << phase_name(iv.label) << " [" << iv.start_epoch << ", " << iv.end_epoch << "]\n";
            return run.partial ? 2 : 0;
        }
        if (*sweep) {
            RunConfig cfg = make_config(config_path, sets, out_dir);
            SweepOptions so;
            so.jobs = jobs;
            so.on_cell = [&](const SweepCell& c) {
                std::cout << axis << "=" << format_value(c.value) << " seed=" << c.seed
                          << (c.failed ? " FAILED: " + c.error : std::string()) << '\n';
                if (!c.failed) print_grok(c.grok, c.peak);
            };
            const auto summary =
                run_sweep(cfg, axis == "alpha" ? SweepAxis::Alpha : SweepAxis::WeightDecay, values, seeds, so);
            const auto& ct = summary.contingency;
            std::cout << "peak&grok=" << ct.peak_and_grok << " peak&no-grok=" << ct.peak_no_grok
                      << " no-peak&grok=" << ct.no_peak_grok << " no-peak&no-grok=" << ct.no_peak_no_grok << '\n';
            const bool any_failed = std::any_of(summary.cells.begin(), summary.cells.end(),
                                                [](const SweepCell& c) { return c.failed; });
            return any_failed ? 2 : 0;
        }
        if (*ablate) {
            const RunResult base = load_run(base_dir);
            AblationOptions ao;
            ao.resume = resume;
            ao.output_dir = ablate_out;
            const auto outcome = run_ablation(base, parse_ablation_kind(which), ao);
            const auto& c = outcome.comparison;
            auto opt = [](const std::optional<long long>& v) { return v ? std::to_string(*v) : std::string("-"); };
            std::cout << "mask: " << outcome.syn_mask.active() << " neurons from bins "
                      << join_subset(outcome.syn_mask.source_subset) << " at epoch " << outcome.syn_mask.source_epoch
                      << '\n'
                      << "test crossing: base=" << opt(c.base_cross) << " synergistic=" << opt(c.syn_cross)
                      << " inverse=" << opt(c.inv_cross) << "  verdict=" << verdict_name(c.verdict) << '\n';
            return 0;
        }
        if (*rep) {
            std::vector<std::filesystem::path> dirs(inputs.begin(), inputs.end());
            const auto bundle = build_report(dirs, rep_out, force);
            for (const auto& f : bundle.figures) std::cout << f.kind << ": " << f.file.string() << '\n';
            return 0;
        }
        if (*ver) {
            auto checks = verify_numerics();
            if (!verify_dir.empty()) {
                auto more = verify_run(verify_dir, rerun);
                checks.insert(checks.end(), more.begin(), more.end());
            }
            return report_checks(checks);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
