#include "grokinfo/report.hpp"

#include "grokinfo/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>

namespace grokinfo {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_csv(const fs::path& path, const std::string& hash) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "# schema_version=" << kSchemaVersion;
    if (!hash.empty()) out << ",config_hash=" << hash;
    out << '\n';
    return out;
}

void run_figures(const RunResult& run, const fs::path& out_dir, const std::string& prefix, ReportBundle& bundle) {
    const std::string src = run.dir.string();
    {
        const auto path = out_dir / (prefix + "accuracy.csv");
        auto out = open_csv(path, run.config_hash);
        out << "epoch,train_acc,test_acc,train_loss,test_loss\n";
        for (const auto& m : run.metrics)
            out << m.epoch << ',' << num(m.train_acc) << ',' << num(m.test_acc) << ',' << num(m.train_loss) << ','
                << num(m.test_loss) << '\n';
        bundle.figures.push_back({"accuracy", path, {}, src});
    }
    {
        const auto path = out_dir / (prefix + "progress.csv");
        auto out = open_csv(path, run.config_hash);
        out << "epoch,syn_norm,red_norm,train_loss,test_loss,syn_omega,red_omega,syn_size_neurons,valid_flag\n";
        for (std::size_t i = 0; i < run.progress.points.size(); ++i) {
            const auto& p = run.progress.points[i];
            out << p.epoch << ',' << num(run.progress.syn_norm[i]) << ',' << num(run.progress.red_norm[i]) << ','
                << num(p.train_loss) << ',' << num(p.test_loss) << ',' << num(p.syn_omega) << ','
                << num(p.red_omega) << ',' << p.syn_size_neurons << ',' << (p.valid ? 1 : 0) << '\n';
        }
        bundle.figures.push_back({"progress", path, {"syn_norm", "red_norm", "train_loss", "test_loss"}, src});
    }
    {
        const auto path = out_dir / (prefix + "pareto.csv");
        auto out = open_csv(path, run.config_hash);
        out << "syn_norm,red_norm,epoch,on_front\n";
        for (const auto& p : pareto_points(run.progress))
            out << num(p.syn_norm) << ',' << num(p.red_norm) << ',' << p.epoch << ',' << (p.on_front ? 1 : 0) << '\n';
        bundle.figures.push_back({"pareto", path, {}, src});
    }
}

void sweep_figures(const fs::path& dir, const fs::path& out_dir, const std::string& prefix, bool force,
                   ReportBundle& bundle) {
    const SweepSummary s = load_sweep_summary(dir);
    for (const auto& row : s.rows) {
        const auto path = out_dir / (prefix + "sweep_synergy_" + axis_name(s.axis) + "_" + format_value(row.value) + ".csv");
        auto out = open_csv(path, "");
        out << "seed,epoch,syn_norm,red_norm,train_acc,test_acc\n";
        for (const auto& cell : s.cells) {
            if (cell.value != row.value || cell.failed) continue;
            const RunResult run = load_run(cell.dir, force);
            if (run.config_hash != cell.config_hash && !force)
                throw std::runtime_error("sweep cell " + cell.dir.string() + " has a different config hash");
            for (std::size_t i = 0; i < run.progress.points.size(); ++i) {
                const auto& p = run.progress.points[i];
                out << cell.seed << ',' << p.epoch << ',' << num(run.progress.syn_norm[i]) << ','
                    << num(run.progress.red_norm[i]) << ',' << num(p.train_acc) << ',' << num(p.test_acc) << '\n';
            }
        }
        bundle.figures.push_back({"sweep_synergy", path, {"syn_norm"}, dir.string()});
    }
}

void ablation_figures(const fs::path& dir, const fs::path& out_dir, const std::string& prefix, bool force,
                      ReportBundle& bundle) {
    std::ifstream in(dir / "ablation.json");
    const json meta = json::parse(in);
    if (meta.at("schema_version").get<int>() != kSchemaVersion)
        throw std::runtime_error("ablation.json: schema_version mismatch");
    const RunResult base = load_run(meta.at("base_dir").get<std::string>(), force);
    if (base.config_hash != meta.at("base_config_hash").get<std::string>() && !force)
        throw std::runtime_error("ablation base run changed since the ablation was recorded");
    const RunResult syn = load_run(dir / "synergistic", force);
    const RunResult inv = load_run(dir / "inverse", force);
    const auto path = out_dir / (prefix + "ablation_overlay.csv");
    auto out = open_csv(path, base.config_hash);
    out << "epoch,base_train_acc,base_test_acc,syn_train_acc,syn_test_acc,inv_train_acc,inv_test_acc\n";
    const std::size_t n = std::min({base.metrics.size(), syn.metrics.size(), inv.metrics.size()});
    for (std::size_t i = 0; i < n; ++i)
        out << base.metrics[i].epoch << ',' << num(base.metrics[i].train_acc) << ',' << num(base.metrics[i].test_acc)
            << ',' << num(syn.metrics[i].train_acc) << ',' << num(syn.metrics[i].test_acc) << ','
            << num(inv.metrics[i].train_acc) << ',' << num(inv.metrics[i].test_acc) << '\n';
    bundle.figures.push_back({"ablation", path, {}, dir.string()});
}

}  // namespace

ReportBundle build_report(const std::vector<fs::path>& inputs, const fs::path& out_dir, bool force) {
    if (inputs.empty()) throw std::invalid_argument("report: no inputs");
    fs::create_directories(out_dir);
    ReportBundle bundle;
    bundle.dir = out_dir;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const auto& dir = inputs[i];
        const std::string prefix = inputs.size() == 1 ? "" : std::to_string(i) + "_" + dir.filename().string() + "_";
        if (fs::exists(dir / "sweep.json")) sweep_figures(dir, out_dir, prefix, force, bundle);
        else if (fs::exists(dir / "ablation.json")) ablation_figures(dir, out_dir, prefix, force, bundle);
        else if (fs::exists(dir / "config.txt")) run_figures(load_run(dir, force), out_dir, prefix, bundle);
        else throw std::invalid_argument("report: " + dir.string() + " is not a run, sweep or ablation directory");
    }
    json manifest;
    manifest["schema_version"] = kSchemaVersion;
    json figs = json::array();
    for (const auto& f : bundle.figures)
        figs.push_back({{"kind", f.kind},
                        {"file", f.file.filename().string()},
                        {"log_scale", f.log_scale},
                        {"source", f.source}});
    manifest["figures"] = figs;
    std::ofstream(out_dir / "manifest.json") << manifest.dump(2) << '\n';
    return bundle;
}

}  // namespace grokinfo
