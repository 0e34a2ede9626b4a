#include "grokinfo/experiment.hpp"

#include "grokinfo/checkpoint.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace grokinfo {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<long long> RunResult::epochs() const {
    std::vector<long long> out;
    for (const auto& m : metrics) out.push_back(m.epoch);
    return out;
}
std::vector<double> RunResult::train_acc() const {
    std::vector<double> out;
    for (const auto& m : metrics) out.push_back(m.train_acc);
    return out;
}
std::vector<double> RunResult::test_acc() const {
    std::vector<double> out;
    for (const auto& m : metrics) out.push_back(m.test_acc);
    return out;
}

std::string format_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

const char* axis_name(SweepAxis axis) { return axis == SweepAxis::WeightDecay ? "weight_decay" : "alpha"; }

namespace {

json grok_to_json(const GrokReport& g) {
    json j;
    j["train_cross_epoch"] = g.train_cross_epoch ? json(*g.train_cross_epoch) : json(nullptr);
    j["test_cross_epoch"] = g.test_cross_epoch ? json(*g.test_cross_epoch) : json(nullptr);
    j["gap"] = g.gap ? json(*g.gap) : json(nullptr);
    j["grokked"] = g.grokked;
    j["tau"] = g.tau;
    j["train_tau"] = g.train_tau;
    j["min_gap"] = g.min_gap;
    j["reasons"] = g.reasons;
    return j;
}

GrokReport grok_from_json(const json& j) {
    GrokReport g;
    if (!j.at("train_cross_epoch").is_null()) g.train_cross_epoch = j["train_cross_epoch"].get<long long>();
    if (!j.at("test_cross_epoch").is_null()) g.test_cross_epoch = j["test_cross_epoch"].get<long long>();
    if (!j.at("gap").is_null()) g.gap = j["gap"].get<long long>();
    g.grokked = j.at("grokked").get<bool>();
    g.tau = j.at("tau").get<double>();
    g.train_tau = j.at("train_tau").get<double>();
    g.min_gap = j.at("min_gap").get<long long>();
    g.reasons = j.at("reasons").get<std::vector<std::string>>();
    return g;
}

json peak_to_json(const PeakPrediction& p) {
    json j;
    j["predicted"] = p.predicted;
    j["peak_epoch"] = p.peak_epoch ? json(*p.peak_epoch) : json(nullptr);
    j["peak_height"] = p.peak_height;
    j["prominence"] = p.prominence;
    j["window"] = p.window;
    j["prominence_min"] = p.prominence_min;
    return j;
}

PeakPrediction peak_from_json(const json& j) {
    PeakPrediction p;
    p.predicted = j.at("predicted").get<bool>();
    if (!j.at("peak_epoch").is_null()) p.peak_epoch = j["peak_epoch"].get<long long>();
    p.peak_height = j.at("peak_height").get<double>();
    p.prominence = j.at("prominence").get<double>();
    p.window = j.at("window").get<long long>();
    p.prominence_min = j.at("prominence_min").get<double>();
    return p;
}

json phases_to_json(const RunResult& run) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["config_hash"] = run.config_hash;
    if (!run.phases) {
        j["error"] = run.phase_error;
        j["intervals"] = json::array();
        return j;
    }
    j["smoothing_window"] = run.phases->smoothing_window;
    json arr = json::array();
    for (const auto& iv : run.phases->intervals) {
        json e;
        e["label"] = phase_name(iv.label);
        e["start_epoch"] = iv.start_epoch;
        e["end_epoch"] = iv.end_epoch;
        e["start_index"] = iv.start_index;
        e["end_index"] = iv.end_index;
        e["rule_hits"] = iv.rule_hits;
        e["mean_signs"] = {{"syn", iv.mean_signs.at(0)},
                           {"red", iv.mean_signs.at(1)},
                           {"size", iv.mean_signs.at(2)},
                           {"test_loss", iv.mean_signs.at(3)},
                           {"test_acc", iv.mean_signs.at(4)}};
        arr.push_back(e);
    }
    j["intervals"] = arr;
    return j;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("missing artifact " + path.string());
    return json::parse(in);
}

}  // namespace

void finalize_analysis(RunResult& run) {
    const auto& a = run.config.analysis;
    run.progress.normalize();
    const auto epochs = run.epochs();
    run.grok = detect_grokking(epochs, run.train_acc(), run.test_acc(), a.grok);

    std::vector<long long> pe;
    std::vector<double> ps;
    for (std::size_t i = 0; i < run.progress.points.size(); ++i) {
        if (!run.progress.points[i].valid) continue;
        pe.push_back(run.progress.points[i].epoch);
        ps.push_back(run.progress.syn_norm[i]);
    }
    run.peak = predict_from_early_peak(pe, ps, default_peak_window(epochs, a.peak_window_fraction), a.prominence_min);

    run.phases.reset();
    run.phase_error.clear();
    try {
        run.phases = segment_phases(run.progress, a.phases);
    } catch (const std::exception& e) {
        run.phase_error = e.what();
    }
}

RunResult run_experiment(const RunConfig& config, const RunOptions& opts) {
    config.validate();
    RunResult run;
    run.config = config;
    run.config_hash = config_hash(config);
    run.dir = config.output_dir;

    const Dataset data = generate_dataset(config.task);
    const InputMatrix x_train = data.rows(Split::Train);
    const InputMatrix x_test = data.rows(Split::Test);
    const auto y_train = data.labels_of(Split::Train);
    const auto y_test = data.labels_of(Split::Test);

    MlpParams params = init_params(config.task, config.n_hidden, config.init);
    AdamWState state = AdamWState::zeros_like(params);
    long long start = 0;
    if (!config.schedule.resume_from.empty()) {
        Checkpoint ck = load_checkpoint(config.schedule.resume_from);
        if (ck.params.n_hidden() != config.n_hidden || ck.params.n_classes() != config.task.p)
            throw std::invalid_argument("resume checkpoint does not match the configured model");
        params = std::move(ck.params);
        if (ck.optimizer) state = std::move(*ck.optimizer);
        start = ck.meta.epoch;
    }
    const HiddenGate& gate = config.mask;
    std::optional<NormConstraint> constraint;
    if (config.constrain_norm) constraint = make_norm_constraint(params, config.norm_include_biases, gate);

    const long long max_epochs = config.effective_max_epochs();
    AnalysisOptions aopts;
    aopts.k_bins = config.analysis.k_bins;
    aopts.bias_correction = config.analysis.bias_correction;
    aopts.threads = config.analysis.threads;

    if (opts.write_artifacts) fs::create_directories(run.dir / "checkpoints");
    auto checkpoint = [&](long long epoch) {
        Checkpoint ck{{epoch, config.task.split_seed, config.init.init_seed, run.config_hash}, params, state};
        save_checkpoint(run.dir / "checkpoints" / ("epoch_" + std::to_string(epoch)), ck);
    };

    ForwardCache train, test;
    MlpGrads grads;
    BackwardScratch scratch;
    try {
        for (long long epoch = start; epoch < max_epochs; ++epoch) {
            forward_into(params, x_train, y_train, gate, train);
            forward_into(params, x_test, y_test, gate, test);
            EpochMetrics m{epoch, train.loss, test.loss, accuracy(train, y_train), accuracy(test, y_test)};
            run.metrics.push_back(m);
            if (opts.on_epoch) opts.on_epoch(m);

            if (opts.write_artifacts && config.schedule.checkpoint_every > 0 &&
                epoch % config.schedule.checkpoint_every == 0)
                checkpoint(epoch);

            if (config.analysis.enabled && config.schedule.is_analysis_epoch(epoch)) {
                EpochAnalysis ea;
                switch (config.analysis.activation_split) {
                    case Split::Train: ea = analyze_epoch(train.z1, aopts, epoch); break;
                    case Split::Test: ea = analyze_epoch(test.z1, aopts, epoch); break;
                    case Split::All:
                        ea = analyze_epoch(record_activations(params, data, Split::All, gate), aopts, epoch);
                        break;
                }
                ea.point.train_loss = m.train_loss;
                ea.point.test_loss = m.test_loss;
                ea.point.train_acc = m.train_acc;
                ea.point.test_acc = m.test_acc;
                run.progress.points.push_back(std::move(ea.point));
                run.assignments.push_back(std::move(ea.assignment));
            }

            if (epoch + 1 == max_epochs) break;
            backward_into(params, train, x_train, y_train, grads, scratch);
            adamw_step(params, grads, state, config.optim, gate);
            if (constraint) norm_project(params, *constraint, gate);
            if (!params.all_finite()) throw DivergenceError("parameters became non-finite");
        }
        run.status_message = "complete";
    } catch (const DivergenceError& e) {
        run.partial = true;
        run.status_message = std::string("diverged: ") + e.what();
    } catch (const std::domain_error& e) {
        run.partial = true;
        run.status_message = std::string("degenerate: ") + e.what();
    }

    finalize_analysis(run);
    if (opts.write_artifacts) {
        if (!run.metrics.empty() && config.schedule.checkpoint_every > 0 && !run.partial)
            checkpoint(run.metrics.back().epoch);
        write_run_artifacts(run, run.dir);
    }
    return run;
}

void write_run_artifacts(const RunResult& run, const fs::path& dir) {
    fs::create_directories(dir);
    write_text(dir / "config.txt", "# schema_version=" + std::to_string(kSchemaVersion) +
                                       ",config_hash=" + run.config_hash + "\n" + serialize_config(run.config));
    {
        std::ofstream out(dir / "progress.csv", std::ios::binary);
        write_progress_csv(out, run.progress, run.config_hash);
    }
    {
        std::ofstream out(dir / "metrics.jsonl", std::ios::binary);
        out << json{{"schema_version", kSchemaVersion}, {"config_hash", run.config_hash}}.dump() << '\n';
        for (const auto& m : run.metrics)
            out << json{{"epoch", m.epoch},
                        {"train_loss", m.train_loss},
                        {"test_loss", m.test_loss},
                        {"train_acc", m.train_acc},
                        {"test_acc", m.test_acc}}
                       .dump()
                << '\n';
    }
    {
        std::ofstream out(dir / "assignments.csv", std::ios::binary);
        out << "# schema_version=" << kSchemaVersion << ",config_hash=" << run.config_hash << '\n';
        out << "neuron_id,bin_id,epoch\n";
        for (const auto& a : run.assignments) write_assignment_csv(out, a, false);
    }
    write_text(dir / "phases.json", phases_to_json(run).dump(2) + "\n");
    json report;
    report["schema_version"] = kSchemaVersion;
    report["config_hash"] = run.config_hash;
    report["status"] = run.partial ? "partial" : "complete";
    report["message"] = run.status_message;
    report["epochs_recorded"] = run.metrics.size();
    report["grok"] = grok_to_json(run.grok);
    report["peak"] = peak_to_json(run.peak);
    write_text(dir / "grok_report.json", report.dump(2) + "\n");
}

RunResult load_run(const fs::path& dir, bool force) {
    RunResult run;
    run.dir = dir;
    run.config = load_config(dir / "config.txt");
    run.config_hash = config_hash(run.config);

    auto check_hash = [&](const std::string& found, const char* file) {
        if (found != run.config_hash && !force)
            throw std::runtime_error(std::string("config hash mismatch in ") + file + " of " + dir.string() +
                                     " (use force to override)");
    };

    {
        std::ifstream in(dir / "progress.csv");
        if (!in) throw std::runtime_error("missing progress.csv in " + dir.string());
        std::string hash;
        run.progress = read_progress_csv(in, &hash);
        check_hash(hash, "progress.csv");
    }
    {
        std::ifstream in(dir / "metrics.jsonl");
        if (!in) throw std::runtime_error("missing metrics.jsonl in " + dir.string());
        std::string line;
        bool first = true;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto j = json::parse(line);
            if (first) {
                first = false;
                if (j.at("schema_version").get<int>() != kSchemaVersion)
                    throw std::runtime_error("metrics.jsonl: schema_version mismatch");
                check_hash(j.at("config_hash").get<std::string>(), "metrics.jsonl");
                continue;
            }
            run.metrics.push_back({j.at("epoch").get<long long>(), j.at("train_loss").get<double>(),
                                   j.at("test_loss").get<double>(), j.at("train_acc").get<double>(),
                                   j.at("test_acc").get<double>()});
        }
    }
    {
        std::ifstream in(dir / "assignments.csv");
        if (in) {
            std::string line;
            BinAssignment cur;
            cur.k_bins = run.config.analysis.k_bins;
            while (std::getline(in, line)) {
                if (line.empty()) continue;
                if (line[0] == '#') {
                    const auto pos = line.find("config_hash=");
                    if (pos != std::string::npos) check_hash(line.substr(pos + 12), "assignments.csv");
                    continue;
                }
                if (line.rfind("neuron_id", 0) == 0) continue;
                std::stringstream ss(line);
                std::string a, b, c;
                std::getline(ss, a, ',');
                std::getline(ss, b, ',');
                std::getline(ss, c, ',');
                const long long epoch = std::stoll(c);
                if (!cur.labels.empty() && epoch != cur.epoch) {
                    run.assignments.push_back(cur);
                    cur.labels.clear();
                }
                cur.epoch = epoch;
                cur.labels.push_back(std::stoi(b));
            }
            if (!cur.labels.empty()) run.assignments.push_back(cur);
        }
    }
    const json report = read_json(dir / "grok_report.json");
    if (report.at("schema_version").get<int>() != kSchemaVersion)
        throw std::runtime_error("grok_report.json: schema_version mismatch");
    check_hash(report.at("config_hash").get<std::string>(), "grok_report.json");
    run.partial = report.at("status").get<std::string>() == "partial";
    run.status_message = report.at("message").get<std::string>();

    // Reports are recomputed from the recorded series so loaded runs and
    // fresh runs go through the same code.
    finalize_analysis(run);
    return run;
}

SweepSummary summarize_sweep(SweepAxis axis, std::vector<SweepCell> cells) {
    SweepSummary s;
    s.axis = axis;
    s.cells = std::move(cells);
    auto mean_std = [](const std::vector<double>& xs) -> std::pair<std::optional<double>, std::optional<double>> {
        if (xs.empty()) return {std::nullopt, std::nullopt};
        double m = 0.0;
        for (double x : xs) m += x;
        m /= static_cast<double>(xs.size());
        double v = 0.0;
        for (double x : xs) v += (x - m) * (x - m);
        v = xs.size() > 1 ? v / static_cast<double>(xs.size() - 1) : 0.0;
        return {m, std::sqrt(v)};
    };
    for (const auto& c : s.cells) {
        auto it = std::find_if(s.rows.begin(), s.rows.end(), [&](const SweepRow& r) { return r.value == c.value; });
        if (it == s.rows.end()) {
            s.rows.push_back(SweepRow{});
            s.rows.back().value = c.value;
            it = s.rows.end() - 1;
        }
        ++it->runs;
        if (c.failed) {
            ++it->failed;
            continue;
        }
        if (c.grok.grokked) ++it->grokked;
        auto& ct = s.contingency;
        if (c.peak.predicted && c.grok.grokked) ++ct.peak_and_grok;
        else if (c.peak.predicted) ++ct.peak_no_grok;
        else if (c.grok.grokked) ++ct.no_peak_grok;
        else ++ct.no_peak_no_grok;
    }
    for (auto& row : s.rows) {
        std::vector<double> tr, te;
        for (const auto& c : s.cells) {
            if (c.value != row.value || c.failed) continue;
            if (c.grok.train_cross_epoch) tr.push_back(static_cast<double>(*c.grok.train_cross_epoch));
            if (c.grok.test_cross_epoch) te.push_back(static_cast<double>(*c.grok.test_cross_epoch));
        }
        std::tie(row.train_cross_mean, row.train_cross_std) = mean_std(tr);
        std::tie(row.test_cross_mean, row.test_cross_std) = mean_std(te);
    }
    return s;
}

SweepSummary run_sweep(const RunConfig& base, SweepAxis axis, const std::vector<double>& values,
                       const std::vector<std::uint64_t>& seeds, const SweepOptions& opts) {
    if (values.empty() || seeds.empty()) throw std::invalid_argument("run_sweep: values and seeds must be non-empty");
    std::vector<SweepCell> cells;
    std::vector<RunConfig> configs;
    for (double v : values) {
        for (auto seed : seeds) {
            RunConfig cfg = base;
            cfg.seed = seed;
            cfg.split_seed_explicit = false;
            cfg.init_seed_explicit = false;
            cfg.resolve_seeds();
            if (axis == SweepAxis::WeightDecay) cfg.optim.weight_decay = v;
            else cfg.init.alpha = v;
            cfg.output_dir = base.output_dir / (std::string(axis_name(axis)) + "_" + format_value(v)) /
                             ("seed_" + std::to_string(seed));
            SweepCell cell;
            cell.value = v;
            cell.seed = seed;
            cell.dir = cfg.output_dir;
            cell.config_hash = config_hash(cfg);
            cells.push_back(cell);
            configs.push_back(std::move(cfg));
        }
    }

    std::atomic<std::size_t> next{0};
    std::mutex report_mu;
    auto worker = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            auto& cell = cells[i];
            try {
                RunOptions ro;
                ro.write_artifacts = opts.write_artifacts;
                const RunResult r = run_experiment(configs[i], ro);
                cell.grok = r.grok;
                cell.peak = r.peak;
                if (r.partial) {
                    cell.failed = true;
                    cell.error = r.status_message;
                }
            } catch (const std::exception& e) {
                cell.failed = true;
                cell.error = e.what();
            }
            if (opts.on_cell) {
                std::lock_guard lock(report_mu);
                opts.on_cell(cell);
            }
        }
    };
    const int jobs = std::max(1, std::min<int>(opts.jobs, static_cast<int>(cells.size())));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    SweepSummary summary = summarize_sweep(axis, std::move(cells));
    if (opts.write_artifacts) write_sweep_summary(summary, base.output_dir);
    return summary;
}

void write_sweep_summary(const SweepSummary& s, const fs::path& dir) {
    fs::create_directories(dir);
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    json j;
    j["schema_version"] = kSchemaVersion;
    j["axis"] = axis_name(s.axis);
    json cells = json::array();
    for (const auto& c : s.cells) {
        cells.push_back({{"value", c.value},
                         {"seed", c.seed},
                         {"config_hash", c.config_hash},
                         {"dir", fs::relative(c.dir, dir).generic_string()},
                         {"failed", c.failed},
                         {"error", c.error},
                         {"grok", grok_to_json(c.grok)},
                         {"peak", peak_to_json(c.peak)}});
    }
    j["cells"] = cells;
    json rows = json::array();
    for (const auto& r : s.rows) {
        rows.push_back({{"value", r.value},
                        {"runs", r.runs},
                        {"failed", r.failed},
                        {"grokked", r.grokked},
                        {"train_cross_mean", opt(r.train_cross_mean)},
                        {"train_cross_std", opt(r.train_cross_std)},
                        {"test_cross_mean", opt(r.test_cross_mean)},
                        {"test_cross_std", opt(r.test_cross_std)}});
    }
    j["rows"] = rows;
    const auto& ct = s.contingency;
    j["contingency"] = {{"peak_and_grok", ct.peak_and_grok},
                        {"peak_no_grok", ct.peak_no_grok},
                        {"no_peak_grok", ct.no_peak_grok},
                        {"no_peak_no_grok", ct.no_peak_no_grok}};
    write_text(dir / "sweep.json", j.dump(2) + "\n");

    std::ostringstream csv;
    csv << "# schema_version=" << kSchemaVersion << '\n';
    csv << axis_name(s.axis) << ",runs,failed,grokked,train_cross_mean,train_cross_std,test_cross_mean,test_cross_std\n";
    auto cell = [](const std::optional<double>& v) { return v ? format_value(*v) : std::string(); };
    for (const auto& r : s.rows)
        csv << format_value(r.value) << ',' << r.runs << ',' << r.failed << ',' << r.grokked << ','
            << cell(r.train_cross_mean) << ',' << cell(r.train_cross_std) << ',' << cell(r.test_cross_mean) << ','
            << cell(r.test_cross_std) << '\n';
    write_text(dir / "sweep.csv", csv.str());
}

SweepSummary load_sweep_summary(const fs::path& dir) {
    const json j = read_json(dir / "sweep.json");
    if (j.at("schema_version").get<int>() != kSchemaVersion) throw std::runtime_error("sweep.json: schema_version mismatch");
    const SweepAxis axis = j.at("axis").get<std::string>() == "alpha" ? SweepAxis::Alpha : SweepAxis::WeightDecay;
    std::vector<SweepCell> cells;
    for (const auto& c : j.at("cells")) {
        SweepCell cell;
        cell.value = c.at("value").get<double>();
        cell.seed = c.at("seed").get<std::uint64_t>();
        cell.config_hash = c.at("config_hash").get<std::string>();
        cell.dir = dir / c.at("dir").get<std::string>();
        cell.failed = c.at("failed").get<bool>();
        cell.error = c.at("error").get<std::string>();
        cell.grok = grok_from_json(c.at("grok"));
        cell.peak = peak_from_json(c.at("peak"));
        cells.push_back(std::move(cell));
    }
    return summarize_sweep(axis, std::move(cells));
}

}  // namespace grokinfo
