#include "grokinfo/verify.hpp"

#include "grokinfo/experiment.hpp"
#include "grokinfo/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace grokinfo {

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

VerifyCheck check(std::string name, bool ok, std::string detail = {}) {
    return {std::move(name), ok, std::move(detail)};
}

}  // namespace

std::vector<VerifyCheck> verify_numerics(std::uint64_t seed) {
    std::vector<VerifyCheck> out;
    Rng rng(seed);

    const double h1 = gaussian_entropy(Eigen::MatrixXd::Identity(1, 1));
    out.push_back(check("entropy k=1", std::abs(h1 - 0.5 * std::log(2 * std::numbers::pi * std::numbers::e)) < 1e-12));
    Eigen::MatrixXd c2(2, 2);
    c2 << 1, 0.5, 0.5, 1;
    const double h2 = gaussian_entropy(c2);
    out.push_back(check("entropy k=2 rho=0.5",
                        std::abs(h2 - (std::log(2 * std::numbers::pi * std::numbers::e) + 0.5 * std::log(0.75))) < 1e-12));

    // Independent normals: |Omega| small for every multiplet.
    Eigen::MatrixXd x(5000, 4);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
    const auto cov = build_covariance(copula_transform(x));
    const auto sr = exhaustive_search(cov, 4);
    double worst = 0.0, worst_pair = 0.0;
    for (const auto& r : sr.all) {
        if (r.subset.size() == 2) worst_pair = std::max(worst_pair, std::abs(r.omega));
        else worst = std::max(worst, std::abs(r.omega));
    }
    out.push_back(check("estimator consistency", worst < 0.02, "max |omega| = " + std::to_string(worst)));
    out.push_back(check("pairs vanish", worst_pair < 1e-12));

    // Synergistic triple.
    Eigen::MatrixXd syn(3, 3);
    syn << 1, 0, 1, 0, 1, 1, 1, 1, 2.1;
    CopulaCovariance sc;
    sc.sigma = syn;
    sc.columns = {0, 1, 2};
    sc.position = {0, 1, 2};
    sc.n_samples = 1000;
    const int all3[] = {0, 1, 2};
    out.push_back(check("synergy sign", o_information(all3, sc) < 0.0));
    out.push_back(check("multiplet count k=10", multiplet_count(10) == 1013));

    // Finite-difference gradient check on a tiny net.
    TaskSpec task{3, 0.5, seed};
    const Dataset data = generate_dataset(task);
    InitSpec is;
    is.init_seed = seed;
    MlpParams params = init_params(task, 5, is);
    const auto xs = data.rows(Split::All);
    const auto ys = data.labels_of(Split::All);
    const auto cache = forward(params, xs, ys);
    const auto g = backward(params, cache, xs, ys);
    double max_rel = 0.0;
    const double h = 1e-5;
    for (Eigen::Index i = 0; i < params.w2.size(); ++i) {
        MlpParams a = params, b = params;
        a.w2.data()[i] += h;
        b.w2.data()[i] -= h;
        const double fd = (forward(a, xs, ys).loss - forward(b, xs, ys).loss) / (2 * h);
        const double an = g.w2.data()[i];
        max_rel = std::max(max_rel, std::abs(fd - an) / std::max(1e-8, std::abs(fd) + std::abs(an)));
    }
    out.push_back(check("gradient check (W2)", max_rel < 1e-5, "max rel err = " + std::to_string(max_rel)));

    Eigen::MatrixXd feats(40, 30);
    for (Eigen::Index i = 0; i < feats.size(); ++i) feats.data()[i] = rng.normal();
    const auto asg = ward_cluster(feats, 4);
    const bool mono = std::is_sorted(asg.merge_costs.begin(), asg.merge_costs.end());
    out.push_back(check("ward merge costs monotone", mono));
    return out;
}

std::vector<VerifyCheck> verify_run(const fs::path& dir, bool rerun) {
    std::vector<VerifyCheck> out;
    RunResult run;
    try {
        run = load_run(dir);
        out.push_back(check("artifacts load with consistent hashes", true, run.config_hash));
    } catch (const std::exception& e) {
        out.push_back(check("artifacts load with consistent hashes", false, e.what()));
        return out;
    }
    out.push_back(check("run complete", !run.partial, run.status_message));
    const auto expected = static_cast<std::size_t>(run.config.effective_max_epochs());
    out.push_back(check("one metrics record per epoch", run.partial || run.config.schedule.resume_from.size() ||
                                                            run.metrics.size() == expected,
                        std::to_string(run.metrics.size()) + " records"));

    bool ordered = true, sizes = true;
    for (const auto& p : run.progress.points) {
        if (!p.valid) continue;
        ordered &= p.syn_omega <= p.red_omega;
        sizes &= p.syn_size_neurons <= run.config.n_hidden && p.syn_size_bins == static_cast<int>(p.syn_subset.size());
    }
    out.push_back(check("syn_omega <= red_omega", ordered));
    out.push_back(check("sub-network sizes consistent", sizes));
    out.push_back(check("assignments align with progress", run.assignments.size() == run.progress.points.size()));

    if (run.phases) {
        bool partition = !run.phases->intervals.empty() && run.phases->intervals.front().start_index == 0;
        for (std::size_t i = 1; i < run.phases->intervals.size(); ++i)
            partition &= run.phases->intervals[i].start_index == run.phases->intervals[i - 1].end_index + 1;
        out.push_back(check("phase intervals partition the run", partition));
    }
    out.push_back(check("grok report consistent",
                        !run.grok.grokked || (run.grok.gap && *run.grok.gap >= run.grok.min_gap)));

    if (rerun) {
        const fs::path scratch = fs::temp_directory_path() / ("grokinfo_verify_" + run.config_hash);
        fs::remove_all(scratch);
        RunConfig cfg = run.config;
        cfg.output_dir = scratch;
        run_experiment(cfg);
        const bool same = slurp(scratch / "progress.csv") == slurp(dir / "progress.csv");
        out.push_back(check("rerun reproduces progress.csv byte for byte", same));
        fs::remove_all(scratch);
    }
    return out;
}

}  // namespace grokinfo
