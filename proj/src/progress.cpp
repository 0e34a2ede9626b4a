#include "grokinfo/progress.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace grokinfo {

namespace {

constexpr int kProgressSchema = 1;
constexpr int kMaxTableColumns = 20;

// Runs body(i) for i in [0, n) on up to `threads` workers with a static
// contiguous partition, so results never depend on scheduling.
template <class Body>
void parallel_for(std::size_t n, int threads, Body body) {
    const auto workers = static_cast<std::size_t>(std::max(1, threads));
    if (workers == 1 || n < 64) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w * chunk; i < std::min(n, (w + 1) * chunk); ++i) body(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::size_t multiplet_count(int k) {
    if (k < 2) return 0;
    return (std::size_t{1} << k) - static_cast<std::size_t>(k) - 1;
}

SearchResult exhaustive_search(const CopulaCovariance& cov, int k_bins, const SearchOptions& opts) {
    const int m = cov.size();
    if (m < 3) throw std::invalid_argument("exhaustive_search: need at least 3 usable columns");
    if (m > kMaxTableColumns) throw std::invalid_argument("exhaustive_search: too many columns for exhaustive search");
    const int k_max = std::min(k_bins, m);
    if (k_max < 2) throw std::invalid_argument("exhaustive_search: k_bins must be >= 2");

    // Multiplets in (size, lexicographic) order as bitmasks over sigma rows.
    std::vector<std::uint32_t> masks;
    for (int r = 2; r <= k_max; ++r) {
        std::vector<int> idx(static_cast<std::size_t>(r));
        for (int i = 0; i < r; ++i) idx[i] = i;
        while (true) {
            std::uint32_t mask = 0;
            for (int i : idx) mask |= 1u << i;
            masks.push_back(mask);
            int i = r - 1;
            while (i >= 0 && idx[i] == m - r + i) --i;
            if (i < 0) break;
            ++idx[i];
            for (int j = i + 1; j < r; ++j) idx[j] = idx[j - 1] + 1;
        }
    }

    auto members = [&](std::uint32_t mask) {
        std::vector<int> cols;
        for (int i = 0; i < m; ++i)
            if (mask & (1u << i)) cols.push_back(cov.columns[i]);
        return cols;
    };

    // Entropy of every non-empty subset up to size k_max.
    const std::size_t table_size = std::size_t{1} << m;
    std::vector<double> entropy(table_size, 0.0);
    parallel_for(table_size, opts.threads, [&](std::size_t mask) {
        const int bits = std::popcount(static_cast<std::uint32_t>(mask));
        if (bits == 0 || bits > k_max) return;
        const auto cols = members(static_cast<std::uint32_t>(mask));
        entropy[mask] = subset_entropy(cols, cov);
    });

    std::vector<double> omega(masks.size());
    parallel_for(masks.size(), opts.threads, [&](std::size_t i) {
        const std::uint32_t s = masks[i];
        const int n = std::popcount(s);
        double acc = (static_cast<double>(n) - 2.0) * entropy[s];
        for (int j = 0; j < m; ++j) {
            const std::uint32_t bit = 1u << j;
            if (s & bit) acc += entropy[bit] - entropy[s & ~bit];
        }
        omega[i] = acc;
    });

    SearchResult out;
    out.evaluated = masks.size();
    std::size_t best_min = 0, best_max = 0;
    for (std::size_t i = 1; i < masks.size(); ++i) {
        if (omega[i] < omega[best_min] - opts.tie_tolerance) best_min = i;
        if (omega[i] > omega[best_max] + opts.tie_tolerance) best_max = i;
    }
    out.min = {members(masks[best_min]), omega[best_min]};
    out.max = {members(masks[best_max]), omega[best_max]};
    if (opts.keep_all) {
        out.all.reserve(masks.size());
        for (std::size_t i = 0; i < masks.size(); ++i) out.all.push_back({members(masks[i]), omega[i]});
    }
    return out;
}

std::vector<double> normalize_series(const std::vector<double>& raw, NormalizeMode mode) {
    std::vector<double> out(raw.size(), 0.0);
    if (raw.empty()) return out;
    const auto [lo_it, hi_it] = std::minmax_element(raw.begin(), raw.end());
    const double lo = *lo_it, hi = *hi_it;
    const double range = hi - lo;
    if (!(range > 0.0)) return out;
    for (std::size_t i = 0; i < raw.size(); ++i)
        out[i] = mode == NormalizeMode::Synergy ? (hi - raw[i]) / range : (raw[i] - lo) / range;
    return out;
}

void ProgressSeries::normalize() {
    std::vector<double> syn, red;
    for (const auto& p : points) {
        if (!p.valid) continue;
        syn.push_back(p.syn_omega);
        red.push_back(p.red_omega);
    }
    const auto sn = normalize_series(syn, NormalizeMode::Synergy);
    const auto rn = normalize_series(red, NormalizeMode::Redundancy);
    syn_norm.assign(points.size(), 0.0);
    red_norm.assign(points.size(), 0.0);
    std::size_t v = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!points[i].valid) continue;
        syn_norm[i] = sn[v];
        red_norm[i] = rn[v];
        ++v;
    }
}

EpochAnalysis analyze_epoch(const Eigen::Ref<const Eigen::MatrixXd>& activations, const AnalysisOptions& opts,
                            long long epoch) {
    EpochAnalysis result;
    result.assignment = ward_cluster(activations, opts.k_bins);
    result.assignment.epoch = epoch;
    auto& pt = result.point;
    pt.epoch = epoch;

    const BinMatrix bins = bin_reduce(activations, result.assignment);
    try {
        const CopulaMatrix cm = copula_transform(bins.data);
        const CopulaCovariance cov = build_covariance(cm, opts.bias_correction);
        if (cov.size() < 3) throw std::invalid_argument("fewer than 3 non-degenerate bins");
        SearchOptions so;
        so.threads = opts.threads;
        so.keep_all = false;
        const SearchResult sr = exhaustive_search(cov, opts.k_bins, so);

        auto to_bins = [&](const std::vector<int>& cols) {
            std::vector<int> ids;
            for (int c : cols) ids.push_back(bins.bin_ids[c]);
            return ids;
        };
        pt.syn_omega = sr.min.omega;
        pt.red_omega = sr.max.omega;
        pt.syn_subset = to_bins(sr.min.subset);
        pt.red_subset = to_bins(sr.max.subset);
        pt.syn_size_bins = static_cast<int>(pt.syn_subset.size());
        for (int c : sr.min.subset) pt.syn_size_neurons += bins.member_counts[c];
    } catch (const std::exception& e) {
        pt.valid = false;
        pt.invalid_reason = e.what();
    }
    return result;
}

std::vector<ParetoPoint> pareto_points(const ProgressSeries& series) {
    std::vector<ParetoPoint> out;
    for (std::size_t i = 0; i < series.points.size(); ++i) {
        if (!series.points[i].valid) continue;
        out.push_back({series.syn_norm.at(i), series.red_norm.at(i), series.points[i].epoch, false});
    }
    for (auto& a : out) {
        a.on_front = std::none_of(out.begin(), out.end(), [&](const ParetoPoint& b) {
            return b.syn_norm >= a.syn_norm && b.red_norm >= a.red_norm &&
                   (b.syn_norm > a.syn_norm || b.red_norm > a.red_norm);
        });
    }
    return out;
}

std::string join_subset(const std::vector<int>& subset) {
    std::string s;
    for (std::size_t i = 0; i < subset.size(); ++i) {
        if (i) s += ';';
        s += std::to_string(subset[i]);
    }
    return s;
}

std::vector<int> parse_subset(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ';'))
        if (!item.empty()) out.push_back(std::stoi(item));
    return out;
}

void write_progress_csv(std::ostream& out, const ProgressSeries& series, const std::string& config_hash) {
    out << "# schema_version=" << kProgressSchema << ",config_hash=" << config_hash << '\n';
    out << "epoch,train_loss,test_loss,train_acc,test_acc,syn_omega,red_omega,syn_norm,red_norm,"
           "syn_subset,red_subset,syn_size_bins,syn_size_neurons,valid_flag\n";
    for (std::size_t i = 0; i < series.points.size(); ++i) {
        const auto& p = series.points[i];
        out << p.epoch << ',' << fmt_double(p.train_loss) << ',' << fmt_double(p.test_loss) << ','
            << fmt_double(p.train_acc) << ',' << fmt_double(p.test_acc) << ',' << fmt_double(p.syn_omega) << ','
            << fmt_double(p.red_omega) << ',' << fmt_double(series.syn_norm.at(i)) << ','
            << fmt_double(series.red_norm.at(i)) << ',' << join_subset(p.syn_subset) << ','
            << join_subset(p.red_subset) << ',' << p.syn_size_bins << ',' << p.syn_size_neurons << ','
            << (p.valid ? 1 : 0) << '\n';
    }
}

ProgressSeries read_progress_csv(std::istream& in, std::string* config_hash) {
    ProgressSeries series;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto schema = line.find("schema_version=");
            if (schema == std::string::npos || std::stoi(line.substr(schema + 15)) != kProgressSchema)
                throw std::runtime_error("progress.csv: schema_version mismatch");
            const auto pos = line.find("config_hash=");
            if (pos != std::string::npos && config_hash) *config_hash = line.substr(pos + 12);
            continue;
        }
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string item;
        while (std::getline(ss, item, ',')) f.push_back(item);
        if (line.back() == ',') f.emplace_back();
        if (f.size() != 14) throw std::runtime_error("progress.csv: expected 14 columns, got " + std::to_string(f.size()));
        ProgressPoint p;
        p.epoch = std::stoll(f[0]);
        p.train_loss = std::stod(f[1]);
        p.test_loss = std::stod(f[2]);
        p.train_acc = std::stod(f[3]);
        p.test_acc = std::stod(f[4]);
        p.syn_omega = std::stod(f[5]);
        p.red_omega = std::stod(f[6]);
        series.syn_norm.push_back(std::stod(f[7]));
        series.red_norm.push_back(std::stod(f[8]));
        p.syn_subset = parse_subset(f[9]);
        p.red_subset = parse_subset(f[10]);
        p.syn_size_bins = std::stoi(f[11]);
        p.syn_size_neurons = std::stoi(f[12]);
        p.valid = f[13] == "1";
        series.points.push_back(std::move(p));
    }
    return series;
}

}  // namespace grokinfo
