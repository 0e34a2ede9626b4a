#include "grokinfo/phases.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace grokinfo {

GrokReport detect_grokking(std::span<const long long> epochs, std::span<const double> train_acc,
                           std::span<const double> test_acc, const GrokOptions& opts) {
    if (epochs.size() != train_acc.size() || epochs.size() != test_acc.size())
        throw std::invalid_argument("detect_grokking: series are not aligned");
    GrokReport r;
    r.tau = opts.tau;
    r.train_tau = opts.train_tau.value_or(opts.tau);
    r.min_gap = opts.min_gap;
    for (std::size_t i = 0; i < epochs.size(); ++i) {
        if (!r.train_cross_epoch && train_acc[i] >= r.train_tau) r.train_cross_epoch = epochs[i];
        if (!r.test_cross_epoch && test_acc[i] >= r.tau) r.test_cross_epoch = epochs[i];
    }
    if (!r.train_cross_epoch) r.reasons.emplace_back("train accuracy never reached threshold");
    if (!r.test_cross_epoch) r.reasons.emplace_back("test accuracy never reached threshold");
    if (r.train_cross_epoch && r.test_cross_epoch) {
        r.gap = *r.test_cross_epoch - *r.train_cross_epoch;
        if (*r.gap < r.min_gap) r.reasons.emplace_back("generalisation gap below min_gap");
    }
    r.grokked = r.reasons.empty();
    return r;
}

const char* phase_name(Phase phase) {
    switch (phase) {
        case Phase::FeatureLearning: return "FeatureLearning";
        case Phase::Emergence: return "Emergence";
        case Phase::Divergence: return "Divergence";
        case Phase::DelayedEmergence: return "DelayedEmergence";
        case Phase::Decoupling: return "Decoupling";
        case Phase::Finalizing: return "Finalizing";
    }
    return "?";
}

Phase parse_phase(const std::string& name) {
    for (Phase p : {Phase::FeatureLearning, Phase::Emergence, Phase::Divergence, Phase::DelayedEmergence,
                    Phase::Decoupling, Phase::Finalizing})
        if (name == phase_name(p)) return p;
    throw std::invalid_argument("unknown phase '" + name + "'");
}

std::optional<PhaseInterval> PhaseSegmentation::find(Phase phase) const {
    for (const auto& iv : intervals)
        if (iv.label == phase) return iv;
    return std::nullopt;
}

namespace {

std::vector<double> moving_average(const std::vector<double>& x, int window) {
    const auto n = static_cast<long long>(x.size());
    const long long half = window / 2;
    std::vector<double> out(x.size());
    for (long long i = 0; i < n; ++i) {
        const long long lo = std::max(0LL, i - half), hi = std::min(n - 1, i + half);
        double s = 0.0;
        for (long long j = lo; j <= hi; ++j) s += x[j];
        out[i] = s / static_cast<double>(hi - lo + 1);
    }
    return out;
}

double range_of(const std::vector<double>& x) {
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    return *hi - *lo;
}

// Derivative signs in {-1, 0, +1}; flat signals are all zero.
std::vector<int> derivative_signs(const std::vector<double>& x, int window, double slope_tol) {
    const std::size_t n = x.size();
    std::vector<int> out(n, 0);
    const double range = range_of(x);
    if (!(range > 1e-12)) return out;
    const double eps = slope_tol * range / window;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t a = i == 0 ? 0 : i - 1;
        const std::size_t b = i + 1 == n ? n - 1 : i + 1;
        const double d = (x[b] - x[a]) / static_cast<double>(b - a);
        out[i] = d > eps ? 1 : (d < -eps ? -1 : 0);
    }
    return out;
}

}  // namespace

PhaseSegmentation segment_phases(const ProgressSeries& series, const PhaseOptions& opts) {
    const int w = std::max(1, opts.smoothing_window);
    std::vector<long long> epochs;
    std::vector<double> syn, red, size, loss, acc;
    for (std::size_t i = 0; i < series.points.size(); ++i) {
        const auto& p = series.points[i];
        if (!p.valid) continue;
        epochs.push_back(p.epoch);
        syn.push_back(series.syn_norm.at(i));
        red.push_back(series.red_norm.at(i));
        size.push_back(static_cast<double>(p.syn_size_bins));
        loss.push_back(p.test_loss);
        acc.push_back(p.test_acc);
    }
    const std::size_t n = epochs.size();
    if (n < 2 * static_cast<std::size_t>(w))
        throw std::invalid_argument("segment_phases: need at least 2 * smoothing_window valid points");

    syn = moving_average(syn, w);
    red = moving_average(red, w);
    size = moving_average(size, w);
    loss = moving_average(loss, w);
    acc = moving_average(acc, w);
    const auto ds = derivative_signs(syn, w, opts.slope_tol);
    const auto dr = derivative_signs(red, w, opts.slope_tol);
    const auto dz = derivative_signs(size, w, opts.slope_tol);
    const auto dl = derivative_signs(loss, w, opts.slope_tol);
    const auto da = derivative_signs(acc, w, opts.slope_tol);

    std::size_t acc_risen = n;
    if (const double ar = range_of(acc); ar > 1e-12) {
        const double level = *std::min_element(acc.begin(), acc.end()) + opts.acc_rise_fraction * ar;
        for (std::size_t i = 0; i < n; ++i)
            if (acc[i] >= level) {
                acc_risen = i;
                break;
            }
    }
    std::size_t loss_converged = 0;
    {
        const double tol = opts.convergence_tol * range_of(loss);
        for (std::size_t i = n; i-- > 0;)
            if (std::abs(loss[i] - loss.back()) > tol) {
                loss_converged = i + 1;
                break;
            }
    }
    std::size_t first_syn_rise = n;
    for (std::size_t i = 0; i < n; ++i)
        if (ds[i] > 0) {
            first_syn_rise = i;
            break;
        }

    std::vector<Phase> label(n);
    std::vector<bool> hit(n, false);
    bool seen_divergence = false;
    for (std::size_t i = 0; i < n; ++i) {
        std::optional<Phase> rule;
        if (ds[i] > 0 && dr[i] < 0 && dz[i] > 0) {
            rule = Phase::Emergence;
        } else if (ds[i] > 0 && dr[i] > 0 && dz[i] > 0 && seen_divergence) {
            rule = Phase::DelayedEmergence;
        } else if (ds[i] < 0 && dr[i] < 0 && dz[i] < 0 && i < acc_risen) {
            rule = Phase::Divergence;
        } else if (ds[i] < 0 && dr[i] > 0 && da[i] > 0) {
            rule = Phase::Decoupling;
        } else if (ds[i] == 0 && dr[i] == 0 && dz[i] == 0 && dl[i] == 0 && i >= loss_converged) {
            rule = Phase::Finalizing;
        }
        if (rule) {
            label[i] = *rule;
            hit[i] = true;
            if (*rule == Phase::Divergence) seen_divergence = true;
        } else if (i < first_syn_rise || i == 0) {
            label[i] = Phase::FeatureLearning;
        } else {
            label[i] = label[i - 1];
        }
    }

    // Run-length encode, then absorb short runs into a neighbour.
    struct Run {
        std::size_t a, b;
        Phase label;
    };
    std::vector<Run> runs;
    for (std::size_t i = 0; i < n; ++i) {
        if (runs.empty() || runs.back().label != label[i]) runs.push_back({i, i, label[i]});
        else runs.back().b = i;
    }
    const std::size_t min_len = static_cast<std::size_t>(opts.min_interval > 0 ? opts.min_interval : w);
    while (runs.size() > 1) {
        std::size_t shortest = 0;
        for (std::size_t r = 1; r < runs.size(); ++r)
            if (runs[r].b - runs[r].a < runs[shortest].b - runs[shortest].a) shortest = r;
        if (runs[shortest].b - runs[shortest].a + 1 >= min_len) break;
        if (shortest == 0) {
            runs[1].a = runs[0].a;
        } else {
            runs[shortest - 1].b = runs[shortest].b;
        }
        runs.erase(runs.begin() + static_cast<std::ptrdiff_t>(shortest));
        // Merge neighbours that now share a label.
        for (std::size_t r = 1; r < runs.size();) {
            if (runs[r].label == runs[r - 1].label) {
                runs[r - 1].b = runs[r].b;
                runs.erase(runs.begin() + static_cast<std::ptrdiff_t>(r));
            } else {
                ++r;
            }
        }
    }

    PhaseSegmentation seg;
    seg.smoothing_window = w;
    for (const auto& r : runs) {
        PhaseInterval iv;
        iv.start_index = r.a;
        iv.end_index = r.b;
        iv.start_epoch = epochs[r.a];
        iv.end_epoch = epochs[r.b];
        iv.label = r.label;
        std::array<double, 5> sums{};
        for (std::size_t i = r.a; i <= r.b; ++i) {
            sums[0] += ds[i];
            sums[1] += dr[i];
            sums[2] += dz[i];
            sums[3] += dl[i];
            sums[4] += da[i];
            if (hit[i] && label[i] == r.label) ++iv.rule_hits;
        }
        const double len = static_cast<double>(r.b - r.a + 1);
        for (double s : sums) iv.mean_signs.push_back(s / len);
        seg.intervals.push_back(std::move(iv));
    }
    return seg;
}

long long default_peak_window(std::span<const long long> epochs, double fraction) {
    if (epochs.empty()) return 0;
    return static_cast<long long>(std::floor(fraction * static_cast<double>(epochs.back())));
}

double peak_prominence(std::span<const double> values, std::size_t i) {
    const double h = values[i];
    double left_min = h;
    for (std::size_t j = i; j-- > 0;) {
        if (values[j] > h) break;
        left_min = std::min(left_min, values[j]);
    }
    double right_min = h;
    for (std::size_t j = i + 1; j < values.size(); ++j) {
        if (values[j] > h) break;
        right_min = std::min(right_min, values[j]);
    }
    return h - std::max(left_min, right_min);
}

PeakPrediction predict_from_early_peak(std::span<const long long> epochs, std::span<const double> syn_norm,
                                       long long window, double prominence_min) {
    if (epochs.size() != syn_norm.size()) throw std::invalid_argument("predict_from_early_peak: series not aligned");
    PeakPrediction out;
    out.window = window;
    out.prominence_min = prominence_min;

    std::size_t n = 0;
    while (n < epochs.size() && epochs[n] <= window) ++n;
    const auto x = syn_norm.first(n);

    // Interior local maxima; a plateau counts once, at its middle.
    std::size_t i = 1;
    while (i + 1 < n) {
        if (x[i] > x[i - 1]) {
            std::size_t j = i;
            while (j + 1 < n && x[j + 1] == x[i]) ++j;
            if (j + 1 < n && x[j + 1] < x[i]) {
                const std::size_t apex = (i + j) / 2;
                const double prom = peak_prominence(x, apex);
                if (prom >= prominence_min && (!out.predicted || x[apex] > out.peak_height)) {
                    out.predicted = true;
                    out.peak_epoch = epochs[apex];
                    out.peak_height = x[apex];
                    out.prominence = prom;
                }
            }
            i = j + 1;
        } else {
            ++i;
        }
    }
    return out;
}

}  // namespace grokinfo
