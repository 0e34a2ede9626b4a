#include "grokinfo/config.hpp"

#include "grokinfo/rng.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace grokinfo {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != v.size() || v.empty()) throw std::invalid_argument("config: " + key + " expects a number, got '" + v + "'");
    return out;
}

long long to_int(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    long long out = 0;
    try {
        out = std::stoll(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != v.size() || v.empty()) throw std::invalid_argument("config: " + key + " expects an integer, got '" + v + "'");
    return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    std::uint64_t out = 0;
    try {
        out = std::stoull(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != v.size() || v.empty() || v[0] == '-')
        throw std::invalid_argument("config: " + key + " expects an unsigned integer, got '" + v + "'");
    return out;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw std::invalid_argument("config: " + key + " expects true/false, got '" + v + "'");
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string mask_string(const HiddenGate& mask) {
    std::string s;
    for (auto m : mask) s += m ? '1' : '0';
    return s;
}

}  // namespace

std::string split_name(Split split) {
    switch (split) {
        case Split::Train: return "train";
        case Split::Test: return "test";
        case Split::All: return "all";
    }
    return "train";
}

void RunConfig::resolve_seeds() {
    if (!split_seed_explicit) task.split_seed = derive_seed(seed, "split");
    if (!init_seed_explicit) init.init_seed = derive_seed(seed, "init");
}

long long RunConfig::effective_max_epochs() const {
    if (schedule.max_epochs > 0) return schedule.max_epochs;
    return optim.weight_decay <= 0.1 ? 30000 : 10000;
}

void RunConfig::validate() const {
    task.validate();
    optim.validate();
    if (n_hidden < 1) throw std::invalid_argument("config: model.n_hidden must be >= 1");
    if (!(init.alpha > 0.0)) throw std::invalid_argument("config: model.alpha must be > 0");
    if (!mask.empty() && static_cast<int>(mask.size()) != n_hidden)
        throw std::invalid_argument("config: model.mask length must equal model.n_hidden");
    if (schedule.max_epochs < 0) throw std::invalid_argument("config: schedule.max_epochs must be >= 1 (or 0 for auto)");
    if (schedule.stride < 1) throw std::invalid_argument("config: schedule.stride must be >= 1");
    if (analysis.k_bins < 2 || analysis.k_bins > n_hidden)
        throw std::invalid_argument("config: analysis.k_bins must lie in [2, n_hidden]");
    if (analysis.k_bins > 20) throw std::invalid_argument("config: analysis.k_bins above 20 is not supported");
}

void set_config_value(RunConfig& c, const std::string& key, const std::string& v) {
    if (key == "run.seed") c.seed = to_u64(key, v);
    else if (key == "run.output_dir") c.output_dir = v;
    else if (key == "task.p") c.task.p = static_cast<int>(to_int(key, v));
    else if (key == "task.train_fraction") c.task.train_fraction = to_double(key, v);
    else if (key == "task.split_seed") {
        c.task.split_seed = to_u64(key, v);
        c.split_seed_explicit = true;
    } else if (key == "model.n_hidden") c.n_hidden = static_cast<int>(to_int(key, v));
    else if (key == "model.init_scheme") {
        if (v != "uniform-fan-in") throw std::invalid_argument("config: unsupported init scheme '" + v + "'");
        c.init.scheme = InitScheme::UniformFanIn;
    } else if (key == "model.alpha") c.init.alpha = to_double(key, v);
    else if (key == "model.zero_last_layer") c.init.zero_last_layer = to_bool(key, v);
    else if (key == "model.init_seed") {
        c.init.init_seed = to_u64(key, v);
        c.init_seed_explicit = true;
    } else if (key == "model.mask") {
        c.mask.clear();
        for (char ch : v) {
            if (ch != '0' && ch != '1') throw std::invalid_argument("config: model.mask must be a 0/1 string");
            c.mask.push_back(ch == '1');
        }
    } else if (key == "optim.lr") c.optim.lr = to_double(key, v);
    else if (key == "optim.beta1") c.optim.beta1 = to_double(key, v);
    else if (key == "optim.beta2") c.optim.beta2 = to_double(key, v);
    else if (key == "optim.eps") c.optim.eps = to_double(key, v);
    else if (key == "optim.weight_decay") c.optim.weight_decay = to_double(key, v);
    else if (key == "optim.decay_biases") c.optim.decay_biases = to_bool(key, v);
    else if (key == "optim.constrain_norm") c.constrain_norm = to_bool(key, v);
    else if (key == "optim.norm_include_biases") c.norm_include_biases = to_bool(key, v);
    else if (key == "schedule.max_epochs") c.schedule.max_epochs = to_int(key, v);
    else if (key == "schedule.dense_until") c.schedule.dense_until = to_int(key, v);
    else if (key == "schedule.stride") c.schedule.stride = to_int(key, v);
    else if (key == "schedule.checkpoint_every") c.schedule.checkpoint_every = to_int(key, v);
    else if (key == "schedule.resume_from") c.schedule.resume_from = v;
    else if (key == "analysis.enabled") c.analysis.enabled = to_bool(key, v);
    else if (key == "analysis.k_bins") c.analysis.k_bins = static_cast<int>(to_int(key, v));
    else if (key == "analysis.activation_split") {
        if (v == "train") c.analysis.activation_split = Split::Train;
        else if (v == "test") c.analysis.activation_split = Split::Test;
        else if (v == "all") c.analysis.activation_split = Split::All;
        else throw std::invalid_argument("config: analysis.activation_split must be train, test or all");
    } else if (key == "analysis.bias_correction") c.analysis.bias_correction = to_bool(key, v);
    else if (key == "analysis.threads") c.analysis.threads = static_cast<int>(to_int(key, v));
    else if (key == "analysis.tau") c.analysis.grok.tau = to_double(key, v);
    else if (key == "analysis.train_tau") c.analysis.grok.train_tau = to_double(key, v);
    else if (key == "analysis.min_gap") c.analysis.grok.min_gap = to_int(key, v);
    else if (key == "analysis.smoothing_window") c.analysis.phases.smoothing_window = static_cast<int>(to_int(key, v));
    else if (key == "analysis.prominence_min") c.analysis.prominence_min = to_double(key, v);
    else if (key == "analysis.peak_window_fraction") c.analysis.peak_window_fraction = to_double(key, v);
    else throw std::invalid_argument("config: unknown key '" + key + "'");
}

RunConfig parse_config(std::istream& in) {
    RunConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
        set_config_value(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    cfg.resolve_seeds();
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config " + path.string());
    return parse_config(in);
}

namespace {

std::string serialize(const RunConfig& c, bool for_hash) {
    std::ostringstream o;
    o << "run.seed = " << c.seed << '\n';
    if (!for_hash) o << "run.output_dir = " << c.output_dir.string() << '\n';
    o << "task.p = " << c.task.p << '\n';
    o << "task.train_fraction = " << fmt(c.task.train_fraction) << '\n';
    o << "task.split_seed = " << c.task.split_seed << '\n';
    o << "model.n_hidden = " << c.n_hidden << '\n';
    o << "model.init_scheme = uniform-fan-in\n";
    o << "model.alpha = " << fmt(c.init.alpha) << '\n';
    o << "model.zero_last_layer = " << (c.init.zero_last_layer ? "true" : "false") << '\n';
    o << "model.init_seed = " << c.init.init_seed << '\n';
    if (!c.mask.empty()) o << "model.mask = " << mask_string(c.mask) << '\n';
    o << "optim.lr = " << fmt(c.optim.lr) << '\n';
    o << "optim.beta1 = " << fmt(c.optim.beta1) << '\n';
    o << "optim.beta2 = " << fmt(c.optim.beta2) << '\n';
    o << "optim.eps = " << fmt(c.optim.eps) << '\n';
    o << "optim.weight_decay = " << fmt(c.optim.weight_decay) << '\n';
    o << "optim.decay_biases = " << (c.optim.decay_biases ? "true" : "false") << '\n';
    o << "optim.constrain_norm = " << (c.constrain_norm ? "true" : "false") << '\n';
    o << "optim.norm_include_biases = " << (c.norm_include_biases ? "true" : "false") << '\n';
    o << "schedule.max_epochs = " << c.effective_max_epochs() << '\n';
    o << "schedule.dense_until = " << c.schedule.dense_until << '\n';
    o << "schedule.stride = " << c.schedule.stride << '\n';
    o << "schedule.checkpoint_every = " << c.schedule.checkpoint_every << '\n';
    if (!c.schedule.resume_from.empty()) o << "schedule.resume_from = " << c.schedule.resume_from << '\n';
    o << "analysis.enabled = " << (c.analysis.enabled ? "true" : "false") << '\n';
    o << "analysis.k_bins = " << c.analysis.k_bins << '\n';
    o << "analysis.activation_split = " << split_name(c.analysis.activation_split) << '\n';
    o << "analysis.bias_correction = " << (c.analysis.bias_correction ? "true" : "false") << '\n';
    if (!for_hash) o << "analysis.threads = " << c.analysis.threads << '\n';
    o << "analysis.tau = " << fmt(c.analysis.grok.tau) << '\n';
    if (c.analysis.grok.train_tau) o << "analysis.train_tau = " << fmt(*c.analysis.grok.train_tau) << '\n';
    o << "analysis.min_gap = " << c.analysis.grok.min_gap << '\n';
    o << "analysis.smoothing_window = " << c.analysis.phases.smoothing_window << '\n';
    o << "analysis.prominence_min = " << fmt(c.analysis.prominence_min) << '\n';
    o << "analysis.peak_window_fraction = " << fmt(c.analysis.peak_window_fraction) << '\n';
    return o.str();
}

}  // namespace

std::string serialize_config(const RunConfig& cfg) { return serialize(cfg, false); }

std::string config_hash(const RunConfig& cfg) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : serialize(cfg, true)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace grokinfo
