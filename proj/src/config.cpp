#include "ispest/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "ispest/errors.hpp"

namespace ispest {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::istringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double to_double(const std::string& s, const std::string& what) {
    const std::string t = trim(s);
    if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
    try {
        std::size_t used = 0;
        const double v = std::stod(t, &used);
        if (used != t.size()) throw std::invalid_argument(t);
        return v;
    } catch (const std::logic_error&) {
        throw ValidationError("bad number for " + what + ": '" + s + "'");
    }
}

std::vector<double> to_doubles(const std::string& text, const std::string& what) {
    std::vector<double> out;
    for (const auto& item : split_list(text, ',')) out.push_back(to_double(item, what));
    return out;
}

}  // namespace

KeyValueFile KeyValueFile::parse(const std::string& text) {
    KeyValueFile kv;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ValidationError("line " + std::to_string(lineno) + ": bad section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ValidationError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ValidationError("line " + std::to_string(lineno) + ": empty key");
        kv.values_[section.empty() ? key : section + "." + key] = trim(line.substr(eq + 1));
    }
    return kv;
}

KeyValueFile KeyValueFile::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::string KeyValueFile::get(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    used_[key] = true;
    return it->second;
}

std::string KeyValueFile::require(const std::string& key) const {
    if (!has(key)) throw ValidationError("missing config key '" + key + "'");
    return get(key, "");
}

double KeyValueFile::get_double(const std::string& key, double fallback) const {
    return has(key) ? to_double(get(key, ""), key) : fallback;
}

long KeyValueFile::get_long(const std::string& key, long fallback) const {
    if (!has(key)) return fallback;
    const double v = to_double(get(key, ""), key);
    if (v != std::floor(v)) throw ValidationError("key '" + key + "' needs an integer");
    return static_cast<long>(v);
}

bool KeyValueFile::get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string v = get(key, "");
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ValidationError("key '" + key + "' needs true/false");
}

std::vector<std::string> KeyValueFile::unused() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_) {
        if (!used_.count(k)) out.push_back(k);
    }
    return out;
}

RateLaw parse_rate_law(const std::string& text) {
    const auto colon = text.find(':');
    const std::string kind = trim(text.substr(0, colon));
    const std::string args = colon == std::string::npos ? "" : text.substr(colon + 1);
    if (kind == "point") {
        const auto v = to_doubles(args.empty() ? "1" : args, "point rate");
        if (v.size() != 1) throw ValidationError("point rate law takes one value");
        return PointMass{v[0]};
    }
    if (kind == "lognormal") {
        const auto v = to_doubles(args.empty() ? "0,1" : args, "lognormal parameters");
        if (v.size() != 2) throw ValidationError("lognormal rate law takes mu,sigma");
        return LogNormal{v[0], v[1]};
    }
    if (kind == "table") {
        const auto parts = split_list(args, ';');
        if (parts.size() != 2) throw ValidationError("table rate law takes values;probabilities");
        return RateTable{to_doubles(parts[0], "table values"), to_doubles(parts[1], "table probabilities")};
    }
    throw ValidationError("unknown rate law '" + text + "'");
}

DurationRateLaw make_law(const LawSpec& spec) {
    const RateLaw rate = parse_rate_law(spec.rate_law);
    if (spec.kind == "pareto") return DurationRateLaw::pareto(spec.alpha, rate, spec.p_star);
    if (spec.kind == "stable") return DurationRateLaw::stable(spec.alpha, spec.sigma, rate, spec.p_star);
    if (spec.kind == "two_regime") {
        return DurationRateLaw::two_regime(spec.alpha, rate, TwoRegimeParams{spec.u0, spec.beta, spec.gamma},
                                           spec.p_star);
    }
    throw ValidationError("unknown law kind '" + spec.kind + "'");
}

LawSpec read_law_spec(const KeyValueFile& kv, const std::string& section) {
    const std::string p = section + ".";
    LawSpec s;
    s.kind = kv.get(p + "kind", s.kind);
    s.alpha = kv.get_double(p + "alpha", s.alpha);
    const bool two = s.kind == "two_regime";
    s.rate_law = kv.get(p + "rate_law", two ? "lognormal:0,1" : s.rate_law);
    s.sigma = kv.get_double(p + "params.sigma", s.sigma);
    s.u0 = kv.get_double(p + "params.u0", s.u0);
    s.beta = kv.get_double(p + "params.beta", s.beta);
    s.gamma = kv.get_double(p + "params.gamma", s.gamma);
    s.p_star = static_cast<int>(kv.get_long(p + "p_star", s.p_star));
    return s;
}

ScaleSelection select_scales(const ScaleSpec& spec, double T, int M, Scheme scheme, double alpha_hint) {
    switch (spec.rule) {
        case ScaleRule::Default: return default_scales(T, M, spec.logbase, scheme);
        case ScaleRule::Explicit: return build_scales(T, M, spec.j0, spec.j1, scheme);
        case ScaleRule::RateOptimal:
            return rate_optimal_scales(T, M, spec.beta, alpha_hint, scheme, spec.route);
    }
    throw ValidationError("unknown scale rule");
}

double parse_horizon(const std::string& text) {
    const std::string t = trim(text);
    const auto caret = t.find('^');
    double v = 0.0;
    if (caret != std::string::npos) {
        v = std::pow(to_double(t.substr(0, caret), "T base"), to_double(t.substr(caret + 1), "T exponent"));
    } else {
        v = to_double(t, "T");
    }
    if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError("T must be positive and finite");
    return v;
}

std::vector<double> parse_horizon_list(const std::string& text) {
    std::vector<double> out;
    for (const auto& item : split_list(text, ',')) out.push_back(parse_horizon(item));
    if (out.empty()) throw ValidationError("empty T list");
    return out;
}

std::vector<Scheme> parse_scheme_list(const std::string& text) {
    std::vector<Scheme> out;
    for (const auto& item : split_list(text, ',')) out.push_back(parse_scheme(item));
    if (out.empty()) throw ValidationError("empty scheme list");
    return out;
}

std::string to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::Consistency: return "consistency";
        case ExperimentKind::VarianceScaling: return "variance_scaling";
        case ExperimentKind::RateStudy: return "rate_study";
        case ExperimentKind::OracleCheck: return "oracle_check";
    }
    return "?";
}

ExperimentKind parse_experiment_kind(const std::string& text) {
    if (text == "consistency") return ExperimentKind::Consistency;
    if (text == "variance_scaling") return ExperimentKind::VarianceScaling;
    if (text == "rate_study") return ExperimentKind::RateStudy;
    if (text == "oracle_check") return ExperimentKind::OracleCheck;
    throw ValidationError("unknown experiment kind '" + text + "'");
}

ExperimentConfig read_experiment_config(const KeyValueFile& kv) {
    ExperimentConfig c;
    c.kind = parse_experiment_kind(kv.get("run.experiment", to_string(c.kind)));
    c.law = read_law_spec(kv);
    c.wavelet = kv.get("wavelet.name", c.wavelet);
    c.wavelet_resolution = static_cast<int>(kv.get_long("wavelet.resolution", c.wavelet_resolution));

    const std::string rule = kv.get("scales.rule", "default");
    if (rule == "default") {
        c.scales.rule = ScaleRule::Default;
    } else if (rule == "explicit") {
        c.scales.rule = ScaleRule::Explicit;
        kv.require("scales.j0");
        kv.require("scales.j1");
        c.scales.j0 = static_cast<int>(kv.get_long("scales.j0", 0));
        c.scales.j1 = static_cast<int>(kv.get_long("scales.j1", 0));
    } else if (rule == "rate_optimal") {
        c.scales.rule = ScaleRule::RateOptimal;
        c.scales.beta = to_double(kv.require("scales.beta"), "scales.beta");
        c.scales.route = parse_smoothness_route(kv.get("scales.route", "tail_expansion"));
    } else {
        throw ValidationError("unknown scale rule '" + rule + "'");
    }
    const std::string base = kv.get("scales.logbase", "2");
    c.scales.logbase = base == "e" ? 0.0 : to_double(base, "scales.logbase");

    c.schemes = parse_scheme_list(kv.get("run.schemes", "continuous"));
    c.horizons = parse_horizon_list(kv.get("run.T", "2^16"));
    c.replications = static_cast<int>(kv.get_long("run.replications", c.replications));
    if (c.replications < 1) throw ValidationError("replications must be >= 1");
    const long seed = kv.get_long("run.seed", 1);
    if (seed < 0) throw ValidationError("seed must be non-negative");
    c.seed = static_cast<std::uint64_t>(seed);
    c.init = parse_init_mode(kv.get("run.init", "stationary"));
    c.threads = static_cast<int>(kv.get_long("run.threads", c.threads));
    if (c.threads < 1) throw ValidationError("threads must be >= 1");
    c.output = kv.get("run.output", c.output);
    c.check = kv.get_bool("run.check", c.check);
    c.use_all_k = kv.get_bool("run.use_all_k", c.use_all_k);
    const std::string hook = kv.get("run.coefficient_hook", "none");
    if (hook == "white_noise") {
        c.white_noise = true;
    } else if (hook != "none") {
        throw ValidationError("unknown coefficient hook '" + hook + "'");
    }

    const auto unused = kv.unused();
    if (!unused.empty()) throw ValidationError("unknown config key '" + unused.front() + "'");
    return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    return read_experiment_config(KeyValueFile::load(path));
}

}  // namespace ispest
