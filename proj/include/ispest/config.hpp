#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ispest/path_simulator.hpp"
#include "ispest/traffic_model.hpp"
#include "ispest/wavelet_bank.hpp"
#include "ispest/whittle_estimator.hpp"

namespace ispest {

/// `key = value` lines grouped under `[section]` headers; `#` starts a comment.
/// Keys are stored as "section.key".
class KeyValueFile {
public:
    static KeyValueFile parse(const std::string& text);
    static KeyValueFile load(const std::string& path);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    std::string get(const std::string& key, const std::string& fallback) const;
    std::string require(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    long get_long(const std::string& key, long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    /// Keys never read through the accessors above.
    std::vector<std::string> unused() const;

private:
    std::map<std::string, std::string> values_;
    mutable std::map<std::string, bool> used_;
};

/// Law description as it appears in config files and on the command line.
struct LawSpec {
    std::string kind = "pareto";  // pareto | stable | two_regime
    double alpha = 1.5;
    std::string rate_law = "point:1";
    double sigma = 1.0;
    double u0 = 1.0;
    double beta = 1.0;
    double gamma = 1.0;
    int p_star = 4;
};

/// "point:<u>", "lognormal:<mu>,<sigma>", "table:<v1>,<v2>,...;<p1>,<p2>,...".
RateLaw parse_rate_law(const std::string& text);
DurationRateLaw make_law(const LawSpec& spec);
LawSpec read_law_spec(const KeyValueFile& kv, const std::string& section = "law");

enum class ScaleRule { Default, Explicit, RateOptimal };

struct ScaleSpec {
    ScaleRule rule = ScaleRule::Default;
    int j0 = 0;
    int j1 = 0;
    double beta = 0.0;  // rate-optimal smoothness; +inf allowed
    SmoothnessRoute route = SmoothnessRoute::TailExpansion;
    double logbase = 2.0;
};

ScaleSelection select_scales(const ScaleSpec& spec, double T, int M, Scheme scheme, double alpha_hint);

/// "65536", "2^16", "1e5".
double parse_horizon(const std::string& text);
/// Comma-separated list of horizons or schemes.
std::vector<double> parse_horizon_list(const std::string& text);
std::vector<Scheme> parse_scheme_list(const std::string& text);

enum class ExperimentKind { Consistency, VarianceScaling, RateStudy, OracleCheck };

std::string to_string(ExperimentKind k);
ExperimentKind parse_experiment_kind(const std::string& text);

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Consistency;
    LawSpec law;
    std::string wavelet = "haar";
    int wavelet_resolution = 12;
    ScaleSpec scales;
    std::vector<Scheme> schemes{Scheme::Continuous};
    std::vector<double> horizons{65536.0};
    int replications = 50;
    std::uint64_t seed = 1;
    InitMode init = InitMode::stationary();
    int threads = 1;
    std::string output = "out";
    bool check = false;
    bool use_all_k = false;
    // Replaces every coefficient by an independent N(0, 1) draw (scaling test hook).
    bool white_noise = false;
};

/// Reads [law], [wavelet], [scales] and [run]; unknown keys are rejected.
ExperimentConfig read_experiment_config(const KeyValueFile& kv);
ExperimentConfig load_experiment_config(const std::string& path);

}  // namespace ispest
