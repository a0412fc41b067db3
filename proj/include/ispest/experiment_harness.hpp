#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "ispest/config.hpp"

namespace ispest {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct ReplicationResult {
    Scheme scheme = Scheme::Continuous;
    double T = 0.0;
    int replication = 0;
    std::uint64_t seed = 0;
    std::string status = "ok";
    double alpha_hat = kNaN;
    double hurst = kNaN;
    int J = 0;
    int J0 = 0;
    int J1 = 0;
    double delta = kNaN;
    bool boundary = false;
    // Indexed by j; NaN where not computed.
    std::vector<double> m;       // n_j^-1 sum_k d_{j,k}^2
    std::vector<double> lambda;  // m_j / v_j - 1 with the oracle attached
    double runtime_ms = 0.0;

    bool ok() const { return status == "ok"; }
};

struct SummaryRow {
    Scheme scheme = Scheme::Continuous;
    double T = 0.0;
    int ok = 0;
    int failed = 0;
    double median = kNaN;
    double mean = kNaN;
    double stderr_mean = kNaN;
    double median_abs_error = kNaN;
    double robust_rmse = kNaN;  // 1.4826 median |alpha_hat - alpha|
    double rmse = kNaN;
    double bias = kNaN;         // mean error
    double spread = kNaN;       // standard deviation of alpha_hat
};

struct ScaleRow {
    Scheme scheme = Scheme::Continuous;
    double T = 0.0;
    int j = 0;
    int count = 0;
    double m_mean = kNaN;
    double m_stderr = kNaN;
    double v_oracle = kNaN;
    double lambda_mean = kNaN;
    double lambda_stderr = kNaN;
};

/// Weighted least-squares slope of log2 m_j on j.
struct SlopeFit {
    Scheme scheme = Scheme::Continuous;
    double T = 0.0;
    int j_lo = 0;
    int j_hi = 0;
    double slope = kNaN;
    double slope_stderr = kNaN;
    double target = kNaN;        // 2 - alpha
    double oracle_slope = kNaN;  // same fit on the oracle v_j
};

/// Log-log slope of the robust RMSE against T.
struct RateFit {
    Scheme scheme = Scheme::Continuous;
    double slope = kNaN;
    double target = kNaN;  // -rate_exponent
    bool defined = false;
};

struct OracleRow {
    std::string name;
    double expected = kNaN;
    double observed = kNaN;
    double stderr_obs = kNaN;
    double z = kNaN;
    bool pass = false;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<ReplicationResult> results;
    std::vector<SummaryRow> summary;
    std::vector<ScaleRow> scales;
    std::vector<SlopeFit> slopes;
    std::vector<RateFit> rates;
    std::vector<OracleRow> oracle;
    bool check_passed = true;
    std::vector<std::string> messages;
};

/// Runs `count` independent tasks on `threads` workers. Each task writes only
/// its own output slot, so results do not depend on the schedule.
void parallel_for(int count, int threads, const std::function<void(int)>& task);

ExperimentReport run_consistency(const ExperimentConfig& config);
ExperimentReport run_variance_scaling(const ExperimentConfig& config);
ExperimentReport run_rate_study(const ExperimentConfig& config);
ExperimentReport run_oracle_check(const ExperimentConfig& config);
ExperimentReport run_experiment(const ExperimentConfig& config);

/// results.csv, summary.csv, scales.csv, plus fits.csv or oracle.csv when present.
void write_report(const ExperimentReport& report, const std::string& directory);

/// Robust location/scale helpers shared with the tests.
double median(std::vector<double> values);

}  // namespace ispest
