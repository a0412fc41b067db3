#include "ispest/experiment_harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include "ispest/errors.hpp"
#include "ispest/random.hpp"
#include "ispest/theory_oracle.hpp"

namespace ispest {

namespace {

constexpr double kMadScale = 1.4826;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return kNaN;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
    if (v.size() < 2) return kNaN;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

InitMode effective_init(const ExperimentConfig& config, const DurationRateLaw& law,
                        std::vector<std::string>& messages) {
    if (config.init.kind == InitMode::Kind::Stationary && !law.has_size_biased_sampler()) {
        messages.emplace_back("no size-biased sampler for " + law.describe() + "; using burn-in of 10T");
        return InitMode::burn_in_for(0.0);
    }
    return config.init;
}

/// Fixed per-experiment state shared read-only by the workers.
struct Setup {
    DurationRateLaw law;
    WaveletPair wavelet;
    InitMode init;
    // v_j for j = 0..max over all horizons; empty without an oracle.
    std::vector<double> v;
};

bool oracle_applies(const ExperimentConfig& config, const Setup& s) {
    return config.init.kind != InitMode::Kind::Fresh && s.law.alpha() > 1.0;
}

Setup make_setup(const ExperimentConfig& config, std::vector<std::string>& messages, bool want_oracle,
                 int j_max) {
    Setup s{make_law(config.law), make_wavelet(config.wavelet, config.wavelet_resolution), InitMode{}, {}};
    s.init = effective_init(config, s.law, messages);
    bool continuous = false;
    for (Scheme sc : config.schemes) continuous |= sc == Scheme::Continuous;
    if (want_oracle && continuous && oracle_applies(config, s) && !config.white_noise) {
        const ScaleKernel kernel(s.wavelet);
        s.v.assign(static_cast<std::size_t>(j_max) + 1, kNaN);
        for (int j = 1; j <= j_max; ++j) s.v[j] = v_j(s.law, kernel, j);
    }
    return s;
}

CoefficientArray coefficients_for(const SessionSet& set, const Setup& s, Scheme scheme, double T, int jmin,
                                  int jmax) {
    switch (scheme) {
        case Scheme::Continuous: return continuous_coefficients(set, s.wavelet, jmax, jmin);
        case Scheme::Discrete: return discrete_coefficients(sample_grid(set, static_cast<int>(T)), s.wavelet, jmax);
        case Scheme::Averaged:
            return discrete_coefficients(window_averages(set, static_cast<int>(T)), s.wavelet, jmax);
    }
    throw ValidationError("unknown scheme");
}

void inject_white_noise(CoefficientArray& c, std::uint64_t seed) {
    Rng rng(split_seed(seed, 99));
    for (auto& d : c.d) {
        for (Eigen::Index k = 0; k < d.size(); ++k) d[k] = rng.normal();
    }
}

int max_horizon_scale(const ExperimentConfig& config, int M) {
    int j = 0;
    for (double T : config.horizons) j = std::max(j, max_scale_index(T, M));
    return j;
}

void validate(const ExperimentConfig& config) {
    if (config.replications < 1) throw ValidationError("replications must be >= 1");
    if (config.horizons.empty()) throw ValidationError("no horizons given");
    if (config.schemes.empty()) throw ValidationError("no schemes given");
    for (Scheme sc : config.schemes) {
        if (sc == Scheme::Averaged && config.wavelet != "haar" && config.wavelet != "db1") {
            throw ValidationError("the averaged scheme is supported for the Haar wavelet only");
        }
    }
    for (double T : config.horizons) {
        if (!(T >= 1.0) || !std::isfinite(T) || T > 2147483647.0 || T != std::floor(T)) {
            throw ValidationError("horizons must be positive integers, got " + fmt(T));
        }
    }
}

/// Replications run as tasks over (T, r); every scheme sees the same path.
std::vector<ReplicationResult> run_replications(const ExperimentConfig& config, const Setup& s,
                                                bool all_scales) {
    const int R = config.replications;
    const int nT = static_cast<int>(config.horizons.size());
    const int nS = static_cast<int>(config.schemes.size());
    std::vector<ReplicationResult> out(static_cast<std::size_t>(nT) * R * nS);

    parallel_for(nT * R, config.threads, [&](int task) {
        const int ti = task / R;
        const int r = task % R;
        const double T = config.horizons[ti];
        const std::uint64_t seed = split_seed(config.seed, static_cast<std::uint64_t>(r));
        std::optional<SessionSet> set;
        std::string sim_error;
        const auto t_sim = std::chrono::steady_clock::now();
        try {
            set.emplace(simulate(s.law, T, s.init, seed));
        } catch (const std::exception& e) {
            sim_error = e.what();
        }
        const double sim_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_sim).count();

        for (int si = 0; si < nS; ++si) {
            const auto t0 = std::chrono::steady_clock::now();
            ReplicationResult& res = out[(static_cast<std::size_t>(ti) * R + r) * nS + si];
            res.scheme = config.schemes[si];
            res.T = T;
            res.replication = r;
            res.seed = seed;
            try {
                if (!set) throw NumericalError("simulation failed: " + sim_error);
                const ScaleSelection scales =
                    select_scales(config.scales, T, s.wavelet.M, res.scheme, config.law.alpha);
                res.J = scales.J;
                res.J0 = scales.J0;
                res.J1 = scales.J1;
                res.delta = scales.delta;
                const int jmin = all_scales ? 1 : scales.J0 + 1;
                const int jmax = all_scales ? scales.J : scales.J1;
                CoefficientArray coeffs = coefficients_for(*set, s, res.scheme, T, jmin, jmax);
                if (config.white_noise) inject_white_noise(coeffs, seed);

                res.m.assign(static_cast<std::size_t>(jmax) + 1, kNaN);
                for (int j = jmin; j <= jmax; ++j) {
                    const Eigen::VectorXd& d = coeffs.scale(j);
                    if (d.size() > 0) res.m[j] = d.squaredNorm() / static_cast<double>(d.size());
                }
                if (!s.v.empty() && res.scheme == Scheme::Continuous) {
                    res.lambda.assign(res.m.size(), kNaN);
                    for (int j = jmin; j <= jmax; ++j) res.lambda[j] = res.m[j] / s.v[j] - 1.0;
                }

                EstimatorOptions opts;
                opts.use_all_k = config.use_all_k;
                const EstimateResult est = estimate_alpha(coeffs, scales, opts);
                res.alpha_hat = est.alpha_hat;
                res.hurst = est.hurst;
                res.boundary = est.boundary;
                if (!std::isfinite(res.alpha_hat)) throw NumericalError("non-finite estimate");
            } catch (const ValidationError& e) {
                res.status = std::string("validation_error: ") + e.what();
            } catch (const std::exception& e) {
                res.status = std::string("numerical_error: ") + e.what();
            }
            res.runtime_ms =
                std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count() +
                (si == 0 ? sim_ms : 0.0);
        }
    });
    return out;
}

std::vector<SummaryRow> summarize(const ExperimentConfig& config, const std::vector<ReplicationResult>& results) {
    const double alpha = config.law.alpha;
    std::vector<SummaryRow> rows;
    for (Scheme sc : config.schemes) {
        for (double T : config.horizons) {
            SummaryRow row;
            row.scheme = sc;
            row.T = T;
            std::vector<double> est;
            std::vector<double> abs_err;
            double sq = 0.0;
            for (const ReplicationResult& r : results) {
                if (r.scheme != sc || r.T != T) continue;
                if (!r.ok()) {
                    ++row.failed;
                    continue;
                }
                est.push_back(r.alpha_hat);
                abs_err.push_back(std::abs(r.alpha_hat - alpha));
                sq += (r.alpha_hat - alpha) * (r.alpha_hat - alpha);
            }
            row.ok = static_cast<int>(est.size());
            if (!est.empty()) {
                row.median = median(est);
                row.mean = mean_of(est);
                row.spread = sd_of(est);
                row.stderr_mean = row.spread / std::sqrt(static_cast<double>(est.size()));
                row.median_abs_error = median(abs_err);
                row.robust_rmse = kMadScale * row.median_abs_error;
                row.rmse = std::sqrt(sq / static_cast<double>(est.size()));
                row.bias = row.mean - alpha;
            }
            rows.push_back(row);
        }
    }
    return rows;
}

std::vector<ScaleRow> scale_table(const ExperimentConfig& config, const Setup& s,
                                  const std::vector<ReplicationResult>& results) {
    std::vector<ScaleRow> rows;
    for (Scheme sc : config.schemes) {
        for (double T : config.horizons) {
            std::map<int, std::pair<std::vector<double>, std::vector<double>>> by_j;
            for (const ReplicationResult& r : results) {
                if (r.scheme != sc || r.T != T || !r.ok()) continue;
                for (std::size_t j = 0; j < r.m.size(); ++j) {
                    if (std::isnan(r.m[j])) continue;
                    by_j[static_cast<int>(j)].first.push_back(r.m[j]);
                    if (j < r.lambda.size() && !std::isnan(r.lambda[j])) {
                        by_j[static_cast<int>(j)].second.push_back(r.lambda[j]);
                    }
                }
            }
            for (const auto& [j, vals] : by_j) {
                ScaleRow row;
                row.scheme = sc;
                row.T = T;
                row.j = j;
                row.count = static_cast<int>(vals.first.size());
                row.m_mean = mean_of(vals.first);
                row.m_stderr = sd_of(vals.first) / std::sqrt(static_cast<double>(vals.first.size()));
                if (sc == Scheme::Continuous && static_cast<std::size_t>(j) < s.v.size()) row.v_oracle = s.v[j];
                if (!vals.second.empty()) {
                    row.lambda_mean = mean_of(vals.second);
                    row.lambda_stderr = sd_of(vals.second) / std::sqrt(static_cast<double>(vals.second.size()));
                }
                rows.push_back(row);
            }
        }
    }
    return rows;
}

/// Weighted least squares of y on x with weights w; returns (slope, stderr).
std::pair<double, double> wls_slope(const std::vector<double>& x, const std::vector<double>& y,
                                    const std::vector<double>& w) {
    if (x.size() < 2) return {kNaN, kNaN};
    double sw = 0.0, sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sw += w[i];
        sx += w[i] * x[i];
        sy += w[i] * y[i];
    }
    const double mx = sx / sw;
    const double my = sy / sw;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += w[i] * (x[i] - mx) * (x[i] - mx);
        sxy += w[i] * (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0)) return {kNaN, kNaN};
    return {sxy / sxx, std::sqrt(1.0 / sxx)};
}

bool strictly_decreasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (!(v[i] < v[i - 1])) return false;
    }
    return true;
}

OracleRow oracle_row(std::string name, double expected, double observed, double stderr_obs) {
    OracleRow row{std::move(name), expected, observed, stderr_obs, kNaN, false};
    row.z = (observed - expected) / stderr_obs;
    row.pass = std::isfinite(row.z) ? std::abs(row.z) < 4.0 : observed == expected;
    return row;
}

/// Mean with the standard error of the mean.
std::pair<double, double> mean_se(const std::vector<double>& v) {
    return {mean_of(v), sd_of(v) / std::sqrt(static_cast<double>(v.size()))};
}

/// Sample covariance with a delta-method standard error.
std::pair<double, double> cov_se(const std::vector<double>& a, const std::vector<double>& b) {
    const double ma = mean_of(a);
    const double mb = mean_of(b);
    std::vector<double> prod(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) prod[i] = (a[i] - ma) * (b[i] - mb);
    const double n = static_cast<double>(a.size());
    return {mean_of(prod) * n / (n - 1.0), sd_of(prod) / std::sqrt(n)};
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ValidationError("cannot write " + path.string());
    os << text;
}

}  // namespace

double median(std::vector<double> values) {
    if (values.empty()) return kNaN;
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

void parallel_for(int count, int threads, const std::function<void(int)>& task) {
    const int workers = std::clamp(threads, 1, std::max(count, 1));
    if (workers == 1) {
        for (int i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int i = next++; i < count && !failed; i = next++) {
                try {
                    task(i);
                } catch (...) {
                    if (!failed.exchange(true)) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

ExperimentReport run_consistency(const ExperimentConfig& config) {
    validate(config);
    ExperimentReport rep;
    rep.config = config;
    rep.config.kind = ExperimentKind::Consistency;
    const WaveletPair probe = make_wavelet(config.wavelet, 4);
    const Setup s = make_setup(config, rep.messages, true, max_horizon_scale(config, probe.M));
    rep.results = run_replications(config, s, false);
    rep.summary = summarize(config, rep.results);
    rep.scales = scale_table(config, s, rep.results);

    for (Scheme sc : config.schemes) {
        std::vector<double> err;
        for (const SummaryRow& row : rep.summary) {
            if (row.scheme == sc) err.push_back(row.median_abs_error);
        }
        if (!strictly_decreasing(err)) {
            rep.check_passed = false;
            rep.messages.push_back("median |alpha_hat - alpha| not strictly decreasing in T for " + to_string(sc));
        }
    }
    for (const SummaryRow& row : rep.summary) {
        if (row.ok == 0) {
            rep.check_passed = false;
            rep.messages.push_back("no successful replication at T=" + fmt(row.T));
        }
    }
    return rep;
}

ExperimentReport run_variance_scaling(const ExperimentConfig& config) {
    validate(config);
    ExperimentReport rep;
    rep.config = config;
    rep.config.kind = ExperimentKind::VarianceScaling;
    const WaveletPair probe = make_wavelet(config.wavelet, 4);
    const Setup s = make_setup(config, rep.messages, true, max_horizon_scale(config, probe.M));
    rep.results = run_replications(config, s, true);
    rep.summary = summarize(config, rep.results);
    rep.scales = scale_table(config, s, rep.results);

    const double R = config.replications;
    for (Scheme sc : config.schemes) {
        for (double T : config.horizons) {
            const int J = max_scale_index(T, s.wavelet.M);
            SlopeFit fit;
            fit.scheme = sc;
            fit.T = T;
            fit.j_lo = std::max(1, static_cast<int>(std::ceil(J / 3.0)));
            fit.j_hi = static_cast<int>(std::floor(2.0 * J / 3.0));
            fit.target = 2.0 - config.law.alpha;
            std::vector<double> x, y, w, vy;
            for (const ScaleRow& row : rep.scales) {
                if (row.scheme != sc || row.T != T || row.j < fit.j_lo || row.j > fit.j_hi) continue;
                if (!(row.m_mean > 0.0)) continue;
                x.push_back(row.j);
                y.push_back(std::log2(row.m_mean));
                // var(log2 m) ~ (sd / (m ln 2))^2 / R; pooled over R with stderr = sd / sqrt(R).
                const double rel = row.m_stderr / (row.m_mean * std::log(2.0));
                w.push_back(rel > 0.0 ? 1.0 / (rel * rel) : R);
                if (static_cast<std::size_t>(row.j) < s.v.size()) vy.push_back(std::log2(s.v[row.j]));
            }
            std::tie(fit.slope, fit.slope_stderr) = wls_slope(x, y, w);
            if (vy.size() == x.size() && !vy.empty()) fit.oracle_slope = wls_slope(x, vy, w).first;
            if (!(std::abs(fit.slope - fit.target) <= 0.1)) {
                rep.check_passed = false;
                rep.messages.push_back("slope " + fmt(fit.slope) + " outside 2-alpha +- 0.1 for " + to_string(sc) +
                                       " at T=" + fmt(T));
            }
            rep.slopes.push_back(fit);
        }
    }
    return rep;
}

ExperimentReport run_rate_study(const ExperimentConfig& config) {
    validate(config);
    if (config.scales.rule != ScaleRule::RateOptimal) {
        throw ValidationError("rate study needs scales.rule = rate_optimal");
    }
    if (!(config.law.alpha > 1.0 && config.law.alpha < 2.0)) throw ValidationError("rate study needs alpha in (1, 2)");
    ExperimentReport rep;
    rep.config = config;
    rep.config.kind = ExperimentKind::RateStudy;
    const Setup s = make_setup(config, rep.messages, false, 0);
    rep.results = run_replications(config, s, false);
    rep.summary = summarize(config, rep.results);
    rep.scales = scale_table(config, s, rep.results);

    std::map<Scheme, std::vector<double>> robust;
    for (Scheme sc : config.schemes) {
        RateFit fit;
        fit.scheme = sc;
        fit.target = -rate_exponent(sc, config.law.alpha, config.scales.beta, config.scales.route);
        std::vector<double> x, y;
        for (const SummaryRow& row : rep.summary) {
            if (row.scheme != sc) continue;
            robust[sc].push_back(row.robust_rmse);
            if (row.robust_rmse > 0.0) {
                x.push_back(std::log(row.T));
                y.push_back(std::log(row.robust_rmse));
            }
        }
        if (x.size() >= 2) {
            fit.slope = wls_slope(x, y, std::vector<double>(x.size(), 1.0)).first;
            fit.defined = std::isfinite(fit.slope);
        }
        if (!fit.defined) rep.messages.push_back("log-log slope undefined for " + to_string(sc) + " (fewer than two horizons)");
        if (!strictly_decreasing(robust[sc])) {
            rep.check_passed = false;
            rep.messages.push_back("robust RMSE not strictly decreasing in T for " + to_string(sc));
        }
        rep.rates.push_back(fit);
    }
    if (robust.count(Scheme::Continuous) && robust.count(Scheme::Discrete)) {
        const auto& c = robust[Scheme::Continuous];
        const auto& d = robust[Scheme::Discrete];
        for (std::size_t i = 0; i < c.size(); ++i) {
            if (!(d[i] >= c[i])) {
                rep.check_passed = false;
                rep.messages.push_back("discrete robust RMSE below continuous at T=" + fmt(config.horizons[i]));
            }
        }
    }
    return rep;
}

ExperimentReport run_oracle_check(const ExperimentConfig& config) {
    validate(config);
    ExperimentReport rep;
    rep.config = config;
    rep.config.kind = ExperimentKind::OracleCheck;
    const DurationRateLaw law = make_law(config.law);
    const WaveletPair w = make_wavelet(config.wavelet, config.wavelet_resolution);
    const double T = config.horizons.front();
    const int R = config.replications;
    if (R < 2) throw ValidationError("oracle check needs at least two replications");
    if (T < 16.0) throw ValidationError("oracle check needs T >= 16");

    InitMode stat_mode = config.init.kind == InitMode::Kind::Fresh ? InitMode::stationary() : config.init;
    ExperimentConfig tmp = config;
    tmp.init = stat_mode;
    stat_mode = effective_init(tmp, law, rep.messages);
    const bool stationary = law.alpha() > 1.0;

    const std::vector<int> scale_j{4, 6, 8};
    const int jmax = std::min(8, max_computable_scale(T, w.M, Scheme::Continuous));
    const std::vector<double> fresh_t{1.0, 2.0, 4.0, 8.0, 16.0};
    // Columns: X_S(0), X_S(2), X_S(T/2), d_{4,0}, d_{6,0}, d_{8,0}, then X(t) for fresh_t.
    const int cols = 6 + static_cast<int>(fresh_t.size());
    std::vector<std::vector<double>> data(cols, std::vector<double>(R, kNaN));

    parallel_for(R, config.threads, [&](int r) {
        const std::uint64_t seed = split_seed(config.seed, static_cast<std::uint64_t>(r));
        if (stationary) {
            const SessionSet st = simulate(law, T, stat_mode, split_seed(seed, 1));
            data[0][r] = evaluate(st, 0.0);
            data[1][r] = evaluate(st, 2.0);
            data[2][r] = evaluate(st, T / 2.0);
            if (jmax >= 4) {
                const CoefficientArray c = continuous_coefficients(st, w, jmax, 4);
                for (int i = 0; i < 3; ++i) {
                    if (scale_j[i] <= jmax) data[3 + i][r] = c.scale(scale_j[i])[0];
                }
            }
        }
        const SessionSet fr = simulate(law, T, InitMode::fresh(), split_seed(seed, 2));
        for (std::size_t i = 0; i < fresh_t.size(); ++i) data[6 + i][r] = evaluate(fr, fresh_t[i]);
    });

    if (stationary) {
        const StationaryMoments m0 = mean_cov_stationary(law, 0.0);
        const StationaryMoments m2 = mean_cov_stationary(law, 2.0);
        auto [a0, s0] = mean_se(data[0]);
        rep.oracle.push_back(oracle_row("stationary_mean_t0", m0.mean, a0, s0));
        auto [ah, sh] = mean_se(data[2]);
        rep.oracle.push_back(oracle_row("stationary_mean_tT/2", m0.mean, ah, sh));
        auto [v0, sv] = mean_se([&] {
            std::vector<double> sq(R);
            for (int r = 0; r < R; ++r) sq[r] = (data[0][r] - m0.mean) * (data[0][r] - m0.mean);
            return sq;
        }());
        rep.oracle.push_back(oracle_row("stationary_var_t0", m0.covariance, v0, sv));
        auto [c02, sc02] = cov_se(data[0], data[1]);
        rep.oracle.push_back(oracle_row("stationary_cov_0_2", m2.covariance, c02, sc02));

        const ScaleKernel kernel(w);
        for (int i = 0; i < 3; ++i) {
            const int j = scale_j[i];
            if (j > jmax) continue;
            std::vector<double> sq(R);
            for (int r = 0; r < R; ++r) sq[r] = data[3 + i][r] * data[3 + i][r];
            auto [m, se] = mean_se(sq);
            rep.oracle.push_back(oracle_row("var_d_j" + std::to_string(j) + "_k0", v_j(law, kernel, j), m, se));
        }
    }
    for (std::size_t i = 0; i < fresh_t.size(); ++i) {
        const double t = fresh_t[i];
        if (t == 2.0 || t == 8.0) continue;
        auto [m, se] = mean_se(data[6 + i]);
        rep.oracle.push_back(
            oracle_row("fresh_mean_t" + fmt(t), mean_cov_nonstationary(law, t, t).mean, m, se));
    }
    auto [c12, s12] = cov_se(data[6], data[7]);
    rep.oracle.push_back(oracle_row("fresh_cov_1_2", mean_cov_nonstationary(law, 1.0, 2.0).covariance, c12, s12));
    auto [c48, s48] = cov_se(data[8], data[9]);
    rep.oracle.push_back(oracle_row("fresh_cov_4_8", mean_cov_nonstationary(law, 4.0, 8.0).covariance, c48, s48));

    for (const OracleRow& row : rep.oracle) {
        if (!row.pass) {
            rep.check_passed = false;
            rep.messages.push_back("oracle row " + row.name + " failed with z=" + fmt(row.z));
        }
    }
    return rep;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
    switch (config.kind) {
        case ExperimentKind::Consistency: return run_consistency(config);
        case ExperimentKind::VarianceScaling: return run_variance_scaling(config);
        case ExperimentKind::RateStudy: return run_rate_study(config);
        case ExperimentKind::OracleCheck: return run_oracle_check(config);
    }
    throw ValidationError("unknown experiment kind");
}

void write_report(const ExperimentReport& report, const std::string& directory) {
    namespace fs = std::filesystem;
    const fs::path dir(directory);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ValidationError("cannot create " + directory + ": " + ec.message());
    const std::string kind = to_string(report.config.kind);

    std::ostringstream res;
    res << "experiment,scheme,T,replication,seed,status,alpha_hat,H,J,J0,J1,delta,boundary,runtime_ms\n";
    for (const ReplicationResult& r : report.results) {
        std::string status = r.status;
        std::replace(status.begin(), status.end(), ',', ';');
        std::replace(status.begin(), status.end(), '\n', ' ');
        res << kind << ',' << to_string(r.scheme) << ',' << fmt(r.T) << ',' << r.replication << ',' << r.seed
            << ',' << status << ',' << fmt(r.alpha_hat) << ',' << fmt(r.hurst) << ',' << r.J << ',' << r.J0 << ','
            << r.J1 << ',' << fmt(r.delta) << ',' << (r.boundary ? "true" : "false") << ','
            << fmt(r.runtime_ms) << '\n';
    }
    write_file(dir / "results.csv", res.str());

    if (!report.summary.empty()) {
        std::ostringstream sum;
        sum << "scheme,T,ok,failed,median,mean,stderr,median_abs_error,robust_rmse,rmse,bias,spread\n";
        for (const SummaryRow& s : report.summary) {
            sum << to_string(s.scheme) << ',' << fmt(s.T) << ',' << s.ok << ',' << s.failed << ',' << fmt(s.median)
                << ',' << fmt(s.mean) << ',' << fmt(s.stderr_mean) << ',' << fmt(s.median_abs_error) << ','
                << fmt(s.robust_rmse) << ',' << fmt(s.rmse) << ',' << fmt(s.bias) << ',' << fmt(s.spread) << '\n';
        }
        write_file(dir / "summary.csv", sum.str());
    }
    if (!report.scales.empty()) {
        std::ostringstream sc;
        sc << "scheme,T,j,count,m_mean,m_stderr,v_oracle,lambda_mean,lambda_stderr\n";
        for (const ScaleRow& s : report.scales) {
            sc << to_string(s.scheme) << ',' << fmt(s.T) << ',' << s.j << ',' << s.count << ',' << fmt(s.m_mean)
               << ',' << fmt(s.m_stderr) << ',' << fmt(s.v_oracle) << ',' << fmt(s.lambda_mean) << ','
               << fmt(s.lambda_stderr) << '\n';
        }
        write_file(dir / "scales.csv", sc.str());
    }
    if (!report.slopes.empty()) {
        std::ostringstream f;
        f << "scheme,T,j_lo,j_hi,slope,slope_stderr,target,oracle_slope\n";
        for (const SlopeFit& s : report.slopes) {
            f << to_string(s.scheme) << ',' << fmt(s.T) << ',' << s.j_lo << ',' << s.j_hi << ',' << fmt(s.slope)
              << ',' << fmt(s.slope_stderr) << ',' << fmt(s.target) << ',' << fmt(s.oracle_slope) << '\n';
        }
        write_file(dir / "slopes.csv", f.str());
    }
    if (!report.rates.empty()) {
        std::ostringstream f;
        f << "scheme,slope,target,defined\n";
        for (const RateFit& s : report.rates) {
            f << to_string(s.scheme) << ',' << fmt(s.slope) << ',' << fmt(s.target) << ','
              << (s.defined ? "true" : "false") << '\n';
        }
        write_file(dir / "rate.csv", f.str());
    }
    if (!report.oracle.empty()) {
        std::ostringstream f;
        f << "name,expected,observed,stderr,z,pass\n";
        for (const OracleRow& o : report.oracle) {
            f << o.name << ',' << fmt(o.expected) << ',' << fmt(o.observed) << ',' << fmt(o.stderr_obs) << ','
              << fmt(o.z) << ',' << (o.pass ? "true" : "false") << '\n';
        }
        write_file(dir / "oracle.csv", f.str());
    }
    std::ostringstream msg;
    msg << "check_passed=" << (report.check_passed ? "true" : "false") << '\n';
    for (const std::string& m : report.messages) msg << m << '\n';
    write_file(dir / "messages.txt", msg.str());
}

}  // namespace ispest
