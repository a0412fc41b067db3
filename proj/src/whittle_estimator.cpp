#include "ispest/whittle_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "ispest/errors.hpp"

namespace ispest {

namespace {

constexpr double kLn2 = 0.6931471805599453;

std::string str(int v) { return std::to_string(v); }

}  // namespace

int max_scale_index(double T, int M) {
    const double bound = (T - M + 1) / (M + 1);
    if (!(bound >= 1.0)) return -1;
    int j = 0;
    while (j < 62 && std::ldexp(1.0, j + 1) <= bound) ++j;
    return j;
}

ScaleSelection build_scales(double T, int M, int J0, int J1, Scheme scheme) {
    const int J = max_scale_index(T, M);
    if (J < 2) throw ScaleSelectionError("T too small: J=" + str(J) + " leaves no room for 0 < J0 < J1 <= J");
    if (J0 < 1) throw ScaleSelectionError("J0 >= 1 violated (J0=" + str(J0) + ")");
    if (J0 >= J1) throw ScaleSelectionError("J0 < J1 violated (J0=" + str(J0) + ", J1=" + str(J1) + ")");
    if (J1 > J) throw ScaleSelectionError("J1 <= J violated (J1=" + str(J1) + ", J=" + str(J) + ")");

    ScaleSelection s;
    s.T = T;
    s.M = M;
    s.J = J;
    s.J0 = J0;
    s.J1 = J1;
    s.n.resize(J1 - J0);
    double total = 0.0;
    double weighted = 0.0;
    for (int j = J0 + 1; j <= J1; ++j) {
        const double nj = std::ldexp(1.0, J - j);
        if (nj > static_cast<double>(computable_range(j, T, M, scheme))) {
            throw ScaleSelectionError("n_j exceeds the computable range at j=" + str(j));
        }
        s.n[j - J0 - 1] = nj;
        total += nj;
        weighted += nj * j;
    }
    s.delta = weighted / total;
    s.delta_closed_form = J0 + 2.0 + (J0 - J1) / (std::ldexp(1.0, J1 - J0) - 1.0);
    return s;
}

ScaleSelection default_scales(double T, int M, double logbase, Scheme scheme) {
    const int J = max_scale_index(T, M);
    if (J < 2) throw ScaleSelectionError("T too small for the default scale rule (J=" + str(J) + ")");
    const int J0 = J / 2;
    auto upper = [&](double base) {
        const double lg = base > 0.0 ? std::log(J) / std::log(base) : std::log(J);
        const int j1 = static_cast<int>(std::floor(J / 2.0 + lg));
        return std::clamp(j1, J0 + 1, J);
    };
    ScaleSelection s = build_scales(T, M, J0, upper(logbase), scheme);
    s.rule = logbase > 0.0 ? "default(log base " + std::to_string(logbase).substr(0, 4) + ")" : "default(ln)";
    s.j1_base2 = upper(2.0);
    s.j1_natural = upper(0.0);
    return s;
}

std::string to_string(SmoothnessRoute r) { return r == SmoothnessRoute::Direct ? "direct" : "tail_expansion"; }

SmoothnessRoute parse_smoothness_route(const std::string& text) {
    if (text == "direct") return SmoothnessRoute::Direct;
    if (text == "tail_expansion") return SmoothnessRoute::TailExpansion;
    throw ValidationError("unknown smoothness route '" + text + "'");
}

double effective_beta(double alpha, double beta, SmoothnessRoute route) {
    return route == SmoothnessRoute::TailExpansion ? std::min(beta, 2.0 - alpha) : beta;
}

ScaleSelection rate_optimal_scales(double T, int M, double beta, double alpha_hint, Scheme scheme,
                                   SmoothnessRoute route) {
    if (!(alpha_hint > 1.0 && alpha_hint < 2.0)) {
        throw ValidationError("rate-optimal scales need alpha_hint in (1, 2)");
    }
    if (!(beta > 0.0)) throw ValidationError("beta must be positive");
    double g = effective_beta(alpha_hint, beta, route);
    if (scheme != Scheme::Continuous) g = std::min(g, 2.0 - alpha_hint);
    if (std::isinf(g)) throw ValidationError("beta = inf needs the tail-expansion route");
    const int J = max_scale_index(T, M);
    const int J0 = static_cast<int>(std::floor(J / (2.0 * g + alpha_hint)));
    ScaleSelection s = build_scales(T, M, J0, J, scheme);
    s.rule = "rate_optimal";
    return s;
}

ScaleEnergy scale_energy(const CoefficientArray& coeffs, const ScaleSelection& scales, bool use_all_k) {
    if (coeffs.max_scale() < scales.J1) {
        throw ScaleSelectionError("coefficients stop at j=" + str(coeffs.max_scale()) + " < J1=" + str(scales.J1));
    }
    const int m = scales.scale_count();
    ScaleEnergy e;
    e.j.resize(m);
    e.count.resize(m);
    e.sum.resize(m);
    double weighted = 0.0;
    for (int i = 0; i < m; ++i) {
        const int j = scales.J0 + 1 + i;
        const Eigen::VectorXd& d = coeffs.scale(j);
        const long nj = use_all_k ? d.size() : scales.n_at(j);
        if (d.size() < nj) throw ScaleSelectionError("fewer than n_j coefficients at j=" + str(j));
        e.j[i] = j;
        e.count[i] = static_cast<double>(nj);
        e.sum[i] = d.head(nj).squaredNorm();
        weighted += static_cast<double>(nj) * j;
    }
    e.delta = weighted / e.count.sum();
    return e;
}

ContrastEvaluation contrast(const ScaleEnergy& energy, double alpha_prime) {
    if (!(alpha_prime > 0.0 && alpha_prime < 2.0)) throw ValidationError("alpha' must lie in (0, 2)");
    if (!(energy.sum.array() > 0.0).any()) throw DegenerateContrastError("all coefficients in Delta are zero");
    // Log-sum-exp over scales.
    const Eigen::ArrayXd logs =
        energy.sum.array().log() - (2.0 - alpha_prime) * kLn2 * energy.j.array();
    const double top = logs.maxCoeff();
    Eigen::ArrayXd w = (logs - top).exp();
    const double total = w.sum();
    w /= total;

    ContrastEvaluation c;
    c.alpha_prime = alpha_prime;
    c.value = top + std::log(total) + energy.delta * kLn2 * (2.0 - alpha_prime);
    const double mean_j = (w * energy.j.array()).sum();
    c.gradient = kLn2 * (mean_j - energy.delta);
    c.second_derivative = kLn2 * kLn2 * (w * (energy.j.array() - mean_j).square()).sum();
    c.weights = w.matrix();
    return c;
}

ContrastEvaluation contrast(const CoefficientArray& coeffs, const ScaleSelection& scales, double alpha_prime) {
    return contrast(scale_energy(coeffs, scales), alpha_prime);
}

EstimateResult estimate_alpha(const ScaleEnergy& energy, const ScaleSelection& scales,
                              int vanishing_moments, const EstimatorOptions& options) {
    if (scales.scale_count() < 2) {
        throw DegenerateContrastError("a single scale leaves the contrast constant in alpha'");
    }
    const double lo = options.margin;
    const double hi = 2.0 - options.margin;
    const int n = std::max(options.grid_points, 3);
    auto value = [&](double a) { return contrast(energy, a).value; };

    // Coarse grid, then golden section on the bracket around the grid best.
    Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(n, lo, hi);
    Eigen::VectorXd vals(n);
    for (int i = 0; i < n; ++i) vals[i] = value(grid[i]);
    Eigen::Index best = 0;
    vals.minCoeff(&best);
    double a = grid[std::max<Eigen::Index>(best - 1, 0)];
    double b = grid[std::min<Eigen::Index>(best + 1, n - 1)];

    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = value(x1);
    double f2 = value(x2);
    while (b - a > options.tolerance) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = value(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = value(x2);
        }
    }
    double alpha = f1 <= f2 ? x1 : x2;

    // Derivative bisection when the final bracket straddles a sign change.
    double ga = contrast(energy, a).gradient;
    double gb = contrast(energy, b).gradient;
    if (ga < 0.0 && gb > 0.0) {
        for (int it = 0; it < 60 && b - a > 1e-15; ++it) {
            const double mid = 0.5 * (a + b);
            const double gm = contrast(energy, mid).gradient;
            if (gm == 0.0) {
                a = b = mid;
                break;
            }
            (gm < 0.0 ? a : b) = mid;
        }
        alpha = 0.5 * (a + b);
    }

    const ContrastEvaluation at = contrast(energy, alpha);
    EstimateResult r;
    r.alpha_hat = alpha;
    r.hurst = hurst_of_alpha(alpha);
    r.value = at.value;
    r.gradient = at.gradient;
    r.weights = at.weights;
    r.scales = scales;
    r.boundary = alpha - lo < 10.0 * options.tolerance || hi - alpha < 10.0 * options.tolerance;
    r.j0_condition = static_cast<double>(scales.J0) / scales.J < 1.0 / alpha;
    r.j1_condition = static_cast<double>(scales.J1) / scales.J < 1.0 / (2.0 - alpha);
    if (r.boundary) r.warnings.emplace_back("minimizer on the search boundary");
    if (alpha < 1.0 && vanishing_moments < 2) {
        r.warnings.emplace_back("alpha_hat < 1 with a wavelet having fewer than 2 vanishing moments");
    }
    return r;
}

EstimateResult estimate_alpha(const CoefficientArray& coeffs, const ScaleSelection& scales,
                              const EstimatorOptions& options) {
    return estimate_alpha(scale_energy(coeffs, scales, options.use_all_k), scales,
                          coeffs.vanishing_moments, options);
}

double hurst_of_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha <= 2.0)) throw ValidationError("alpha must lie in (0, 2]");
    return (3.0 - alpha) / 2.0;
}

std::string format_estimate(const EstimateResult& r) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "alpha_hat=%.10g H=%.10g J=%d J0=%d J1=%d delta=%.10g boundary=%s",
                  r.alpha_hat, r.hurst, r.scales.J, r.scales.J0, r.scales.J1, r.scales.delta,
                  r.boundary ? "true" : "false");
    return buf;
}

}  // namespace ispest
