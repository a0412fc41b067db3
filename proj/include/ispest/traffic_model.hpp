#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ispest/random.hpp"

namespace ispest {

// ---------------------------------------------------------------------------
// Marginal law of the transmission rate U.
// ---------------------------------------------------------------------------

struct PointMass {
    double value = 1.0;
};

/// U = exp(mu + sigma Z), Z standard normal.
struct LogNormal {
    double mu = 0.0;
    double sigma = 1.0;
};

/// Finite discrete law; probabilities are normalized on construction.
struct RateTable {
    std::vector<double> values;
    std::vector<double> probs;
};

class RateLaw {
public:
    using Variant = std::variant<PointMass, LogNormal, RateTable>;

    RateLaw() : law_(PointMass{}) {}
    RateLaw(PointMass p) : law_(p) {}
    RateLaw(LogNormal l);
    RateLaw(RateTable t);

    const Variant& variant() const noexcept { return law_; }

    double sample(Rng& rng) const;

    /// E[g(U)], exact for discrete laws and by adaptive quadrature for the
    /// lognormal. `breaks` are points of non-smoothness of g in u.
    double expect(const std::function<double(double)>& g,
                  const std::vector<double>& breaks = {}) const;

    /// E[|U|^p].
    double abs_moment(double p) const;
    /// E[U^p] for integer p (signed).
    double moment(int p) const;

    bool strictly_positive() const;
    std::string describe() const;

private:
    Variant law_;
};

// ---------------------------------------------------------------------------
// Joint law nu of (eta, U).
// ---------------------------------------------------------------------------

enum class LawKind { ParetoIndependent, StableDurationIndependent, TwoRegime, Custom };

/// P(eta > t) = (1 v t)^-alpha, U independent of eta.
struct ParetoParams {};

/// eta = |S| with S symmetric alpha-stable, E[cos(S t)] = exp(-sigma |t|^alpha).
struct StableParams {
    double sigma = 1.0;
};

/// W = U eta. Given U = u: P(W > w) = (1 v w)^-alpha if u >= u0,
/// exp(-beta w^gamma) otherwise. Requires U > 0.
struct TwoRegimeParams {
    double u0 = 1.0;
    double beta = 1.0;
    double gamma = 1.0;
};

/// Duration law given by user callbacks, U independent of eta.
struct CustomParams {
    std::function<double(double)> survival;  // P(eta > t)
    std::function<double(double)> quantile;  // inverse of 1 - survival, on (0,1)
    std::function<double(double)> density;   // optional; finite differences otherwise
    std::string label = "custom";
};

struct Mark {
    double duration;
    double rate;
};

struct MomentPair {
    double u_p_eta;  // E[U^p eta]
    double eta;      // E[eta]
};

class DurationRateLaw {
public:
    using Params = std::variant<ParetoParams, StableParams, TwoRegimeParams, CustomParams>;

    static DurationRateLaw pareto(double alpha, RateLaw rate = {}, int p_star = 4);
    static DurationRateLaw stable(double alpha, double sigma, RateLaw rate = {}, int p_star = 4);
    static DurationRateLaw two_regime(double alpha, RateLaw rate = LogNormal{},
                                      TwoRegimeParams params = {}, int p_star = 4);
    static DurationRateLaw custom(double alpha, CustomParams params, RateLaw rate = {},
                                  int p_star = 4);
    /// Pareto with scale s: P(eta > t) = (1 v t/s)^-alpha, built through the custom path.
    static DurationRateLaw scaled_pareto(double alpha, double scale, RateLaw rate = {},
                                         int p_star = 4);

    LawKind kind() const noexcept;
    double alpha() const noexcept { return alpha_; }
    int p_star() const noexcept { return p_star_; }
    const RateLaw& rate_law() const noexcept { return rate_; }
    const Params& params() const noexcept { return params_; }
    std::string describe() const;

    /// P(eta > t) for the laws where eta is independent of U.
    double duration_survival(double t) const;
    /// Density of eta (independent laws).
    double duration_density(double t) const;

    /// Whether stationary initial sessions can be drawn exactly.
    bool has_size_biased_sampler() const noexcept;
    /// Draw (V, U) from v nu(dv, dw) / E[eta]; throws if unsupported.
    Mark sample_size_biased(Rng& rng) const;

private:
    DurationRateLaw(double alpha, RateLaw rate, int p_star, Params params);

    double alpha_;
    RateLaw rate_;
    int p_star_;
    Params params_;
};

/// One draw of (eta, U) from nu.
Mark sample_mark(const DurationRateLaw& law, Rng& rng);

/// H_p(t) = E[|U|^p 1{eta > t}].
double tail_H(const DurationRateLaw& law, int p, double t);

/// L_p(t) = H_p(t) t^alpha.
double tail_L(const DurationRateLaw& law, int p, double t);

/// -dH_p/dt, the density of the measure |U|^p nu(dv, du) projected on v.
double tail_density(const DurationRateLaw& law, int p, double t);

/// E[U^p 1{eta > t}] with the signed power of U.
double tail_signed(const DurationRateLaw& law, int p, double t);

/// E[U^p eta] and E[eta]. Infinite when alpha <= 1 unless `truncation` is set,
/// in which case eta is replaced by min(eta, truncation).
MomentPair moment_u_eta(const DurationRateLaw& law, int p,
                        std::optional<double> truncation = std::nullopt);

/// Pareto quantile for P(eta > t) = (1 v t)^-alpha at uniform u in [0,1).
inline double pareto_quantile(double alpha, double u) noexcept;

/// Chambers-Mallows-Stuck draw of a standard symmetric alpha-stable variable
/// (characteristic function exp(-|t|^alpha)) from V ~ U(-pi/2, pi/2), W ~ Exp(1).
double cms_symmetric_stable(double alpha, double v, double w) noexcept;

/// P(Z > x), x >= 0, for the standard symmetric stable Z.
double stable_upper_tail(double alpha, double x);
/// Density of the standard symmetric stable at x >= 0.
double stable_density(double alpha, double x);

}  // namespace ispest

#include <cmath>

inline double ispest::pareto_quantile(double alpha, double u) noexcept {
    return std::pow(1.0 - u, -1.0 / alpha);
}
