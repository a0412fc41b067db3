#include "ispest/traffic_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "ispest/errors.hpp"
#include "quadrature.hpp"

namespace ispest {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kPi = std::numbers::pi;

double ipow(double x, int p) {
    double r = 1.0;
    for (int i = 0; i < p; ++i) r *= x;
    return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// RateLaw
// ---------------------------------------------------------------------------

RateLaw::RateLaw(LogNormal l) : law_(l) {
    if (!(l.sigma > 0.0) || !std::isfinite(l.mu)) {
        throw ValidationError("lognormal rate law needs finite mu and sigma > 0");
    }
}

RateLaw::RateLaw(RateTable t) {
    if (t.values.empty() || t.values.size() != t.probs.size()) {
        throw ValidationError("rate table needs matching, non-empty values and probabilities");
    }
    double total = 0.0;
    for (double p : t.probs) {
        if (!(p >= 0.0) || !std::isfinite(p)) {
            throw ValidationError("rate table probabilities must be finite and non-negative");
        }
        total += p;
    }
    if (!(total > 0.0)) throw ValidationError("rate table probabilities sum to zero");
    for (double& p : t.probs) p /= total;
    law_ = std::move(t);
}

double RateLaw::sample(Rng& rng) const {
    return std::visit(
        overloaded{
            [](const PointMass& p) { return p.value; },
            [&](const LogNormal& l) { return std::exp(l.mu + l.sigma * rng.normal()); },
            [&](const RateTable& t) {
                const double u = rng.uniform();
                double acc = 0.0;
                for (std::size_t i = 0; i + 1 < t.values.size(); ++i) {
                    acc += t.probs[i];
                    if (u < acc) return t.values[i];
                }
                return t.values.back();
            },
        },
        law_);
}

double RateLaw::expect(const std::function<double(double)>& g,
                       const std::vector<double>& breaks) const {
    return std::visit(
        overloaded{
            [&](const PointMass& p) { return g(p.value); },
            [&](const RateTable& t) {
                double acc = 0.0;
                for (std::size_t i = 0; i < t.values.size(); ++i) acc += t.probs[i] * g(t.values[i]);
                return acc;
            },
            [&](const LogNormal& l) {
                std::vector<double> zs;
                for (double b : breaks) {
                    if (b > 0.0 && std::isfinite(b)) zs.push_back((std::log(b) - l.mu) / l.sigma);
                }
                std::sort(zs.begin(), zs.end());
                zs.erase(std::unique(zs.begin(), zs.end()), zs.end());
                auto integrand = [&](double z) {
                    const double density = std::exp(-0.5 * z * z) / std::sqrt(2.0 * kPi);
                    if (density == 0.0) return 0.0;
                    return g(std::exp(l.mu + l.sigma * z)) * density;
                };
                // Finite outer limits: the Gaussian weight is below 1e-300 there.
                double lo = -38.0;
                double acc = 0.0;
                for (double z : zs) {
                    if (z <= lo) continue;
                    if (z >= 38.0) break;
                    acc += detail::integrate(integrand, lo, z, 1e-12);
                    lo = z;
                }
                acc += detail::integrate(integrand, lo, 38.0, 1e-12);
                return acc;
            },
        },
        law_);
}

double RateLaw::abs_moment(double p) const {
    return std::visit(
        overloaded{
            [&](const PointMass& m) { return p == 0.0 ? 1.0 : std::pow(std::abs(m.value), p); },
            [&](const LogNormal& l) { return std::exp(p * l.mu + 0.5 * p * p * l.sigma * l.sigma); },
            [&](const RateTable& t) {
                double acc = 0.0;
                for (std::size_t i = 0; i < t.values.size(); ++i) {
                    acc += t.probs[i] * (p == 0.0 ? 1.0 : std::pow(std::abs(t.values[i]), p));
                }
                return acc;
            },
        },
        law_);
}

double RateLaw::moment(int p) const {
    return std::visit(
        overloaded{
            [&](const PointMass& m) { return ipow(m.value, p); },
            [&](const LogNormal& l) {
                const double q = static_cast<double>(p);
                return std::exp(q * l.mu + 0.5 * q * q * l.sigma * l.sigma);
            },
            [&](const RateTable& t) {
                double acc = 0.0;
                for (std::size_t i = 0; i < t.values.size(); ++i) acc += t.probs[i] * ipow(t.values[i], p);
                return acc;
            },
        },
        law_);
}

bool RateLaw::strictly_positive() const {
    return std::visit(overloaded{
                          [](const PointMass& m) { return m.value > 0.0; },
                          [](const LogNormal&) { return true; },
                          [](const RateTable& t) {
                              for (std::size_t i = 0; i < t.values.size(); ++i) {
                                  if (t.probs[i] > 0.0 && !(t.values[i] > 0.0)) return false;
                              }
                              return true;
                          },
                      },
                      law_);
}

std::string RateLaw::describe() const {
    std::ostringstream os;
    os.precision(17);
    std::visit(overloaded{
                   [&](const PointMass& m) { os << "point:" << m.value; },
                   [&](const LogNormal& l) { os << "lognormal:" << l.mu << ',' << l.sigma; },
                   [&](const RateTable& t) {
                       os << "table:";
                       for (std::size_t i = 0; i < t.values.size(); ++i) {
                           if (i) os << ',';
                           os << t.values[i] << ':' << t.probs[i];
                       }
                   },
               },
               law_);
    return os.str();
}

// ---------------------------------------------------------------------------
// Stable helpers
// ---------------------------------------------------------------------------

double cms_symmetric_stable(double alpha, double v, double w) noexcept {
    if (alpha == 1.0) return std::tan(v);
    return std::sin(alpha * v) / std::pow(std::cos(v), 1.0 / alpha) *
           std::pow(std::cos((1.0 - alpha) * v) / w, (1.0 - alpha) / alpha);
}

namespace {

// log V(theta) of the Zolotarev/Nolan integral representation, beta = 0.
double stable_log_v(double alpha, double theta) {
    const double c = std::cos(theta);
    return alpha / (alpha - 1.0) * std::log(c / std::sin(alpha * theta)) +
           std::log(std::cos((alpha - 1.0) * theta) / c);
}

}  // namespace

namespace {

// Convergent (alpha > 1) or asymptotic (alpha < 1) expansion at 0.
// kind 0: density, kind 1: 1/2 - P(Z > x).
double stable_series_small(double alpha, double x, int kind) {
    double total = 0.0;
    double xp = kind == 0 ? 1.0 : x;
    double fact = 1.0;  // (2k)! or (2k+1)!
    for (int k = 0; k < 200; ++k) {
        const double term = std::tgamma((2.0 * k + 1.0) / alpha) / fact * xp;
        total += (k % 2 == 0 ? term : -term);
        if (std::abs(term) < 1e-17 * std::abs(total)) break;
        xp *= x * x;
        const double base = 2.0 * k + (kind == 0 ? 0.0 : 1.0);
        fact *= (base + 1.0) * (base + 2.0);
    }
    return total / (kPi * alpha);
}

// Expansion in x^{-alpha k} at infinity. kind 0: density, kind 1: P(Z > x).
double stable_series_large(double alpha, double x, int kind) {
    double total = 0.0;
    double previous = std::numeric_limits<double>::infinity();
    double kfact = 1.0;
    for (int k = 1; k < 60; ++k) {
        kfact *= k;
        const double g = kind == 0 ? std::tgamma(alpha * k + 1.0) * std::pow(x, -alpha * k - 1.0)
                                   : std::tgamma(alpha * k) * std::pow(x, -alpha * k);
        const double term = g / kfact * std::sin(k * kPi * alpha / 2.0);
        if (alpha > 1.0 && std::abs(term) > previous) break;  // asymptotic: stop at the smallest term
        total += (k % 2 == 1 ? term : -term);
        if (std::abs(term) < 1e-17 * std::abs(total)) break;
        previous = std::abs(term);
    }
    return total / kPi;
}

bool use_small_series(double alpha, double x) { return alpha > 1.0 ? x < 0.25 : x < 1e-3; }
bool use_large_series(double alpha, double x) { return alpha > 1.0 ? x > 1000.0 : x > 30.0; }

// Integral over (0, pi/2) split where scale V(theta) = 1, the peak of g e^{-g}.
template <typename F>
double nolan_integral(double alpha, double log_scale, F&& integrand) {
    const double top = kPi / 2.0;
    double lo = 1e-300;
    double hi = top;
    auto excess = [&](double th) { return log_scale + stable_log_v(alpha, th); };
    const double e_lo = excess(lo * 1e100);
    const double e_hi = excess(top * (1.0 - 1e-12));
    double split = -1.0;
    if (std::isfinite(e_lo) && std::isfinite(e_hi) && (e_lo > 0.0) != (e_hi > 0.0)) {
        lo = lo * 1e100;
        hi = top * (1.0 - 1e-12);
        for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
            const double mid = 0.5 * (lo + hi);
            ((excess(mid) > 0.0) == (e_lo > 0.0) ? lo : hi) = mid;
        }
        split = 0.5 * (lo + hi);
    }
    // Integrands are bounded by 1; a piece far from the peak may be negligible.
    constexpr double floor = 1e-14;
    if (split <= 0.0) return detail::integrate(integrand, 0.0, top, 1e-12, 18, floor);
    // V vanishes like a fractional power at one endpoint (pi/2 for alpha > 1,
    // 0 otherwise) and the peak crowds against it as x grows; integrate in the
    // log of the distance to that endpoint.
    auto near = [&](double u) {
        const double d = std::exp(u);
        return integrand(alpha > 1.0 ? top - d : d) * d;
    };
    const double u_split = std::log(alpha > 1.0 ? top - split : split);
    return detail::integrate(near, u_split - 80.0, u_split, 1e-12, 18, floor) +
           detail::integrate(near, u_split, std::log(top), 1e-12, 18, floor);
}

}  // namespace

double stable_upper_tail(double alpha, double x) {
    if (x <= 0.0) return 0.5;
    if (alpha == 1.0) return 0.5 - std::atan(x) / kPi;
    if (use_small_series(alpha, x)) return 0.5 - stable_series_small(alpha, x, 1);
    if (use_large_series(alpha, x)) return stable_series_large(alpha, x, 1);
    const double log_scale = alpha / (alpha - 1.0) * std::log(x);
    auto integrand = [&](double theta) {
        const double e = log_scale + stable_log_v(alpha, theta);
        return e > 700.0 ? 0.0 : std::exp(-std::exp(e));
    };
    const double integral = nolan_integral(alpha, log_scale, integrand) / kPi;
    return alpha > 1.0 ? integral : 0.5 - integral;
}

double stable_density(double alpha, double x) {
    x = std::abs(x);
    if (alpha == 1.0) return 1.0 / (kPi * (1.0 + x * x));
    if (use_small_series(alpha, x)) return stable_series_small(alpha, x, 0);
    if (use_large_series(alpha, x)) return stable_series_large(alpha, x, 0);
    const double log_scale = alpha / (alpha - 1.0) * std::log(x);
    auto integrand = [&](double theta) {
        // g e^{-g} with g = scale V(theta)
        const double e = log_scale + stable_log_v(alpha, theta);
        if (!std::isfinite(e) || e > 700.0) return 0.0;
        const double g = std::exp(e);
        return g * std::exp(-g);
    };
    const double integral = nolan_integral(alpha, log_scale, integrand);
    return alpha / (kPi * std::abs(alpha - 1.0) * x) * integral;
}

// ---------------------------------------------------------------------------
// DurationRateLaw
// ---------------------------------------------------------------------------

DurationRateLaw::DurationRateLaw(double alpha, RateLaw rate, int p_star, Params params)
    : alpha_(alpha), rate_(std::move(rate)), p_star_(p_star), params_(std::move(params)) {
    if (!(alpha > 0.0 && alpha < 2.0)) throw ValidationError("alpha must lie in (0,2)");
    if (p_star < 2) throw ValidationError("p_star must be at least 2");
}

DurationRateLaw DurationRateLaw::pareto(double alpha, RateLaw rate, int p_star) {
    return DurationRateLaw(alpha, std::move(rate), p_star, ParetoParams{});
}

DurationRateLaw DurationRateLaw::stable(double alpha, double sigma, RateLaw rate, int p_star) {
    if (!(sigma > 0.0)) throw ValidationError("stable scale sigma must be positive");
    return DurationRateLaw(alpha, std::move(rate), p_star, StableParams{sigma});
}

DurationRateLaw DurationRateLaw::two_regime(double alpha, RateLaw rate, TwoRegimeParams params,
                                            int p_star) {
    if (!(params.u0 > 0.0 && params.beta > 0.0 && params.gamma > 0.0)) {
        throw ValidationError("two-regime law needs u0, beta, gamma > 0");
    }
    if (!rate.strictly_positive()) {
        throw ValidationError("two-regime law needs a strictly positive rate U");
    }
    const double u0 = params.u0;
    const double high = rate.expect([u0](double u) { return u >= u0 ? 1.0 : 0.0; }, {u0});
    if (!(high > 0.0)) throw ValidationError("two-regime law needs P(U >= u0) > 0");
    return DurationRateLaw(alpha, std::move(rate), p_star, params);
}

DurationRateLaw DurationRateLaw::custom(double alpha, CustomParams params, RateLaw rate,
                                        int p_star) {
    if (!params.survival || !params.quantile) {
        throw ValidationError("custom law needs survival and quantile functions");
    }
    return DurationRateLaw(alpha, std::move(rate), p_star, std::move(params));
}

DurationRateLaw DurationRateLaw::scaled_pareto(double alpha, double scale, RateLaw rate,
                                               int p_star) {
    if (!(scale > 0.0)) throw ValidationError("Pareto scale must be positive");
    CustomParams params;
    params.survival = [alpha, scale](double t) { return std::pow(std::max(1.0, t / scale), -alpha); };
    params.quantile = [alpha, scale](double u) { return scale * std::pow(1.0 - u, -1.0 / alpha); };
    params.density = [alpha, scale](double t) {
        return t > scale ? alpha / scale * std::pow(t / scale, -alpha - 1.0) : 0.0;
    };
    std::ostringstream os;
    os.precision(17);
    os << "pareto-scale:" << scale;
    params.label = os.str();
    return custom(alpha, std::move(params), std::move(rate), p_star);
}

LawKind DurationRateLaw::kind() const noexcept {
    return std::visit(overloaded{
                          [](const ParetoParams&) { return LawKind::ParetoIndependent; },
                          [](const StableParams&) { return LawKind::StableDurationIndependent; },
                          [](const TwoRegimeParams&) { return LawKind::TwoRegime; },
                          [](const CustomParams&) { return LawKind::Custom; },
                      },
                      params_);
}

std::string DurationRateLaw::describe() const {
    std::ostringstream os;
    os.precision(17);
    std::visit(overloaded{
                   [&](const ParetoParams&) { os << "pareto"; },
                   [&](const StableParams& s) { os << "stable(sigma=" << s.sigma << ')'; },
                   [&](const TwoRegimeParams& p) {
                       os << "two_regime(u0=" << p.u0 << ",beta=" << p.beta << ",gamma=" << p.gamma << ')';
                   },
                   [&](const CustomParams& c) { os << c.label; },
               },
               params_);
    os << " alpha=" << alpha_ << " rate=" << rate_.describe() << " p_star=" << p_star_;
    return os.str();
}

double DurationRateLaw::duration_survival(double t) const {
    if (t <= 0.0) return 1.0;
    return std::visit(
        overloaded{
            [&](const ParetoParams&) { return std::pow(std::max(1.0, t), -alpha_); },
            [&](const StableParams& s) {
                const double scale = std::pow(s.sigma, 1.0 / alpha_);
                return 2.0 * stable_upper_tail(alpha_, t / scale);
            },
            [&](const TwoRegimeParams& p) {
                return rate_.expect(
                    [&](double u) {
                        const double w = u * t;
                        return u >= p.u0 ? std::pow(std::max(1.0, w), -alpha_)
                                         : std::exp(-p.beta * std::pow(w, p.gamma));
                    },
                    {p.u0, 1.0 / t});
            },
            [&](const CustomParams& c) { return c.survival(t); },
        },
        params_);
}

double DurationRateLaw::duration_density(double t) const {
    if (t <= 0.0) return 0.0;
    return std::visit(
        overloaded{
            [&](const ParetoParams&) { return t > 1.0 ? alpha_ * std::pow(t, -alpha_ - 1.0) : 0.0; },
            [&](const StableParams& s) {
                const double scale = std::pow(s.sigma, 1.0 / alpha_);
                return 2.0 * stable_density(alpha_, t / scale) / scale;
            },
            [&](const TwoRegimeParams&) { return tail_density(*this, 0, t); },
            [&](const CustomParams& c) {
                if (c.density) return c.density(t);
                const double h = 1e-6 * std::max(1.0, t);
                const double lo = std::max(t - h, 0.5 * t);
                return (c.survival(lo) - c.survival(t + h)) / (t + h - lo);
            },
        },
        params_);
}

bool DurationRateLaw::has_size_biased_sampler() const noexcept {
    return std::holds_alternative<ParetoParams>(params_) && alpha_ > 1.0;
}

Mark DurationRateLaw::sample_size_biased(Rng& rng) const {
    if (!has_size_biased_sampler()) {
        if (alpha_ <= 1.0) throw InfiniteMeanError("no stationary version for alpha <= 1");
        throw ValidationError("no exact size-biased sampler for " + describe() +
                              "; use burn-in initialization");
    }
    // Size-biased Pareto: density (alpha-1) v^-alpha on [1, inf).
    const double v = std::pow(1.0 - rng.uniform(), -1.0 / (alpha_ - 1.0));
    return {v, rate_.sample(rng)};
}

Mark sample_mark(const DurationRateLaw& law, Rng& rng) {
    const double alpha = law.alpha();
    return std::visit(
        overloaded{
            [&](const ParetoParams&) {
                const double eta = pareto_quantile(alpha, rng.uniform());
                return Mark{eta, law.rate_law().sample(rng)};
            },
            [&](const StableParams& s) {
                const double scale = std::pow(s.sigma, 1.0 / alpha);
                double eta = 0.0;
                while (!(eta > 0.0) || !std::isfinite(eta)) {
                    const double v = kPi * (rng.uniform() - 0.5);
                    const double w = rng.exponential();
                    eta = std::abs(scale * cms_symmetric_stable(alpha, v, w));
                }
                return Mark{eta, law.rate_law().sample(rng)};
            },
            [&](const TwoRegimeParams& p) {
                const double u = law.rate_law().sample(rng);
                const double v = rng.uniform();
                const double w = u >= p.u0 ? pareto_quantile(alpha, v)
                                           : std::pow(-std::log1p(-v) / p.beta, 1.0 / p.gamma);
                double eta = w / u;
                if (!(eta > 0.0)) eta = std::numeric_limits<double>::min();
                return Mark{eta, u};
            },
            [&](const CustomParams& c) {
                double u = rng.uniform();
                const double eta = c.quantile(u);
                return Mark{eta, law.rate_law().sample(rng)};
            },
        },
        law.params());
}

namespace {

void check_moment(const DurationRateLaw& law, int p) {
    if (p < 0) throw ValidationError("moment order must be non-negative");
    if (p > law.p_star()) {
        throw UnsupportedMomentError("moment order " + std::to_string(p) + " exceeds p_star=" +
                                     std::to_string(law.p_star()));
    }
}

}  // namespace

double tail_H(const DurationRateLaw& law, int p, double t) {
    check_moment(law, p);
    if (t < 0.0) throw RangeError("tail_H needs t >= 0");
    if (const auto* tr = std::get_if<TwoRegimeParams>(&law.params())) {
        if (t == 0.0) return law.rate_law().abs_moment(p);
        const double alpha = law.alpha();
        return law.rate_law().expect(
            [&](double u) {
                const double w = u * t;
                const double surv = u >= tr->u0 ? std::pow(std::max(1.0, w), -alpha)
                                                : std::exp(-tr->beta * std::pow(w, tr->gamma));
                return ipow(u, p) * surv;
            },
            {tr->u0, 1.0 / t});
    }
    return law.rate_law().abs_moment(p) * law.duration_survival(t);
}

double tail_L(const DurationRateLaw& law, int p, double t) {
    return tail_H(law, p, t) * std::pow(t, law.alpha());
}

double tail_signed(const DurationRateLaw& law, int p, double t) {
    check_moment(law, p);
    if (std::holds_alternative<TwoRegimeParams>(law.params())) return tail_H(law, p, t);
    return law.rate_law().moment(p) * law.duration_survival(t);
}

double tail_density(const DurationRateLaw& law, int p, double t) {
    check_moment(law, p);
    if (t <= 0.0) return 0.0;
    if (const auto* tr = std::get_if<TwoRegimeParams>(&law.params())) {
        const double alpha = law.alpha();
        return law.rate_law().expect(
            [&](double u) {
                const double w = u * t;
                double fw = 0.0;
                if (u >= tr->u0) {
                    fw = w > 1.0 ? alpha * std::pow(w, -alpha - 1.0) : 0.0;
                } else {
                    fw = tr->beta * tr->gamma * std::pow(w, tr->gamma - 1.0) *
                         std::exp(-tr->beta * std::pow(w, tr->gamma));
                }
                return ipow(u, p) * u * fw;
            },
            {tr->u0, 1.0 / t});
    }
    return law.rate_law().abs_moment(p) * law.duration_density(t);
}

MomentPair moment_u_eta(const DurationRateLaw& law, int p, std::optional<double> truncation) {
    check_moment(law, p);
    const double alpha = law.alpha();
    const RateLaw& rate = law.rate_law();

    if (truncation) {
        const double tau = *truncation;
        if (!(tau > 0.0)) throw ValidationError("truncation must be positive");
        if (std::holds_alternative<ParetoParams>(law.params())) {
            // int_0^tau (1 v v)^-alpha dv
            double e = std::min(tau, 1.0);
            if (tau > 1.0) {
                e += alpha == 1.0 ? std::log(tau) : (std::pow(tau, 1.0 - alpha) - 1.0) / (1.0 - alpha);
            }
            return {rate.moment(p) * e, e};
        }
        auto integral = [&](int q) {
            return detail::integrate([&](double v) { return tail_signed(law, q, v); }, 0.0, tau, 1e-9);
        };
        return {integral(p), integral(0)};
    }

    if (alpha <= 1.0) throw InfiniteMeanError("moment_u_eta with alpha <= 1");

    return std::visit(
        overloaded{
            [&](const ParetoParams&) {
                const double e = alpha / (alpha - 1.0);
                return MomentPair{rate.moment(p) * e, e};
            },
            [&](const StableParams& s) {
                const double e = std::pow(s.sigma, 1.0 / alpha) * 2.0 / kPi *
                                 boost::math::tgamma(1.0 - 1.0 / alpha);
                return MomentPair{rate.moment(p) * e, e};
            },
            [&](const TwoRegimeParams& tr) {
                const double heavy = alpha / (alpha - 1.0);
                const double light =
                    boost::math::tgamma(1.0 + 1.0 / tr.gamma) / std::pow(tr.beta, 1.0 / tr.gamma);
                auto mean_w = [&](double u) { return u >= tr.u0 ? heavy : light; };
                const double up = rate.expect([&](double u) { return ipow(u, p) / u * mean_w(u); }, {tr.u0});
                const double e = rate.expect([&](double u) { return mean_w(u) / u; }, {tr.u0});
                return MomentPair{up, e};
            },
            [&](const CustomParams& c) {
                const double e = detail::integrate(c.survival, 0.0, 1.0, 1e-10) +
                                 detail::integrate_tail(c.survival, 1.0, alpha, 1e-10);
                return MomentPair{rate.moment(p) * e, e};
            },
        },
        law.params());
}

}  // namespace ispest
