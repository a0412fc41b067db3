#include "ispest/theory_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include <boost/math/quadrature/gauss.hpp>

#include "ispest/errors.hpp"
#include "quadrature.hpp"

namespace ispest {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = 3.14159265358979323846;

bool is_pareto(const DurationRateLaw& law) { return law.kind() == LawKind::ParetoIndependent; }

// int_a^b (1 v v)^-alpha dv, b may be infinite.
double pareto_tail_integral(double alpha, double a, double b) {
    double total = 0.0;
    if (a < 1.0) {
        total += std::min(b, 1.0) - a;
        a = 1.0;
    }
    if (b <= a) return total;
    if (alpha == 1.0) return total + std::log(b / a);
    const double upper = std::isinf(b) ? 0.0 : std::pow(b, 1.0 - alpha);
    return total + (std::pow(a, 1.0 - alpha) - upper) / (alpha - 1.0);
}

double h2_integral(const DurationRateLaw& law, double a, double b) {
    if (b <= a) return 0.0;
    if (is_pareto(law)) return law.rate_law().moment(2) * pareto_tail_integral(law.alpha(), a, b);
    auto h = [&](double v) { return tail_H(law, 2, v); };
    if (std::isinf(b)) {
        // Split at a finite point so the infinite piece starts away from any kink.
        const double mid = std::max(a, 1.0);
        return (mid > a ? detail::integrate(h, a, mid, 1e-12) : 0.0) +
               detail::integrate_tail(h, mid, law.alpha(), 1e-12);
    }
    return detail::integrate(h, a, b, 1e-12);
}

}  // namespace

MeanCov mean_cov_nonstationary(const DurationRateLaw& law, double s, double t) {
    if (!(s >= 0.0 && s <= t)) throw ValidationError("need 0 <= s <= t");
    MeanCov out;
    out.mean = t > 0.0 ? moment_u_eta(law, 1, t).u_p_eta : 0.0;
    out.covariance = h2_integral(law, t - s, t);
    return out;
}

StationaryMoments mean_cov_stationary(const DurationRateLaw& law, double t) {
    if (!(t >= 0.0)) throw ValidationError("lag must be non-negative");
    if (law.alpha() <= 1.0) throw InfiniteMeanError("stationary moments need alpha > 1");
    StationaryMoments out;
    out.mean = moment_u_eta(law, 1).u_p_eta;
    out.covariance = h2_integral(law, t, kInf);
    out.karamata = t > 0.0 ? tail_L(law, 2, t) * std::pow(t, 1.0 - law.alpha()) / (law.alpha() - 1.0) : kInf;
    return out;
}

std::vector<CovLimitRow> scaled_cov_limit(const DurationRateLaw& law, double s, double t,
                                          const std::vector<double>& T_grid) {
    if (!(t > s && s > 0.0)) throw ValidationError("need t > s > 0");
    const double alpha = law.alpha();
    const double C = (alpha == 1.0 ? std::log(t / (t - s))
                                   : (std::pow(t - s, 1.0 - alpha) - std::pow(t, 1.0 - alpha)) / (alpha - 1.0));
    std::vector<CovLimitRow> rows;
    for (double T : T_grid) {
        const double cov = mean_cov_nonstationary(law, T * s, T * t).covariance;
        rows.push_back({T, cov / (tail_L(law, 2, T) * std::pow(T, 1.0 - alpha)), C});
    }
    return rows;
}

ScaleKernel::ScaleKernel(const WaveletPair& w, int grid_resolution, int shift_resolution) : M_(w.M) {
    if (shift_resolution >= grid_resolution || grid_resolution > w.resolution) {
        throw ValidationError("kernel needs shift_resolution < grid_resolution <= table resolution");
    }
    // Psi on [-M, 2M] with step 2^-grid_resolution, zero outside (0, M).
    const long per_unit = 1L << grid_resolution;
    const long stride = 1L << (w.resolution - grid_resolution);
    const long inner = static_cast<long>(M_) * per_unit;
    Eigen::VectorXd psi_grid = Eigen::VectorXd::Zero(3 * inner + 1);
    for (long i = 0; i <= inner; ++i) psi_grid[inner + i] = w.primitive_table[i * stride];
    const double h = 1.0 / static_cast<double>(per_unit);

    auto simpson = [h](const Eigen::VectorXd& f) {
        const Eigen::Index n = f.size() - 1;  // even
        double s = f[0] + f[n];
        for (Eigen::Index i = 1; i < n; ++i) s += (i % 2 == 1 ? 4.0 : 2.0) * f[i];
        return s * h / 3.0;
    };

    Eigen::VectorXd sq = psi_grid.segment(inner, inner + 1).array().square();
    tail_ = 2.0 * simpson(sq);
    // Left Riemann sum: exact for Haar, trapezoid-equivalent when psi(0) = psi(M) = 0.
    psi_norm2_ = w.psi_table.head(w.psi_table.size() - 1).squaredNorm() * w.step();

    const long shift_stride = 1L << (grid_resolution - shift_resolution);
    const long shifts = static_cast<long>(M_) << shift_resolution;
    shift_step_ = std::ldexp(1.0, -shift_resolution);
    q_.resize(shifts + 1);
    q_[0] = psi_norm2_;
    for (long i = 1; i <= shifts; ++i) {
        const long off = i * shift_stride;
        // t over [-y, M]: indices inner - off .. 2 inner.
        const long len = inner + off;
        Eigen::VectorXd diff = psi_grid.segment(inner, len + 1) - psi_grid.segment(inner - off, len + 1);
        const double y = static_cast<double>(i) * shift_step_;
        q_[i] = simpson(Eigen::VectorXd(diff.array().square())) / (y * y);
    }
}

double ScaleKernel::Q(double y) const {
    if (y < 0.0) y = -y;
    if (y >= M_) return tail_ / (y * y);
    const double pos = y / shift_step_;
    const auto i = static_cast<Eigen::Index>(pos);
    if (i + 1 >= q_.size()) return q_[q_.size() - 1];
    const double frac = pos - static_cast<double>(i);
    return q_[i] + frac * (q_[i + 1] - q_[i]);
}

double ScaleKernel::K(double y) const { return y >= M_ ? tail_ : Q(y) * y * y; }

double ScaleKernel::q_moment(double alpha, double a, double b) const {
    a = std::max(a, 0.0);
    b = std::min(b, static_cast<double>(M_));
    if (b <= a) return 0.0;
    const double e2 = 2.0 - alpha;
    const double e3 = 3.0 - alpha;
    auto seg = [&](double lo, double hi, double q_lo, double q_hi, double y_lo) {
        // Q linear on [y_lo, y_lo + step]: Q = c0 + c1 y.
        const double c1 = (q_hi - q_lo) / shift_step_;
        const double c0 = q_lo - c1 * y_lo;
        return c0 * (std::pow(hi, e2) - std::pow(lo, e2)) / e2 + c1 * (std::pow(hi, e3) - std::pow(lo, e3)) / e3;
    };
    double total = 0.0;
    auto i = static_cast<Eigen::Index>(a / shift_step_);
    for (; i + 1 < q_.size(); ++i) {
        const double y0 = static_cast<double>(i) * shift_step_;
        const double y1 = y0 + shift_step_;
        if (y0 >= b) break;
        total += seg(std::max(a, y0), std::min(b, y1), q_[i], q_[i + 1], y0);
    }
    return total;
}

double mathcal_L_quadrature(const DurationRateLaw& law, const ScaleKernel& kernel, double z) {
    if (!(z > 0.0)) throw ValidationError("z must be positive");
    const double alpha = law.alpha();
    const double M = kernel.M();
    // z^alpha [int_0^M K(y) z h_2(z y) dy + K(M) H_2(M z)] in u = log y, on
    // fixed Gauss-Legendre panels. The panels are wider than the kernel's
    // shift grid, so the result carries the table's interpolation error.
    auto f = [&](double u) {
        const double y = std::exp(u);
        return kernel.K(y) * z * tail_density(law, 2, z * y) * y;
    };
    double lo = std::log(1e-8 / z);
    const double hi = std::log(M);
    if (is_pareto(law)) lo = std::max(lo, -std::log(z));
    double body = 0.0;
    if (lo < hi) {
        std::vector<double> edges{lo, hi};
        const double edge = -std::log(z);
        if (edge > lo && edge < hi) edges.insert(edges.begin() + 1, edge);
        for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
            const int panels = std::max(1, static_cast<int>(std::ceil((edges[e + 1] - edges[e]) / 0.125)));
            const double width = (edges[e + 1] - edges[e]) / panels;
            for (int p = 0; p < panels; ++p) {
                const double a = edges[e] + p * width;
                body += boost::math::quadrature::gauss<double, 20>::integrate(f, a, a + width);
            }
        }
    }
    return std::pow(z, alpha) * (body + kernel.tail_value() * tail_H(law, 2, M * z));
}

double mathcal_L(const DurationRateLaw& law, const ScaleKernel& kernel, double z) {
    if (!(z > 0.0)) throw ValidationError("z must be positive");
    if (!is_pareto(law)) return mathcal_L_quadrature(law, kernel, z);
    const double alpha = law.alpha();
    const double M = kernel.M();
    const double u2 = law.rate_law().moment(2);
    // eta >= 1: y = eta / z ranges over [1/z, inf).
    const double y0 = 1.0 / z;
    if (y0 >= M) return std::pow(z, alpha) * u2 * kernel.tail_value();
    return u2 * (alpha * kernel.q_moment(alpha, y0, M) + kernel.tail_value() * std::pow(M, -alpha));
}

double mathcal_L(const DurationRateLaw& law, const WaveletPair& w, double z) {
    return mathcal_L(law, ScaleKernel(w), z);
}

double c_L_constant(const ScaleKernel& kernel, double alpha) {
    if (!(alpha > 0.0 && alpha < 2.0)) throw ValidationError("alpha must lie in (0, 2)");
    const double M = kernel.M();
    return alpha * kernel.q_moment(alpha, 0.0, M) + kernel.tail_value() * std::pow(M, -alpha);
}

double c_L_constant(const WaveletPair& w, double alpha) { return c_L_constant(ScaleKernel(w), alpha); }

double v_j(const DurationRateLaw& law, const ScaleKernel& kernel, int j) {
    const double z = std::ldexp(1.0, j);
    return mathcal_L(law, kernel, z) * std::pow(z, 2.0 - law.alpha());
}

SpectrumModel spectrum_model(const DurationRateLaw& law, const WaveletPair& w, const Eigen::VectorXd& z_grid) {
    const ScaleKernel kernel(w);
    SpectrumModel m;
    m.alpha = law.alpha();
    m.z = z_grid;
    m.L.resize(z_grid.size());
    for (Eigen::Index i = 0; i < z_grid.size(); ++i) m.L[i] = mathcal_L(law, kernel, z_grid[i]);
    m.c_L = c_L_constant(kernel, law.alpha());
    if (is_pareto(law)) {
        const double u2 = law.rate_law().moment(2);
        m.c_prime = u2 * m.c_L;
        m.pareto_coefficient = -law.alpha() * u2 * kernel.psi_norm2() / (2.0 - law.alpha());
    }
    return m;
}

double rate_exponent(Scheme scheme, double alpha, double beta, SmoothnessRoute route) {
    if (!(alpha > 1.0 && alpha < 2.0)) throw ValidationError("rate exponent needs alpha in (1, 2)");
    if (!(beta > 0.0)) throw ValidationError("beta must be positive");
    double g = effective_beta(alpha, beta, route);
    if (scheme != Scheme::Continuous) g = std::min(g, 2.0 - alpha);
    if (std::isinf(g)) return 0.5;
    return g / (2.0 * g + alpha);
}

SobolevCheck sobolev_feasible(const WaveletPair& w, double alpha, double beta) {
    using cd = std::complex<double>;
    auto transfer = [](const Eigen::VectorXd& f, double omega) {
        cd s = 0.0;
        for (Eigen::Index n = 0; n < f.size(); ++n) s += f[n] * std::polar(1.0, -omega * static_cast<double>(n));
        return s / std::sqrt(2.0);
    };
    auto psi_hat = [&](double xi) {
        cd p = transfer(w.psi_filter, xi / 2.0);
        for (int k = 2; k <= 40; ++k) p *= transfer(w.phi_filter, std::ldexp(xi, -k));
        return std::abs(p);
    };
    const int first = 3;
    const int last = 9;
    Eigen::VectorXd x(last - first + 1), y(last - first + 1);
    for (int b = first; b <= last; ++b) {
        double peak = 0.0;
        // Step below pi/8 so the oscillation of |psi*| is resolved in every band.
        const int samples = 1 << (b + 4);
        for (int i = 0; i < samples; ++i) {
            const double xi = std::ldexp(kPi, b) * (1.0 + (i + 0.5) / samples);
            peak = std::max(peak, psi_hat(xi));
        }
        x[b - first] = b;
        y[b - first] = std::log2(peak);
    }
    const double xm = x.mean();
    const double ym = y.mean();
    const double slope = ((x.array() - xm) * (y.array() - ym)).sum() / (x.array() - xm).square().sum();
    SobolevCheck c;
    c.decay = -slope;
    c.exponent = alpha + beta - 2.0 - 2.0 * c.decay;
    c.feasible = c.exponent < -1.0;
    return c;
}

}  // namespace ispest
