#include "ispest/wavelet_bank.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "ispest/errors.hpp"

namespace ispest {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// Daubechies lowpass filter h_0..h_{2N-1} with sum sqrt(2), extremal phase.
Eigen::VectorXd daubechies_filter(int N) {
    // |m0|^2 = cos^{2N}(w/2) P(sin^2(w/2)), P(y) = sum_k C(N-1+k, k) y^k.
    const int deg = N - 1;
    std::vector<std::complex<double>> roots;
    if (deg >= 1) {
        Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(deg, deg);
        const double lead = binomial(N - 1 + deg, deg);
        for (int i = 0; i < deg; ++i) companion(0, i) = -binomial(N - 1 + deg - 1 - i, deg - 1 - i) / lead;
        for (int i = 1; i < deg; ++i) companion(i, i - 1) = 1.0;
        Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
        for (int i = 0; i < deg; ++i) roots.push_back(solver.eigenvalues()[i]);
    }
    // Each y root gives z + 1/z = 2 - 4y; keep the root inside the unit circle.
    std::vector<std::complex<double>> poly{1.0};
    auto multiply = [&](std::complex<double> a0, std::complex<double> a1) {
        std::vector<std::complex<double>> out(poly.size() + 1, 0.0);
        for (std::size_t i = 0; i < poly.size(); ++i) {
            out[i] += poly[i] * a0;
            out[i + 1] += poly[i] * a1;
        }
        poly = std::move(out);
    };
    for (int i = 0; i < N; ++i) multiply(1.0, 1.0);
    for (const auto& y : roots) {
        const std::complex<double> b = 1.0 - 2.0 * y;
        const std::complex<double> disc = std::sqrt(b * b - 1.0);
        std::complex<double> z = b + disc;
        if (std::abs(z) > 1.0) z = b - disc;
        multiply(1.0, -z);
    }
    Eigen::VectorXd h(static_cast<Eigen::Index>(poly.size()));
    for (std::size_t i = 0; i < poly.size(); ++i) h[static_cast<Eigen::Index>(i)] = poly[i].real();
    h *= kSqrt2 / h.sum();
    return h;
}

Eigen::VectorXd quadrature_mirror(const Eigen::VectorXd& h) {
    const Eigen::Index M = h.size() - 1;
    Eigen::VectorXd g(h.size());
    for (Eigen::Index k = 0; k <= M; ++k) g[k] = (k % 2 == 0 ? 1.0 : -1.0) * h[M - k];
    return g;
}

// One cascade step from level r-1 to level r for a refinable function on
// [0, M]: new(i) = factor * sum_k h_k old(i - k 2^{r-1}), with `below` and
// `above` the values taken outside the old support.
Eigen::VectorXd refine(const Eigen::VectorXd& old, const Eigen::VectorXd& h, int M, int r,
                       double factor, double below, double above) {
    const Eigen::Index half = Eigen::Index{1} << (r - 1);
    const Eigen::Index n_old = old.size();
    Eigen::VectorXd out(M * (half * 2) + 1);
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        double acc = 0.0;
        for (Eigen::Index k = 0; k < h.size(); ++k) {
            const Eigen::Index idx = i - k * half;
            const double v = idx < 0 ? below : (idx >= n_old ? above : old[idx]);
            acc += h[k] * v;
        }
        out[i] = factor * acc;
    }
    return out;
}

struct Tables {
    Eigen::VectorXd phi, psi, primitive;
};

// Exact dyadic values of phi, psi, Psi from the filters.
Tables cascade_tables(const Eigen::VectorXd& h, const Eigen::VectorXd& g, int resolution) {
    const int M = static_cast<int>(h.size()) - 1;

    // phi at integers: phi = A phi with A(n, m) = sqrt2 h_{2n-m}, sum phi(n) = 1.
    Eigen::MatrixXd system = Eigen::MatrixXd::Zero(M + 2, M + 1);
    for (int n = 0; n <= M; ++n) {
        for (int m = 0; m <= M; ++m) {
            const int k = 2 * n - m;
            if (k >= 0 && k <= M) system(n, m) = kSqrt2 * h[k];
        }
        system(n, n) -= 1.0;
    }
    system.row(M + 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(M + 2);
    rhs[M + 1] = 1.0;
    Eigen::VectorXd phi = system.colPivHouseholderQr().solve(rhs);

    // Phi(x) = int_{-inf}^x phi at integers: Phi(n) = (1/sqrt2) sum_k h_k Phi(2n-k),
    // Phi = 0 left of 0 and 1 right of M.
    Eigen::VectorXd cumulative(M + 1);
    cumulative[0] = 0.0;
    cumulative[M] = 1.0;
    if (M >= 2) {
        const int u = M - 1;
        Eigen::MatrixXd a = Eigen::MatrixXd::Identity(u, u);
        Eigen::VectorXd b = Eigen::VectorXd::Zero(u);
        for (int n = 1; n <= u; ++n) {
            for (int k = 0; k <= M; ++k) {
                const int m = 2 * n - k;
                if (m >= M) {
                    b[n - 1] += h[k] / kSqrt2;
                } else if (m >= 1) {
                    a(n - 1, m - 1) -= h[k] / kSqrt2;
                }
            }
        }
        cumulative.segment(1, u) = a.fullPivLu().solve(b);
    }

    for (int r = 1; r <= resolution; ++r) {
        phi = refine(phi, h, M, r, kSqrt2, 0.0, 0.0);
        cumulative = refine(cumulative, h, M, r, 1.0 / kSqrt2, 0.0, 1.0);
    }

    const Eigen::Index scale = Eigen::Index{1} << resolution;
    const Eigen::Index n = phi.size();
    Tables t;
    t.phi = phi;
    t.psi.resize(n);
    t.primitive.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double p = 0.0;
        double c = 0.0;
        for (Eigen::Index k = 0; k < g.size(); ++k) {
            const Eigen::Index idx = 2 * i - k * scale;
            p += g[k] * (idx < 0 || idx >= n ? 0.0 : phi[idx]);
            c += g[k] * (idx < 0 ? 0.0 : (idx >= n ? 1.0 : cumulative[idx]));
        }
        t.psi[i] = kSqrt2 * p;
        t.primitive[i] = c / kSqrt2;
    }
    t.psi[0] = t.psi[n - 1] = 0.0;
    t.primitive[0] = t.primitive[n - 1] = 0.0;
    return t;
}

Tables haar_tables(double amplitude, int resolution) {
    const Eigen::Index scale = Eigen::Index{1} << resolution;
    Tables t;
    t.phi = Eigen::VectorXd::Ones(scale + 1);
    t.phi[scale] = 0.0;
    t.psi.resize(scale + 1);
    t.primitive.resize(scale + 1);
    for (Eigen::Index i = 0; i <= scale; ++i) {
        const double x = static_cast<double>(i) / static_cast<double>(scale);
        t.psi[i] = amplitude * (i == scale ? 0.0 : (2 * i < scale ? 1.0 : -1.0));
        t.primitive[i] = amplitude * (x <= 0.5 ? x : 1.0 - x);
    }
    return t;
}

double interpolate(const Eigen::VectorXd& table, double pos) noexcept {
    if (pos <= 0.0 || pos >= static_cast<double>(table.size() - 1)) {
        if (pos == 0.0) return table[0];
        if (pos == static_cast<double>(table.size() - 1)) return table[table.size() - 1];
        return 0.0;
    }
    const double fl = std::floor(pos);
    const auto i = static_cast<Eigen::Index>(fl);
    const double frac = pos - fl;
    if (frac == 0.0) return table[i];
    return table[i] + frac * (table[i + 1] - table[i]);
}

bool is_haar(const WaveletPair& w) { return w.M == 1; }

void fill_tables(WaveletPair& w) {
    const Tables t = is_haar(w) ? haar_tables(kSqrt2 * w.psi_filter[0], w.resolution)
                                : cascade_tables(w.phi_filter, w.psi_filter, w.resolution);
    w.phi_table = t.phi;
    w.psi_table = t.psi;
    w.primitive_table = t.primitive;
}

}  // namespace

double WaveletPair::primitive(double x) const noexcept {
    if (x <= 0.0 || x >= M) return 0.0;
    return interpolate(primitive_table, std::ldexp(x, resolution));
}

double WaveletPair::psi(double x) const noexcept {
    if (x < 0.0 || x > M) return 0.0;
    return interpolate(psi_table, std::ldexp(x, resolution));
}

double WaveletPair::phi(double x) const noexcept {
    const double shifted = x + M - 1;
    if (shifted < 0.0 || shifted > M) return 0.0;
    return interpolate(phi_table, std::ldexp(shifted, resolution));
}

WaveletPair make_haar(int resolution) {
    if (resolution < 1 || resolution > 24) throw ValidationError("table resolution must be in [1, 24]");
    WaveletPair w;
    w.name = "haar";
    w.M = 1;
    w.vanishing_moments = 1;
    w.resolution = resolution;
    w.phi_filter = Eigen::Vector2d(1.0 / kSqrt2, 1.0 / kSqrt2);
    w.psi_filter = quadrature_mirror(w.phi_filter);
    fill_tables(w);
    return w;
}

WaveletPair make_daubechies(int N, int resolution) {
    if (N < 2 || N > 10) throw ValidationError("Daubechies order must be in [2, 10]");
    if (resolution < 1 || resolution > 22) throw ValidationError("table resolution must be in [1, 22]");
    WaveletPair w;
    w.name = "db" + std::to_string(N);
    w.M = 2 * N - 1;
    w.vanishing_moments = N;
    w.resolution = resolution;
    w.phi_filter = daubechies_filter(N);
    w.psi_filter = quadrature_mirror(w.phi_filter);
    fill_tables(w);
    return w;
}

WaveletPair make_wavelet(const std::string& name, int resolution) {
    if (name == "haar" || name == "db1") return make_haar(resolution);
    if (name.size() > 2 && name.rfind("db", 0) == 0) {
        int n = 0;
        try {
            std::size_t used = 0;
            n = std::stoi(name.substr(2), &used);
            if (used != name.size() - 2) n = 0;
        } catch (const std::logic_error&) {
            n = 0;
        }
        if (n >= 2) return make_daubechies(n, resolution);
    }
    throw ValidationError("unsupported wavelet '" + name + "'");
}

WaveletPair scaled(const WaveletPair& w, double factor) {
    WaveletPair out = w;
    out.psi_filter *= factor;
    out.psi_table *= factor;
    out.primitive_table *= factor;
    return out;
}

WaveletPair retabulate(const WaveletPair& w, int resolution) {
    WaveletPair out = w;
    out.resolution = resolution;
    fill_tables(out);
    return out;
}

const Eigen::VectorXd& CoefficientArray::scale(int j) const {
    if (j < 0 || j > max_scale()) throw RangeError("scale index " + std::to_string(j) + " not available");
    return d[static_cast<std::size_t>(j)];
}

long computable_range(int j, double T, int M, Scheme scheme) {
    if (j < 0) return 0;
    const double inv = std::ldexp(1.0, -j);
    const double span = scheme == Scheme::Continuous ? T * inv : (T - M + 1) * inv;
    if (!(span >= M)) return 0;
    return static_cast<long>(std::floor(span)) - M + 1;
}

int max_computable_scale(double T, int M, Scheme scheme) {
    int j = -1;
    while (j < 62 && computable_range(j + 1, T, M, scheme) > 0) ++j;
    return j;
}

CoefficientArray continuous_coefficients(const SessionSet& set, const WaveletPair& w, int jmax, int jmin) {
    const double T = set.horizon();
    if (jmax < 0 || jmax > max_computable_scale(T, w.M, Scheme::Continuous)) {
        throw RangeError("jmax exceeds log2(T/M) for continuous coefficients");
    }
    if (jmin < 0 || jmin > jmax) throw RangeError("need 0 <= jmin <= jmax");
    CoefficientArray out;
    out.scheme = Scheme::Continuous;
    out.T = T;
    out.wavelet = w.name;
    out.M = w.M;
    out.vanishing_moments = w.vanishing_moments;
    out.d.resize(static_cast<std::size_t>(jmax) + 1);

    std::vector<long> counts(out.d.size());
    std::vector<double> inv(out.d.size()), amp(out.d.size());
    for (int j = jmin; j <= jmax; ++j) {
        counts[j] = computable_range(j, T, w.M, Scheme::Continuous);
        out.d[j] = Eigen::VectorXd::Zero(counts[j]);
        inv[j] = std::ldexp(1.0, -j);
        amp[j] = std::sqrt(std::ldexp(1.0, j));
    }

    // Psi(x - k) vanishes unless 0 < x - k < M, so each endpoint touches at
    // most M locations per scale.
    auto add_endpoint = [&](double e, double weight) {
        for (int j = jmin; j <= jmax; ++j) {
            const double x = e * inv[j];
            const long top = static_cast<long>(std::floor(x));
            const long k_lo = std::max(0L, top - w.M + 1);
            const long k_hi = std::min(counts[j] - 1, top);
            double* dj = out.d[j].data();
            const double a = weight * amp[j];
            for (long k = k_lo; k <= k_hi; ++k) dj[k] += a * w.primitive(x - static_cast<double>(k));
        }
    };
    for (const auto& s : set.initial()) {
        if (s.rate == 0.0) continue;
        add_endpoint(std::min(s.residual, T), s.rate);
    }
    for (const auto& s : set.body()) {
        if (s.rate == 0.0) continue;
        add_endpoint(std::min(s.arrival + s.duration, T), s.rate);
        add_endpoint(s.arrival, -s.rate);
    }
    return out;
}

CoefficientArray discrete_coefficients(const SampledPath& samples, const WaveletPair& w, int jmax) {
    const auto T = static_cast<double>(samples.values.size());
    if (jmax < 1) throw RangeError("sampled coefficients start at scale 1");
    if (T < std::ldexp(static_cast<double>(w.M + 1), jmax)) {
        throw RangeError("insufficient samples: need (M+1) 2^jmax");
    }
    CoefficientArray out;
    out.scheme = samples.scheme;
    out.T = T;
    out.wavelet = w.name;
    out.M = w.M;
    out.vanishing_moments = w.vanishing_moments;
    out.d.resize(static_cast<std::size_t>(jmax) + 1);

    // I_phi[x] = sum_n x(n) phi(. - n) with phi supported in [-M+1, 1], i.e.
    // sum_m x(m + M - 1) phi_0(. - m) for phi_0 supported in [0, M].
    Eigen::VectorXd approx = samples.values.tail(samples.values.size() - (w.M - 1));
    for (int j = 1; j <= jmax; ++j) {
        Eigen::VectorXd detail = decimated_correlation(approx, w.psi_filter);
        approx = decimated_correlation(approx, w.phi_filter);
        const long need = computable_range(j, T, w.M, samples.scheme);
        if (detail.size() < need) throw NumericalError("filter bank produced too few coefficients");
        out.d[j] = detail.head(need);
    }
    return out;
}

DirectCoefficientEvaluator::DirectCoefficientEvaluator(const WaveletPair& w, int max_scale, int resolution)
    : M_(w.M), resolution_(resolution) {
    if (max_scale < 1 || resolution < 1 || resolution + max_scale > 24) {
        throw ValidationError("direct evaluator needs 1 <= max_scale and resolution + max_scale <= 24");
    }
    phi_ = retabulate(w, resolution).phi_table;
    psi_.resize(static_cast<std::size_t>(max_scale) + 1);
    for (int j = 1; j <= max_scale; ++j) psi_[j] = retabulate(w, resolution + j).psi_table;
}

double DirectCoefficientEvaluator::operator()(const Eigen::VectorXd& samples, int j, long k) const {
    if (j < 1 || j >= static_cast<int>(psi_.size())) throw RangeError("scale outside the evaluator's tables");
    const long T = samples.size();
    const long width = 1L << j;
    // I_phi[x] on the support [k 2^j, (k+M) 2^j] involves x(n) for
    // n in [k 2^j, (k+M) 2^j + M - 2].
    if (k < 0 || (k + M_) * width + M_ - 2 > T - 1) {
        throw RangeError("coefficient needs samples outside the observed range");
    }
    const long unit = 1L << resolution_;  // grid points per unit of s
    const Eigen::VectorXd& psi = psi_[static_cast<std::size_t>(j)];
    const long s_begin = k * width * unit;
    const long s_end = (k + M_) * width * unit;
    long double acc = 0.0L;
    for (long i = s_begin; i < s_end; ++i) {
        // phi(s - n) != 0 needs s - n in (-M+1, 1); table index of s - n + M - 1.
        const long s_floor = i / unit;
        double interp = 0.0;
        for (long n = s_floor; n <= s_floor + M_ - 1; ++n) {
            const long idx = i - (n - M_ + 1) * unit;
            if (idx < 0 || idx >= phi_.size()) continue;
            interp += samples[n] * phi_[idx];
        }
        acc += static_cast<long double>(psi[i - k * width * unit] * interp);
    }
    return static_cast<double>(acc) * std::ldexp(1.0, -resolution_) * std::sqrt(std::ldexp(1.0, -j));
}

double direct_discrete_coefficient(const Eigen::VectorXd& samples, const WaveletPair& w, int j, long k) {
    return DirectCoefficientEvaluator(w, j)(samples, j, k);
}

}  // namespace ispest
