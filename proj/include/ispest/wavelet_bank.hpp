#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ispest/path_simulator.hpp"

namespace ispest {

/// Father/mother wavelet pair with tabulated values.
///
/// Conventions: psi is supported in [0, M], phi in [-M+1, 1], and
/// psi_{j,k}(s) = 2^{-j/2} psi(2^{-j} s - k). Tables are sampled on the dyadic
/// grid of step 2^{-resolution}; `phi_table[i]` is phi(-M+1 + i h),
/// `psi_table[i]` and `primitive_table[i]` are psi(i h) and Psi(i h) with
/// Psi(x) = int_0^x psi.
struct WaveletPair {
    std::string name;
    int M = 1;
    int vanishing_moments = 1;
    int resolution = 12;
    Eigen::VectorXd phi_filter;  // h_0..h_M, sum sqrt(2)
    Eigen::VectorXd psi_filter;  // g_k = (-1)^k h_{M-k}
    Eigen::VectorXd phi_table;
    Eigen::VectorXd psi_table;
    Eigen::VectorXd primitive_table;

    double step() const noexcept { return std::ldexp(1.0, -resolution); }
    /// Psi at any real x, linear interpolation between knots; 0 outside (0, M).
    double primitive(double x) const noexcept;
    double psi(double x) const noexcept;
    double phi(double x) const noexcept;
};

WaveletPair make_haar(int resolution = 12);

/// Orthonormal Daubechies wavelet with N vanishing moments, 2 <= N <= 10.
/// Filters come from the spectral factorization of the Daubechies polynomial
/// (roots via the companion matrix), tables from the cascade refinement
/// started at exact integer values.
WaveletPair make_daubechies(int N, int resolution = 12);

/// "haar" or "dbN".
WaveletPair make_wavelet(const std::string& name, int resolution = 12);

/// Same pair with psi (tables and filter) multiplied by `factor`.
WaveletPair scaled(const WaveletPair& w, double factor);

/// Re-tabulate psi and Psi of `w` at a different resolution from its filters.
WaveletPair retabulate(const WaveletPair& w, int resolution);

struct CoefficientArray {
    Scheme scheme = Scheme::Continuous;
    double T = 0.0;
    std::string wavelet;
    int M = 1;
    int vanishing_moments = 1;
    /// d[j] holds d_{j,0}, d_{j,1}, ...; d[0] is empty for sampled schemes.
    std::vector<Eigen::VectorXd> d;

    int max_scale() const noexcept { return static_cast<int>(d.size()) - 1; }
    const Eigen::VectorXd& scale(int j) const;
};

/// Number of locations k = 0, 1, ... whose coefficient is computable at scale j.
/// Continuous: floor(T 2^-j) - M + 1; sampled: floor(2^-j (T - M + 1)) - M + 1;
/// clamped at 0.
long computable_range(int j, double T, int M, Scheme scheme);

/// Largest j with a non-empty computable range.
int max_computable_scale(double T, int M, Scheme scheme);

/// Exact coefficients of the continuous path for j = jmin..jmax (scales below
/// jmin are left empty):
/// d_{j,k} = sum_l U_l 2^{j/2} [Psi(2^-j (t_l + eta_l) - k) - Psi(2^-j t_l - k)].
CoefficientArray continuous_coefficients(const SessionSet& set, const WaveletPair& w, int jmax, int jmin = 0);

/// Coefficients of I_phi[x] for j = 1..jmax by the pyramid filter bank,
/// the samples acting as level-0 scaling coefficients.
CoefficientArray discrete_coefficients(const SampledPath& samples, const WaveletPair& w, int jmax);

/// Reference route for sampled coefficients: int psi_{j,k}(s) I_phi[x](s) ds
/// with I_phi[x](s) = sum_n x(n) phi(s - n), as a dyadic Riemann sum over
/// tabulated phi and psi. phi is tabulated at `resolution` and psi at
/// `resolution + j`, so both are evaluated at exact cascade knots. Independent
/// of the filter-bank route; accuracy is limited by the table resolution.
class DirectCoefficientEvaluator {
public:
    DirectCoefficientEvaluator(const WaveletPair& w, int max_scale, int resolution = 14);

    /// Throws RangeError when (j, k) needs samples outside x(0..size-1).
    double operator()(const Eigen::VectorXd& samples, int j, long k) const;

private:
    int M_;
    int resolution_;
    Eigen::VectorXd phi_;               // phi on [-M+1, 1]
    std::vector<Eigen::VectorXd> psi_;  // psi_[j] on [0, M] at resolution + j
};

/// Convenience wrapper building a one-shot evaluator.
double direct_discrete_coefficient(const Eigen::VectorXd& samples, const WaveletPair& w, int j, long k);

/// One decimated step of the filter bank: out[k] = sum_n f[n] c[2k + n] over
/// the k for which every tap lies inside c.
template <typename Derived>
Eigen::VectorXd decimated_correlation(const Eigen::MatrixBase<Derived>& c,
                                      const Eigen::VectorXd& filter) {
    const Eigen::Index taps = filter.size();
    const Eigen::Index n = c.size() >= taps ? (c.size() - taps) / 2 + 1 : 0;
    Eigen::VectorXd out(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        out[k] = filter.dot(c.segment(2 * k, taps));
    }
    return out;
}

}  // namespace ispest
