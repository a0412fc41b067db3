#pragma once

#include <limits>
#include <vector>

#include <Eigen/Core>

#include "ispest/path_simulator.hpp"
#include "ispest/traffic_model.hpp"
#include "ispest/wavelet_bank.hpp"
#include "ispest/whittle_estimator.hpp"

namespace ispest {

struct MeanCov {
    double mean = 0.0;
    double covariance = 0.0;
};

/// E[X(t)] = E[U (eta ^ t)] and cov(X(s), X(t)) = int_{t-s}^t H_2, 0 <= s <= t.
MeanCov mean_cov_nonstationary(const DurationRateLaw& law, double s, double t);

struct StationaryMoments {
    double mean = 0.0;        // E[U eta]
    double covariance = 0.0;  // cov(X_S(0), X_S(t)) = int_t^inf H_2
    double karamata = 0.0;    // L_2(t) t^{1-alpha} / (alpha - 1)
};

StationaryMoments mean_cov_stationary(const DurationRateLaw& law, double t);

struct CovLimitRow {
    double T = 0.0;
    double ratio = 0.0;  // cov(X(Ts), X(Tt)) / (L_2(T) T^{1-alpha})
    double C = 0.0;      // int_{t-s}^t v^-alpha dv
};

std::vector<CovLimitRow> scaled_cov_limit(const DurationRateLaw& law, double s, double t,
                                          const std::vector<double>& T_grid);

/// K(y) = int (Psi(t + y) - Psi(t))^2 dt tabulated on shifts y in [0, M].
/// K(y) = 2 int Psi^2 for y >= M, and K(y) / y^2 -> int psi^2 as y -> 0.
class ScaleKernel {
public:
    explicit ScaleKernel(const WaveletPair& w, int grid_resolution = 10, int shift_resolution = 9);

    double K(double y) const;
    /// K(y) / y^2, linear between shift knots.
    double Q(double y) const;
    int M() const noexcept { return M_; }
    double psi_norm2() const noexcept { return psi_norm2_; }
    double tail_value() const noexcept { return tail_; }
    /// int_a^b Q(y) y^{1-alpha} dy, exact for the piecewise-linear Q.
    double q_moment(double alpha, double a, double b) const;

private:
    int M_;
    double shift_step_;
    double psi_norm2_;
    double tail_;
    Eigen::VectorXd q_;  // Q at y = i * shift_step_
};

/// L(z) = z^alpha E[U^2 K(eta / z)].
double mathcal_L(const DurationRateLaw& law, const ScaleKernel& kernel, double z);
double mathcal_L(const DurationRateLaw& law, const WaveletPair& w, double z);
/// Quadrature route for every law, also used to cross-check the Pareto closed form.
double mathcal_L_quadrature(const DurationRateLaw& law, const ScaleKernel& kernel, double z);

/// C_L = alpha int_0^inf K(y) y^{-alpha-1} dy.
double c_L_constant(const ScaleKernel& kernel, double alpha);
double c_L_constant(const WaveletPair& w, double alpha);

/// Predicted var(d^S_{j,k}) = L(2^j) 2^{(2-alpha) j}.
double v_j(const DurationRateLaw& law, const ScaleKernel& kernel, int j);

struct SpectrumModel {
    double alpha = 0.0;
    Eigen::VectorXd z;
    Eigen::VectorXd L;
    double c_L = 0.0;
    double c_prime = std::numeric_limits<double>::quiet_NaN();  // lim L(z), Pareto only
    // Coefficient of z^{alpha-2} in L(z) - c' for Pareto: -alpha E[U^2] |psi|^2 / (2 - alpha).
    double pareto_coefficient = std::numeric_limits<double>::quiet_NaN();
};

SpectrumModel spectrum_model(const DurationRateLaw& law, const WaveletPair& w, const Eigen::VectorXd& z_grid);

/// beta_eff / (2 beta_eff + alpha); sampled schemes use min(beta_eff, 2 - alpha).
/// beta may be +inf.
double rate_exponent(Scheme scheme, double alpha, double beta,
                     SmoothnessRoute route = SmoothnessRoute::TailExpansion);

struct SobolevCheck {
    double decay = 0.0;      // |psi*(xi)| ~ |xi|^-decay from dyadic band maxima
    double exponent = 0.0;   // alpha + beta - 2 - 2 decay
    bool feasible = false;   // exponent < -1
};

/// int (1 + |xi|)^{alpha+beta-2} |psi*(xi)|^2 dxi < inf, judged from the decay of |psi*|.
SobolevCheck sobolev_feasible(const WaveletPair& w, double alpha, double beta);

}  // namespace ispest
