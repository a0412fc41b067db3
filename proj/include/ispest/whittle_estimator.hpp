#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "ispest/wavelet_bank.hpp"

namespace ispest {

/// Scale bookkeeping for the contrast: Delta = {(j, k): J0 < j <= J1, k < n_j}.
struct ScaleSelection {
    double T = 0.0;
    int M = 1;
    int J = 0;
    int J0 = 0;
    int J1 = 0;
    Eigen::VectorXd n;  // n[i] = n_{J0+1+i} = 2^{J-j}
    double delta = 0.0;               // mean of j over Delta
    double delta_closed_form = 0.0;   // J0 + 2 + (J0-J1)/(2^{J1-J0}-1)
    std::string rule = "explicit";
    // Both readings of the log in the default J1 rule.
    int j1_base2 = -1;
    int j1_natural = -1;

    int scale_count() const noexcept { return J1 - J0; }
    long n_at(int j) const { return static_cast<long>(n[j - J0 - 1]); }
};

/// J = max{j : 2^j <= (T-M+1)/(M+1)}; -1 when no j >= 0 qualifies.
int max_scale_index(double T, int M);

/// Throws ScaleSelectionError naming the violated constraint.
ScaleSelection build_scales(double T, int M, int J0, int J1, Scheme scheme = Scheme::Continuous);

/// J0 = floor(J/2), J1 = floor(J/2 + log_b J) clamped to (J0, J].
/// `logbase` <= 0 selects the natural logarithm.
ScaleSelection default_scales(double T, int M, double logbase = 2.0, Scheme scheme = Scheme::Continuous);

/// How beta enters the rate: as the order of L(z) - c' directly, or as the
/// order of the tail expansion of L_2, which caps it at 2 - alpha.
enum class SmoothnessRoute { Direct, TailExpansion };

std::string to_string(SmoothnessRoute r);
SmoothnessRoute parse_smoothness_route(const std::string& text);

/// beta after the route's cap (beta may be +inf).
double effective_beta(double alpha, double beta, SmoothnessRoute route);

/// J0 = floor(J / (2 g + alpha)), J1 = J, with g = beta_eff (continuous) or
/// min(beta_eff, 2 - alpha) (sampled schemes). `beta` is the smoothness
/// exponent of the slowly varying part, supplied by the caller.
ScaleSelection rate_optimal_scales(double T, int M, double beta, double alpha_hint, Scheme scheme,
                                   SmoothnessRoute route = SmoothnessRoute::Direct);

/// Per-scale sums of squared coefficients over Delta.
struct ScaleEnergy {
    Eigen::VectorXd j;      // scale indices J0+1..J1
    Eigen::VectorXd count;  // coefficients used per scale
    Eigen::VectorXd sum;    // sum of d_{j,k}^2
    double delta = 0.0;     // count-weighted mean of j
};

/// Squared-coefficient sums over the first n_j locations (or every computable
/// location when `use_all_k`).
ScaleEnergy scale_energy(const CoefficientArray& coeffs, const ScaleSelection& scales, bool use_all_k = false);

struct ContrastEvaluation {
    double alpha_prime = 0.0;
    double value = 0.0;
    double gradient = 0.0;
    double second_derivative = 0.0;
    Eigen::VectorXd weights;  // w_j(alpha'), nonnegative, sum 1
};

/// W(a) = log(sum_j S_j 2^{-(2-a) j}) + delta log(2) (2 - a).
ContrastEvaluation contrast(const ScaleEnergy& energy, double alpha_prime);
ContrastEvaluation contrast(const CoefficientArray& coeffs, const ScaleSelection& scales, double alpha_prime);

struct EstimatorOptions {
    bool use_all_k = false;
    double margin = 1e-4;  // search interval [margin, 2 - margin]
    double tolerance = 1e-8;
    int grid_points = 32;
};

struct EstimateResult {
    double alpha_hat = 0.0;
    double hurst = 0.0;
    double value = 0.0;
    double gradient = 0.0;
    bool boundary = false;
    Eigen::VectorXd weights;
    ScaleSelection scales;
    // Post hoc check of J0/J < 1/alpha_hat and J1/J < 1/(2 - alpha_hat).
    bool j0_condition = false;
    bool j1_condition = false;
    std::vector<std::string> warnings;
};

EstimateResult estimate_alpha(const ScaleEnergy& energy, const ScaleSelection& scales,
                              int vanishing_moments, const EstimatorOptions& options = {});
EstimateResult estimate_alpha(const CoefficientArray& coeffs, const ScaleSelection& scales,
                              const EstimatorOptions& options = {});

/// H = (3 - alpha) / 2.
double hurst_of_alpha(double alpha);

/// The `alpha_hat=... H=... J=...` result line.
std::string format_estimate(const EstimateResult& r);

}  // namespace ispest
