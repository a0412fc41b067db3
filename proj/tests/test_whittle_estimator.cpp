#include <doctest.h>

#include <cmath>
#include <string>

#include "ispest/errors.hpp"
#include "ispest/random.hpp"
#include "ispest/whittle_estimator.hpp"

using namespace ispest;

namespace {

/// Continuous-scheme array on [0, T] filled by `fill(j, k)`.
template <typename F>
CoefficientArray synthetic(double T, int M, int jmax, F fill) {
    CoefficientArray c;
    c.scheme = Scheme::Continuous;
    c.T = T;
    c.M = M;
    c.vanishing_moments = M == 1 ? 1 : (M + 1) / 2;
    c.wavelet = M == 1 ? "haar" : "db" + std::to_string((M + 1) / 2);
    c.d.resize(jmax + 1);
    for (int j = 0; j <= jmax; ++j) {
        c.d[j].resize(computable_range(j, T, M, Scheme::Continuous));
        for (Eigen::Index k = 0; k < c.d[j].size(); ++k) c.d[j][k] = fill(j, k);
    }
    return c;
}

/// d_{j,k}^2 = 2^{(2-alpha) j} exactly.
CoefficientArray exact_scaling(double T, double alpha) {
    const int J = max_scale_index(T, 1);
    return synthetic(T, 1, J, [&](int j, Eigen::Index k) {
        const double amp = std::pow(2.0, (2.0 - alpha) * j / 2.0);
        return k % 2 ? amp : -amp;
    });
}

}  // namespace

TEST_CASE("max_scale_index") {
    CHECK(max_scale_index(100.0, 1) == 5);
    CHECK(max_scale_index(40.0, 1) == 4);
    CHECK(max_scale_index(2.0, 1) == 0);
    CHECK(max_scale_index(1.0, 1) == -1);
    CHECK(max_scale_index(std::ldexp(1.0, 20), 3) == 17);
}

TEST_CASE("build_scales: delta both ways") {
    const ScaleSelection s = build_scales(40.0, 1, 2, 4);
    CHECK(s.J == 4);
    CHECK(s.n_at(3) == 2);
    CHECK(s.n_at(4) == 1);
    CHECK(s.delta == doctest::Approx(10.0 / 3.0).epsilon(1e-15));
    CHECK(s.delta_closed_form == doctest::Approx(10.0 / 3.0).epsilon(1e-15));

    CHECK_THROWS_AS(build_scales(40.0, 1, 3, 3), ScaleSelectionError);
    CHECK_THROWS_AS(build_scales(40.0, 1, 0, 3), ScaleSelectionError);
    CHECK_THROWS_AS(build_scales(40.0, 1, 2, 5), ScaleSelectionError);
    try {
        build_scales(40.0, 1, 3, 3);
    } catch (const ScaleSelectionError& e) {
        CHECK(std::string(e.what()).find("J0 < J1") != std::string::npos);
    }
}

TEST_CASE("delta identity for all 1 <= J0 < J1 <= 30") {
    const double T = std::ldexp(1.0, 31);
    REQUIRE(max_scale_index(T, 1) == 30);
    for (int j0 = 1; j0 < 30; ++j0) {
        for (int j1 = j0 + 1; j1 <= 30; ++j1) {
            const ScaleSelection s = build_scales(T, 1, j0, j1);
            CHECK(std::abs(s.delta - s.delta_closed_form) <= 4e-15 * s.delta);
        }
    }
}

TEST_CASE("default scale rule") {
    // J = 10.
    const double T10 = 2048.0;
    REQUIRE(max_scale_index(T10, 1) == 10);
    const ScaleSelection s = default_scales(T10, 1);
    CHECK(s.J0 == 5);
    CHECK(s.J1 == 8);
    CHECK(s.j1_base2 == 8);
    CHECK(s.j1_natural == 7);
    CHECK(default_scales(T10, 1, 0.0).J1 == 7);
    CHECK(default_scales(T10, 1, 10.0).J1 == 6);

    // J = 4: clamp keeps J0 < J1 <= J.
    const ScaleSelection t = default_scales(40.0, 1, 0.0);
    CHECK(t.J0 == 2);
    CHECK(t.J1 == 3);
    CHECK(default_scales(40.0, 1).J1 == 4);

    CHECK_THROWS_AS(default_scales(5.0, 1), ScaleSelectionError);
}

TEST_CASE("rate-optimal scale rule") {
    const double T = std::ldexp(1.0, 20);
    const int J = max_scale_index(T, 1);
    // Pareto: beta = inf capped at 2 - alpha = 0.5, so 2g + alpha = 2.5.
    const ScaleSelection p = rate_optimal_scales(T, 1, INFINITY, 1.5, Scheme::Continuous, SmoothnessRoute::TailExpansion);
    CHECK(p.J0 == static_cast<int>(std::floor(J / 2.5)));
    CHECK(p.J1 == J);
    // Stable durations, direct route: continuous uses beta = alpha, sampled schemes cap at 2 - alpha.
    CHECK(rate_optimal_scales(T, 1, 1.5, 1.5, Scheme::Continuous).J0 == static_cast<int>(std::floor(J / 4.5)));
    CHECK(rate_optimal_scales(T, 1, 1.5, 1.5, Scheme::Discrete).J0 == static_cast<int>(std::floor(J / 2.5)));
    CHECK(effective_beta(1.5, 1.5, SmoothnessRoute::TailExpansion) == 0.5);
    CHECK_THROWS_AS(rate_optimal_scales(T, 1, 0.5, 0.8, Scheme::Continuous), ValidationError);
    CHECK_THROWS_AS(rate_optimal_scales(T, 1, 0.0, 1.5, Scheme::Continuous), ValidationError);
    CHECK_THROWS_AS(rate_optimal_scales(T, 1, INFINITY, 1.5, Scheme::Continuous, SmoothnessRoute::Direct),
                    ValidationError);
    // beta -> 0 pushes J0 toward floor(J / alpha).
    CHECK(rate_optimal_scales(T, 1, 1e-9, 1.5, Scheme::Continuous).J0 == static_cast<int>(std::floor(J / 1.5)));
}

TEST_CASE("exact-scaling input recovers alpha") {
    const double T = std::ldexp(1.0, 16);
    const CoefficientArray c = exact_scaling(T, 1.5);
    const ScaleSelection s = default_scales(T, 1);
    const ContrastEvaluation at = contrast(c, s, 1.5);
    CHECK(std::abs(at.gradient) < 1e-12);
    CHECK(at.second_derivative > 0.0);
    const EstimateResult r = estimate_alpha(c, s);
    CHECK(std::abs(r.alpha_hat - 1.5) < 1e-6);
    CHECK(r.hurst == doctest::Approx(0.75).epsilon(1e-6));
    CHECK_FALSE(r.boundary);
    for (double a : {0.6, 1.2, 1.8}) CHECK(std::abs(estimate_alpha(exact_scaling(T, a), s).alpha_hat - a) < 1e-6);
}

TEST_CASE("contrast weights and scale invariance") {
    const double T = std::ldexp(1.0, 14);
    Rng rng(3);
    const CoefficientArray c = synthetic(T, 1, max_scale_index(T, 1), [&](int j, Eigen::Index) {
        return rng.normal() * std::pow(2.0, 0.3 * j);
    });
    const ScaleSelection s = default_scales(T, 1);
    const double factor = 3.7;
    CoefficientArray c2 = c;
    for (auto& d : c2.d) d *= factor;
    for (double a : {0.3, 1.0, 1.7}) {
        const ContrastEvaluation e = contrast(c, s, a);
        CHECK((e.weights.array() >= 0.0).all());
        CHECK(std::abs(e.weights.sum() - 1.0) < 1e-12);
        CHECK(contrast(c2, s, a).value - e.value == doctest::Approx(2.0 * std::log(factor)).epsilon(1e-12));
    }
    CHECK(estimate_alpha(c2, s).alpha_hat == doctest::Approx(estimate_alpha(c, s).alpha_hat).epsilon(1e-7));
    CHECK_THROWS_AS(contrast(c, s, 2.0), ValidationError);
    CHECK_THROWS_AS(contrast(c, s, 0.0), ValidationError);
}

TEST_CASE("gradient matches central differences") {
    const double T = std::ldexp(1.0, 15);
    const ScaleSelection s = default_scales(T, 1);
    const double h = 1e-5;
    for (int trial = 0; trial < 100; ++trial) {
        Rng rng(split_seed(17, trial));
        const double slope = 2.0 * rng.uniform();
        const CoefficientArray c = synthetic(T, 1, s.J1, [&](int j, Eigen::Index) {
            return rng.normal() * std::pow(2.0, slope * j / 2.0);
        });
        const ScaleEnergy e = scale_energy(c, s);
        const double a = 0.05 + 1.9 * rng.uniform();
        const double g = contrast(e, a).gradient;
        const double fd = (contrast(e, a + h).value - contrast(e, a - h).value) / (2.0 * h);
        CHECK(std::abs(g - fd) <= 1e-6 * std::max(std::abs(g), 1e-3));
    }
}

TEST_CASE("white-noise coefficients push the estimate to the upper boundary") {
    const double T = std::ldexp(1.0, 18);
    Rng rng(5);
    const CoefficientArray c = synthetic(T, 1, max_scale_index(T, 1), [&](int, Eigen::Index) { return rng.normal(); });
    const EstimateResult r = estimate_alpha(c, default_scales(T, 1));
    CHECK(r.alpha_hat > 1.99);
    CHECK(r.boundary);
    CHECK_FALSE(r.warnings.empty());
}

TEST_CASE("degenerate input") {
    const double T = 1024.0;
    const CoefficientArray zero = synthetic(T, 1, max_scale_index(T, 1), [](int, Eigen::Index) { return 0.0; });
    CHECK_THROWS_AS(estimate_alpha(zero, default_scales(T, 1)), DegenerateContrastError);
    // One scale: the contrast does not depend on alpha'.
    CHECK_THROWS_AS(estimate_alpha(exact_scaling(T, 1.5), build_scales(T, 1, 3, 4)), DegenerateContrastError);
    const CoefficientArray shallow = exact_scaling(T, 1.5);
    CoefficientArray cut = shallow;
    cut.d.resize(3);
    CHECK_THROWS_AS(estimate_alpha(cut, default_scales(T, 1)), ScaleSelectionError);
}

TEST_CASE("single session: contrast finite on a grid") {
    const double T = 256.0;
    const SessionSet set(T, InitMode::fresh(), {}, {{10.3, 37.9, 1.0}}, 0);
    const WaveletPair h = make_haar();
    const ScaleSelection s = build_scales(T, 1, 2, 6);
    const CoefficientArray c = continuous_coefficients(set, h, 6);
    for (double a = 0.1; a < 2.0; a += 0.1) CHECK(std::isfinite(contrast(c, s, a).value));
}

TEST_CASE("haar warning below alpha = 1 and condition checks") {
    const double T = std::ldexp(1.0, 16);
    const ScaleSelection s = default_scales(T, 1);
    const EstimateResult low = estimate_alpha(exact_scaling(T, 0.7), s);
    CHECK(low.alpha_hat == doctest::Approx(0.7).epsilon(1e-6));
    bool warned = false;
    for (const auto& w : low.warnings) warned |= w.find("vanishing moments") != std::string::npos;
    CHECK(warned);
    const EstimateResult mid = estimate_alpha(exact_scaling(T, 1.5), s);
    CHECK(mid.j0_condition == (double(s.J0) / s.J < 1.0 / 1.5));
    CHECK(mid.j1_condition == (double(s.J1) / s.J < 1.0 / 0.5));
    CHECK(mid.warnings.empty());
}

TEST_CASE("use_all_k changes the counts but not exact scaling") {
    const double T = std::ldexp(1.0, 14);
    const CoefficientArray c = exact_scaling(T, 1.3);
    const ScaleSelection s = default_scales(T, 1);
    const ScaleEnergy a = scale_energy(c, s, false);
    const ScaleEnergy b = scale_energy(c, s, true);
    CHECK(a.count.sum() < b.count.sum());
    CHECK(a.delta == doctest::Approx(s.delta));
    EstimatorOptions opts;
    opts.use_all_k = true;
    CHECK(estimate_alpha(c, s, opts).alpha_hat == doctest::Approx(1.3).epsilon(1e-2));
}

TEST_CASE("hurst_of_alpha") {
    CHECK(hurst_of_alpha(1.0) == 1.0);
    CHECK(hurst_of_alpha(2.0) == 0.5);
    CHECK(hurst_of_alpha(0.5) == 1.25);
    CHECK_THROWS_AS(hurst_of_alpha(0.0), ValidationError);
    CHECK_THROWS_AS(hurst_of_alpha(2.5), ValidationError);
}

TEST_CASE("result line format") {
    const double T = std::ldexp(1.0, 12);
    const EstimateResult r = estimate_alpha(exact_scaling(T, 1.5), build_scales(T, 1, 3, 7));
    const std::string line = format_estimate(r);
    REQUIRE(line.rfind("alpha_hat=", 0) == 0);
    CHECK(std::stod(line.substr(10)) == doctest::Approx(1.5).epsilon(1e-6));
    CHECK(line.find(" H=0.7") != std::string::npos);
    CHECK(line.find(" J=11 J0=3 J1=7 delta=") != std::string::npos);
    CHECK(line.find("boundary=false") != std::string::npos);
}
