#include <doctest.h>

#include <cmath>

#include "ispest/errors.hpp"
#include "ispest/theory_oracle.hpp"

using namespace ispest;

TEST_CASE("non-stationary moments, Pareto alpha = 1.5") {
    const auto law = DurationRateLaw::pareto(1.5);
    CHECK(mean_cov_nonstationary(law, 1.0, 1.0).mean == doctest::Approx(1.0));
    CHECK(mean_cov_nonstationary(law, 1.0, 2.0).covariance == doctest::Approx(2.0 * (1.0 - std::sqrt(0.5))).epsilon(1e-12));
    CHECK(mean_cov_nonstationary(law, 1.0, 2.0).covariance == doctest::Approx(0.58579).epsilon(1e-5));
    // s = t: variance of X(t) = E[U^2 (eta ^ t)].
    for (double t : {0.5, 3.0, 40.0}) {
        const MeanCov m = mean_cov_nonstationary(law, t, t);
        CHECK(m.covariance == doctest::Approx(moment_u_eta(law, 2, t).u_p_eta).epsilon(1e-12));
        CHECK(m.mean == doctest::Approx(moment_u_eta(law, 1, t).u_p_eta).epsilon(1e-12));
    }
    CHECK_THROWS_AS(mean_cov_nonstationary(law, 2.0, 1.0), ValidationError);
}

TEST_CASE("stationary moments, Pareto alpha = 1.5") {
    const auto law = DurationRateLaw::pareto(1.5);
    const StationaryMoments m = mean_cov_stationary(law, 2.0);
    CHECK(m.mean == doctest::Approx(3.0));
    CHECK(m.covariance == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(mean_cov_stationary(law, 0.0).covariance == doctest::Approx(3.0));
    const StationaryMoments far = mean_cov_stationary(law, 1024.0);
    CHECK(std::abs(far.karamata / far.covariance - 1.0) < 0.01);
    CHECK_THROWS_AS(mean_cov_stationary(DurationRateLaw::pareto(0.9), 1.0), InfiniteMeanError);
}

TEST_CASE("closed forms agree with the quadrature route") {
    // The scaled Pareto with unit scale runs through the generic quadrature path.
    const auto closed = DurationRateLaw::pareto(1.5, LogNormal{0.0, 0.5});
    const auto generic = DurationRateLaw::scaled_pareto(1.5, 1.0, LogNormal{0.0, 0.5});
    for (auto [s, t] : {std::pair{1.0, 2.0}, {4.0, 8.0}, {0.5, 0.7}, {3.0, 30.0}}) {
        const MeanCov a = mean_cov_nonstationary(closed, s, t);
        const MeanCov b = mean_cov_nonstationary(generic, s, t);
        CHECK(std::abs(a.mean - b.mean) < 1e-6 * std::abs(a.mean));
        CHECK(std::abs(a.covariance - b.covariance) < 1e-6 * std::abs(a.covariance));
    }
    for (double t : {0.0, 0.5, 2.0, 100.0}) {
        CHECK(std::abs(mean_cov_stationary(closed, t).covariance - mean_cov_stationary(generic, t).covariance) <
              1e-6 * mean_cov_stationary(closed, t).covariance);
    }
    const ScaleKernel k(make_haar());
    for (double z : {4.0, 64.0, 1024.0, 65536.0}) {
        const double a = mathcal_L(closed, k, z);
        CHECK(std::abs(mathcal_L_quadrature(closed, k, z) - a) < 1e-6 * a);
    }
}

TEST_CASE("scaled covariance limit") {
    const auto law = DurationRateLaw::pareto(1.5);
    const auto rows = scaled_cov_limit(law, 2.0, 3.0, {64.0, 4096.0});
    REQUIRE(rows.size() == 2);
    const double C = (1.0 - std::pow(3.0, -0.5)) / 0.5;
    CHECK(rows[1].C == doctest::Approx(C).epsilon(1e-12));
    CHECK(rows[1].C == doctest::Approx(0.845299).epsilon(1e-6));
    CHECK(std::abs(rows[1].ratio / rows[1].C - 1.0) < 0.02);
    CHECK_THROWS_AS(scaled_cov_limit(law, 1.0, 1.0, {64.0}), ValidationError);
}

TEST_CASE("scale kernel constants") {
    const ScaleKernel h(make_haar());
    CHECK(h.tail_value() == doctest::Approx(1.0 / 6.0).epsilon(1e-9));
    CHECK(h.psi_norm2() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(h.K(0.0) == 0.0);
    CHECK(h.K(5.0) == h.tail_value());
    // Haar: K(y) = y^2 - (4/3) y^3 ... near 0, Q(y) -> |psi|^2.
    CHECK(h.Q(1e-4) == doctest::Approx(1.0).epsilon(1e-3));
    const ScaleKernel d(make_daubechies(2));
    CHECK(d.psi_norm2() == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("C_L values and limits") {
    const WaveletPair haar = make_haar();
    const WaveletPair db2 = make_daubechies(2);
    CHECK(c_L_constant(haar, 1.5) == doctest::Approx(2.20914).epsilon(1e-5));
    CHECK(c_L_constant(db2, 1.5) == doctest::Approx(2.29816).epsilon(1e-5));
    const double lam = 1.7;
    CHECK(c_L_constant(scaled(haar, lam), 1.5) == doctest::Approx(lam * lam * c_L_constant(haar, 1.5)).epsilon(1e-9));
    const double near2 = c_L_constant(haar, 1.99);
    CHECK(std::isfinite(near2));
    CHECK(near2 > 0.0);

    // L(z) / L_2(z) -> C_L for Pareto, L_2 = E[U^2] = 1.
    const auto law = DurationRateLaw::pareto(1.5);
    const ScaleKernel k(haar);
    double prev = 1e9;
    for (int j = 6; j <= 14; ++j) {
        const double gap = std::abs(mathcal_L(law, k, std::ldexp(1.0, j)) - c_L_constant(k, 1.5));
        CHECK(gap < prev);
        prev = gap;
    }
    // Leading correction 3 z^{-1/2} at z = 2^14.
    CHECK(prev < 0.025);
}

TEST_CASE("L scales with the square of psi") {
    const auto law = DurationRateLaw::pareto(1.3, LogNormal{0.0, 0.5});
    const WaveletPair w = make_daubechies(2);
    for (double z : {8.0, 512.0}) {
        CHECK(mathcal_L(law, scaled(w, 2.0), z) == doctest::Approx(4.0 * mathcal_L(law, w, z)).epsilon(1e-9));
    }
}

TEST_CASE("Pareto expansion of L") {
    const auto law = DurationRateLaw::pareto(1.5);
    const WaveletPair w = make_haar();
    Eigen::VectorXd z(9);
    for (int i = 0; i < 9; ++i) z[i] = std::ldexp(1.0, 8 + i);
    const SpectrumModel m = spectrum_model(law, w, z);
    CHECK(m.c_prime == doctest::Approx(m.c_L));
    CHECK(m.pareto_coefficient == doctest::Approx(-3.0));
    double prev = 1e9;
    for (int i = 0; i < 9; ++i) {
        CHECK(m.L[i] > 0.0);
        const double scaled_gap = std::pow(z[i], 2.0 - 1.5) * (m.L[i] - m.c_prime);
        const double err = std::abs(scaled_gap - m.pareto_coefficient);
        CHECK(err <= prev);
        prev = err;
    }
    CHECK(prev < 1e-3);
}

TEST_CASE("L is slowly varying for every built-in law") {
    const WaveletPair w = make_haar();
    const ScaleKernel k(w);
    const std::vector<DurationRateLaw> laws{DurationRateLaw::pareto(1.5), DurationRateLaw::stable(1.5, 1.0),
                                            DurationRateLaw::two_regime(1.5)};
    for (const auto& law : laws) {
        INFO(law.describe());
        double prev_ratio_gap = 1e9;
        double L_prev = mathcal_L(law, k, std::ldexp(1.0, 6));
        for (int j = 8; j <= 16; j += 2) {
            const double L = mathcal_L(law, k, std::ldexp(1.0, j));
            CHECK(L > 0.0);
            const double gap = std::abs(L / L_prev - 1.0);
            CHECK(gap <= prev_ratio_gap + 1e-9);
            prev_ratio_gap = gap;
            L_prev = L;
        }
        CHECK(prev_ratio_gap < 0.01);
    }
}

TEST_CASE("v_j") {
    const auto law = DurationRateLaw::pareto(1.5);
    const ScaleKernel k(make_haar());
    CHECK(v_j(law, k, 4) == doctest::Approx(mathcal_L(law, k, 16.0) * 4.0));
    CHECK(v_j(law, k, 4) == doctest::Approx(5.8990574825694759).epsilon(1e-8));
}

TEST_CASE("rate exponents") {
    CHECK(rate_exponent(Scheme::Continuous, 1.5, INFINITY) == doctest::Approx(0.2));
    CHECK(rate_exponent(Scheme::Discrete, 1.5, INFINITY) == doctest::Approx(0.2));
    CHECK(rate_exponent(Scheme::Continuous, 1.5, 1.5, SmoothnessRoute::Direct) == doctest::Approx(1.0 / 3.0));
    CHECK(rate_exponent(Scheme::Discrete, 1.5, 1.5, SmoothnessRoute::Direct) == doctest::Approx(0.2));
    CHECK(rate_exponent(Scheme::Continuous, 1.5, INFINITY, SmoothnessRoute::Direct) == 0.5);
    CHECK_THROWS_AS(rate_exponent(Scheme::Continuous, 0.8, 1.0), ValidationError);
    CHECK_THROWS_AS(rate_exponent(Scheme::Continuous, 1.5, 0.0), ValidationError);

    for (double alpha : {1.2, 1.5, 1.8}) {
        for (Scheme s : {Scheme::Continuous, Scheme::Discrete}) {
            double prev = 0.0;
            for (double beta = 0.01; beta < 3.0; beta += 0.01) {
                const double r = rate_exponent(s, alpha, beta, SmoothnessRoute::Direct);
                CHECK(r >= prev - 1e-15);
                prev = r;
            }
            const double b = 2.0 - alpha;
            CHECK(std::abs(rate_exponent(s, alpha, b - 1e-9) - rate_exponent(s, alpha, b + 1e-9)) < 1e-8);
        }
    }
}

TEST_CASE("Fourier decay feasibility") {
    const SobolevCheck h = sobolev_feasible(make_haar(), 1.5, 0.5);
    CHECK(h.decay == doctest::Approx(1.0).epsilon(0.1));
    CHECK(h.feasible);
    CHECK_FALSE(sobolev_feasible(make_haar(), 1.9, 1.5).feasible);
    const SobolevCheck d = sobolev_feasible(make_daubechies(2), 1.5, 0.5);
    CHECK(d.decay > h.decay);
    CHECK(d.feasible);
}
