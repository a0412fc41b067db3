#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "ispest/errors.hpp"
#include "ispest/io.hpp"
#include "ispest/path_simulator.hpp"
#include "ispest/random.hpp"

using namespace ispest;

namespace {

SessionSet fresh_set(double T, std::vector<Session> body) {
    return SessionSet(T, InitMode::fresh(), {}, std::move(body), 0);
}

/// Integral of X over [a, b] by the midpoint rule between session endpoints,
/// exact for the piecewise-constant path.
double integrate_path(const SessionSet& set, double a, double b) {
    std::vector<double> cuts{a, b};
    for (const Session& s : set.body()) {
        cuts.push_back(s.arrival);
        cuts.push_back(s.arrival + s.duration);
    }
    for (const InitialSession& s : set.initial()) cuts.push_back(s.residual);
    std::sort(cuts.begin(), cuts.end());
    double total = 0.0;
    for (std::size_t i = 1; i < cuts.size(); ++i) {
        const double lo = std::max(a, cuts[i - 1]);
        const double hi = std::min(b, cuts[i]);
        if (hi > lo) total += (hi - lo) * evaluate(set, 0.5 * (lo + hi));
    }
    return total;
}

}  // namespace

TEST_CASE("evaluate uses half-open activity intervals") {
    const auto set = fresh_set(10.0, {{1.0, 2.0, 5.0}});
    CHECK(evaluate(set, 1.0) == 5.0);
    CHECK(evaluate(set, 2.999) == 5.0);
    CHECK(evaluate(set, 3.0) == 0.0);
    CHECK(evaluate(set, 0.5) == 0.0);
    CHECK(evaluate(fresh_set(10.0, {}), 4.0) == 0.0);
    CHECK_THROWS_AS(evaluate(set, 10.5), RangeError);
    CHECK_THROWS_AS(evaluate(set, -0.1), RangeError);
}

TEST_CASE("superposition with negative rates") {
    const auto set = fresh_set(10.0, {{0.0, 2.0, 1.0}, {1.0, 2.0, -1.0}});
    CHECK(evaluate(set, 1.5) == 0.0);
    CHECK(evaluate(set, 0.5) == 1.0);
    CHECK(evaluate(set, 2.5) == -1.0);
}

TEST_CASE("initial sessions contribute until their residual") {
    const SessionSet set(5.0, InitMode::stationary(), {{1.5, 2.0}}, {}, 0);
    CHECK(evaluate(set, 0.0) == 2.0);
    CHECK(evaluate(set, 1.49) == 2.0);
    CHECK(evaluate(set, 1.5) == 0.0);
}

TEST_CASE("sample_grid matches pointwise evaluation") {
    const auto set = fresh_set(8.0, {{0.0, 2.0, 1.0}, {1.0, 2.0, 5.0}, {1.5, 2.0, -1.0}, {3.5, 10.0, 0.25}});
    const SampledPath p = sample_grid(set, 9);
    REQUIRE(p.values.size() == 9);
    for (int k = 0; k < 9; ++k) CHECK(p.values[k] == evaluate(set, k));
    CHECK_THROWS_AS(sample_grid(set, 10), RangeError);
}

TEST_CASE("window averages: interval overlap arithmetic") {
    const auto a = window_averages(fresh_set(4.0, {{0.5, 1.0, 2.0}}), 4);
    CHECK(a.values[0] == doctest::Approx(1.0));
    CHECK(a.values[1] == doctest::Approx(1.0));
    CHECK(a.values[2] == 0.0);
    CHECK(window_averages(fresh_set(4.0, {}), 4).values.isZero());
    CHECK(window_averages(fresh_set(4.0, {{0.0, 3.0, 1.0}}), 4).values[1] == 1.0);
    CHECK_THROWS_AS(window_averages(fresh_set(4.0, {}), 5), RangeError);
}

TEST_CASE("window averages equal the integral of the path") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto law = DurationRateLaw::pareto(1.4, LogNormal{0.0, 0.5});
        const SessionSet set = simulate(law, 64.0, InitMode::stationary(), seed);
        const SampledPath a = window_averages(set, 64);
        for (int k = 0; k < 64; ++k) {
            CHECK(a.values[k] == doctest::Approx(integrate_path(set, k, k + 1)).epsilon(1e-10));
        }
    }
}

TEST_CASE("simulate: arrivals and modes") {
    const auto law = DurationRateLaw::pareto(1.5);
    const SessionSet fresh = simulate(law, 1000.0, InitMode::fresh(), 3);
    CHECK(fresh.initial().empty());
    for (std::size_t i = 1; i < fresh.body().size(); ++i) {
        CHECK(fresh.body()[i].arrival > fresh.body()[i - 1].arrival);
    }
    CHECK(std::abs(double(fresh.body().size()) - 1000.0) < 4.0 * std::sqrt(1000.0));

    const SessionSet empty = simulate(law, 0.0, InitMode::fresh(), 3);
    CHECK(empty.body().empty());
    CHECK(evaluate(empty, 0.0) == 0.0);

    CHECK_THROWS_AS(simulate(DurationRateLaw::pareto(0.8), 10.0, InitMode::stationary(), 1), InfiniteMeanError);
    const SessionSet burn = simulate(DurationRateLaw::pareto(0.8), 10.0, InitMode::burn_in_for(50.0), 1);
    for (const auto& s : burn.initial()) CHECK(s.residual > 0.0);
}

TEST_CASE("simulate is deterministic in the seed") {
    const auto law = DurationRateLaw::stable(1.5, 1.0);
    const SessionSet a = simulate(law, 200.0, InitMode::burn_in_for(100.0), 77);
    const SessionSet b = simulate(law, 200.0, InitMode::burn_in_for(100.0), 77);
    REQUIRE(a.body().size() == b.body().size());
    REQUIRE(a.initial().size() == b.initial().size());
    for (std::size_t i = 0; i < a.body().size(); ++i) CHECK(a.body()[i].duration == b.body()[i].duration);
}

TEST_CASE("stationary initial sessions: Poisson(E[eta]) count, size-biased durations") {
    const auto law = DurationRateLaw::pareto(1.5);
    const int R = 10000;
    double sum = 0.0, sq = 0.0;
    long total = 0, long_total = 0;
    for (int r = 0; r < R; ++r) {
        const SessionSet s = simulate(law, 0.0, InitMode::stationary(), split_seed(9, r));
        const double k = s.initial().size();
        sum += k;
        sq += k * k;
    }
    const double mean = sum / R;
    const double se = std::sqrt((sq / R - mean * mean) / R);
    CHECK(std::abs(mean - 3.0) < 3.0 * se);

    // V = (1-u)^{-1/(alpha-1)} has P(V > v) = v^{-(alpha-1)}.
    Rng rng(4);
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const Mark m = law.sample_size_biased(rng);
        total += m.duration >= 1.0;
        long_total += m.duration > 4.0;
    }
    CHECK(total == n);
    const double p = 0.5;  // 4^{-0.5}
    CHECK(std::abs(long_total / double(n) - p) < 4.0 * std::sqrt(p * (1 - p) / n));
}

TEST_CASE("event file round trip") {
    const auto law = DurationRateLaw::pareto(1.5, LogNormal{0.0, 1.0});
    const SessionSet set = simulate(law, 50.0, InitMode::stationary(), 12);
    std::stringstream ss;
    write_events(ss, set);
    CHECK(ss.str().rfind("#T=50 mode=stationary seed=12", 0) == 0);
    const SessionSet back = read_events(ss);
    CHECK(back.horizon() == 50.0);
    CHECK(back.seed() == 12);
    REQUIRE(back.body().size() == set.body().size());
    REQUIRE(back.initial().size() == set.initial().size());
    for (std::size_t i = 0; i < set.body().size(); ++i) {
        CHECK(back.body()[i].arrival == set.body()[i].arrival);
        CHECK(back.body()[i].duration == set.body()[i].duration);
        CHECK(back.body()[i].rate == set.body()[i].rate);
    }
    for (double t : {0.0, 7.3, 49.9}) CHECK(evaluate(back, t) == evaluate(set, t));
}

TEST_CASE("sample file round trip") {
    SampledPath p{Scheme::Discrete, Eigen::VectorXd::LinSpaced(5, -1.0, 3.0)};
    std::stringstream ss;
    write_samples(ss, p);
    const SampledPath back = read_samples(ss, Scheme::Discrete);
    CHECK(back.values == p.values);
}

TEST_CASE("scheme and init-mode parsing") {
    CHECK(parse_scheme("continuous") == Scheme::Continuous);
    CHECK(parse_scheme("grid") == Scheme::Discrete);
    CHECK(parse_scheme("averaged") == Scheme::Averaged);
    CHECK_THROWS_AS(parse_scheme("weekly"), ValidationError);
    CHECK(parse_init_mode("fresh").kind == InitMode::Kind::Fresh);
    CHECK(parse_init_mode("burnin:25").burn_in == 25.0);
    CHECK_THROWS_AS(parse_init_mode("burnin:x"), ValidationError);
}
