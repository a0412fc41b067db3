#include "ispest/path_simulator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ispest/errors.hpp"

namespace ispest {

std::string to_string(Scheme s) {
    switch (s) {
        case Scheme::Continuous: return "continuous";
        case Scheme::Discrete: return "discrete";
        case Scheme::Averaged: return "averaged";
    }
    return "?";
}

Scheme parse_scheme(const std::string& text) {
    if (text == "continuous") return Scheme::Continuous;
    if (text == "discrete" || text == "grid") return Scheme::Discrete;
    if (text == "averaged") return Scheme::Averaged;
    throw ValidationError("unknown scheme '" + text + "'");
}

std::string to_string(const InitMode& mode) {
    switch (mode.kind) {
        case InitMode::Kind::Fresh: return "fresh";
        case InitMode::Kind::Stationary: return "stationary";
        case InitMode::Kind::BurnIn: {
            std::ostringstream os;
            os.precision(17);
            os << "burnin:" << mode.burn_in;
            return os.str();
        }
    }
    return "?";
}

InitMode parse_init_mode(const std::string& text) {
    if (text == "fresh") return InitMode::fresh();
    if (text == "stationary") return InitMode::stationary();
    if (text == "burnin") return InitMode::burn_in_for(0.0);
    if (text.rfind("burnin:", 0) == 0) {
        try {
            return InitMode::burn_in_for(std::stod(text.substr(7)));
        } catch (const std::logic_error&) {
            throw ValidationError("bad burn-in length in '" + text + "'");
        }
    }
    throw ValidationError("unknown init mode '" + text + "'");
}

SessionSet::SessionSet(double horizon, InitMode mode, std::vector<InitialSession> initial,
                       std::vector<Session> body, std::uint64_t seed)
    : horizon_(horizon), mode_(mode), initial_(std::move(initial)), body_(std::move(body)), seed_(seed) {
    if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw ValidationError("horizon must be finite and >= 0");
    for (std::size_t i = 0; i < body_.size(); ++i) {
        if (i > 0 && !(body_[i].arrival > body_[i - 1].arrival)) {
            throw ValidationError("session arrivals must be strictly increasing");
        }
    }
}

SessionSet simulate(const DurationRateLaw& law, double horizon, InitMode mode, std::uint64_t seed) {
    if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw ValidationError("horizon must be finite and >= 0");
    Rng rng(seed);

    std::vector<InitialSession> initial;
    switch (mode.kind) {
        case InitMode::Kind::Fresh: break;
        case InitMode::Kind::Stationary: {
            if (law.alpha() <= 1.0) throw InfiniteMeanError("stationary initialization needs alpha > 1");
            // Sessions alive at 0: Poisson(E[eta]) of them, total durations
            // size-biased, residual uniform on (0, V).
            const double mean_eta = moment_u_eta(law, 0).eta;
            const std::uint64_t k0 = rng.poisson(mean_eta);
            initial.reserve(k0);
            for (std::uint64_t i = 0; i < k0; ++i) {
                const Mark m = law.sample_size_biased(rng);
                initial.push_back({m.duration * rng.uniform_pos(), m.rate});
            }
            break;
        }
        case InitMode::Kind::BurnIn: {
            const double length = mode.burn_in > 0.0 ? mode.burn_in : 10.0 * horizon;
            double t = -length;
            while (true) {
                t += rng.exponential();
                if (t >= 0.0) break;
                const Mark m = sample_mark(law, rng);
                if (t + m.duration > 0.0) initial.push_back({t + m.duration, m.rate});
            }
            break;
        }
    }

    std::vector<Session> body;
    body.reserve(static_cast<std::size_t>(horizon + 4.0 * std::sqrt(horizon) + 16.0));
    double t = 0.0;
    while (true) {
        t += rng.exponential();
        if (t > horizon) break;
        const Mark m = sample_mark(law, rng);
        body.push_back({t, m.duration, m.rate});
    }
    return SessionSet(horizon, mode, std::move(initial), std::move(body), seed);
}

double evaluate(const SessionSet& set, double t) {
    if (!(t >= 0.0 && t <= set.horizon())) throw RangeError("evaluation time outside [0, T]");
    double x = 0.0;
    for (const auto& s : set.initial()) {
        if (t < s.residual) x += s.rate;
    }
    for (const auto& s : set.body()) {
        if (s.arrival > t) break;
        if (t < s.arrival + s.duration) x += s.rate;
    }
    return x;
}

namespace {

// Neumaier-compensated running sum.
struct CompensatedSum {
    double sum = 0.0;
    double c = 0.0;
    void add(double v) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v)) {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    double value() const { return sum + c; }
};

}  // namespace

SampledPath sample_grid(const SessionSet& set, int n) {
    if (n < 0) throw RangeError("sample count must be non-negative");
    if (n > 0 && static_cast<double>(n - 1) > set.horizon()) throw RangeError("grid extends beyond T");
    // diff[k] accumulates rate changes at integer k: a session covers the
    // integers ceil(a) .. ceil(b) - 1.
    std::vector<double> diff(static_cast<std::size_t>(n) + 1, 0.0);
    auto add_interval = [&](double a, double b, double rate) {
        const double lo = std::ceil(a);
        const double hi = std::ceil(b);
        if (hi <= lo || lo >= n) return;
        diff[static_cast<std::size_t>(std::max(lo, 0.0))] += rate;
        if (hi < n) diff[static_cast<std::size_t>(hi)] -= rate;
    };
    for (const auto& s : set.initial()) add_interval(0.0, s.residual, s.rate);
    for (const auto& s : set.body()) add_interval(s.arrival, s.arrival + s.duration, s.rate);

    SampledPath out{Scheme::Discrete, Eigen::VectorXd(n)};
    CompensatedSum level;
    for (int k = 0; k < n; ++k) {
        level.add(diff[static_cast<std::size_t>(k)]);
        out.values[k] = level.value();
    }
    return out;
}

SampledPath window_averages(const SessionSet& set, int n) {
    if (n < 0) throw RangeError("window count must be non-negative");
    if (static_cast<double>(n) > set.horizon()) throw RangeError("windows extend beyond T");
    // Fully covered windows go through a difference array; the (at most two)
    // partially covered windows get their overlap directly.
    std::vector<double> diff(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<double> partial(static_cast<std::size_t>(n), 0.0);
    auto add_interval = [&](double a, double b, double rate) {
        a = std::max(a, 0.0);
        b = std::min(b, static_cast<double>(n));
        if (!(b > a)) return;
        const double fa = std::floor(a);
        const double fb = std::floor(b);
        if (fa == fb) {
            partial[static_cast<std::size_t>(fa)] += rate * (b - a);
            return;
        }
        // [a, fa+1) partial, windows fa+1 .. fb-1 full, [fb, b) partial.
        partial[static_cast<std::size_t>(fa)] += rate * (fa + 1.0 - a);
        const auto first_full = static_cast<std::size_t>(fa + 1.0);
        const auto end_full = static_cast<std::size_t>(fb);
        if (first_full < end_full) {
            diff[first_full] += rate;
            diff[end_full] -= rate;
        }
        if (end_full < static_cast<std::size_t>(n)) partial[end_full] += rate * (b - fb);
    };
    for (const auto& s : set.initial()) add_interval(0.0, s.residual, s.rate);
    for (const auto& s : set.body()) add_interval(s.arrival, s.arrival + s.duration, s.rate);

    SampledPath out{Scheme::Averaged, Eigen::VectorXd(n)};
    CompensatedSum level;
    for (int k = 0; k < n; ++k) {
        level.add(diff[static_cast<std::size_t>(k)]);
        out.values[k] = level.value() + partial[static_cast<std::size_t>(k)];
    }
    return out;
}

}  // namespace ispest
