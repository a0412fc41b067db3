#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ispest/traffic_model.hpp"

namespace ispest {

/// How wavelet coefficients are obtained from a path.
enum class Scheme { Continuous, Discrete, Averaged };

std::string to_string(Scheme s);
Scheme parse_scheme(const std::string& text);

/// One session (t_l, eta_l, U_l).
struct Session {
    double arrival;
    double duration;
    double rate;
};

/// A session alive at time 0 under non-fresh initial conditions: it contributes
/// `rate` on [0, residual).
struct InitialSession {
    double residual;
    double rate;
};

struct InitMode {
    enum class Kind { Fresh, Stationary, BurnIn };
    Kind kind = Kind::Fresh;
    double burn_in = 0.0;  // 0 selects the default 10*T

    static InitMode fresh() { return {Kind::Fresh, 0.0}; }
    static InitMode stationary() { return {Kind::Stationary, 0.0}; }
    static InitMode burn_in_for(double length) { return {Kind::BurnIn, length}; }
};

std::string to_string(const InitMode& mode);
InitMode parse_init_mode(const std::string& text);

/// Exact event-level realization of X (or X_S) on [0, T].
class SessionSet {
public:
    SessionSet(double horizon, InitMode mode, std::vector<InitialSession> initial,
               std::vector<Session> body, std::uint64_t seed);

    double horizon() const noexcept { return horizon_; }
    const InitMode& mode() const noexcept { return mode_; }
    const std::vector<InitialSession>& initial() const noexcept { return initial_; }
    const std::vector<Session>& body() const noexcept { return body_; }
    std::uint64_t seed() const noexcept { return seed_; }

private:
    double horizon_;
    InitMode mode_;
    std::vector<InitialSession> initial_;
    std::vector<Session> body_;
    std::uint64_t seed_;
};

/// Observed samples X(0..n-1) (Discrete) or window averages (Averaged).
struct SampledPath {
    Scheme scheme = Scheme::Discrete;
    Eigen::VectorXd values;
};

/// Unit-rate Poisson arrivals on [0, T] with i.i.d. marks from `law`, plus
/// initial sessions according to `mode`.
SessionSet simulate(const DurationRateLaw& law, double horizon, InitMode mode, std::uint64_t seed);

/// X(t): sum of rates of sessions with t_l <= t < t_l + eta_l, plus initial
/// sessions with t < residual.
double evaluate(const SessionSet& set, double t);

/// X(0), ..., X(n-1). Requires n <= T + 1.
SampledPath sample_grid(const SessionSet& set, int n);

/// Exact window integrals of X over [k, k+1), k = 0..n-1. Requires n <= T.
SampledPath window_averages(const SessionSet& set, int n);

}  // namespace ispest
