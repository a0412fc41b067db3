#include "ispest/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "ispest/config.hpp"
#include "ispest/errors.hpp"
#include "ispest/experiment_harness.hpp"
#include "ispest/io.hpp"
#include "ispest/theory_oracle.hpp"

namespace ispest {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void add_law_options(CLI::App* cmd, LawSpec& law) {
    cmd->add_option("--law", law.kind, "pareto | stable | two_regime")->capture_default_str();
    cmd->add_option("--alpha", law.alpha, "tail index")->capture_default_str();
    cmd->add_option("--rate-law", law.rate_law, "point:<u> | lognormal:<mu>,<sigma> | table:<v..>;<p..>")
        ->capture_default_str();
    cmd->add_option("--sigma", law.sigma, "stable scale")->capture_default_str();
    cmd->add_option("--u0", law.u0, "two-regime threshold")->capture_default_str();
    cmd->add_option("--beta-light", law.beta, "two-regime light-tail rate")->capture_default_str();
    cmd->add_option("--gamma", law.gamma, "two-regime light-tail shape")->capture_default_str();
}

/// Writes through `path`, or stdout for "-".
template <typename F>
void with_output(const std::string& path, F&& body) {
    if (path == "-") {
        body(std::cout);
        return;
    }
    std::ofstream os(path);
    if (!os) throw ValidationError("cannot write " + path);
    body(os);
}

std::ifstream open_input(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ValidationError("cannot read " + path);
    return is;
}

double parse_logbase(const std::string& text) {
    if (text == "e") return 0.0;
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used == text.size()) return v;
    } catch (const std::exception&) {
    }
    throw ValidationError("bad log base '" + text + "'");
}

double parse_beta(const std::string& text) {
    if (text == "inf") return std::numeric_limits<double>::infinity();
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used == text.size()) return v;
    } catch (const std::exception&) {
    }
    throw ValidationError("bad beta '" + text + "'");
}

CoefficientArray coefficients_from_events(const SessionSet& set, const WaveletPair& w, Scheme scheme, int jmax) {
    const double T = set.horizon();
    if (scheme == Scheme::Continuous) return continuous_coefficients(set, w, jmax);
    if (T != std::floor(T) || T > 2147483647.0) throw ValidationError("sampled schemes need an integer horizon");
    if (scheme == Scheme::Averaged && w.M != 1) throw ValidationError("the averaged scheme needs the Haar wavelet");
    const SampledPath p = scheme == Scheme::Discrete ? sample_grid(set, static_cast<int>(T))
                                                     : window_averages(set, static_cast<int>(T));
    return discrete_coefficients(p, w, jmax);
}

struct Options {
    std::uint64_t seed = 1;

    // simulate
    LawSpec sim_law;
    std::string horizon = "2^16";
    std::string init = "stationary";
    std::string sim_output = "-";
    std::string samples_scheme;

    // coeffs
    std::string co_input;
    std::string co_scheme = "continuous";
    std::string co_wavelet = "haar";
    int co_jmax = -1;
    std::string co_output = "-";
    std::string table_output;
    int table_stride = 1;

    // estimate
    std::string es_input;
    std::string es_scheme;
    std::string es_wavelet = "haar";
    int j0 = -1;
    int j1 = -1;
    bool rate_optimal = false;
    std::string beta = "inf";
    double alpha_hint = 1.5;
    std::string logbase = "2";
    std::string route = "tail_expansion";
    bool use_all_k = false;

    // oracle
    LawSpec or_law;
    std::string or_wavelet = "haar";
    std::string or_table = "all";
    int or_jmin = 1;
    int or_jmax = 12;
    std::string or_beta = "inf";
    std::string or_output;

    // experiment
    std::string config;
    int threads = 0;
    bool fast = false;
    bool check = false;
    std::string ex_output;
};

int run_simulate(const Options& o) {
    const DurationRateLaw law = make_law(o.sim_law);
    const double T = parse_horizon(o.horizon);
    const SessionSet set = simulate(law, T, parse_init_mode(o.init), o.seed);
    with_output(o.sim_output, [&](std::ostream& os) {
        if (o.samples_scheme.empty()) {
            write_events(os, set);
            return;
        }
        const Scheme s = parse_scheme(o.samples_scheme);
        if (s == Scheme::Continuous) throw ValidationError("--samples takes discrete or averaged");
        const int n = static_cast<int>(T);
        write_samples(os, s == Scheme::Discrete ? sample_grid(set, n) : window_averages(set, n));
    });
    return 0;
}

int run_coeffs(const Options& o) {
    const WaveletPair w = make_wavelet(o.co_wavelet);
    if (!o.table_output.empty()) {
        with_output(o.table_output, [&](std::ostream& os) { write_wavelet_table(os, w, o.table_stride); });
        if (o.co_input.empty()) return 0;
    }
    if (o.co_input.empty()) throw ValidationError("--input is required");
    const Scheme scheme = parse_scheme(o.co_scheme);
    CoefficientArray c;
    if (detect_input(o.co_input) == InputKind::Events) {
        auto is = open_input(o.co_input);
        const SessionSet set = read_events(is);
        const int jmax = o.co_jmax >= 0 ? o.co_jmax : max_scale_index(set.horizon(), w.M);
        c = coefficients_from_events(set, w, scheme, jmax);
    } else {
        if (scheme == Scheme::Continuous) throw ValidationError("sample files need --scheme discrete or averaged");
        auto is = open_input(o.co_input);
        const SampledPath p = read_samples(is, scheme);
        const int jmax = o.co_jmax >= 0 ? o.co_jmax : max_scale_index(static_cast<double>(p.values.size()), w.M);
        c = discrete_coefficients(p, w, jmax);
    }
    with_output(o.co_output, [&](std::ostream& os) { write_coefficients(os, c); });
    return 0;
}

int run_estimate(const Options& o) {
    if (o.es_input.empty()) throw ValidationError("--input is required");
    const InputKind kind = detect_input(o.es_input);
    const WaveletPair w = make_wavelet(o.es_wavelet);

    ScaleSpec spec;
    spec.logbase = parse_logbase(o.logbase);
    spec.route = parse_smoothness_route(o.route);
    if (o.rate_optimal) {
        spec.rule = ScaleRule::RateOptimal;
        spec.beta = parse_beta(o.beta);
    } else if (o.j0 >= 0 || o.j1 >= 0) {
        if (o.j0 < 0 || o.j1 < 0) throw ValidationError("--j0 and --j1 go together");
        spec.rule = ScaleRule::Explicit;
        spec.j0 = o.j0;
        spec.j1 = o.j1;
    }

    CoefficientArray c;
    Scheme scheme = Scheme::Continuous;
    if (kind == InputKind::Coefficients) {
        auto is = open_input(o.es_input);
        c = read_coefficients(is);
        scheme = c.scheme;
        if (!o.es_scheme.empty() && parse_scheme(o.es_scheme) != scheme) {
            throw ValidationError("--scheme disagrees with the coefficient file");
        }
    } else if (kind == InputKind::Events) {
        auto is = open_input(o.es_input);
        const SessionSet set = read_events(is);
        scheme = o.es_scheme.empty() ? Scheme::Continuous : parse_scheme(o.es_scheme);
        const ScaleSelection sel = select_scales(spec, set.horizon(), w.M, scheme, o.alpha_hint);
        c = coefficients_from_events(set, w, scheme, sel.J1);
    } else {
        scheme = o.es_scheme.empty() ? Scheme::Discrete : parse_scheme(o.es_scheme);
        if (scheme == Scheme::Continuous) throw ValidationError("sample files need --scheme discrete or averaged");
        auto is = open_input(o.es_input);
        const SampledPath p = read_samples(is, scheme);
        const ScaleSelection sel =
            select_scales(spec, static_cast<double>(p.values.size()), w.M, scheme, o.alpha_hint);
        c = discrete_coefficients(p, w, sel.J1);
    }
    const ScaleSelection sel = select_scales(spec, c.T, c.M, scheme, o.alpha_hint);
    EstimatorOptions opts;
    opts.use_all_k = o.use_all_k;
    const EstimateResult r = estimate_alpha(c, sel, opts);
    std::cout << format_estimate(r) << '\n';
    for (const std::string& msg : r.warnings) std::cerr << "warning: " << msg << '\n';
    return 0;
}

void moments_table(std::ostream& os, const DurationRateLaw& law) {
    os << "t,fresh_mean,fresh_var,stationary_mean,stationary_cov,karamata\n";
    const bool stationary = law.alpha() > 1.0;
    for (double t : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 64.0, 256.0, 1024.0}) {
        const MeanCov f = mean_cov_nonstationary(law, t, t);
        double sm = kNaN, sc = kNaN, kar = kNaN;
        if (stationary) {
            const StationaryMoments s = mean_cov_stationary(law, t);
            sm = s.mean;
            sc = s.covariance;
            kar = s.karamata;
        }
        os << fmt(t) << ',' << fmt(f.mean) << ',' << fmt(f.covariance) << ',' << fmt(sm) << ',' << fmt(sc) << ','
           << fmt(kar) << '\n';
    }
}

void l_table(std::ostream& os, const DurationRateLaw& law, const WaveletPair& w, int jmin, int jmax) {
    const ScaleKernel kernel(w);
    const double cl = law.alpha() < 2.0 ? c_L_constant(kernel, law.alpha()) : kNaN;
    os << "j,z,L,v_j,c_L\n";
    for (int j = jmin; j <= jmax; ++j) {
        const double z = std::ldexp(1.0, j);
        const double L = mathcal_L(law, kernel, z);
        os << j << ',' << fmt(z) << ',' << fmt(L) << ',' << fmt(L * std::pow(z, 2.0 - law.alpha())) << ','
           << fmt(cl) << '\n';
    }
}

void rates_table(std::ostream& os, double alpha, double beta) {
    os << "scheme,route,alpha,beta,exponent\n";
    for (Scheme s : {Scheme::Continuous, Scheme::Discrete, Scheme::Averaged}) {
        for (SmoothnessRoute r : {SmoothnessRoute::Direct, SmoothnessRoute::TailExpansion}) {
            if (std::isinf(beta) && r == SmoothnessRoute::Direct && s == Scheme::Continuous) continue;
            os << to_string(s) << ',' << to_string(r) << ',' << fmt(alpha) << ',' << fmt(beta) << ','
               << fmt(rate_exponent(s, alpha, beta, r)) << '\n';
        }
    }
}

int run_oracle(const Options& o) {
    const DurationRateLaw law = make_law(o.or_law);
    const std::string& t = o.or_table;
    if (t != "all" && t != "moments" && t != "L" && t != "rates") {
        throw ValidationError("--table takes moments, L, rates or all");
    }
    if (o.or_jmin < 0 || o.or_jmax < o.or_jmin) throw ValidationError("need 0 <= --jmin <= --jmax");
    const double beta = parse_beta(o.or_beta);

    auto emit = [&](const std::string& name, const std::function<void(std::ostream&)>& body) {
        if (t != "all" && t != name) return;
        if (o.or_output.empty()) {
            if (t == "all") std::cout << "# " << name << '\n';
            body(std::cout);
            if (t == "all") std::cout << '\n';
        } else {
            std::filesystem::create_directories(o.or_output);
            with_output((std::filesystem::path(o.or_output) / (name + ".csv")).string(), body);
        }
    };
    emit("moments", [&](std::ostream& os) { moments_table(os, law); });
    emit("L", [&](std::ostream& os) { l_table(os, law, make_wavelet(o.or_wavelet), o.or_jmin, o.or_jmax); });
    if (law.alpha() > 1.0 && law.alpha() < 2.0) {
        emit("rates", [&](std::ostream& os) { rates_table(os, law.alpha(), beta); });
    } else if (t == "rates") {
        throw ValidationError("rate exponents need alpha in (1, 2)");
    }
    return 0;
}

int run_experiment_cmd(const Options& o, bool seed_given) {
    if (o.config.empty()) throw ValidationError("--config is required");
    ExperimentConfig c = load_experiment_config(o.config);
    if (seed_given) c.seed = o.seed;
    if (o.threads > 0) c.threads = o.threads;
    if (o.fast) c.replications = std::min(c.replications, 10);
    if (o.check) c.check = true;
    if (!o.ex_output.empty()) c.output = o.ex_output;
    const ExperimentReport rep = run_experiment(c);
    write_report(rep, c.output);
    for (const SummaryRow& s : rep.summary) {
        std::cout << to_string(s.scheme) << " T=" << fmt(s.T) << " ok=" << s.ok << " failed=" << s.failed
                  << " median=" << fmt(s.median) << " median_abs_error=" << fmt(s.median_abs_error)
                  << " robust_rmse=" << fmt(s.robust_rmse) << '\n';
    }
    for (const SlopeFit& f : rep.slopes) {
        std::cout << "slope " << to_string(f.scheme) << " T=" << fmt(f.T) << " slope=" << fmt(f.slope)
                  << " target=" << fmt(f.target) << '\n';
    }
    for (const RateFit& f : rep.rates) {
        std::cout << "rate " << to_string(f.scheme) << " slope=" << fmt(f.slope) << " target=" << fmt(f.target)
                  << (f.defined ? "" : " (undefined)") << '\n';
    }
    for (const OracleRow& r : rep.oracle) {
        std::cout << "oracle " << r.name << " expected=" << fmt(r.expected) << " observed=" << fmt(r.observed)
                  << " z=" << fmt(r.z) << (r.pass ? " pass" : " FAIL") << '\n';
    }
    for (const std::string& m : rep.messages) std::cerr << m << '\n';
    if (c.check && !rep.check_passed) {
        std::cerr << "check failed\n";
        return 1;
    }
    return 0;
}

}  // namespace

int cli_main(int argc, char** argv) {
    CLI::App app{"Wavelet estimation of the tail index of infinite-source Poisson traffic", "ispest"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("ispest ") + kVersion);
    Options o;
    auto* seed_opt = app.add_option("--seed", o.seed, "master seed")->capture_default_str();

    auto* sim = app.add_subcommand("simulate", "simulate a path and write its events or samples");
    add_law_options(sim, o.sim_law);
    sim->add_option("-T,--horizon", o.horizon, "observation horizon, e.g. 2^16")->capture_default_str();
    sim->add_option("--init", o.init, "fresh | stationary | burnin[:length]")->capture_default_str();
    sim->add_option("-o,--output", o.sim_output, "output file, - for stdout")->capture_default_str();
    sim->add_option("--samples", o.samples_scheme, "write discrete or averaged samples instead of events");

    auto* co = app.add_subcommand("coeffs", "wavelet coefficients of an event or sample file");
    co->add_option("-i,--input", o.co_input, "event or sample file");
    co->add_option("--scheme", o.co_scheme, "continuous | discrete | averaged")->capture_default_str();
    co->add_option("--wavelet", o.co_wavelet, "haar | dbN")->capture_default_str();
    co->add_option("--jmax", o.co_jmax, "largest scale (default J)");
    co->add_option("-o,--output", o.co_output, "output file, - for stdout")->capture_default_str();
    co->add_option("--table", o.table_output, "dump the tabulated phi, psi, Psi to this file");
    co->add_option("--stride", o.table_stride, "table row stride")->check(CLI::PositiveNumber);

    auto* es = app.add_subcommand("estimate", "estimate alpha from events, samples or coefficients");
    es->add_option("-i,--input", o.es_input, "input file")->required();
    es->add_option("--scheme", o.es_scheme, "continuous | discrete | averaged");
    es->add_option("--wavelet", o.es_wavelet, "haar | dbN")->capture_default_str();
    es->add_option("--j0", o.j0, "explicit lower scale");
    es->add_option("--j1", o.j1, "explicit upper scale");
    es->add_flag("--rate-optimal", o.rate_optimal, "rate-optimal scale rule");
    es->add_option("--beta", o.beta, "smoothness exponent for --rate-optimal (number or inf)")
        ->capture_default_str();
    es->add_option("--alpha-hint", o.alpha_hint, "pilot alpha for --rate-optimal")->capture_default_str();
    es->add_option("--logbase", o.logbase, "log base of the default J1 rule (number or e)")->capture_default_str();
    es->add_option("--route", o.route, "direct | tail_expansion")->capture_default_str();
    es->add_flag("--use-all-k", o.use_all_k, "use every computable location per scale");

    auto* orc = app.add_subcommand("oracle", "closed-form and quadrature oracle tables as CSV");
    add_law_options(orc, o.or_law);
    orc->add_option("--wavelet", o.or_wavelet, "haar | dbN")->capture_default_str();
    orc->add_option("--table", o.or_table, "moments | L | rates | all")->capture_default_str();
    orc->add_option("--jmin", o.or_jmin, "first scale of the L table")->capture_default_str();
    orc->add_option("--jmax", o.or_jmax, "last scale of the L table")->capture_default_str();
    orc->add_option("--beta", o.or_beta, "smoothness exponent for the rate table")->capture_default_str();
    orc->add_option("-o,--output", o.or_output, "write <table>.csv files into this directory");

    auto* ex = app.add_subcommand("experiment", "run a Monte Carlo experiment from a config file");
    ex->add_option("-c,--config", o.config, "config file")->required();
    ex->add_option("--threads", o.threads, "worker threads (overrides run.threads)");
    ex->add_flag("--fast", o.fast, "at most 10 replications");
    ex->add_flag("--check", o.check, "exit 1 when the experiment's check fails");
    ex->add_option("-o,--output", o.ex_output, "output directory (overrides run.output)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*sim) return run_simulate(o);
        if (*co) return run_coeffs(o);
        if (*es) return run_estimate(o);
        if (*orc) return run_oracle(o);
        if (*ex) return run_experiment_cmd(o, seed_opt->count() > 0);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 2;
}

int cli_main(const std::vector<std::string>& args) {
    std::vector<std::string> storage{"ispest"};
    storage.insert(storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : storage) argv.push_back(s.data());
    argv.push_back(nullptr);
    return cli_main(static_cast<int>(storage.size()), argv.data());
}

}  // namespace ispest
