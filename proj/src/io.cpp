#include "ispest/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "ispest/errors.hpp"

namespace ispest {

namespace {

std::string fmt(double v) {
    if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::logic_error&) {
        throw ValidationError("bad " + what + " '" + s + "'");
    }
}

// `#key=value key=value ...`
std::map<std::string, std::string> parse_header(const std::string& line) {
    if (line.empty() || line[0] != '#') throw ValidationError("missing '#' header line");
    std::map<std::string, std::string> out;
    std::istringstream ss(line.substr(1));
    std::string tok;
    while (ss >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) throw ValidationError("bad header token '" + tok + "'");
        out[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    return out;
}

std::string require(const std::map<std::string, std::string>& h, const std::string& key) {
    const auto it = h.find(key);
    if (it == h.end()) throw ValidationError("header lacks '" + key + "'");
    return it->second;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(line);
    while (std::getline(ss, cur, sep)) out.push_back(cur);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

bool blank(const std::string& line) { return line.find_first_not_of(" \t\r") == std::string::npos; }

}  // namespace

void write_events(std::ostream& os, const SessionSet& set) {
    os << "#T=" << fmt(set.horizon()) << " mode=" << to_string(set.mode()) << " seed=" << set.seed() << '\n';
    for (const auto& s : set.initial()) os << "-inf\t" << fmt(s.residual) << '\t' << fmt(s.rate) << '\n';
    for (const auto& s : set.body()) os << fmt(s.arrival) << '\t' << fmt(s.duration) << '\t' << fmt(s.rate) << '\n';
}

SessionSet read_events(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw ValidationError("empty event file");
    const auto h = parse_header(line);
    const double T = parse_double(require(h, "T"), "T");
    const InitMode mode = parse_init_mode(require(h, "mode"));
    std::uint64_t seed = 0;
    try {
        seed = std::stoull(require(h, "seed"));
    } catch (const std::logic_error&) {
        throw ValidationError("bad seed in event header");
    }
    std::vector<InitialSession> initial;
    std::vector<Session> body;
    while (std::getline(is, line)) {
        if (blank(line) || line[0] == '#') continue;
        const auto f = split(line, '\t');
        if (f.size() != 3) throw ValidationError("event line needs 3 tab-separated fields: '" + line + "'");
        const double duration = parse_double(f[1], "duration");
        const double rate = parse_double(f[2], "rate");
        if (f[0] == "-inf") {
            initial.push_back({duration, rate});
        } else {
            body.push_back({parse_double(f[0], "arrival"), duration, rate});
        }
    }
    return SessionSet(T, mode, std::move(initial), std::move(body), seed);
}

void write_samples(std::ostream& os, const SampledPath& path) {
    os << "k,value\n";
    for (Eigen::Index k = 0; k < path.values.size(); ++k) os << k << ',' << fmt(path.values[k]) << '\n';
}

SampledPath read_samples(std::istream& is, Scheme scheme) {
    if (scheme == Scheme::Continuous) throw ValidationError("samples cannot feed the continuous scheme");
    std::string line;
    std::vector<double> values;
    bool header = true;
    while (std::getline(is, line)) {
        if (blank(line) || line[0] == '#') continue;
        if (header) {
            header = false;
            if (line.rfind("k,", 0) == 0) continue;
        }
        const auto f = split(line, ',');
        if (f.size() != 2) throw ValidationError("sample line needs 'k,value': '" + line + "'");
        const auto k = static_cast<std::size_t>(parse_double(f[0], "index"));
        if (k != values.size()) throw ValidationError("sample indices must run 0, 1, 2, ...");
        values.push_back(parse_double(f[1], "sample value"));
    }
    SampledPath out{scheme, Eigen::VectorXd(static_cast<Eigen::Index>(values.size()))};
    for (std::size_t i = 0; i < values.size(); ++i) out.values[static_cast<Eigen::Index>(i)] = values[i];
    return out;
}

void write_coefficients(std::ostream& os, const CoefficientArray& c) {
    os << "#T=" << fmt(c.T) << " M=" << c.M << " wavelet=" << c.wavelet
       << " vanishing_moments=" << c.vanishing_moments << '\n';
    os << "scheme,j,k,value\n";
    const std::string tag = to_string(c.scheme);
    for (int j = 0; j <= c.max_scale(); ++j) {
        const auto& d = c.d[static_cast<std::size_t>(j)];
        for (Eigen::Index k = 0; k < d.size(); ++k) os << tag << ',' << j << ',' << k << ',' << fmt(d[k]) << '\n';
    }
}

CoefficientArray read_coefficients(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw ValidationError("empty coefficient file");
    const auto h = parse_header(line);
    CoefficientArray c;
    c.T = parse_double(require(h, "T"), "T");
    c.M = static_cast<int>(parse_double(require(h, "M"), "M"));
    c.wavelet = require(h, "wavelet");
    const auto vm = h.find("vanishing_moments");
    c.vanishing_moments = vm != h.end() ? static_cast<int>(parse_double(vm->second, "vanishing_moments"))
                                        : (c.M + 1) / 2;
    std::vector<std::vector<double>> rows;
    bool first = true;
    while (std::getline(is, line)) {
        if (blank(line) || line[0] == '#') continue;
        if (line.rfind("scheme,", 0) == 0) continue;
        const auto f = split(line, ',');
        if (f.size() != 4) throw ValidationError("coefficient line needs 'scheme,j,k,value': '" + line + "'");
        const Scheme s = parse_scheme(f[0]);
        if (first) {
            c.scheme = s;
            first = false;
        } else if (s != c.scheme) {
            throw ValidationError("mixed schemes in one coefficient file");
        }
        const auto j = static_cast<std::size_t>(parse_double(f[1], "j"));
        const auto k = static_cast<std::size_t>(parse_double(f[2], "k"));
        if (rows.size() <= j) rows.resize(j + 1);
        if (k != rows[j].size()) throw ValidationError("coefficient locations must run 0, 1, 2, ... per scale");
        rows[j].push_back(parse_double(f[3], "coefficient"));
    }
    c.d.resize(rows.size());
    for (std::size_t j = 0; j < rows.size(); ++j) {
        c.d[j] = Eigen::Map<const Eigen::VectorXd>(rows[j].data(), static_cast<Eigen::Index>(rows[j].size()));
    }
    return c;
}

void write_wavelet_table(std::ostream& os, const WaveletPair& w, int stride) {
    if (stride < 1) throw ValidationError("table stride must be >= 1");
    os << "x,phi,psi,Psi\n";
    const long per_unit = 1L << w.resolution;
    for (long i = -(w.M - 1) * per_unit; i <= w.M * per_unit; i += stride) {
        const double x = std::ldexp(static_cast<double>(i), -w.resolution);
        os << fmt(x) << ',' << fmt(w.phi(x)) << ',' << fmt(w.psi(x)) << ',' << fmt(w.primitive(x)) << '\n';
    }
}

InputKind detect_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    std::string line;
    std::getline(in, line);
    if (line.rfind("#T=", 0) == 0) {
        return line.find(" M=") != std::string::npos ? InputKind::Coefficients : InputKind::Events;
    }
    return InputKind::Samples;
}

}  // namespace ispest
