#pragma once

#include <iosfwd>
#include <string>

#include "ispest/path_simulator.hpp"
#include "ispest/wavelet_bank.hpp"

namespace ispest {

/// Session event file: `#T=<T> mode=<mode> seed=<seed>` then one
/// `arrival<TAB>duration<TAB>rate` line per session; sessions alive at time 0
/// carry the arrival `-inf` and their residual duration.
void write_events(std::ostream& os, const SessionSet& set);
SessionSet read_events(std::istream& is);

/// `k,value` CSV.
void write_samples(std::ostream& os, const SampledPath& path);
SampledPath read_samples(std::istream& is, Scheme scheme);

/// `#T=<T> M=<M> wavelet=<name>` then `scheme,j,k,value` rows.
void write_coefficients(std::ostream& os, const CoefficientArray& c);
CoefficientArray read_coefficients(std::istream& is);

/// `x,phi,psi,Psi` on the table grid of psi, x in [-M+1, M].
void write_wavelet_table(std::ostream& os, const WaveletPair& w, int stride = 1);

enum class InputKind { Events, Samples, Coefficients };

/// Sniffs the first line of a file.
InputKind detect_input(const std::string& path);

}  // namespace ispest
