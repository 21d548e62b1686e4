#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "freedec/estimators.hpp"
#include "freedec/measures.hpp"
#include "freedec/rmt.hpp"

namespace freedec {

/// Fixed formatting used for all numeric output; reruns must be byte-identical.
std::string format_double(double v);

std::uint64_t fnv1a_hash(const std::string& data);

/// Measure text format: one "atom <location> <mass>" line per atom.
/// Blank lines and '#' comments are permitted. Parse errors carry line numbers.
void write_measure(std::ostream& out, const AtomicMeasure& mu);
AtomicMeasure read_measure(std::istream& in);

/// Density CSV: "# support=lo,hi", "# atom_at_zero=a", header "x,f", rows.
void write_density_csv(std::ostream& out, const DensityCurve& curve);
DensityCurve read_density_csv(std::istream& in);

/// Spectrum CSV: one "# kind=... n=... cols=... sigma2=... seed=... trials=..."
/// header line, then "eigenvalue" and one value per line.
void write_spectrum_csv(std::ostream& out, const SpectrumSample& s);
SpectrumSample read_spectrum_csv(std::istream& in);

/// Histogram CSV with header "bin_lo,bin_hi,count".
void write_histogram_csv(std::ostream& out, const Histogram& h);

void write_moments(std::ostream& out, const MomentSequence& m);

/// Key-value block ("estimate", "objective") followed by nothing; the trace
/// goes to a separate CSV with header "candidate,objective".
template <typename T>
void write_search_result(std::ostream& out, const SearchResult<T>& result);
template <typename T>
void write_search_trace_csv(std::ostream& out, const SearchResult<T>& result);

}  // namespace freedec
