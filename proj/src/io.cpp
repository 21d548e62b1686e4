#include "freedec/io.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace freedec {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::uint64_t fnv1a_hash(const std::string& data) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 0x100000001B3ULL;
  }
  return h;
}

void write_measure(std::ostream& out, const AtomicMeasure& mu) {
  for (const auto& a : mu.atoms())
    out << "atom " << format_double(a.location) << ' ' << format_double(a.mass) << '\n';
}

AtomicMeasure read_measure(std::istream& in) {
  std::vector<AtomicMeasure::Atom> atoms;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag != "atom")
      throw std::runtime_error("measure parse error at line " + std::to_string(line_no) +
                               ": expected 'atom', got '" + tag + "'");
    double location = 0.0, mass = 0.0;
    if (!(ls >> location >> mass))
      throw std::runtime_error("measure parse error at line " + std::to_string(line_no) +
                               ": expected '<location> <mass>'");
    atoms.push_back({location, mass});
  }
  if (atoms.empty()) throw std::runtime_error("measure parse error: no atoms found");
  try {
    return AtomicMeasure(std::move(atoms));
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("measure parse error: ") + e.what());
  }
}

void write_density_csv(std::ostream& out, const DensityCurve& curve) {
  out << "# support=" << format_double(curve.support_lo()) << ','
      << format_double(curve.support_hi()) << '\n';
  out << "# atom_at_zero=" << format_double(curve.atom_at_zero()) << '\n';
  out << "x,f\n";
  for (std::size_t i = 0; i < curve.size(); ++i)
    out << format_double(curve.grid()[i]) << ',' << format_double(curve.values()[i]) << '\n';
}

DensityCurve read_density_csv(std::istream& in) {
  std::string line;
  double lo = 0.0, hi = 0.0, atom = 0.0;
  bool have_support = false;
  std::vector<double> xs, fs;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind("# support=", 0) == 0) {
        if (std::sscanf(line.c_str(), "# support=%lf,%lf", &lo, &hi) == 2) have_support = true;
      } else if (line.rfind("# atom_at_zero=", 0) == 0) {
        std::sscanf(line.c_str(), "# atom_at_zero=%lf", &atom);
      }
      continue;
    }
    if (line == "x,f") continue;
    double x = 0.0, f = 0.0;
    if (std::sscanf(line.c_str(), "%lf,%lf", &x, &f) != 2)
      throw std::runtime_error("density parse error at line " + std::to_string(line_no));
    xs.push_back(x);
    fs.push_back(f);
  }
  if (xs.size() < 2) throw std::runtime_error("density parse error: fewer than 2 rows");
  if (!have_support) {
    lo = xs.front();
    hi = xs.back();
  }
  return DensityCurve(std::move(xs), std::move(fs), lo, hi, atom);
}

void write_spectrum_csv(std::ostream& out, const SpectrumSample& s) {
  out << "# kind=" << s.config.kind << " n=" << s.config.n << " cols=" << s.config.cols
      << " sigma2=" << format_double(s.config.sigma2) << " seed=" << s.config.seed
      << " trials=" << s.config.trials << '\n';
  out << "eigenvalue\n";
  for (double v : s.eigenvalues) out << format_double(v) << '\n';
}

SpectrumSample read_spectrum_csv(std::istream& in) {
  SpectrumSample s;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ls(line.substr(1));
      std::string token;
      while (ls >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = token.substr(0, eq);
        const std::string value = token.substr(eq + 1);
        if (key == "kind") s.config.kind = value;
        else if (key == "n") s.config.n = std::stoi(value);
        else if (key == "cols") s.config.cols = std::stoi(value);
        else if (key == "sigma2") s.config.sigma2 = std::stod(value);
        else if (key == "seed") s.config.seed = std::stoull(value);
        else if (key == "trials") s.config.trials = std::stoi(value);
      }
      continue;
    }
    if (line == "eigenvalue") continue;
    try {
      s.eigenvalues.push_back(std::stod(line));
    } catch (const std::exception&) {
      throw std::runtime_error("spectrum parse error at line " + std::to_string(line_no));
    }
  }
  if (s.eigenvalues.empty()) throw std::runtime_error("spectrum parse error: no eigenvalues");
  if (s.config.n == 0) s.config.n = static_cast<int>(s.eigenvalues.size());
  return s;
}

void write_histogram_csv(std::ostream& out, const Histogram& h) {
  out << "bin_lo,bin_hi,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i)
    out << format_double(h.edges[i]) << ',' << format_double(h.edges[i + 1]) << ','
        << h.counts[i] << '\n';
}

void write_moments(std::ostream& out, const MomentSequence& m) {
  for (std::size_t i = 0; i < m.order(); ++i) {
    if (i) out << ' ';
    out << format_double(m.values()[i]);
  }
  out << '\n';
}

namespace {
std::string format_value(int v) { return std::to_string(v); }
std::string format_value(double v) { return format_double(v); }
}  // namespace

template <typename T>
void write_search_result(std::ostream& out, const SearchResult<T>& result) {
  out << "estimate " << format_value(result.estimate) << '\n';
  out << "objective " << format_double(result.objective) << '\n';
}

template <typename T>
void write_search_trace_csv(std::ostream& out, const SearchResult<T>& result) {
  out << "candidate,objective\n";
  for (const auto& [candidate, objective] : result.trace)
    out << format_value(candidate) << ',' << format_double(objective) << '\n';
}

template void write_search_result<int>(std::ostream&, const SearchResult<int>&);
template void write_search_result<double>(std::ostream&, const SearchResult<double>&);
template void write_search_trace_csv<int>(std::ostream&, const SearchResult<int>&);
template void write_search_trace_csv<double>(std::ostream&, const SearchResult<double>&);

}  // namespace freedec
