#include "freedec/rmt.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace freedec {

namespace {

void check_dims(int n, int cols) {
  if (n < 1 || cols < 1) throw std::invalid_argument("ensemble dimensions must be >= 1");
  if (n > kMaxSampleDim) throw std::invalid_argument("matrix dimension exceeds supported maximum");
}

}  // namespace

std::uint64_t split_seed(std::uint64_t master, std::uint64_t index) {
  // splitmix64 step on master + (index+1) * golden gamma
  std::uint64_t z = master + (index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Eigen::MatrixXcd standard_complex_gaussian(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> component(0.0, std::sqrt(0.5));
  Eigen::MatrixXcd m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) {
      const double re = component(gen);
      const double im = component(gen);
      m(i, j) = std::complex<double>(re, im);
    }
  return m;
}

std::vector<double> hermitian_eigenvalues(const Eigen::MatrixXcd& w) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(w, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("hermitian_eigenvalues: eigensolver failed");
  std::vector<double> eig(solver.eigenvalues().data(),
                          solver.eigenvalues().data() + solver.eigenvalues().size());
  std::sort(eig.begin(), eig.end());
  for (double& v : eig) {
    if (v < kEigenvalueClampFloor)
      throw std::runtime_error("hermitian_eigenvalues: eigenvalue below clamp floor");
    if (v < 0.0) v = 0.0;
  }
  return eig;
}

std::vector<int> atom_multiplicities(const AtomicMeasure& mu, int n) {
  if (n < 1) throw std::invalid_argument("atom_multiplicities: n must be >= 1");
  const std::size_t k = mu.atom_count();
  std::vector<int> counts(k);
  std::vector<std::pair<double, std::size_t>> remainders(k);
  int assigned = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double target = mu.atoms()[i].mass * n;
    counts[i] = static_cast<int>(std::floor(target));
    remainders[i] = {target - counts[i], i};
    assigned += counts[i];
  }
  std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (int r = 0; r < n - assigned; ++r) ++counts[remainders[static_cast<std::size_t>(r)].second];

  for (std::size_t i = 0; i < k; ++i) {
    if (counts[i] < 0 ||
        std::abs(static_cast<double>(counts[i]) / n - mu.atoms()[i].mass) > 1.0 / n + 1e-12)
      throw std::runtime_error("atom_multiplicities: no integer composition within 1/n per atom");
  }
  return counts;
}

std::vector<double> realized_diagonal(const AtomicMeasure& mu, int n) {
  const auto counts = atom_multiplicities(mu, n);
  std::vector<double> diag;
  diag.reserve(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < counts.size(); ++i)
    diag.insert(diag.end(), static_cast<std::size_t>(counts[i]), mu.atoms()[i].location);
  return diag;
}

SpectrumSample sample_wishart(int n, int N, std::uint64_t seed) {
  check_dims(n, N);
  const Eigen::MatrixXcd r = standard_complex_gaussian(n, N, seed);
  Eigen::MatrixXcd w = Eigen::MatrixXcd::Zero(n, n);
  w.selfadjointView<Eigen::Lower>().rankUpdate(r, 1.0 / N);
  SpectrumSample s;
  s.eigenvalues = hermitian_eigenvalues(w);
  s.config = {"wishart", n, N, 0.0, seed, 1};
  return s;
}

SpectrumSample sample_product(const AtomicMeasure& mu, int n, int L, std::uint64_t seed) {
  check_dims(n, L);
  const std::vector<double> diag = realized_diagonal(mu, n);
  Eigen::MatrixXcd x = standard_complex_gaussian(n, L, seed);
  for (int i = 0; i < n; ++i) x.row(i) *= std::sqrt(diag[static_cast<std::size_t>(i)]);
  Eigen::MatrixXcd w = Eigen::MatrixXcd::Zero(n, n);
  w.selfadjointView<Eigen::Lower>().rankUpdate(x, 1.0 / L);
  SpectrumSample s;
  s.eigenvalues = hermitian_eigenvalues(w);
  s.config = {"product", n, L, 0.0, seed, 1};
  return s;
}

SpectrumSample sample_info_plus_noise(const AtomicMeasure& r_spec, int n, int N,
                                      double sigma2, std::uint64_t seed) {
  check_dims(n, N);
  if (N < n)
    throw std::invalid_argument(
        "sample_info_plus_noise: N < n cannot realize the spectrum deterministically");
  if (sigma2 < 0.0) throw std::invalid_argument("sample_info_plus_noise: sigma2 < 0");
  const std::vector<double> diag = realized_diagonal(r_spec, n);
  Eigen::MatrixXcd m = std::sqrt(sigma2) * standard_complex_gaussian(n, N, seed);
  for (int i = 0; i < n; ++i)
    m(i, i) += std::sqrt(static_cast<double>(N) * diag[static_cast<std::size_t>(i)]);
  Eigen::MatrixXcd w = Eigen::MatrixXcd::Zero(n, n);
  w.selfadjointView<Eigen::Lower>().rankUpdate(m, 1.0 / N);
  SpectrumSample s;
  s.eigenvalues = hermitian_eigenvalues(w);
  s.config = {"info_plus_noise", n, N, sigma2, seed, 1};
  return s;
}

SpectrumSample sample_covariance_observations(const AtomicMeasure& theta_spec, int n, int L,
                                              std::uint64_t seed) {
  SpectrumSample s = sample_product(theta_spec, n, L, seed);
  s.config.kind = "scm";
  return s;
}

MomentSequence empirical_moments(const SpectrumSample& s, int order) {
  if (order < 1) throw std::invalid_argument("empirical_moments: order must be >= 1");
  const std::size_t n = s.eigenvalues.size();
  if (n == 0) throw std::invalid_argument("empirical_moments: empty spectrum");
  std::vector<double> m(static_cast<std::size_t>(order), 0.0);
  std::vector<double> pw(n, 1.0);
  for (int k = 0; k < order; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      pw[i] *= s.eigenvalues[i];
      acc += pw[i];
    }
    m[static_cast<std::size_t>(k)] = acc / static_cast<double>(n);
  }
  // nonnegative empirical measure: m1 >= 0 and m2 >= m1^2 up to rounding
  if (m[0] < 0.0 ||
      (order >= 2 && m[1] < m[0] * m[0] - 1e-9 * std::max(1.0, std::abs(m[1]))))
    throw std::logic_error("empirical_moments: moment inequalities violated");
  return MomentSequence(std::move(m));
}

Histogram spectrum_histogram(const SpectrumSample& s, int bins, double lo, double hi) {
  if (bins < 1 || !(hi > lo)) throw std::invalid_argument("spectrum_histogram: bad bin spec");
  Histogram h;
  h.edges.resize(static_cast<std::size_t>(bins) + 1);
  const double step = (hi - lo) / bins;
  for (int i = 0; i <= bins; ++i) h.edges[static_cast<std::size_t>(i)] = lo + step * i;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  for (double v : s.eigenvalues) {
    if (v < lo || v > hi) continue;
    int idx = static_cast<int>((v - lo) / step);
    idx = std::clamp(idx, 0, bins - 1);
    ++h.counts[static_cast<std::size_t>(idx)];
  }
  return h;
}

DensityCurve histogram_density(const SpectrumSample& s, int bins, double lo, double hi) {
  const Histogram h = spectrum_histogram(s, bins, lo, hi);
  const double n = static_cast<double>(s.eigenvalues.size());
  std::vector<double> grid(h.counts.size());
  std::vector<double> values(h.counts.size());
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    const double width = h.edges[i + 1] - h.edges[i];
    grid[i] = 0.5 * (h.edges[i] + h.edges[i + 1]);
    values[i] = static_cast<double>(h.counts[i]) / (n * width);
  }
  double below = 0.0;
  for (double v : s.eigenvalues)
    if (v < lo) below += 1.0;
  return DensityCurve(std::move(grid), std::move(values), lo, hi, below / n);
}

}  // namespace freedec
