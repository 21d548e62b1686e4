#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "freedec/measures.hpp"

namespace freedec {

inline constexpr int kMaxSampleDim = 2048;
inline constexpr double kEigenvalueClampFloor = -1e-10;

struct EnsembleConfig {
  std::string kind;  // "wishart", "product", "info_plus_noise", "scm"
  int n = 0;         // matrix dimension
  int cols = 0;      // second dimension: N (model columns) or L (observations)
  double sigma2 = 0.0;
  std::uint64_t seed = 0;
  int trials = 1;

  double aspect_ratio() const { return static_cast<double>(n) / cols; }
};

/// Eigenvalues of one realized matrix: sorted ascending, clamped to >= 0
/// (Hermitian solvers emit tiny negatives; anything below the clamp floor is
/// an error).
struct SpectrumSample {
  std::vector<double> eigenvalues;
  EnsembleConfig config;
};

/// Counter-based split of a master seed into per-trial seeds.
std::uint64_t split_seed(std::uint64_t master, std::uint64_t index);

/// rows x cols matrix of i.i.d. standard complex Gaussian entries
/// (variance 1 per entry: real/imaginary parts each N(0, 1/2)).
Eigen::MatrixXcd standard_complex_gaussian(int rows, int cols, std::uint64_t seed);

/// Sorted, clamped eigenvalues of a Hermitian matrix.
std::vector<double> hermitian_eigenvalues(const Eigen::MatrixXcd& w);

/// Integer multiplicities realizing the atom masses of mu at dimension n
/// (largest-remainder rounding; each |n_i/n - p_i| <= 1/n or an error).
std::vector<int> atom_multiplicities(const AtomicMeasure& mu, int n);

/// Diagonal of the deterministic matrix realizing mu at dimension n.
std::vector<double> realized_diagonal(const AtomicMeasure& mu, int n);

/// Wishart spectrum: eigenvalues of (1/N) R R^H, R n x N standard complex Gaussian.
SpectrumSample sample_wishart(int n, int N, std::uint64_t seed);

/// Spectrum of T^(1/2) (1/L) X X^H T^(1/2) with T diagonal realizing mu;
/// approximates mu (x) mu_{n/L}.
SpectrumSample sample_product(const AtomicMeasure& mu, int n, int L, std::uint64_t seed);

/// Information-plus-noise spectrum: (1/N)(R + sigma X)(R + sigma X)^H where
/// (1/N) R R^H deterministically realizes r_spec (requires N >= n).
SpectrumSample sample_info_plus_noise(const AtomicMeasure& r_spec, int n, int N,
                                      double sigma2, std::uint64_t seed);

/// Sample covariance spectrum from L observations of a vector with true
/// covariance spectrum theta_spec; same math as sample_product.
SpectrumSample sample_covariance_observations(const AtomicMeasure& theta_spec, int n, int L,
                                              std::uint64_t seed);

/// m_k = (1/n) sum lambda_i^k.
MomentSequence empirical_moments(const SpectrumSample& s, int order);

struct Histogram {
  std::vector<double> edges;  // bins + 1 entries
  std::vector<int> counts;
};

Histogram spectrum_histogram(const SpectrumSample& s, int bins, double lo, double hi);

/// Histogram as a density curve over [lo, hi] (values = count /(n * bin width));
/// eigenvalues below lo are reported as the zero atom.
DensityCurve histogram_density(const SpectrumSample& s, int bins, double lo, double hi);

}  // namespace freedec
