#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "freedec/transforms.hpp"

namespace freedec {

inline constexpr double kMassTolerance = 1e-12;
inline constexpr double kAtomMergeRelTol = 1e-9;
inline constexpr int kMaxNewtonGirardSize = 24;

/// Discrete probability measure sum p_i * delta_{lambda_i} on [0, inf).
/// Atoms are kept sorted by location, duplicates (within kAtomMergeRelTol
/// relative) merged, and the masses must sum to 1 within kMassTolerance.
class AtomicMeasure {
 public:
  struct Atom {
    double location;
    double mass;
  };

  explicit AtomicMeasure(std::vector<Atom> atoms);

  static AtomicMeasure point_mass(double location);
  /// (1-p) delta_0 + p delta_lambda; p == 1 yields the single atom.
  static AtomicMeasure zero_and_spike(double p, double lambda);
  /// Equal masses 1/n at the given locations.
  static AtomicMeasure equal_weights(std::span<const double> locations);

  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t atom_count() const { return atoms_.size(); }
  double mass_at(double location) const;
  double mass_at_zero() const;
  double max_location() const { return atoms_.back().location; }

 private:
  std::vector<Atom> atoms_;
};

/// Raw moment sequence (m_1, ..., m_K) of a spectral measure. Entries are
/// stored in compensated double-double form so that chained transforms do not
/// lose precision at call boundaries; values() exposes plain doubles.
class MomentSequence {
 public:
  MomentSequence() = default;
  explicit MomentSequence(std::vector<double> values);
  explicit MomentSequence(std::vector<DoubleDouble> values);

  std::size_t order() const { return ext_.size(); }
  /// k is 1-based: moment(1) == m_1.
  double moment(std::size_t k) const;
  const std::vector<double>& values() const { return values_; }
  const std::vector<DoubleDouble>& extended() const { return ext_; }
  MomentSequence truncated(std::size_t order) const;

 private:
  std::vector<DoubleDouble> ext_;
  std::vector<double> values_;
};

/// Free cumulants (alpha_1, ..., alpha_K) -- R-transform coefficients.
/// Same compensated storage as MomentSequence.
class CumulantSequence {
 public:
  CumulantSequence() = default;
  explicit CumulantSequence(std::vector<double> values);
  explicit CumulantSequence(std::vector<DoubleDouble> values);

  std::size_t order() const { return ext_.size(); }
  double cumulant(std::size_t k) const;
  const std::vector<double>& values() const { return values_; }
  const std::vector<DoubleDouble>& extended() const { return ext_; }

 private:
  std::vector<DoubleDouble> ext_;
  std::vector<double> values_;
};

/// Marchenko-Pastur law with aspect ratio c > 0: atom (1-1/c)^+ at zero plus
/// density sqrt((x-a)^+(b-x)^+) / (2 pi c x), a = (1-sqrt c)^2, b = (1+sqrt c)^2.
struct MarchenkoPastur {
  double c;

  explicit MarchenkoPastur(double c_in);

  double support_lo() const;
  double support_hi() const;
  double atom_at_zero() const;
  double density(double x) const;
  /// Closed-form Stieltjes transform, Herglotz branch.
  std::complex<double> stieltjes(std::complex<double> z) const;
};

/// Density f(x) sampled on a strictly increasing grid, plus an optional point
/// mass at zero. mass() is the trapezoid integral plus the zero atom; callers
/// producing full distributions should satisfy mass() == 1 within 1e-3.
class DensityCurve {
 public:
  DensityCurve(std::vector<double> grid, std::vector<double> values,
               double support_lo, double support_hi, double atom_at_zero);

  const std::vector<double>& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  double support_lo() const { return support_lo_; }
  double support_hi() const { return support_hi_; }
  double atom_at_zero() const { return atom_at_zero_; }
  std::size_t size() const { return grid_.size(); }

  double mass() const;
  bool is_normalized(double tol = 1e-3) const;

 private:
  std::vector<double> grid_;
  std::vector<double> values_;
  double support_lo_;
  double support_hi_;
  double atom_at_zero_;
};

std::vector<double> linspace(double lo, double hi, std::size_t count);

/// m_k = sum_i p_i lambda_i^k for k = 1..order.
MomentSequence moments_of(const AtomicMeasure& mu, int order);

/// Moments of mu_c from its free cumulants alpha_n = c^(n-1).
MomentSequence mp_moments(double c, int order);

DensityCurve mp_density(double c, std::span<const double> grid);

enum class RootPolicy {
  kStrict,                // significantly complex or negative roots are errors
  kClampWithDiagnostics,  // project/clamp them and count
};

struct EigenvalueRecovery {
  std::vector<double> eigenvalues;  // ascending
  int clamped_negative = 0;
  int clamped_complex = 0;
};

/// Recovers the n eigenvalues whose power sums are S_p = n * m_p, p = 1..n,
/// via the elementary-symmetric-polynomial recurrence and a companion-matrix
/// root solve of the characteristic polynomial. Requires n <= kMaxNewtonGirardSize.
EigenvalueRecovery newton_girard_eigenvalues(std::span<const double> power_sums, int n,
                                             RootPolicy policy = RootPolicy::kStrict);

/// sum_i p_i / (lambda_i - z); throws if z hits an atom.
std::complex<double> stieltjes(const AtomicMeasure& mu, std::complex<double> z);

/// eta(z) = sum_i p_i / (1 + z lambda_i), z >= 0.
double eta(const AtomicMeasure& mu, double z);

double default_inversion_omega(double support_width);

/// f(x) = (1/pi) Im m(x + i omega), given the Stieltjes values on the grid
/// shifted by i omega. Output is not normalized; the caller validates.
DensityCurve stieltjes_inversion(std::span<const std::complex<double>> stieltjes_values,
                                 std::span<const double> grid);

}  // namespace freedec
