#pragma once

#include <complex>
#include <span>

#include "freedec/measures.hpp"

namespace freedec {

/// Parameters of the two-atom measure (1-p) delta_0 + p delta_lambda used by
/// the exact multiplicative (de)convolution formulas.
struct TwoAtomParams {
  double p;
  double lambda;
  double c;

  TwoAtomParams(double p_in, double lambda_in, double c_in);

  /// True when the formal deconvolution support dips below zero (also set
  /// for c >= 1/2, where the branch rule is extrapolated).
  bool deconv_support_crosses_zero() const;
};

struct SupportInterval {
  double lo;
  double hi;

  double center() const { return 0.5 * (lo + hi); }
  double width() const { return hi - lo; }
};

struct DensityPeak {
  double x;
  double value;
};

/// Support of mu (x) mu_c: [lambda(1+cp) - 2 lambda sqrt(cp), lambda(1+cp) + 2 lambda sqrt(cp)].
SupportInterval conv_support(const TwoAtomParams& params);

/// Formal deconvolution interval centered at lambda(1-2cp) with half-width
/// 2 lambda sqrt(cp(1-cp)); requires cp <= 1.
SupportInterval deconv_support(const TwoAtomParams& params);

/// Interior maximum at x = lambda (1-cp)^2/(1+cp) with value
/// sqrt(cp) / (c pi lambda (1-cp)); requires cp < 1.
DensityPeak conv_peak(const TwoAtomParams& params);

double conv_density_at(const TwoAtomParams& params, double x);
double deconv_density_at(const TwoAtomParams& params, double x);

/// Density of mu (x) mu_c sampled on the grid. The zero-atom mass is reported
/// as 1 minus the quadrature mass of the continuous part.
DensityCurve conv_density(const TwoAtomParams& params, std::span<const double> grid);

/// Formal deconvolution density sampled on the grid (atom reported as zero).
DensityCurve deconv_density(const TwoAtomParams& params, std::span<const double> grid);

/// Quadrature of x^k against the continuous part (k = 0 gives the mass).
/// Uses the substitution x = center + (width/2) sin(theta), which absorbs the
/// square-root edge factors exactly.
double conv_moment(const TwoAtomParams& params, int k);

/// Same for the deconvolution density; throws std::domain_error when 0 lies
/// inside the interval (the x^-2 factor is not integrable across it).
double deconv_moment(const TwoAtomParams& params, int k);

struct RecoverOptions {
  /// Take the support width from the curve's declared support interval;
  /// otherwise measure it where the density exceeds threshold_rel * peak.
  bool use_declared_support = true;
  double threshold_rel = 0.02;
};

/// Inverts {width = 4 lambda sqrt(cp), max = sqrt(cp)/(c pi lambda (1-cp))}
/// for (p, lambda) from an observed single-bump density.
TwoAtomParams recover_two_atom(const DensityCurve& observed, double c,
                               const RecoverOptions& options = {});

/// Stieltjes transform of mu (x) mu_c for discrete mu (<= 12 atoms) at each
/// grid point (expected on a line Im z = omega > 0), obtained by solving the
/// degree-(atoms+1) eta polynomial with continuity-tracked root selection.
std::vector<std::complex<double>> solve_eta_convolution(
    const AtomicMeasure& mu, double c, std::span<const std::complex<double>> z_grid);

/// Convenience wrapper: solve on grid + i*omega and apply Stieltjes inversion.
DensityCurve eta_convolution_density(const AtomicMeasure& mu, double c,
                                     std::span<const double> grid, double omega);

/// Reference Stieltjes transform of the two-atom convolution from the explicit
/// quadratic-root expression. Valid for Im z > 0 (Herglotz root) and real
/// negative z (positive root).
std::complex<double> appendix_quadratic_conv(const TwoAtomParams& params,
                                             std::complex<double> z);

inline constexpr int kMaxEtaAtoms = 12;

}  // namespace freedec
