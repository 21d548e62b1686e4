#pragma once

#include <utility>
#include <vector>

#include "freedec/freeconv.hpp"
#include "freedec/measures.hpp"
#include "freedec/rmt.hpp"

namespace freedec {

/// Per-moment weights for the weighted MSE. The default downweights high
/// moments: w_{2k} = Catalan number C_k, w_{2k+1} = 0 (the limiting even
/// moments of a standard semicircular element).
struct WeightedMseConfig {
  std::vector<double> weights;  // weights[k-1] multiplies |mu_k - nu_k|^2

  static WeightedMseConfig catalan(int order);
  static WeightedMseConfig central_binomial(int order);
  static WeightedMseConfig uniform(int order);
};

double moment_mse(const MomentSequence& mu, const MomentSequence& nu);
double weighted_mse(const MomentSequence& mu, const MomentSequence& nu,
                    const WeightedMseConfig& cfg);

/// Covariance moments from sample-covariance moments: multiplicative free
/// deconvolution with mu_c (the combinatorial realization of the consistent
/// covariance Stieltjes-transform estimator).
MomentSequence g2_estimate(const MomentSequence& scm_moments, double c);

struct InfoPlusNoiseEstimate {
  MomentSequence gamma;         // moments of (1/N) R R^H
  MomentSequence intermediate;  // gamma deconvolved by mu_c
};

/// Inverts the information-plus-noise relation: gamma = ((w (x)^-1 mu_c) (-)
/// delta_{sigma2}) (x) mu_c at moment level.
InfoPlusNoiseEstimate info_plus_noise_deconvolve(const MomentSequence& w_moments, double c,
                                                 double sigma2);

/// Forward direction of the same relation (useful as an oracle and for grids).
MomentSequence info_plus_noise_forward(const MomentSequence& gamma_moments, double c,
                                       double sigma2);

/// Forward CDMA uplink composition: SCM moments predicted from the power
/// distribution with N users, spreading length n, L observations, noise sigma2.
MomentSequence cdma_forward_moments(const MomentSequence& power_moments, int n, int N, int L,
                                    double sigma2);

/// Inverse composition: power-distribution moments from SCM moments.
MomentSequence cdma_inverse_moments(const MomentSequence& scm_moments, int n, int N, int L,
                                    double sigma2);

struct PowerEstimate {
  AtomicMeasure measure;           // equal-mass atoms at the recovered locations
  std::vector<double> locations;   // sorted, clamped (kept separate from merging)
  MomentSequence power_moments;    // recovered moments of the power distribution
  int clamped_negative = 0;
  int clamped_complex = 0;
  bool hankel_ok = true;
};

/// Recovers the power distribution as k_atoms equal-mass atoms via the
/// power-sum recurrence on the deconvolved moments.
PowerEstimate estimate_power_distribution(const MomentSequence& scm_moments, int n, int N,
                                          int L, double sigma2, int k_atoms);

template <typename T>
struct SearchResult {
  T estimate{};
  double objective = 0.0;
  std::vector<std::pair<T, double>> trace;  // candidate -> objective, full grid
};

/// Exhaustive best-match search for the user count N in [1, n]; the objective
/// is the weighted MSE between observed SCM moments and the forward CDMA
/// composition, on min(4, order) moments.
SearchResult<int> estimate_user_count(const MomentSequence& scm_moments, int n, int L,
                                      double sigma2, const AtomicMeasure& p_assumed,
                                      int moments_used = 4);

/// Classical baseline: number of eigenvalues above threshold_factor * sigma2.
int classical_rank(const SpectrumSample& eigs, double sigma2, double threshold_factor = 1.5);

/// Channel covariance moments: (scm (x)^-1 mu_{n/L}) (-) delta_{sigma2}.
MomentSequence estimate_channel_covariance(const MomentSequence& scm_moments, double c,
                                           double sigma2);

struct NoiseVarianceGrid {
  double lo = 0.0;
  double hi = 0.0;
  double step = 1e-3;

  /// (sigma_ref - 0.1, sigma_ref + 0.1) with 1e-3 spacing.
  static NoiseVarianceGrid around_reference(double sigma_ref);
  /// [0, m1] with 1e-3 spacing.
  static NoiseVarianceGrid from_first_moment(double m1);
};

/// Grid argmin over noise-std candidates eta of the MSE between SCM moments
/// and (r (+) delta_{eta^2}) (x) mu_c, on min(moments_used, order) moments.
SearchResult<double> estimate_noise_variance(const MomentSequence& scm_moments,
                                             const MomentSequence& r_moments, double c,
                                             const NoiseVarianceGrid& grid,
                                             int moments_used = 4);

struct CapacityEstimate {
  double capacity = 0.0;               // bits (or nats) per antenna
  std::vector<double> eigenvalues;     // recovered spectrum of (1/n) H H^H
  int clamped_negative = 0;
  int clamped_complex = 0;
  bool hankel_ok = true;
};

/// Channel capacity from block-averaged measured MIMO moments: deconvolve by
/// mu_1, remove the sigma2/L_blocks shift, reconvolve, recover <= 8 eigenvalues,
/// and average log(1 + rho * lambda).
CapacityEstimate estimate_capacity(const MomentSequence& h_hat_moments, int n, int L_blocks,
                                   double sigma2, double rho, bool natural_log = false);

/// Rank-wise mean of per-run sorted eigenvalue estimates (the averaging step
/// behind the estimated-CDF figures).
std::vector<double> rankwise_average(const std::vector<std::vector<double>>& per_run_sorted);

}  // namespace freedec
