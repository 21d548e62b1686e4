#include "freedec/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace freedec {

namespace {

std::vector<double> catalan_numbers(int count) {
  std::vector<double> c(static_cast<std::size_t>(count) + 1);
  c[0] = 1.0;
  for (int k = 1; k <= count; ++k)
    c[static_cast<std::size_t>(k)] =
        c[static_cast<std::size_t>(k - 1)] * 2.0 * (2.0 * k - 1.0) / (k + 1.0);
  return c;
}

int effective_order(const MomentSequence& a, int requested) {
  return std::min<int>(static_cast<int>(a.order()), requested);
}

}  // namespace

WeightedMseConfig WeightedMseConfig::catalan(int order) {
  WeightedMseConfig cfg;
  cfg.weights.assign(static_cast<std::size_t>(order), 0.0);
  const auto cat = catalan_numbers(order / 2 + 1);
  for (int k = 2; k <= order; k += 2)
    cfg.weights[static_cast<std::size_t>(k - 1)] = cat[static_cast<std::size_t>(k / 2)];
  return cfg;
}

WeightedMseConfig WeightedMseConfig::central_binomial(int order) {
  WeightedMseConfig cfg;
  cfg.weights.assign(static_cast<std::size_t>(order), 0.0);
  for (int k = 2; k <= order; k += 2) {
    double binom = 1.0;
    for (int i = 1; i <= k / 2; ++i) binom = binom * (k / 2 + i) / i;
    cfg.weights[static_cast<std::size_t>(k - 1)] = binom;
  }
  return cfg;
}

WeightedMseConfig WeightedMseConfig::uniform(int order) {
  WeightedMseConfig cfg;
  cfg.weights.assign(static_cast<std::size_t>(order), 1.0);
  return cfg;
}

double moment_mse(const MomentSequence& mu, const MomentSequence& nu) {
  if (mu.order() != nu.order())
    throw std::invalid_argument("moment_mse: sequences must have equal orders");
  double acc = 0.0;
  for (std::size_t i = 0; i < mu.order(); ++i) {
    const double d = mu.values()[i] - nu.values()[i];
    acc += d * d;
  }
  return acc;
}

double weighted_mse(const MomentSequence& mu, const MomentSequence& nu,
                    const WeightedMseConfig& cfg) {
  if (mu.order() != nu.order())
    throw std::invalid_argument("weighted_mse: sequences must have equal orders");
  if (cfg.weights.size() != mu.order())
    throw std::invalid_argument("weighted_mse: weight count must match order");
  double acc = 0.0;
  for (std::size_t i = 0; i < mu.order(); ++i) {
    if (cfg.weights[i] < 0.0) throw std::invalid_argument("weighted_mse: negative weight");
    const double d = mu.values()[i] - nu.values()[i];
    acc += cfg.weights[i] * d * d;
  }
  return acc;
}

MomentSequence g2_estimate(const MomentSequence& scm_moments, double c) {
  return mult_mp_deconvolve(scm_moments, c);
}

InfoPlusNoiseEstimate info_plus_noise_deconvolve(const MomentSequence& w_moments, double c,
                                                 double sigma2) {
  if (sigma2 < 0.0) throw std::invalid_argument("info_plus_noise_deconvolve: sigma2 < 0");
  const MomentSequence intermediate =
      shift_deconvolve(mult_mp_deconvolve(w_moments, c), sigma2);
  return {mult_mp_convolve(intermediate, c), intermediate};
}

MomentSequence info_plus_noise_forward(const MomentSequence& gamma_moments, double c,
                                       double sigma2) {
  return mult_mp_convolve(shift_moments(mult_mp_deconvolve(gamma_moments, c), sigma2), c);
}

MomentSequence cdma_forward_moments(const MomentSequence& power_moments, int n, int N, int L,
                                    double sigma2) {
  if (N < 1 || N > n) throw std::invalid_argument("cdma_forward_moments: need 1 <= N <= n");
  const double ratio = static_cast<double>(N) / n;
  const MomentSequence inner = mult_mp_convolve(power_moments, ratio);
  const MomentSequence padded = scale_and_pad(inner, ratio);
  const MomentSequence shifted = shift_moments(padded, sigma2);
  return mult_mp_convolve(shifted, static_cast<double>(n) / L);
}

MomentSequence cdma_inverse_moments(const MomentSequence& scm_moments, int n, int N, int L,
                                    double sigma2) {
  if (N < 1 || N > n) throw std::invalid_argument("cdma_inverse_moments: need 1 <= N <= n");
  const double ratio = static_cast<double>(N) / n;
  const MomentSequence d1 = mult_mp_deconvolve(scm_moments, static_cast<double>(n) / L);
  const MomentSequence d2 = shift_deconvolve(d1, sigma2);
  const MomentSequence d3 = unpad_zero_atom(d2, ratio);
  return mult_mp_deconvolve(d3, ratio);
}

PowerEstimate estimate_power_distribution(const MomentSequence& scm_moments, int n, int N,
                                          int L, double sigma2, int k_atoms) {
  if (k_atoms < 1) throw std::invalid_argument("estimate_power_distribution: k_atoms < 1");
  if (k_atoms > N) throw std::invalid_argument("estimate_power_distribution: k_atoms > N");
  if (static_cast<int>(scm_moments.order()) < k_atoms)
    throw std::invalid_argument("estimate_power_distribution: need k_atoms moments");

  const MomentSequence power = cdma_inverse_moments(scm_moments, n, N, L, sigma2);
  std::vector<double> sums(static_cast<std::size_t>(k_atoms));
  for (int k = 0; k < k_atoms; ++k)
    sums[static_cast<std::size_t>(k)] = k_atoms * power.values()[static_cast<std::size_t>(k)];

  const EigenvalueRecovery rec =
      newton_girard_eigenvalues(sums, k_atoms, RootPolicy::kClampWithDiagnostics);

  PowerEstimate out{AtomicMeasure::point_mass(0.0),
                    rec.eigenvalues,
                    power.truncated(static_cast<std::size_t>(k_atoms)),
                    rec.clamped_negative,
                    rec.clamped_complex,
                    hankel_psd_advisory(power)};
  out.measure = AtomicMeasure::equal_weights(rec.eigenvalues);
  return out;
}

SearchResult<int> estimate_user_count(const MomentSequence& scm_moments, int n, int L,
                                      double sigma2, const AtomicMeasure& p_assumed,
                                      int moments_used) {
  const int order = effective_order(scm_moments, moments_used);
  const MomentSequence observed = scm_moments.truncated(static_cast<std::size_t>(order));
  const MomentSequence power = moments_of(p_assumed, order);
  const WeightedMseConfig cfg = WeightedMseConfig::catalan(order);

  SearchResult<int> result;
  result.trace.reserve(static_cast<std::size_t>(n));
  for (int candidate = 1; candidate <= n; ++candidate) {
    const MomentSequence predicted = cdma_forward_moments(power, n, candidate, L, sigma2);
    const double objective = weighted_mse(observed, predicted, cfg);
    result.trace.emplace_back(candidate, objective);
    if (candidate == 1 || objective < result.objective) {
      result.objective = objective;
      result.estimate = candidate;
    }
  }
  return result;
}

int classical_rank(const SpectrumSample& eigs, double sigma2, double threshold_factor) {
  if (!(threshold_factor > 0.0))
    throw std::invalid_argument("classical_rank: threshold factor must be positive");
  const double threshold = threshold_factor * sigma2;
  int count = 0;
  for (double v : eigs.eigenvalues)
    if (v > threshold) ++count;
  return count;
}

MomentSequence estimate_channel_covariance(const MomentSequence& scm_moments, double c,
                                           double sigma2) {
  return shift_deconvolve(mult_mp_deconvolve(scm_moments, c), sigma2);
}

NoiseVarianceGrid NoiseVarianceGrid::around_reference(double sigma_ref) {
  return {std::max(0.0, sigma_ref - 0.1), sigma_ref + 0.1, 1e-3};
}

NoiseVarianceGrid NoiseVarianceGrid::from_first_moment(double m1) {
  return {0.0, std::max(m1, 1e-3), 1e-3};
}

SearchResult<double> estimate_noise_variance(const MomentSequence& scm_moments,
                                             const MomentSequence& r_moments, double c,
                                             const NoiseVarianceGrid& grid,
                                             int moments_used) {
  if (!(grid.step > 0.0)) throw std::invalid_argument("estimate_noise_variance: step <= 0");
  if (!(grid.hi >= grid.lo)) throw std::invalid_argument("estimate_noise_variance: empty grid");
  const int order = std::min(effective_order(scm_moments, moments_used),
                             effective_order(r_moments, moments_used));
  const MomentSequence observed = scm_moments.truncated(static_cast<std::size_t>(order));
  const MomentSequence reference = r_moments.truncated(static_cast<std::size_t>(order));

  SearchResult<double> result;
  const int count = static_cast<int>(std::floor((grid.hi - grid.lo) / grid.step + 1e-9)) + 1;
  result.trace.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double eta = grid.lo + grid.step * i;
    const MomentSequence predicted =
        mult_mp_convolve(shift_moments(reference, eta * eta), c);
    const double objective = moment_mse(observed, predicted);
    result.trace.emplace_back(eta, objective);
    if (i == 0 || objective < result.objective) {
      result.objective = objective;
      result.estimate = eta;
    }
  }
  return result;
}

CapacityEstimate estimate_capacity(const MomentSequence& h_hat_moments, int n, int L_blocks,
                                   double sigma2, double rho, bool natural_log) {
  if (L_blocks < 1) throw std::invalid_argument("estimate_capacity: L_blocks must be >= 1");
  if (!(rho > 0.0)) throw std::invalid_argument("estimate_capacity: rho must be positive");
  (void)n;

  const MomentSequence gamma =
      mult_mp_convolve(shift_deconvolve(mult_mp_deconvolve(h_hat_moments, 1.0),
                                        sigma2 / L_blocks),
                       1.0);
  const int k_atoms = std::min<int>(static_cast<int>(gamma.order()), 8);
  std::vector<double> sums(static_cast<std::size_t>(k_atoms));
  for (int k = 0; k < k_atoms; ++k)
    sums[static_cast<std::size_t>(k)] = k_atoms * gamma.values()[static_cast<std::size_t>(k)];
  const EigenvalueRecovery rec =
      newton_girard_eigenvalues(sums, k_atoms, RootPolicy::kClampWithDiagnostics);

  CapacityEstimate out;
  out.eigenvalues = rec.eigenvalues;
  out.clamped_negative = rec.clamped_negative;
  out.clamped_complex = rec.clamped_complex;
  out.hankel_ok = hankel_psd_advisory(gamma);
  double acc = 0.0;
  for (double lam : rec.eigenvalues)
    acc += natural_log ? std::log(1.0 + rho * lam) : std::log2(1.0 + rho * lam);
  out.capacity = acc / static_cast<double>(k_atoms);
  return out;
}

std::vector<double> rankwise_average(const std::vector<std::vector<double>>& per_run_sorted) {
  if (per_run_sorted.empty()) return {};
  const std::size_t width = per_run_sorted.front().size();
  std::vector<double> avg(width, 0.0);
  for (const auto& run : per_run_sorted) {
    if (run.size() != width)
      throw std::invalid_argument("rankwise_average: runs have differing lengths");
    for (std::size_t i = 0; i < width; ++i) avg[i] += run[i];
  }
  for (double& v : avg) v /= static_cast<double>(per_run_sorted.size());
  return avg;
}

}  // namespace freedec
