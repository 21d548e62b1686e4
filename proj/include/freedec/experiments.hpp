#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "freedec/estimators.hpp"
#include "freedec/measures.hpp"
#include "freedec/rmt.hpp"

namespace freedec {

/// Flat key=value experiment configuration. Getters record the default they
/// resolve, so echo() always serializes the full effective config; feeding the
/// echo back through from_file() reproduces the run exactly.
class ExperimentConfig {
 public:
  ExperimentConfig() = default;

  void set(const std::string& key, std::string value);
  bool has(const std::string& key) const;

  int get_int(const std::string& key, int default_value);
  std::uint64_t get_u64(const std::string& key, std::uint64_t default_value);
  double get_double(const std::string& key, double default_value);
  bool get_bool(const std::string& key, bool default_value);
  std::string get_string(const std::string& key, const std::string& default_value);
  std::vector<int> get_int_list(const std::string& key, const std::string& default_value);
  std::vector<double> get_double_list(const std::string& key,
                                      const std::string& default_value);

  std::string echo() const;  // sorted key=value lines
  static ExperimentConfig from_file(std::istream& in);

 private:
  std::map<std::string, std::string> values_;
};

/// Collects experiment artifacts in memory; run_experiment flushes them
/// atomically (nothing is left behind on failure) with a config-hash header
/// on every CSV.
class ExperimentWriter {
 public:
  void add_file(const std::string& name, std::string content);
  const std::vector<std::pair<std::string, std::string>>& files() const { return files_; }

 private:
  std::vector<std::pair<std::string, std::string>> files_;
};

using ExperimentFn = std::function<void(ExperimentConfig&, ExperimentWriter&)>;

/// Registered "fig-*" experiments, name -> runner.
const std::map<std::string, ExperimentFn>& experiment_registry();

/// Runs a registered experiment and writes config.echo plus its artifacts
/// under cfg's "out" directory. Partial outputs are removed on failure.
/// Returns the list of files written.
std::vector<std::string> run_experiment(const std::string& name, ExperimentConfig& cfg);

// ----- study helpers shared between the figure runners and the acceptance
// suite (all deterministic in the seed) -----

struct MseTrendPoint {
  int n = 0;
  double mse4 = 0.0;
  double mse8 = 0.0;
};

/// Random-matrix approximation error of (1/2 d0 + 1/2 d1) (x) mu_c: per size,
/// the trial-averaged MSE of the first 4 and 8 empirical moments against the
/// combinatorial moments.
std::vector<MseTrendPoint> method_b_mse_study(std::span<const int> sizes, int trials,
                                              double c, std::uint64_t seed);

/// Same trend for the covariance estimator: SCM draws of a (1/2 d0 + 1/2 d1)
/// covariance, deconvolved by mu_c, compared with the true covariance moments.
std::vector<MseTrendPoint> g2_mse_study(std::span<const int> sizes, int trials, double c,
                                        std::uint64_t seed);

/// One CDMA uplink sample covariance draw: Theta = W P W^H + sigma2 I with W
/// (n x N, iid CN(0, 1/n)) redrawn per call, then an L-observation SCM.
SpectrumSample draw_cdma_scm(int n, int N, int L, double sigma2, const AtomicMeasure& powers,
                             std::uint64_t seed);

struct PowerStudyResult {
  int observations = 0;                                // L
  std::vector<std::vector<double>> per_run_locations;  // sorted within each run
  std::vector<double> rank_average;
  double mean_moment_mse = 0.0;  // k_atoms-moment MSE vs the true power moments
};

/// One result per requested observation length. Runs share draws across
/// lengths (each length uses a column prefix of the same observation matrix),
/// so the per-length marginals are unchanged but trends are paired.
std::vector<PowerStudyResult> power_estimation_study(int n, int N,
                                                     std::span<const int> lengths,
                                                     double sigma2,
                                                     const AtomicMeasure& powers, int k_atoms,
                                                     int trials, std::uint64_t seed);

struct UserCountStudyResult {
  std::vector<int> free_estimates;
  std::vector<int> classical_estimates;

  static double within_fraction(const std::vector<int>& estimates, int truth, int tol);
};

UserCountStudyResult user_count_study(int n, int n_users, int L, double sigma2, int trials,
                                      std::uint64_t seed);

/// Noise-variance objective curves averaged over trials. All lengths share
/// draws: each trial uses one X and takes the first L columns per length.
std::vector<SearchResult<double>> noise_variance_study(int n, int rank, double sigma2,
                                                       std::span<const int> lengths,
                                                       int trials,
                                                       const NoiseVarianceGrid& grid,
                                                       std::uint64_t seed);

struct CovarianceStudyResult {
  std::vector<std::vector<double>> per_run_locations;
  std::vector<double> rank_average;
  std::vector<double> mean_moments;  // averaged recovered covariance moments
};

CovarianceStudyResult covariance_cdf_study(int n, int rank, double sigma2, int L, int k_atoms,
                                           int trials, std::uint64_t seed);

struct CapacityStudyResult {
  double true_capacity = 0.0;
  double mean_abs_error = 0.0;
};

/// Block-averaged measured-channel capacity error at the given block count.
CapacityStudyResult capacity_study(int n, std::span<const double> h_spectrum, double sigma2,
                                   double rho, int blocks, int trials, std::uint64_t seed);

}  // namespace freedec
