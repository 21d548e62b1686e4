#include "freedec/experiments.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>

#include "freedec/closedform.hpp"
#include "freedec/freeconv.hpp"
#include "freedec/io.hpp"

namespace freedec {

// ---------------------------------------------------------------- config

void ExperimentConfig::set(const std::string& key, std::string value) {
  values_[key] = std::move(value);
}

bool ExperimentConfig::has(const std::string& key) const { return values_.count(key) > 0; }

int ExperimentConfig::get_int(const std::string& key, int default_value) {
  auto it = values_.find(key);
  if (it == values_.end()) {
    values_[key] = std::to_string(default_value);
    return default_value;
  }
  return std::stoi(it->second);
}

std::uint64_t ExperimentConfig::get_u64(const std::string& key, std::uint64_t default_value) {
  auto it = values_.find(key);
  if (it == values_.end()) {
    values_[key] = std::to_string(default_value);
    return default_value;
  }
  return std::stoull(it->second);
}

double ExperimentConfig::get_double(const std::string& key, double default_value) {
  auto it = values_.find(key);
  if (it == values_.end()) {
    values_[key] = format_double(default_value);
    return default_value;
  }
  return std::stod(it->second);
}

bool ExperimentConfig::get_bool(const std::string& key, bool default_value) {
  auto it = values_.find(key);
  if (it == values_.end()) {
    values_[key] = default_value ? "true" : "false";
    return default_value;
  }
  return it->second == "true" || it->second == "1";
}

std::string ExperimentConfig::get_string(const std::string& key,
                                         const std::string& default_value) {
  auto it = values_.find(key);
  if (it == values_.end()) {
    values_[key] = default_value;
    return default_value;
  }
  return it->second;
}

namespace {

std::vector<std::string> split_csv_list(const std::string& text) {
  std::vector<std::string> out;
  std::string token;
  std::istringstream ss(text);
  while (std::getline(ss, token, ',')) {
    if (!token.empty()) out.push_back(token);
  }
  return out;
}

}  // namespace

std::vector<int> ExperimentConfig::get_int_list(const std::string& key,
                                                const std::string& default_value) {
  const std::string text = get_string(key, default_value);
  std::vector<int> out;
  for (const auto& tok : split_csv_list(text)) out.push_back(std::stoi(tok));
  if (out.empty()) throw std::invalid_argument("config key '" + key + "' is an empty list");
  return out;
}

std::vector<double> ExperimentConfig::get_double_list(const std::string& key,
                                                      const std::string& default_value) {
  const std::string text = get_string(key, default_value);
  std::vector<double> out;
  for (const auto& tok : split_csv_list(text)) out.push_back(std::stod(tok));
  if (out.empty()) throw std::invalid_argument("config key '" + key + "' is an empty list");
  return out;
}

std::string ExperimentConfig::echo() const {
  std::ostringstream out;
  for (const auto& [key, value] : values_) out << key << '=' << value << '\n';
  return out.str();
}

ExperimentConfig ExperimentConfig::from_file(std::istream& in) {
  ExperimentConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config parse error at line " + std::to_string(line_no) +
                               ": expected key=value");
    std::string key = line.substr(first, eq - first);
    std::string value = line.substr(eq + 1);
    while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
    while (!value.empty() && (value.back() == ' ' || value.back() == '\t' ||
                              value.back() == '\r'))
      value.pop_back();
    cfg.set(key, value);
  }
  return cfg;
}

void ExperimentWriter::add_file(const std::string& name, std::string content) {
  files_.emplace_back(name, std::move(content));
}

// ---------------------------------------------------------------- studies

namespace {

const AtomicMeasure& half_zero_half_one() {
  static const AtomicMeasure mu = AtomicMeasure::zero_and_spike(0.5, 1.0);
  return mu;
}

double partial_mse(const MomentSequence& a, const MomentSequence& b, int order) {
  double acc = 0.0;
  for (int k = 0; k < order; ++k) {
    const double d = a.values()[static_cast<std::size_t>(k)] -
                     b.values()[static_cast<std::size_t>(k)];
    acc += d * d;
  }
  return acc;
}

}  // namespace

std::vector<MseTrendPoint> method_b_mse_study(std::span<const int> sizes, int trials,
                                              double c, std::uint64_t seed) {
  const MomentSequence exact = mult_mp_convolve(moments_of(half_zero_half_one(), 8), c);
  std::vector<MseTrendPoint> out;
  for (std::size_t si = 0; si < sizes.size(); ++si) {
    const int n = sizes[si];
    const int L = static_cast<int>(std::lround(n / c));
    MseTrendPoint point{n, 0.0, 0.0};
    for (int t = 0; t < trials; ++t) {
      const std::uint64_t s = split_seed(split_seed(seed, si), static_cast<std::uint64_t>(t));
      const SpectrumSample sample = sample_product(half_zero_half_one(), n, L, s);
      const MomentSequence em = empirical_moments(sample, 8);
      point.mse4 += partial_mse(em, exact, 4);
      point.mse8 += partial_mse(em, exact, 8);
    }
    point.mse4 /= trials;
    point.mse8 /= trials;
    out.push_back(point);
  }
  return out;
}

std::vector<MseTrendPoint> g2_mse_study(std::span<const int> sizes, int trials, double c,
                                        std::uint64_t seed) {
  const MomentSequence truth = moments_of(half_zero_half_one(), 8);
  std::vector<MseTrendPoint> out;
  for (std::size_t si = 0; si < sizes.size(); ++si) {
    const int n = sizes[si];
    const int N = static_cast<int>(std::lround(n / c));
    MseTrendPoint point{n, 0.0, 0.0};
    for (int t = 0; t < trials; ++t) {
      const std::uint64_t s =
          split_seed(split_seed(seed ^ 0x67C6697351FF4AEBULL, si), static_cast<std::uint64_t>(t));
      const SpectrumSample sample = sample_covariance_observations(half_zero_half_one(), n, N, s);
      const MomentSequence estimate = g2_estimate(empirical_moments(sample, 8), c);
      point.mse4 += partial_mse(estimate, truth, 4);
      point.mse8 += partial_mse(estimate, truth, 8);
    }
    point.mse4 /= trials;
    point.mse8 /= trials;
    out.push_back(point);
  }
  return out;
}

namespace {

Eigen::MatrixXcd cdma_covariance_sqrt(int n, int N, double sigma2,
                                      const AtomicMeasure& powers, std::uint64_t seed) {
  const Eigen::MatrixXcd w =
      standard_complex_gaussian(n, N, seed) / std::sqrt(static_cast<double>(n));
  const std::vector<double> p = realized_diagonal(powers, N);

  Eigen::MatrixXcd scaled = w;
  for (int j = 0; j < N; ++j) scaled.col(j) *= std::sqrt(p[static_cast<std::size_t>(j)]);
  Eigen::MatrixXcd theta = Eigen::MatrixXcd::Zero(n, n);
  theta.selfadjointView<Eigen::Lower>().rankUpdate(scaled, 1.0);
  theta += sigma2 * Eigen::MatrixXcd::Identity(n, n);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(theta);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("cdma_covariance_sqrt: eigensolver failed");
  const Eigen::VectorXd clamped = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * clamped.cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();
}

SpectrumSample scm_from_columns(const Eigen::MatrixXcd& y, int L, double sigma2,
                                std::uint64_t seed) {
  Eigen::MatrixXcd scm = Eigen::MatrixXcd::Zero(y.rows(), y.rows());
  scm.selfadjointView<Eigen::Lower>().rankUpdate(y.leftCols(L), 1.0 / L);
  SpectrumSample s;
  s.eigenvalues = hermitian_eigenvalues(scm);
  s.config = {"cdma_scm", static_cast<int>(y.rows()), L, sigma2, seed, 1};
  return s;
}

}  // namespace

SpectrumSample draw_cdma_scm(int n, int N, int L, double sigma2, const AtomicMeasure& powers,
                             std::uint64_t seed) {
  const Eigen::MatrixXcd sqrt_theta =
      cdma_covariance_sqrt(n, N, sigma2, powers, split_seed(seed, 0));
  const Eigen::MatrixXcd x = standard_complex_gaussian(n, L, split_seed(seed, 1));
  const Eigen::MatrixXcd y = sqrt_theta * x;
  return scm_from_columns(y, L, sigma2, seed);
}

std::vector<PowerStudyResult> power_estimation_study(int n, int N,
                                                     std::span<const int> lengths,
                                                     double sigma2,
                                                     const AtomicMeasure& powers, int k_atoms,
                                                     int trials, std::uint64_t seed) {
  if (lengths.empty()) return {};
  const int max_len = *std::max_element(lengths.begin(), lengths.end());
  const MomentSequence truth = moments_of(powers, k_atoms);

  std::vector<PowerStudyResult> out(lengths.size());
  for (std::size_t li = 0; li < lengths.size(); ++li) {
    out[li].observations = lengths[li];
    out[li].per_run_locations.reserve(static_cast<std::size_t>(trials));
  }

  for (int t = 0; t < trials; ++t) {
    const std::uint64_t s = split_seed(seed, static_cast<std::uint64_t>(t));
    const Eigen::MatrixXcd sqrt_theta =
        cdma_covariance_sqrt(n, N, sigma2, powers, split_seed(s, 0));
    const Eigen::MatrixXcd x = standard_complex_gaussian(n, max_len, split_seed(s, 1));
    const Eigen::MatrixXcd y = sqrt_theta * x;
    for (std::size_t li = 0; li < lengths.size(); ++li) {
      const int L = lengths[li];
      const SpectrumSample sample = scm_from_columns(y, L, sigma2, s);
      const MomentSequence em = empirical_moments(sample, k_atoms);
      const PowerEstimate estimate = estimate_power_distribution(em, n, N, L, sigma2, k_atoms);
      out[li].per_run_locations.push_back(estimate.locations);
      out[li].mean_moment_mse += moment_mse(estimate.power_moments, truth);
    }
  }
  for (auto& result : out) {
    result.mean_moment_mse /= trials;
    result.rank_average = rankwise_average(result.per_run_locations);
  }
  return out;
}

double UserCountStudyResult::within_fraction(const std::vector<int>& estimates, int truth,
                                             int tol) {
  if (estimates.empty()) return 0.0;
  int hits = 0;
  for (int e : estimates)
    if (std::abs(e - truth) <= tol) ++hits;
  return static_cast<double>(hits) / static_cast<double>(estimates.size());
}

UserCountStudyResult user_count_study(int n, int n_users, int L, double sigma2, int trials,
                                      std::uint64_t seed) {
  const AtomicMeasure unit_powers = AtomicMeasure::point_mass(1.0);
  UserCountStudyResult out;
  for (int t = 0; t < trials; ++t) {
    const SpectrumSample sample = draw_cdma_scm(n, n_users, L, sigma2, unit_powers,
                                                split_seed(seed, static_cast<std::uint64_t>(t)));
    const MomentSequence em = empirical_moments(sample, 4);
    out.free_estimates.push_back(estimate_user_count(em, n, L, sigma2, unit_powers).estimate);
    out.classical_estimates.push_back(classical_rank(sample, sigma2));
  }
  return out;
}

std::vector<SearchResult<double>> noise_variance_study(int n, int rank, double sigma2,
                                                       std::span<const int> lengths,
                                                       int trials,
                                                       const NoiseVarianceGrid& grid,
                                                       std::uint64_t seed) {
  if (lengths.empty()) return {};
  const int max_len = *std::max_element(lengths.begin(), lengths.end());
  std::vector<double> theta(static_cast<std::size_t>(n), sigma2);
  for (int i = 0; i < rank; ++i) theta[static_cast<std::size_t>(i)] = 1.0 + sigma2;
  const MomentSequence r_moments =
      moments_of(AtomicMeasure::zero_and_spike(static_cast<double>(rank) / n, 1.0), 4);

  std::vector<std::vector<double>> objective_sums(lengths.size());
  std::vector<SearchResult<double>> templates(lengths.size());

  for (int t = 0; t < trials; ++t) {
    Eigen::MatrixXcd x =
        standard_complex_gaussian(n, max_len, split_seed(seed, static_cast<std::uint64_t>(t)));
    for (int i = 0; i < n; ++i) x.row(i) *= std::sqrt(theta[static_cast<std::size_t>(i)]);
    for (std::size_t li = 0; li < lengths.size(); ++li) {
      const int L = lengths[li];
      Eigen::MatrixXcd scm = Eigen::MatrixXcd::Zero(n, n);
      scm.selfadjointView<Eigen::Lower>().rankUpdate(x.leftCols(L), 1.0 / L);
      SpectrumSample sample;
      sample.eigenvalues = hermitian_eigenvalues(scm);
      sample.config = {"scm", n, L, sigma2, seed, trials};
      const MomentSequence em = empirical_moments(sample, 4);
      const SearchResult<double> result =
          estimate_noise_variance(em, r_moments, static_cast<double>(n) / L, grid);
      if (objective_sums[li].empty()) {
        objective_sums[li].assign(result.trace.size(), 0.0);
        templates[li] = result;
      }
      for (std::size_t i = 0; i < result.trace.size(); ++i)
        objective_sums[li][i] += result.trace[i].second;
    }
  }

  std::vector<SearchResult<double>> out(lengths.size());
  for (std::size_t li = 0; li < lengths.size(); ++li) {
    SearchResult<double>& avg = out[li];
    avg.trace = templates[li].trace;
    for (std::size_t i = 0; i < avg.trace.size(); ++i) {
      avg.trace[i].second = objective_sums[li][i] / trials;
      if (i == 0 || avg.trace[i].second < avg.objective) {
        avg.objective = avg.trace[i].second;
        avg.estimate = avg.trace[i].first;
      }
    }
  }
  return out;
}

CovarianceStudyResult covariance_cdf_study(int n, int rank, double sigma2, int L, int k_atoms,
                                           int trials, std::uint64_t seed) {
  const double p = static_cast<double>(rank) / n;
  const AtomicMeasure theta_spec = AtomicMeasure(
      {{sigma2, 1.0 - p}, {1.0 + sigma2, p}});
  CovarianceStudyResult out;
  out.mean_moments.assign(static_cast<std::size_t>(k_atoms), 0.0);
  for (int t = 0; t < trials; ++t) {
    const SpectrumSample sample = sample_covariance_observations(
        theta_spec, n, L, split_seed(seed, static_cast<std::uint64_t>(t)));
    const MomentSequence em = empirical_moments(sample, k_atoms);
    const MomentSequence r =
        estimate_channel_covariance(em, static_cast<double>(n) / L, sigma2);
    for (int k = 0; k < k_atoms; ++k)
      out.mean_moments[static_cast<std::size_t>(k)] += r.values()[static_cast<std::size_t>(k)];
    std::vector<double> sums(static_cast<std::size_t>(k_atoms));
    for (int k = 0; k < k_atoms; ++k)
      sums[static_cast<std::size_t>(k)] = k_atoms * r.values()[static_cast<std::size_t>(k)];
    out.per_run_locations.push_back(
        newton_girard_eigenvalues(sums, k_atoms, RootPolicy::kClampWithDiagnostics)
            .eigenvalues);
  }
  for (double& v : out.mean_moments) v /= trials;
  out.rank_average = rankwise_average(out.per_run_locations);
  return out;
}

CapacityStudyResult capacity_study(int n, std::span<const double> h_spectrum, double sigma2,
                                   double rho, int blocks, int trials, std::uint64_t seed) {
  const AtomicMeasure spec = AtomicMeasure::equal_weights(h_spectrum);
  CapacityStudyResult out;
  for (double lam : h_spectrum) out.true_capacity += std::log2(1.0 + rho * lam);
  out.true_capacity /= static_cast<double>(h_spectrum.size());

  const int k = static_cast<int>(h_spectrum.size());
  for (int t = 0; t < trials; ++t) {
    // block-averaged measurement: info-plus-noise at N = n with variance sigma2/blocks
    const SpectrumSample sample = sample_info_plus_noise(
        spec, n, n, sigma2 / blocks, split_seed(seed, static_cast<std::uint64_t>(t)));
    const MomentSequence em = empirical_moments(sample, k);
    const CapacityEstimate est = estimate_capacity(em, n, blocks, sigma2, rho);
    out.mean_abs_error += std::abs(est.capacity - out.true_capacity);
  }
  out.mean_abs_error /= trials;
  return out;
}

// ---------------------------------------------------------------- figures

namespace {

std::string density_csv_string(const DensityCurve& curve) {
  std::ostringstream ss;
  write_density_csv(ss, curve);
  return ss.str();
}

std::string histogram_csv_string(const Histogram& h) {
  std::ostringstream ss;
  write_histogram_csv(ss, h);
  return ss.str();
}

void fig_mp_laws(ExperimentConfig& cfg, ExperimentWriter& out) {
  const auto cs = cfg.get_double_list("c_values", "0.1,0.5,0.9");
  const int points = cfg.get_int("grid_points", 600);
  std::ostringstream results;
  results << "c,support_lo,support_hi,atom_at_zero,mass\n";
  for (double c : cs) {
    const MarchenkoPastur law(c);
    const auto grid = linspace(0.0, law.support_hi() * 1.02, static_cast<std::size_t>(points));
    const DensityCurve curve = mp_density(c, grid);
    out.add_file("mp_c" + format_double(c) + ".csv", density_csv_string(curve));
    results << format_double(c) << ',' << format_double(law.support_lo()) << ','
            << format_double(law.support_hi()) << ',' << format_double(law.atom_at_zero())
            << ',' << format_double(curve.mass()) << '\n';
  }
  out.add_file("results.csv", results.str());
}

void fig_exact_conv(ExperimentConfig& cfg, ExperimentWriter& out) {
  const int n = cfg.get_int("n", 512);
  const int bins = cfg.get_int("bins", 40);
  const int points = cfg.get_int("grid_points", 800);
  const std::uint64_t seed = cfg.get_u64("seed", 1);
  const double p = cfg.get_double("p", 0.5);
  const double lambda = cfg.get_double("lambda", 1.0);
  const auto cs = cfg.get_double_list("c_values", "0.5,0.25");

  std::ostringstream results;
  results << "c,L,p_recovered,lambda_recovered,p_hist,lambda_hist\n";
  for (std::size_t ci = 0; ci < cs.size(); ++ci) {
    const double c = cs[ci];
    const TwoAtomParams params(p, lambda, c);
    const auto support = conv_support(params);
    const auto grid = linspace(support.lo, support.hi, static_cast<std::size_t>(points));
    const DensityCurve curve = conv_density(params, grid);
    out.add_file("exact_c" + format_double(c) + ".csv", density_csv_string(curve));

    const int L = static_cast<int>(std::lround(n / c));
    const SpectrumSample sample = sample_product(AtomicMeasure::zero_and_spike(p, lambda), n,
                                                 L, split_seed(seed, ci));
    const double hist_lo = std::max(0.5 * support.lo, 1e-3);
    const Histogram hist = spectrum_histogram(sample, bins, hist_lo, support.hi * 1.15);
    out.add_file("hist_c" + format_double(c) + ".csv", histogram_csv_string(hist));

    const TwoAtomParams exact_rec = recover_two_atom(curve, c);
    const DensityCurve hist_density =
        histogram_density(sample, bins, hist_lo, support.hi * 1.15);
    const TwoAtomParams hist_rec =
        recover_two_atom(hist_density, c, RecoverOptions{false, 0.05});
    results << format_double(c) << ',' << L << ',' << format_double(exact_rec.p) << ','
            << format_double(exact_rec.lambda) << ',' << format_double(hist_rec.p) << ','
            << format_double(hist_rec.lambda) << '\n';
  }
  out.add_file("results.csv", results.str());
}

void write_mse_trend(ExperimentWriter& out, const std::vector<MseTrendPoint>& trend) {
  std::ostringstream results;
  results << "n,mse_4_moments,mse_8_moments\n";
  for (const auto& pt : trend)
    results << pt.n << ',' << format_double(pt.mse4) << ',' << format_double(pt.mse8) << '\n';
  out.add_file("results.csv", results.str());
}

void fig_method_b(ExperimentConfig& cfg, ExperimentWriter& out) {
  const auto sizes = cfg.get_int_list("sizes", "32,128,512");
  const int trials = cfg.get_int("trials", 50);
  const double c = cfg.get_double("c", 0.5);
  const std::uint64_t seed = cfg.get_u64("seed", 1);
  write_mse_trend(out, method_b_mse_study(sizes, trials, c, seed));
}

void fig_g2_mse(ExperimentConfig& cfg, ExperimentWriter& out) {
  const auto sizes = cfg.get_int_list("sizes", "32,128,512");
  const int trials = cfg.get_int("trials", 50);
  const double c = cfg.get_double("c", 0.5);
  const std::uint64_t seed = cfg.get_u64("seed", 1);
  write_mse_trend(out, g2_mse_study(sizes, trials, c, seed));
}

void fig_splitting(ExperimentConfig& cfg, ExperimentWriter& out) {
  const bool full = cfg.get_bool("full_scale", false);
  const int n = cfg.get_int("n", full ? 1536 : 512);
  const int bins = cfg.get_int("bins", 64);
  const std::uint64_t seed = cfg.get_u64("seed", 1);
  const auto cs = cfg.get_double_list("c_values", "0.2,0.05");
  const AtomicMeasure mu = AtomicMeasure::equal_weights(std::vector<double>{1.0, 3.0, 4.0});

  std::ostringstream results;
  results << "c,L,hist_file,exact_file\n";
  for (std::size_t ci = 0; ci < cs.size(); ++ci) {
    const double c = cs[ci];
    const int L = static_cast<int>(std::lround(n / c));
    const SpectrumSample sample = sample_product(mu, n, L, split_seed(seed, ci));
    const Histogram hist = spectrum_histogram(sample, bins, 0.0, 6.0);
    const std::string hist_name = "hist_c" + format_double(c) + ".csv";
    out.add_file(hist_name, histogram_csv_string(hist));

    const auto grid = linspace(0.05, 6.0, 600);
    const DensityCurve exact = eta_convolution_density(mu, c, grid, 1e-5);
    const std::string exact_name = "exact_c" + format_double(c) + ".csv";
    out.add_file(exact_name, density_csv_string(exact));
    results << format_double(c) << ',' << L << ',' << hist_name << ',' << exact_name << '\n';
  }
  out.add_file("results.csv", results.str());
}

void fig_power_cdf(ExperimentConfig& cfg, ExperimentWriter& out) {
  const int n = cfg.get_int("n", 256);
  const int users = cfg.get_int("N", 36);
  const double sigma2 = cfg.get_double("sigma2", 0.1);
  const int trials = cfg.get_int("trials", 100);
  const int k_atoms = cfg.get_int("moments", 3);
  const std::uint64_t seed = cfg.get_u64("seed", 1);
  const auto lengths = cfg.get_int_list("L_values", "256,512,1024,2048");
  const AtomicMeasure powers =
      AtomicMeasure::equal_weights(std::vector<double>{0.5, 1.0, 1.5});

  const auto studies =
      power_estimation_study(n, users, lengths, sigma2, powers, k_atoms, trials, seed);

  std::ostringstream results;
  results << "L,moment_mse";
  for (int k = 1; k <= k_atoms; ++k) results << ",atom_" << k;
  results << '\n';
  for (const PowerStudyResult& study : studies) {
    results << study.observations << ',' << format_double(study.mean_moment_mse);
    for (double a : study.rank_average) results << ',' << format_double(a);
    results << '\n';

    // pooled CDF of the per-run recovered powers
    std::vector<double> pooled;
    for (const auto& run : study.per_run_locations)
      pooled.insert(pooled.end(), run.begin(), run.end());
    std::sort(pooled.begin(), pooled.end());
    std::ostringstream cdf;
    cdf << "value,cdf\n";
    for (std::size_t i = 0; i < pooled.size(); ++i)
      cdf << format_double(pooled[i]) << ','
          << format_double(static_cast<double>(i + 1) / pooled.size()) << '\n';
    out.add_file("cdf_L" + std::to_string(study.observations) + ".csv", cdf.str());
  }
  out.add_file("results.csv", results.str());
}

void fig_user_count(ExperimentConfig& cfg, ExperimentWriter& out) {
  const bool full = cfg.get_bool("full_scale", false);
  const int n = cfg.get_int("n", 256);
  const int users = cfg.get_int("N", 36);
  const double sigma2 = cfg.get_double("sigma2", 0.1);
  const int trials = cfg.get_int("trials", 25);
  const std::uint64_t seed = cfg.get_u64("seed", 1);
  const auto lengths =
      cfg.get_int_list("L_values", full ? "256,512,1024,2048,4000" : "256,512,1024,2048");

  std::ostringstream results;
  results << "L,free_mean,free_within2,classical_mean,classical_within2\n";
  for (std::size_t li = 0; li < lengths.size(); ++li) {
    const int L = lengths[li];
    const UserCountStudyResult study =
        user_count_study(n, users, L, sigma2, trials, split_seed(seed, li));
    double free_mean = 0.0, classical_mean = 0.0;
    for (int e : study.free_estimates) free_mean += e;
    for (int e : study.classical_estimates) classical_mean += e;
    free_mean /= trials;
    classical_mean /= trials;
    results << L << ',' << format_double(free_mean) << ','
            << format_double(UserCountStudyResult::within_fraction(study.free_estimates,
                                                                   users, 2))
            << ',' << format_double(classical_mean) << ','
            << format_double(UserCountStudyResult::within_fraction(study.classical_estimates,
                                                                   users, 2))
            << '\n';
  }
  out.add_file("results.csv", results.str());
}

void fig_covariance_cdf(ExperimentConfig& cfg, ExperimentWriter& out) {
  const int n = cfg.get_int("n", 256);
  const int rank = cfg.get_int("rank", 128);
  const double sigma2 = cfg.get_double("sigma2", 0.1);
  const int trials = cfg.get_int("trials", 100);
  const int k_atoms = cfg.get_int("moments", 4);
  const std::uint64_t seed = cfg.get_u64("seed", 1);
  const auto lengths = cfg.get_int_list("L_values", "128,512");

  std::ostringstream results;
  results << "L";
  for (int k = 1; k <= k_atoms; ++k) results << ",moment_" << k;
  for (int k = 1; k <= k_atoms; ++k) results << ",atom_" << k;
  results << '\n';
  for (std::size_t li = 0; li < lengths.size(); ++li) {
    const int L = lengths[li];
    const CovarianceStudyResult study =
        covariance_cdf_study(n, rank, sigma2, L, k_atoms, trials, split_seed(seed, li));
    results << L;
    for (double m : study.mean_moments) results << ',' << format_double(m);
    for (double a : study.rank_average) results << ',' << format_double(a);
    results << '\n';

    std::vector<double> pooled;
    for (const auto& run : study.per_run_locations)
      pooled.insert(pooled.end(), run.begin(), run.end());
    std::sort(pooled.begin(), pooled.end());
    std::ostringstream cdf;
    cdf << "value,cdf\n";
    for (std::size_t i = 0; i < pooled.size(); ++i)
      cdf << format_double(pooled[i]) << ','
          << format_double(static_cast<double>(i + 1) / pooled.size()) << '\n';
    out.add_file("cdf_L" + std::to_string(L) + ".csv", cdf.str());
  }
  out.add_file("results.csv", results.str());
}

void fig_noise_var(ExperimentConfig& cfg, ExperimentWriter& out) {
  const int n = cfg.get_int("n", 256);
  const int rank = cfg.get_int("rank", 128);
  const double sigma2 = cfg.get_double("sigma2", 0.1);
  const int trials = cfg.get_int("trials", 10);
  const std::uint64_t seed = cfg.get_u64("seed", 1);
  const auto lengths = cfg.get_int_list("L_values", "128,512");
  const double sigma_ref = std::sqrt(sigma2);
  NoiseVarianceGrid grid = NoiseVarianceGrid::around_reference(sigma_ref);
  grid.lo = cfg.get_double("grid_lo", grid.lo);
  grid.hi = cfg.get_double("grid_hi", grid.hi);
  grid.step = cfg.get_double("grid_step", grid.step);

  const auto curves = noise_variance_study(n, rank, sigma2, lengths, trials, grid, seed);

  std::ostringstream results;
  results << "L,eta_estimate,objective_min\n";
  for (std::size_t li = 0; li < lengths.size(); ++li) {
    results << lengths[li] << ',' << format_double(curves[li].estimate) << ','
            << format_double(curves[li].objective) << '\n';
    std::ostringstream trace;
    write_search_trace_csv(trace, curves[li]);
    out.add_file("mse_L" + std::to_string(lengths[li]) + ".csv", trace.str());
  }
  out.add_file("results.csv", results.str());
}

void fig_sensors(ExperimentConfig& cfg, ExperimentWriter& out) {
  const int rank = cfg.get_int("rank", 8);
  const double c = cfg.get_double("c", 0.5);
  const int bins = cfg.get_int("bins", 50);
  const std::uint64_t seed = cfg.get_u64("seed", 1);
  const auto sizes = cfg.get_int_list("sizes", "64,512");

  std::ostringstream results;
  results << "n,L,hist_file\n";
  for (std::size_t si = 0; si < sizes.size(); ++si) {
    const int n = sizes[si];
    const int L = static_cast<int>(std::lround(n / c));
    const double p = static_cast<double>(rank) / n;
    const SpectrumSample sample = sample_covariance_observations(
        AtomicMeasure::zero_and_spike(p, 1.0), n, L, split_seed(seed, si));
    const Histogram hist =
        spectrum_histogram(sample, bins, 0.0, sample.eigenvalues.back() * 1.05);
    const std::string name = "hist_n" + std::to_string(n) + ".csv";
    out.add_file(name, histogram_csv_string(hist));
    results << n << ',' << L << ',' << name << '\n';
  }
  out.add_file("results.csv", results.str());
}

void fig_capacity(ExperimentConfig& cfg, ExperimentWriter& out) {
  const int n = cfg.get_int("n", 126);
  const double sigma2 = cfg.get_double("sigma2", 0.01);
  const double rho = cfg.get_double("rho", 1.0);
  const int trials = cfg.get_int("trials", 20);
  const std::uint64_t seed = cfg.get_u64("seed", 1);
  const auto blocks = cfg.get_int_list("blocks", "1,4");
  const auto spectrum = cfg.get_double_list("h_spectrum", "0.5,1,1.5");

  std::ostringstream results;
  results << "blocks,true_capacity,mean_abs_error\n";
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    const CapacityStudyResult study =
        capacity_study(n, spectrum, sigma2, rho, blocks[bi], trials, split_seed(seed, bi));
    results << blocks[bi] << ',' << format_double(study.true_capacity) << ','
            << format_double(study.mean_abs_error) << '\n';
  }
  out.add_file("results.csv", results.str());
}

}  // namespace

const std::map<std::string, ExperimentFn>& experiment_registry() {
  static const std::map<std::string, ExperimentFn> registry = {
      {"fig-mp-laws", fig_mp_laws},
      {"fig-exact-conv", fig_exact_conv},
      {"fig-method-b", fig_method_b},
      {"fig-g2-mse", fig_g2_mse},
      {"fig-splitting", fig_splitting},
      {"fig-power-cdf", fig_power_cdf},
      {"fig-user-count", fig_user_count},
      {"fig-covariance-cdf", fig_covariance_cdf},
      {"fig-noise-var", fig_noise_var},
      {"fig-sensors", fig_sensors},
      {"fig-capacity", fig_capacity},
  };
  return registry;
}

std::vector<std::string> run_experiment(const std::string& name, ExperimentConfig& cfg) {
  const auto& registry = experiment_registry();
  const auto it = registry.find(name);
  if (it == registry.end()) throw std::invalid_argument("unknown experiment: " + name);

  cfg.set("experiment", name);
  const std::string out_dir = cfg.get_string("out", name);

  ExperimentWriter writer;
  it->second(cfg, writer);

  const std::string echo = cfg.echo();
  char hash_hex[24];
  std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                static_cast<unsigned long long>(fnv1a_hash(echo)));
  const std::string hash_line = std::string("# config-hash=") + hash_hex + "\n";

  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  std::vector<std::string> written;
  try {
    const auto flush = [&](const std::string& nm, const std::string& content) {
      const fs::path path = fs::path(out_dir) / nm;
      std::ofstream f(path, std::ios::binary | std::ios::trunc);
      if (!f) throw std::runtime_error("cannot open output file " + path.string());
      f << content;
      f.close();
      if (!f) throw std::runtime_error("failed writing output file " + path.string());
      written.push_back(path.string());
    };
    flush("config.echo", echo);
    for (const auto& [nm, content] : writer.files()) {
      const bool is_csv = nm.size() > 4 && nm.rfind(".csv") == nm.size() - 4;
      flush(nm, is_csv ? hash_line + content : content);
    }
  } catch (...) {
    for (const auto& path : written) {
      std::error_code ec;
      fs::remove(path, ec);
    }
    throw;
  }
  return written;
}

}  // namespace freedec
