#include <CLI11.hpp>
#include <complex>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "freedec/closedform.hpp"
#include "freedec/estimators.hpp"
#include "freedec/experiments.hpp"
#include "freedec/freeconv.hpp"
#include "freedec/io.hpp"
#include "freedec/measures.hpp"
#include "freedec/rmt.hpp"

namespace {

using namespace freedec;

MomentSequence parse_moment_string(const std::string& text) {
  std::vector<double> values;
  std::string cleaned = text;
  for (char& ch : cleaned)
    if (ch == ',') ch = ' ';
  std::istringstream ss(cleaned);
  double v = 0.0;
  while (ss >> v) values.push_back(v);
  if (values.empty()) throw std::runtime_error("could not parse any moments from: " + text);
  return MomentSequence(std::move(values));
}

AtomicMeasure load_measure(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open measure file: " + path);
  return read_measure(f);
}

SpectrumSample load_spectrum(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open spectrum file: " + path);
  return read_spectrum_csv(f);
}

DensityCurve load_density(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open density file: " + path);
  return read_density_csv(f);
}

struct GridSpec {
  double lo = 0.0;
  double hi = 1.0;
  int points = 500;
};

GridSpec parse_grid(const std::string& text) {
  GridSpec g;
  if (std::sscanf(text.c_str(), "%lf:%lf:%d", &g.lo, &g.hi, &g.points) != 3)
    throw std::runtime_error("grid spec must be lo:hi:points, got: " + text);
  if (!(g.hi > g.lo) || g.points < 2) throw std::runtime_error("invalid grid spec: " + text);
  return g;
}

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream f(out_path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open output file: " + out_path);
  f << content;
}

/// Moments from either a measure file (evaluated at the given order) or an
/// explicit moment string.
MomentSequence input_moments(const std::string& measure_path, const std::string& moment_text,
                             int order) {
  if (!measure_path.empty() && !moment_text.empty())
    throw std::runtime_error("give either a measure file or a moment string, not both");
  if (!measure_path.empty()) return moments_of(load_measure(measure_path), order);
  if (!moment_text.empty()) return parse_moment_string(moment_text);
  throw std::runtime_error("no input: use --measure or --moments");
}

void print_recovered_atoms(const MomentSequence& m, int k_atoms) {
  std::vector<double> sums(static_cast<std::size_t>(k_atoms));
  for (int k = 0; k < k_atoms; ++k)
    sums[static_cast<std::size_t>(k)] = k_atoms * m.values()[static_cast<std::size_t>(k)];
  const EigenvalueRecovery rec =
      newton_girard_eigenvalues(sums, k_atoms, RootPolicy::kClampWithDiagnostics);
  std::cout << "atoms";
  for (double v : rec.eigenvalues) std::cout << ' ' << format_double(v);
  std::cout << '\n';
  if (rec.clamped_negative || rec.clamped_complex)
    std::cerr << "warning: clamped " << rec.clamped_negative << " negative and "
              << rec.clamped_complex << " complex roots\n";
}

int run(int argc, char** argv) {
  CLI::App app{"Free (de)convolution of spectral measures and the derived estimators"};
  app.require_subcommand(1);
  app.set_config("--config")->configurable(false);
  app.fallthrough();

  std::uint64_t seed = 1;
  int trials = 0;   // 0 = per-experiment default
  int moments = 0;  // 0 = per-subcommand default
  std::string out_path;
  bool full_scale = false;
  app.add_option("--seed", seed, "master random seed")->configurable(true);
  app.add_option("--trials", trials, "Monte Carlo trials (0 = experiment default)");
  app.add_option("--moments", moments, "moment truncation order");
  app.add_option("--out", out_path, "output file or directory");
  app.add_flag("--full-scale", full_scale, "use full-size experiment parameters");

  // --- convolve / deconvolve -------------------------------------------
  std::string cv_measure, cv_moments, cv_other_measure, cv_other_moments;
  std::optional<double> cv_shift, cv_mp;
  auto* convolve = app.add_subcommand("convolve", "additive/shift/MP convolution of moments");
  convolve->add_option("--measure", cv_measure, "measure file for the left operand");
  convolve->add_option("--moments", cv_moments, "moment list for the left operand");
  convolve->add_option("--add", cv_other_measure, "measure file to add freely");
  convolve->add_option("--add-moments", cv_other_moments, "moment list to add freely");
  convolve->add_option("--shift", cv_shift, "scalar spectrum shift s (moments of a + sI)");
  convolve->add_option("--mp-c", cv_mp, "multiply freely by the MP law with this ratio");

  std::string dc_measure, dc_moments, dc_other_measure, dc_other_moments;
  std::optional<double> dc_shift, dc_mp;
  int dc_atoms = 0;
  auto* deconvolve =
      app.add_subcommand("deconvolve", "additive/shift/MP deconvolution of moments");
  deconvolve->add_option("--measure", dc_measure, "measure file for the left operand");
  deconvolve->add_option("--moments", dc_moments, "moment list for the left operand");
  deconvolve->add_option("--sub", dc_other_measure, "measure file to remove freely");
  deconvolve->add_option("--sub-moments", dc_other_moments, "moment list to remove freely");
  deconvolve->add_option("--shift", dc_shift, "remove a scalar s2 from the spectrum");
  deconvolve->add_option("--mp-c", dc_mp, "divide freely by the MP law with this ratio");
  deconvolve->add_option("--atoms", dc_atoms, "also recover this many equal-mass atoms");

  // --- density -----------------------------------------------------------
  bool de_two_atom = false, de_mp = false, de_deconv = false;
  double de_p = 0.5, de_lambda = 1.0, de_c = 0.5, de_omega = 0.0;
  std::string de_measure, de_grid;
  auto* density = app.add_subcommand("density", "closed-form or solver densities as CSV");
  density->add_flag("--two-atom", de_two_atom, "two-atom measure convolved with MP");
  density->add_flag("--deconv", de_deconv, "formal deconvolution instead of convolution");
  density->add_flag("--mp", de_mp, "Marchenko-Pastur density");
  density->add_option("--measure", de_measure, "discrete measure file (eta-equation solver)");
  density->add_option("--p", de_p, "two-atom mass at lambda");
  density->add_option("--lambda", de_lambda, "two-atom spike location");
  density->add_option("--c", de_c, "MP aspect ratio");
  density->add_option("--grid", de_grid, "grid as lo:hi:points (default spans the support)");
  density->add_option("--omega", de_omega, "inversion offset for the solver route");

  // --- recover -----------------------------------------------------------
  std::string rc_density;
  double rc_c = 0.5;
  std::optional<double> rc_threshold;
  auto* recover = app.add_subcommand("recover", "two-atom parameters from a density CSV");
  recover->add_option("--density", rc_density, "density CSV file")->required();
  recover->add_option("--c", rc_c, "MP aspect ratio")->required();
  recover->add_option("--threshold", rc_threshold,
                      "measure width where density exceeds this fraction of the peak "
                      "(default: use the declared support)");

  // --- g2 ------------------------------------------------------------------
  std::string g2_spectrum, g2_measure, g2_moments;
  double g2_c = 0.0;
  int g2_atoms = 0;
  auto* g2 = app.add_subcommand("g2", "covariance moments from SCM moments");
  g2->add_option("--spectrum", g2_spectrum, "spectrum CSV of the SCM");
  g2->add_option("--measure", g2_measure, "measure file for the SCM spectrum");
  g2->add_option("--moments", g2_moments, "SCM moment list");
  g2->add_option("--c", g2_c, "aspect ratio n/N (default: from spectrum header)");
  g2->add_option("--atoms", g2_atoms, "also recover this many equal-mass atoms");

  // --- estimate-power ------------------------------------------------------
  std::string ep_spectrum;
  int ep_n = 0, ep_users = 0, ep_L = 0, ep_atoms = 3;
  double ep_sigma2 = 0.1;
  auto* epower = app.add_subcommand("estimate-power", "user power distribution from an SCM");
  epower->add_option("--spectrum", ep_spectrum, "spectrum CSV of the SCM")->required();
  epower->add_option("--n", ep_n, "spreading length (default: from header)");
  epower->add_option("--users", ep_users, "number of users N")->required();
  epower->add_option("--L", ep_L, "number of observations (default: from header)");
  epower->add_option("--sigma2", ep_sigma2, "noise variance");
  epower->add_option("--atoms", ep_atoms, "number of power atoms to recover");

  // --- estimate-users --------------------------------------------------------
  std::string eu_spectrum, eu_power_measure, eu_trace;
  int eu_n = 0, eu_L = 0;
  double eu_sigma2 = 0.1;
  auto* eusers = app.add_subcommand("estimate-users", "best-match user count from an SCM");
  eusers->add_option("--spectrum", eu_spectrum, "spectrum CSV of the SCM")->required();
  eusers->add_option("--n", eu_n, "spreading length (default: from header)");
  eusers->add_option("--L", eu_L, "number of observations (default: from header)");
  eusers->add_option("--sigma2", eu_sigma2, "noise variance");
  eusers->add_option("--power-measure", eu_power_measure,
                     "assumed power distribution (default: unit point mass)");
  eusers->add_option("--trace", eu_trace, "write the candidate,objective trace CSV here");

  // --- estimate-noise -------------------------------------------------------
  std::string en_spectrum, en_measure, en_grid, en_trace;
  int en_L = 0;
  std::optional<double> en_sigma_ref;
  auto* enoise = app.add_subcommand("estimate-noise", "noise std-dev grid search");
  enoise->add_option("--spectrum", en_spectrum, "spectrum CSV of the SCM")->required();
  enoise->add_option("--measure", en_measure, "true covariance measure file")->required();
  enoise->add_option("--L", en_L, "number of observations (default: from header)");
  enoise->add_option("--grid", en_grid, "candidate grid lo:hi:step");
  enoise->add_option("--sigma-ref", en_sigma_ref, "center the default grid on this std-dev");
  enoise->add_option("--trace", en_trace, "write the candidate,objective trace CSV here");

  // --- estimate-covariance ----------------------------------------------------
  std::string ec_spectrum;
  int ec_L = 0, ec_atoms = 0;
  double ec_sigma2 = 0.1;
  auto* ecov = app.add_subcommand("estimate-covariance", "channel covariance moments");
  ecov->add_option("--spectrum", ec_spectrum, "spectrum CSV of the SCM")->required();
  ecov->add_option("--L", ec_L, "number of observations (default: from header)");
  ecov->add_option("--sigma2", ec_sigma2, "noise variance");
  ecov->add_option("--atoms", ec_atoms, "also recover this many equal-mass atoms");

  // --- capacity -----------------------------------------------------------------
  std::string cp_spectrum;
  int cp_blocks = 1;
  double cp_sigma2 = 0.01, cp_rho = 1.0;
  bool cp_natural = false;
  auto* capacity = app.add_subcommand("capacity", "channel capacity from measured moments");
  capacity->add_option("--spectrum", cp_spectrum, "spectrum CSV of the measured channel")
      ->required();
  capacity->add_option("--blocks", cp_blocks, "number of averaged measurement blocks");
  capacity->add_option("--sigma2", cp_sigma2, "measurement noise variance");
  capacity->add_option("--rho", cp_rho, "signal-to-noise ratio");
  capacity->add_flag("--natural-log", cp_natural, "report nats instead of bits");

  // --- simulate ------------------------------------------------------------------
  std::string sim_ensemble = "wishart", sim_measure;
  int sim_n = 64, sim_cols = 128;
  double sim_sigma2 = 0.0;
  auto* simulate = app.add_subcommand("simulate", "draw a spectrum and write it as CSV");
  simulate
      ->add_option("--ensemble", sim_ensemble,
                   "wishart | product | info-plus-noise | scm")
      ->check(CLI::IsMember({"wishart", "product", "info-plus-noise", "scm"}));
  simulate->add_option("--n", sim_n, "matrix dimension");
  simulate->add_option("--cols,--N,--L", sim_cols, "second dimension (N or L)");
  simulate->add_option("--measure", sim_measure, "spectrum/covariance measure file");
  simulate->add_option("--sigma2", sim_sigma2, "noise variance");

  // --- fig-* ---------------------------------------------------------------------
  std::vector<std::string> fig_sets;
  std::string fig_config;
  std::vector<CLI::App*> fig_commands;
  for (const auto& [name, fn] : experiment_registry()) {
    auto* sub = app.add_subcommand(name, "experiment: writes CSV artifacts to --out");
    sub->add_option("--set", fig_sets, "extra config entries as key=value")
        ->take_all();
    sub->add_option("--fig-config", fig_config, "flat key=value config file");
    fig_commands.push_back(sub);
  }

  CLI11_PARSE(app, argc, argv);

  const auto order_or = [&](int fallback) { return moments > 0 ? moments : fallback; };

  if (convolve->parsed()) {
    MomentSequence m = input_moments(cv_measure, cv_moments, order_or(kDefaultMomentOrder));
    if (!cv_other_measure.empty() || !cv_other_moments.empty()) {
      const MomentSequence other = input_moments(cv_other_measure, cv_other_moments,
                                                 static_cast<int>(m.order()));
      m = additive_free_convolve(m, other.truncated(m.order()));
    }
    if (cv_shift) m = shift_moments(m, *cv_shift);
    if (cv_mp) m = mult_mp_convolve(m, *cv_mp);
    std::ostringstream ss;
    write_moments(ss, m);
    emit(out_path, ss.str());
    return 0;
  }

  if (deconvolve->parsed()) {
    MomentSequence m = input_moments(dc_measure, dc_moments, order_or(kDefaultMomentOrder));
    if (!dc_other_measure.empty() || !dc_other_moments.empty()) {
      const MomentSequence other = input_moments(dc_other_measure, dc_other_moments,
                                                 static_cast<int>(m.order()));
      m = additive_free_deconvolve(m, other.truncated(m.order()));
    }
    if (dc_shift) m = shift_deconvolve(m, *dc_shift);
    if (dc_mp) m = mult_mp_deconvolve(m, *dc_mp);
    std::ostringstream ss;
    write_moments(ss, m);
    emit(out_path, ss.str());
    if (dc_atoms > 0) print_recovered_atoms(m, dc_atoms);
    return 0;
  }

  if (density->parsed()) {
    DensityCurve curve = [&] {
      if (de_mp) {
        const MarchenkoPastur law(de_c);
        GridSpec g{0.0, law.support_hi() * 1.02, 600};
        if (!de_grid.empty()) g = parse_grid(de_grid);
        return mp_density(de_c, linspace(g.lo, g.hi, static_cast<std::size_t>(g.points)));
      }
      if (de_two_atom) {
        const TwoAtomParams params(de_p, de_lambda, de_c);
        const SupportInterval s = de_deconv ? deconv_support(params) : conv_support(params);
        GridSpec g{s.lo, s.hi, 800};
        if (!de_grid.empty()) g = parse_grid(de_grid);
        const auto grid = linspace(g.lo, g.hi, static_cast<std::size_t>(g.points));
        if (de_deconv) {
          if (params.deconv_support_crosses_zero())
            std::cerr << "warning: formal deconvolution support crosses zero or uses an "
                         "extrapolated branch rule\n";
          return deconv_density(params, grid);
        }
        return conv_density(params, grid);
      }
      if (!de_measure.empty()) {
        const AtomicMeasure mu = load_measure(de_measure);
        GridSpec g{1e-3, mu.max_location() * 3.0, 600};
        if (!de_grid.empty()) g = parse_grid(de_grid);
        const auto grid = linspace(g.lo, g.hi, static_cast<std::size_t>(g.points));
        const double omega =
            de_omega > 0.0 ? de_omega : default_inversion_omega(g.hi - g.lo);
        return eta_convolution_density(mu, de_c, grid, omega);
      }
      throw std::runtime_error("density: choose --two-atom, --mp, or --measure");
    }();
    std::ostringstream ss;
    write_density_csv(ss, curve);
    emit(out_path, ss.str());
    return 0;
  }

  if (recover->parsed()) {
    RecoverOptions options;
    if (rc_threshold) {
      options.use_declared_support = false;
      options.threshold_rel = *rc_threshold;
    }
    const TwoAtomParams params = recover_two_atom(load_density(rc_density), rc_c, options);
    std::cout << "p " << format_double(params.p) << '\n'
              << "lambda " << format_double(params.lambda) << '\n'
              << "c " << format_double(params.c) << '\n';
    return 0;
  }

  if (g2->parsed()) {
    MomentSequence scm = [&] {
      if (!g2_spectrum.empty()) {
        const SpectrumSample s = load_spectrum(g2_spectrum);
        if (g2_c == 0.0 && s.config.cols > 0) g2_c = s.config.aspect_ratio();
        return empirical_moments(s, order_or(kDefaultMomentOrder));
      }
      return input_moments(g2_measure, g2_moments, order_or(kDefaultMomentOrder));
    }();
    if (!(g2_c > 0.0)) throw std::runtime_error("g2: aspect ratio --c required");
    const MomentSequence estimate = g2_estimate(scm, g2_c);
    std::ostringstream ss;
    write_moments(ss, estimate);
    emit(out_path, ss.str());
    if (g2_atoms > 0) print_recovered_atoms(estimate, g2_atoms);
    return 0;
  }

  if (epower->parsed()) {
    const SpectrumSample s = load_spectrum(ep_spectrum);
    if (ep_n == 0) ep_n = s.config.n;
    if (ep_L == 0) ep_L = s.config.cols;
    if (ep_L == 0) throw std::runtime_error("estimate-power: --L required");
    const MomentSequence em = empirical_moments(s, ep_atoms);
    const PowerEstimate estimate =
        estimate_power_distribution(em, ep_n, ep_users, ep_L, ep_sigma2, ep_atoms);
    std::cout << "atoms";
    for (double v : estimate.locations) std::cout << ' ' << format_double(v);
    std::cout << '\n' << "moments";
    for (double v : estimate.power_moments.values()) std::cout << ' ' << format_double(v);
    std::cout << '\n'
              << "hankel_ok " << (estimate.hankel_ok ? "true" : "false") << '\n'
              << "clamped_negative " << estimate.clamped_negative << '\n'
              << "clamped_complex " << estimate.clamped_complex << '\n';
    return 0;
  }

  if (eusers->parsed()) {
    const SpectrumSample s = load_spectrum(eu_spectrum);
    if (eu_n == 0) eu_n = s.config.n;
    if (eu_L == 0) eu_L = s.config.cols;
    if (eu_L == 0) throw std::runtime_error("estimate-users: --L required");
    const AtomicMeasure powers = eu_power_measure.empty()
                                     ? AtomicMeasure::point_mass(1.0)
                                     : load_measure(eu_power_measure);
    const MomentSequence em = empirical_moments(s, 4);
    const SearchResult<int> result = estimate_user_count(em, eu_n, eu_L, eu_sigma2, powers);
    write_search_result(std::cout, result);
    if (!eu_trace.empty()) {
      std::ostringstream ss;
      write_search_trace_csv(ss, result);
      emit(eu_trace, ss.str());
    }
    return 0;
  }

  if (enoise->parsed()) {
    const SpectrumSample s = load_spectrum(en_spectrum);
    if (en_L == 0) en_L = s.config.cols;
    if (en_L == 0) throw std::runtime_error("estimate-noise: --L required");
    const MomentSequence em = empirical_moments(s, 4);
    const MomentSequence r = moments_of(load_measure(en_measure), 4);
    NoiseVarianceGrid grid;
    if (!en_grid.empty()) {
      const GridSpec g = parse_grid(en_grid);
      grid = {g.lo, g.hi, 0.0};
      grid.step = (g.hi - g.lo) / std::max(1, g.points - 1);
    } else if (en_sigma_ref) {
      grid = NoiseVarianceGrid::around_reference(*en_sigma_ref);
    } else {
      grid = NoiseVarianceGrid::from_first_moment(em.moment(1));
    }
    const SearchResult<double> result =
        estimate_noise_variance(em, r, static_cast<double>(s.config.n) / en_L, grid);
    write_search_result(std::cout, result);
    if (!en_trace.empty()) {
      std::ostringstream ss;
      write_search_trace_csv(ss, result);
      emit(en_trace, ss.str());
    }
    return 0;
  }

  if (ecov->parsed()) {
    const SpectrumSample s = load_spectrum(ec_spectrum);
    if (ec_L == 0) ec_L = s.config.cols;
    if (ec_L == 0) throw std::runtime_error("estimate-covariance: --L required");
    const int order = order_or(4);
    const MomentSequence em = empirical_moments(s, order);
    const MomentSequence r =
        estimate_channel_covariance(em, static_cast<double>(s.config.n) / ec_L, ec_sigma2);
    std::ostringstream ss;
    write_moments(ss, r);
    emit(out_path, ss.str());
    if (ec_atoms > 0) print_recovered_atoms(r, ec_atoms);
    return 0;
  }

  if (capacity->parsed()) {
    const SpectrumSample s = load_spectrum(cp_spectrum);
    const int order = order_or(3);
    const MomentSequence em = empirical_moments(s, order);
    const CapacityEstimate estimate =
        estimate_capacity(em, s.config.n, cp_blocks, cp_sigma2, cp_rho, cp_natural);
    std::cout << "capacity " << format_double(estimate.capacity) << '\n' << "eigenvalues";
    for (double v : estimate.eigenvalues) std::cout << ' ' << format_double(v);
    std::cout << '\n' << "hankel_ok " << (estimate.hankel_ok ? "true" : "false") << '\n';
    return 0;
  }

  if (simulate->parsed()) {
    SpectrumSample sample;
    if (sim_ensemble == "wishart") {
      sample = sample_wishart(sim_n, sim_cols, seed);
    } else {
      if (sim_measure.empty()) throw std::runtime_error("simulate: --measure required");
      const AtomicMeasure mu = load_measure(sim_measure);
      if (sim_ensemble == "product") {
        sample = sample_product(mu, sim_n, sim_cols, seed);
      } else if (sim_ensemble == "info-plus-noise") {
        sample = sample_info_plus_noise(mu, sim_n, sim_cols, sim_sigma2, seed);
      } else {
        sample = sample_covariance_observations(mu, sim_n, sim_cols, seed);
      }
    }
    std::ostringstream ss;
    write_spectrum_csv(ss, sample);
    emit(out_path, ss.str());
    return 0;
  }

  for (CLI::App* sub : fig_commands) {
    if (!sub->parsed()) continue;
    ExperimentConfig cfg;
    if (!fig_config.empty()) {
      std::ifstream f(fig_config);
      if (!f) throw std::runtime_error("cannot open config file: " + fig_config);
      cfg = ExperimentConfig::from_file(f);
    }
    for (const auto& entry : fig_sets) {
      const auto eq = entry.find('=');
      if (eq == std::string::npos)
        throw std::runtime_error("--set entries must be key=value, got: " + entry);
      cfg.set(entry.substr(0, eq), entry.substr(eq + 1));
    }
    if (app.count("--seed")) cfg.set("seed", std::to_string(seed));
    if (trials > 0) cfg.set("trials", std::to_string(trials));
    if (app.count("--moments")) cfg.set("moments", std::to_string(moments));
    if (!out_path.empty()) cfg.set("out", out_path);
    if (full_scale) cfg.set("full_scale", "true");
    const auto files = run_experiment(sub->get_name(), cfg);
    for (const auto& f : files) std::cout << f << '\n';
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
