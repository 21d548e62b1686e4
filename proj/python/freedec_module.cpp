#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "freedec/closedform.hpp"
#include "freedec/estimators.hpp"
#include "freedec/experiments.hpp"
#include "freedec/freeconv.hpp"
#include "freedec/io.hpp"
#include "freedec/measures.hpp"
#include "freedec/rmt.hpp"

namespace py = pybind11;
using namespace freedec;

namespace {

AtomicMeasure measure_from_pairs(const std::vector<std::pair<double, double>>& atoms) {
  std::vector<AtomicMeasure::Atom> converted;
  converted.reserve(atoms.size());
  for (const auto& [location, mass] : atoms) converted.push_back({location, mass});
  return AtomicMeasure(std::move(converted));
}

std::vector<std::pair<double, double>> measure_to_pairs(const AtomicMeasure& mu) {
  std::vector<std::pair<double, double>> out;
  out.reserve(mu.atom_count());
  for (const auto& a : mu.atoms()) out.emplace_back(a.location, a.mass);
  return out;
}

MomentSequence seq(const std::vector<double>& values) { return MomentSequence(values); }

}  // namespace

PYBIND11_MODULE(freedec, m) {
  m.doc() = "Free (de)convolution of spectral measures: combinatorial, closed-form and "
            "random-matrix routes, plus the derived covariance/power/noise/capacity "
            "estimators";

  py::class_<AtomicMeasure>(m, "AtomicMeasure")
      .def(py::init(&measure_from_pairs), py::arg("atoms"),
           "atoms: list of (location, mass) pairs")
      .def_static("point_mass", &AtomicMeasure::point_mass, py::arg("location"))
      .def_static("zero_and_spike", &AtomicMeasure::zero_and_spike, py::arg("p"),
                  py::arg("lam"))
      .def_static(
          "equal_weights",
          [](const std::vector<double>& locations) {
            return AtomicMeasure::equal_weights(locations);
          },
          py::arg("locations"))
      .def_property_readonly("atoms", &measure_to_pairs)
      .def("mass_at_zero", &AtomicMeasure::mass_at_zero)
      .def("__repr__", [](const AtomicMeasure& mu) {
        std::ostringstream ss;
        ss << "AtomicMeasure(";
        for (std::size_t i = 0; i < mu.atom_count(); ++i) {
          if (i) ss << ", ";
          ss << mu.atoms()[i].mass << "@" << mu.atoms()[i].location;
        }
        ss << ")";
        return ss.str();
      });

  py::class_<DensityCurve>(m, "DensityCurve")
      .def(py::init<std::vector<double>, std::vector<double>, double, double, double>(),
           py::arg("grid"), py::arg("values"), py::arg("support_lo"), py::arg("support_hi"),
           py::arg("atom_at_zero"))
      .def_property_readonly("grid", &DensityCurve::grid)
      .def_property_readonly("values", &DensityCurve::values)
      .def_property_readonly("support", [](const DensityCurve& c) {
        return std::make_pair(c.support_lo(), c.support_hi());
      })
      .def_property_readonly("atom_at_zero", &DensityCurve::atom_at_zero)
      .def("mass", &DensityCurve::mass)
      .def("is_normalized", &DensityCurve::is_normalized, py::arg("tol") = 1e-3);

  py::class_<MarchenkoPastur>(m, "MarchenkoPastur")
      .def(py::init<double>(), py::arg("c"))
      .def_readonly("c", &MarchenkoPastur::c)
      .def("support_lo", &MarchenkoPastur::support_lo)
      .def("support_hi", &MarchenkoPastur::support_hi)
      .def("atom_at_zero", &MarchenkoPastur::atom_at_zero)
      .def("density", &MarchenkoPastur::density, py::arg("x"))
      .def("stieltjes", &MarchenkoPastur::stieltjes, py::arg("z"));

  // measures ------------------------------------------------------------
  m.def(
      "moments_of",
      [](const AtomicMeasure& mu, int order) { return moments_of(mu, order).values(); },
      py::arg("mu"), py::arg("order"));
  m.def(
      "mp_moments", [](double c, int order) { return mp_moments(c, order).values(); },
      py::arg("c"), py::arg("order"));
  m.def(
      "mp_density",
      [](double c, const std::vector<double>& grid) { return mp_density(c, grid); },
      py::arg("c"), py::arg("grid"));
  m.def(
      "newton_girard_eigenvalues",
      [](const std::vector<double>& power_sums, int n, bool clamp) {
        const auto rec = newton_girard_eigenvalues(
            power_sums, n, clamp ? RootPolicy::kClampWithDiagnostics : RootPolicy::kStrict);
        return py::make_tuple(rec.eigenvalues, rec.clamped_negative, rec.clamped_complex);
      },
      py::arg("power_sums"), py::arg("n"), py::arg("clamp") = false);
  m.def("stieltjes", &stieltjes, py::arg("mu"), py::arg("z"));
  m.def("eta", &eta, py::arg("mu"), py::arg("z"));
  m.def(
      "stieltjes_inversion",
      [](const std::vector<std::complex<double>>& values, const std::vector<double>& grid) {
        return stieltjes_inversion(values, grid);
      },
      py::arg("stieltjes_values"), py::arg("grid"));

  // freeconv --------------------------------------------------------------
  m.def(
      "moments_to_cumulants",
      [](const std::vector<double>& m_in) { return moments_to_cumulants(seq(m_in)).values(); },
      py::arg("moments"));
  m.def(
      "cumulants_to_moments",
      [](const std::vector<double>& a) {
        return cumulants_to_moments(CumulantSequence(a)).values();
      },
      py::arg("cumulants"));
  m.def(
      "additive_free_convolve",
      [](const std::vector<double>& a, const std::vector<double>& b) {
        return additive_free_convolve(seq(a), seq(b)).values();
      },
      py::arg("m1"), py::arg("m2"));
  m.def(
      "additive_free_deconvolve",
      [](const std::vector<double>& a, const std::vector<double>& b) {
        return additive_free_deconvolve(seq(a), seq(b)).values();
      },
      py::arg("m"), py::arg("m2"));
  m.def(
      "shift_moments",
      [](const std::vector<double>& m_in, double s) {
        return shift_moments(seq(m_in), s).values();
      },
      py::arg("moments"), py::arg("s"));
  m.def(
      "shift_deconvolve",
      [](const std::vector<double>& m_in, double s2) {
        return shift_deconvolve(seq(m_in), s2).values();
      },
      py::arg("moments"), py::arg("s2"));
  m.def(
      "mult_mp_convolve",
      [](const std::vector<double>& m_in, double c) {
        return mult_mp_convolve(seq(m_in), c).values();
      },
      py::arg("moments"), py::arg("c"));
  m.def(
      "mult_mp_deconvolve",
      [](const std::vector<double>& m_in, double c) {
        return mult_mp_deconvolve(seq(m_in), c).values();
      },
      py::arg("moments"), py::arg("c"));
  m.def(
      "scale_and_pad",
      [](const std::vector<double>& m_in, double fraction) {
        return scale_and_pad(seq(m_in), fraction).values();
      },
      py::arg("moments"), py::arg("fraction"));
  m.def(
      "hankel_psd_advisory",
      [](const std::vector<double>& m_in, double tol) {
        return hankel_psd_advisory(seq(m_in), tol);
      },
      py::arg("moments"), py::arg("tol") = 1e-9);

  // closedform --------------------------------------------------------------
  py::class_<TwoAtomParams>(m, "TwoAtomParams")
      .def(py::init<double, double, double>(), py::arg("p"), py::arg("lam"), py::arg("c"))
      .def_readonly("p", &TwoAtomParams::p)
      .def_readonly("lam", &TwoAtomParams::lambda)
      .def_readonly("c", &TwoAtomParams::c)
      .def("deconv_support_crosses_zero", &TwoAtomParams::deconv_support_crosses_zero);

  py::class_<SupportInterval>(m, "SupportInterval")
      .def_readonly("lo", &SupportInterval::lo)
      .def_readonly("hi", &SupportInterval::hi)
      .def("center", &SupportInterval::center)
      .def("width", &SupportInterval::width);

  m.def("conv_support", &conv_support, py::arg("params"));
  m.def("deconv_support", &deconv_support, py::arg("params"));
  m.def(
      "conv_peak",
      [](const TwoAtomParams& p) {
        const auto peak = conv_peak(p);
        return std::make_pair(peak.x, peak.value);
      },
      py::arg("params"));
  m.def("conv_density_at", &conv_density_at, py::arg("params"), py::arg("x"));
  m.def("deconv_density_at", &deconv_density_at, py::arg("params"), py::arg("x"));
  m.def(
      "conv_density",
      [](const TwoAtomParams& p, const std::vector<double>& grid) {
        return conv_density(p, grid);
      },
      py::arg("params"), py::arg("grid"));
  m.def(
      "deconv_density",
      [](const TwoAtomParams& p, const std::vector<double>& grid) {
        return deconv_density(p, grid);
      },
      py::arg("params"), py::arg("grid"));
  m.def("conv_moment", &conv_moment, py::arg("params"), py::arg("k"));
  m.def("deconv_moment", &deconv_moment, py::arg("params"), py::arg("k"));
  m.def(
      "recover_two_atom",
      [](const DensityCurve& observed, double c, bool use_declared_support,
         double threshold_rel) {
        const TwoAtomParams p =
            recover_two_atom(observed, c, {use_declared_support, threshold_rel});
        return std::make_tuple(p.p, p.lambda, p.c);
      },
      py::arg("observed"), py::arg("c"), py::arg("use_declared_support") = true,
      py::arg("threshold_rel") = 0.02);
  m.def(
      "solve_eta_convolution",
      [](const AtomicMeasure& mu, double c, const std::vector<std::complex<double>>& grid) {
        return solve_eta_convolution(mu, c, grid);
      },
      py::arg("mu"), py::arg("c"), py::arg("z_grid"));
  m.def(
      "eta_convolution_density",
      [](const AtomicMeasure& mu, double c, const std::vector<double>& grid, double omega) {
        return eta_convolution_density(mu, c, grid, omega);
      },
      py::arg("mu"), py::arg("c"), py::arg("grid"), py::arg("omega"));
  m.def("appendix_quadratic_conv", &appendix_quadratic_conv, py::arg("params"), py::arg("z"));

  // rmt ----------------------------------------------------------------------
  py::class_<EnsembleConfig>(m, "EnsembleConfig")
      .def_readonly("kind", &EnsembleConfig::kind)
      .def_readonly("n", &EnsembleConfig::n)
      .def_readonly("cols", &EnsembleConfig::cols)
      .def_readonly("sigma2", &EnsembleConfig::sigma2)
      .def_readonly("seed", &EnsembleConfig::seed)
      .def("aspect_ratio", &EnsembleConfig::aspect_ratio);

  py::class_<SpectrumSample>(m, "SpectrumSample")
      .def_readonly("eigenvalues", &SpectrumSample::eigenvalues)
      .def_readonly("config", &SpectrumSample::config);

  m.def("split_seed", &split_seed, py::arg("master"), py::arg("index"));
  m.def("sample_wishart", &sample_wishart, py::arg("n"), py::arg("N"), py::arg("seed"));
  m.def("sample_product", &sample_product, py::arg("mu"), py::arg("n"), py::arg("L"),
        py::arg("seed"));
  m.def("sample_info_plus_noise", &sample_info_plus_noise, py::arg("r_spec"), py::arg("n"),
        py::arg("N"), py::arg("sigma2"), py::arg("seed"));
  m.def("sample_covariance_observations", &sample_covariance_observations,
        py::arg("theta_spec"), py::arg("n"), py::arg("L"), py::arg("seed"));
  m.def(
      "empirical_moments",
      [](const SpectrumSample& s, int order) { return empirical_moments(s, order).values(); },
      py::arg("sample"), py::arg("order"));

  // estimators ------------------------------------------------------------------
  m.def(
      "moment_mse",
      [](const std::vector<double>& a, const std::vector<double>& b) {
        return moment_mse(seq(a), seq(b));
      },
      py::arg("mu"), py::arg("nu"));
  m.def(
      "weighted_mse",
      [](const std::vector<double>& a, const std::vector<double>& b,
         const std::vector<double>& weights) {
        return weighted_mse(seq(a), seq(b), WeightedMseConfig{weights});
      },
      py::arg("mu"), py::arg("nu"), py::arg("weights"));
  m.def(
      "catalan_weights",
      [](int order) { return WeightedMseConfig::catalan(order).weights; }, py::arg("order"));
  m.def(
      "g2_estimate",
      [](const std::vector<double>& scm, double c) { return g2_estimate(seq(scm), c).values(); },
      py::arg("scm_moments"), py::arg("c"));
  m.def(
      "info_plus_noise_deconvolve",
      [](const std::vector<double>& w, double c, double sigma2) {
        const auto est = info_plus_noise_deconvolve(seq(w), c, sigma2);
        return std::make_pair(est.gamma.values(), est.intermediate.values());
      },
      py::arg("w_moments"), py::arg("c"), py::arg("sigma2"));
  m.def(
      "info_plus_noise_forward",
      [](const std::vector<double>& gamma, double c, double sigma2) {
        return info_plus_noise_forward(seq(gamma), c, sigma2).values();
      },
      py::arg("gamma_moments"), py::arg("c"), py::arg("sigma2"));
  m.def(
      "estimate_power_distribution",
      [](const std::vector<double>& scm, int n, int users, int L, double sigma2, int k) {
        const auto est = estimate_power_distribution(seq(scm), n, users, L, sigma2, k);
        return py::make_tuple(est.locations, est.power_moments.values(), est.hankel_ok);
      },
      py::arg("scm_moments"), py::arg("n"), py::arg("N"), py::arg("L"), py::arg("sigma2"),
      py::arg("k_atoms"));
  m.def(
      "estimate_user_count",
      [](const std::vector<double>& scm, int n, int L, double sigma2,
         const AtomicMeasure& p_assumed) {
        const auto result = estimate_user_count(seq(scm), n, L, sigma2, p_assumed);
        return py::make_tuple(result.estimate, result.objective, result.trace);
      },
      py::arg("scm_moments"), py::arg("n"), py::arg("L"), py::arg("sigma2"),
      py::arg("p_assumed"));
  m.def("classical_rank", &classical_rank, py::arg("sample"), py::arg("sigma2"),
        py::arg("threshold_factor") = 1.5);
  m.def(
      "estimate_channel_covariance",
      [](const std::vector<double>& scm, double c, double sigma2) {
        return estimate_channel_covariance(seq(scm), c, sigma2).values();
      },
      py::arg("scm_moments"), py::arg("c"), py::arg("sigma2"));
  m.def(
      "estimate_noise_variance",
      [](const std::vector<double>& scm, const std::vector<double>& r, double c, double lo,
         double hi, double step) {
        const auto result =
            estimate_noise_variance(seq(scm), seq(r), c, NoiseVarianceGrid{lo, hi, step});
        return py::make_tuple(result.estimate, result.objective, result.trace);
      },
      py::arg("scm_moments"), py::arg("r_moments"), py::arg("c"), py::arg("grid_lo"),
      py::arg("grid_hi"), py::arg("grid_step") = 1e-3);
  m.def(
      "estimate_capacity",
      [](const std::vector<double>& h_hat, int n, int blocks, double sigma2, double rho,
         bool natural_log) {
        const auto est = estimate_capacity(seq(h_hat), n, blocks, sigma2, rho, natural_log);
        return py::make_tuple(est.capacity, est.eigenvalues, est.hankel_ok);
      },
      py::arg("h_hat_moments"), py::arg("n"), py::arg("L_blocks"), py::arg("sigma2"),
      py::arg("rho"), py::arg("natural_log") = false);

  // experiments -------------------------------------------------------------------
  m.def(
      "run_experiment",
      [](const std::string& name, const std::map<std::string, std::string>& options) {
        ExperimentConfig cfg;
        for (const auto& [key, value] : options) cfg.set(key, value);
        return run_experiment(name, cfg);
      },
      py::arg("name"), py::arg("options"),
      "Run a fig-* experiment; returns the list of files written");
  m.def("experiment_names", [] {
    std::vector<std::string> names;
    for (const auto& [name, fn] : experiment_registry()) names.push_back(name);
    return names;
  });
}
