#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "freedec/closedform.hpp"
#include "freedec/freeconv.hpp"
#include "freedec/rmt.hpp"
#include "oracles.hpp"

using namespace freedec;
using Complex = std::complex<double>;
constexpr double kPi = std::numbers::pi;

TEST_CASE("convolution with a full point mass reduces to the MP law") {
  const TwoAtomParams params(1.0, 1.0, 0.5);
  const MarchenkoPastur law(0.5);
  const auto s = conv_support(params);
  CHECK(s.lo == doctest::Approx(law.support_lo()).epsilon(1e-14));
  CHECK(s.hi == doctest::Approx(law.support_hi()).epsilon(1e-14));
  for (double x : {0.2, 0.8, 1.5, 2.5})
    CHECK(conv_density_at(params, x) == doctest::Approx(law.density(x)).epsilon(1e-13));
}

TEST_CASE("convolution support, peak and recovery at the reference point") {
  const TwoAtomParams params(0.5, 1.0, 0.5);
  const auto s = conv_support(params);
  CHECK(std::abs(s.lo - 0.25) < 1e-12);
  CHECK(std::abs(s.hi - 2.25) < 1e-12);

  const auto peak = conv_peak(params);
  CHECK(std::abs(peak.x - 0.45) < 1e-12);
  CHECK(std::abs(peak.value - 4.0 / (3.0 * kPi)) < 1e-12);
}

TEST_CASE("convolution density integrates to one with the reported zero atom") {
  for (double p : {0.25, 0.5, 0.75})
    for (double lam : {0.5, 1.0, 2.0})
      for (double c : {0.1, 0.5, 0.9}) {
        const TwoAtomParams params(p, lam, c);
        const double mass = conv_moment(params, 0);
        const auto curve = conv_density(params, linspace(conv_support(params).lo,
                                                         conv_support(params).hi, 64));
        CHECK(mass + curve.atom_at_zero() == doctest::Approx(1.0).epsilon(1e-6));
        // continuous mass is exactly p here
        CHECK(mass == doctest::Approx(p).epsilon(1e-8));
      }
}

TEST_CASE("convolution peak is a stationary point of the density") {
  for (double p : {0.3, 0.7})
    for (double c : {0.2, 0.6}) {
      const TwoAtomParams params(p, 1.3, c);
      const auto peak = conv_peak(params);
      const double h = 1e-5 * conv_support(params).width();
      const double derivative =
          (conv_density_at(params, peak.x + h) - conv_density_at(params, peak.x - h)) /
          (2.0 * h);
      CHECK(std::abs(derivative) < 1e-6 * peak.value / conv_support(params).width());
      CHECK(conv_density_at(params, peak.x) >= conv_density_at(params, peak.x + 50 * h));
      CHECK(conv_density_at(params, peak.x) >= conv_density_at(params, peak.x - 50 * h));
    }
}

TEST_CASE("convolution moments tie to the combinatorial route") {
  for (double p : {0.25, 0.5, 0.75})
    for (double lam : {0.5, 1.0, 2.0})
      for (double c : {0.1, 0.5, 0.9}) {
        const TwoAtomParams params(p, lam, c);
        std::vector<double> mu_m(6);
        double pw = 1.0;
        for (int k = 0; k < 6; ++k) mu_m[static_cast<std::size_t>(k)] = p * (pw *= lam);
        const auto conv = mult_mp_convolve(MomentSequence(mu_m), c);
        for (int k = 1; k <= 6; ++k)
          CHECK(conv_moment(params, k) ==
                doctest::Approx(conv.values()[static_cast<std::size_t>(k - 1)])
                    .epsilon(1e-5));
      }
}

TEST_CASE("formal deconvolution support examples") {
  const TwoAtomParams params(0.5, 1.0, 0.5);
  const auto j = deconv_support(params);
  CHECK(j.lo == doctest::Approx(0.5 - 2.0 * std::sqrt(0.1875)).epsilon(1e-12));
  CHECK(j.hi == doctest::Approx(0.5 + 2.0 * std::sqrt(0.1875)).epsilon(1e-12));
  CHECK(std::abs(j.lo - (-0.3660254)) < 1e-6);
  CHECK(std::abs(j.hi - 1.3660254) < 1e-6);
  CHECK(params.deconv_support_crosses_zero());

  // center sits left of the spike for any positive ratio
  for (double p : {0.25, 0.5, 1.0})
    for (double c : {0.05, 0.2, 0.45}) {
      const TwoAtomParams q(p, 1.7, c);
      CHECK(deconv_support(q).center() < q.lambda);
      CHECK(deconv_support(q).center() == doctest::Approx(1.7 * (1.0 - 2.0 * c * p)));
    }

  // width collapses onto the spike as c -> 0
  double prev_width = 1e9;
  for (double c : {0.2, 0.02, 0.002}) {
    const auto s = deconv_support(TwoAtomParams(0.5, 1.0, c));
    CHECK(s.width() < prev_width);
    prev_width = s.width();
    CHECK(s.width() == doctest::Approx(4.0 * std::sqrt(c * 0.5 * (1.0 - c * 0.5))));
  }
  const auto tiny = deconv_support(TwoAtomParams(0.5, 1.0, 1e-8));
  CHECK(tiny.center() == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(tiny.width() < 1e-3);
}

TEST_CASE("deconvolution moment quadrature rejects intervals across zero") {
  CHECK_THROWS_AS(deconv_moment(TwoAtomParams(0.5, 1.0, 0.5), 0), std::domain_error);
  // far from zero the quadrature runs
  const double v = deconv_moment(TwoAtomParams(0.25, 1.0, 0.1), 1);
  CHECK(v > 0.0);
}

TEST_CASE("recover_two_atom inverts the analytic density") {
  {
    const TwoAtomParams truth(0.5, 1.0, 0.5);
    const auto s = conv_support(truth);
    const auto curve = conv_density(truth, linspace(s.lo, s.hi, 4001));
    const TwoAtomParams rec = recover_two_atom(curve, 0.5);
    CHECK(std::abs(rec.p - 0.5) < 1e-6);
    CHECK(std::abs(rec.lambda - 1.0) < 1e-6);
  }
  {
    const TwoAtomParams truth(1.0, 2.0, 0.25);
    const auto s = conv_support(truth);
    const auto curve = conv_density(truth, linspace(s.lo, s.hi, 4001));
    const TwoAtomParams rec = recover_two_atom(curve, 0.25);
    CHECK(std::abs(rec.p - 1.0) < 1e-6);
    CHECK(std::abs(rec.lambda - 2.0) < 1e-6);
  }
}

TEST_CASE("recover_two_atom works on a sampled spectrum histogram") {
  const AtomicMeasure mu = AtomicMeasure::zero_and_spike(0.5, 1.0);
  // average several histograms to tame bin noise
  std::vector<double> acc;
  const int bins = 48;
  const double lo = 0.1, hi = 2.6;
  int trials = 12;
  std::vector<double> grid;
  double atom = 0.0;
  for (int t = 0; t < trials; ++t) {
    const SpectrumSample s = sample_product(mu, 512, 1024, split_seed(424242, t));
    const DensityCurve h = histogram_density(s, bins, lo, hi);
    if (acc.empty()) {
      acc.assign(h.values().begin(), h.values().end());
      grid = h.grid();
    } else {
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += h.values()[i];
    }
    atom += h.atom_at_zero();
  }
  for (double& v : acc) v /= trials;
  const DensityCurve averaged(grid, acc, lo, hi, atom / trials);
  const TwoAtomParams rec = recover_two_atom(averaged, 0.5, RecoverOptions{false, 0.04});
  CHECK(std::abs(rec.p - 0.5) < 0.05);
  CHECK(std::abs(rec.lambda - 1.0) < 0.05);
}

TEST_CASE("recover_two_atom rejects inconsistent measurements") {
  // a wide, tall blob whose width/max imply p > 1 at this ratio
  const auto grid = linspace(0.0, 10.0, 400);
  std::vector<double> values(grid.size(), 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid[i];
    values[i] = x > 1.0 && x < 9.0 ? 0.5 : 0.0;
  }
  values[200] = 0.501;
  const DensityCurve curve(grid, values, 1.0, 9.0, 0.0);
  CHECK_THROWS_AS(recover_two_atom(curve, 0.05), std::runtime_error);
}

TEST_CASE("eta-equation solver matches the MP law for a unit point mass") {
  const MarchenkoPastur law(0.5);
  const auto grid = linspace(0.02, 3.2, 500);
  const DensityCurve curve =
      eta_convolution_density(AtomicMeasure::point_mass(1.0), 0.5, grid, 1e-6);
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < law.support_lo() + 0.06 || grid[i] > law.support_hi() - 0.06) continue;
    worst = std::max(worst, std::abs(curve.values()[i] - law.density(grid[i])));
  }
  CHECK(worst < 1e-3);
}

TEST_CASE("eta-equation solver matches the exact two-atom density") {
  const TwoAtomParams params(0.5, 1.0, 0.5);
  const auto grid = linspace(0.05, 2.5, 500);
  const DensityCurve curve =
      eta_convolution_density(AtomicMeasure::zero_and_spike(0.5, 1.0), 0.5, grid, 1e-6);
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < 0.31 || grid[i] > 2.19) continue;
    worst = std::max(worst, std::abs(curve.values()[i] - conv_density_at(params, grid[i])));
  }
  CHECK(worst < 1e-3);
}

TEST_CASE("eta-equation solver shows support splitting at small ratios") {
  const AtomicMeasure mu = AtomicMeasure::equal_weights(std::vector<double>{1.0, 3.0, 4.0});
  const auto grid = linspace(0.4, 5.2, 600);
  const DensityCurve curve = eta_convolution_density(mu, 0.05, grid, 1e-6);
  double peak_near_one = 0.0, gap = 1e9;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] > 0.7 && grid[i] < 1.3) peak_near_one = std::max(peak_near_one, curve.values()[i]);
    if (grid[i] > 1.45 && grid[i] < 2.2) gap = std::min(gap, curve.values()[i]);
  }
  CHECK(peak_near_one > 0.5);
  CHECK(gap < 0.02 * peak_near_one);
}

TEST_CASE("eta-equation solver rejects measures with too many atoms") {
  std::vector<double> locations(13);
  for (std::size_t i = 0; i < locations.size(); ++i) locations[i] = 0.5 + 0.25 * i;
  const AtomicMeasure mu = AtomicMeasure::equal_weights(locations);
  const std::vector<Complex> grid{Complex(1.0, 1e-6)};
  CHECK_THROWS_AS(solve_eta_convolution(mu, 0.5, grid), std::invalid_argument);
}

TEST_CASE("eta-equation solutions satisfy the defining relation") {
  const AtomicMeasure mu = AtomicMeasure::equal_weights(std::vector<double>{1.0, 3.0, 4.0});
  const double c = 0.2;
  const auto grid = linspace(0.5, 5.0, 40);
  std::vector<Complex> zs(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) zs[i] = Complex(grid[i], 1e-4);
  const auto ms = solve_eta_convolution(mu, c, zs);
  for (std::size_t i = 0; i < zs.size(); ++i) {
    // recover eta from m and plug it back into sum p_i/(1+z l_i (1-c+c eta)) = eta
    const Complex z_eta = -1.0 / zs[i];
    const Complex etav = ms[i] / z_eta;
    Complex lhs = 0.0;
    for (const auto& atom : mu.atoms())
      lhs += atom.mass / (1.0 + z_eta * atom.location * (1.0 - c + c * etav));
    CHECK(std::abs(lhs - etav) < 1e-10 * std::max(1.0, std::abs(etav)));
  }
}

TEST_CASE("quadratic reference transform has its branch points at the support edges") {
  const TwoAtomParams params(0.5, 1.0, 0.5);
  const auto s = conv_support(params);
  // discriminant z^2 - 2 lam (1+cp) z + lam^2 (1-cp)^2 vanishes at the edges
  const double u = params.c * params.p;
  const auto disc = [&](double z) {
    return z * z - 2.0 * params.lambda * (1.0 + u) * z +
           4.0 * params.c * params.lambda * params.lambda * (1.0 - params.c) *
               (1.0 - params.p) +
           params.lambda * params.lambda * (1.0 - 2.0 * params.c + u) *
               (1.0 - 2.0 * params.c + u);
  };
  CHECK(std::abs(disc(s.lo)) < 1e-12);
  CHECK(std::abs(disc(s.hi)) < 1e-12);
}

TEST_CASE("quadratic reference transform agrees with quadrature on the negative axis") {
  const TwoAtomParams params(0.5, 1.0, 0.5);
  const Complex z(-1.0, 0.0);
  const Complex m = appendix_quadratic_conv(params, z);
  CHECK(std::abs(m.imag()) < 1e-12);
  // independent Simpson quadrature of the density against 1/(x - z), plus atom
  const auto s = conv_support(params);
  const double integral = oracles::simpson_edge_integral(s.lo, s.hi, [&](double x) {
    return 1.0 / ((x + 1.0) * 2.0 * params.c * params.lambda * kPi * x);
  });
  const double atom = 1.0 - params.p;
  const double expected = integral + atom / (0.0 - z.real());
  CHECK(m.real() == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("quadratic reference transform converges to the density from above") {
  const TwoAtomParams params(0.5, 1.0, 0.5);
  const double x = 0.8;
  const double truth = conv_density_at(params, x);
  double prev_err = 1e9;
  for (double omega : {1e-3, 1e-4, 1e-5}) {
    const Complex m = appendix_quadratic_conv(params, Complex(x, omega));
    const double err = std::abs(m.imag() / kPi - truth);
    CHECK(err < prev_err);
    prev_err = err;
  }
  CHECK(prev_err < 1e-4);
}
