#include "freedec/closedform.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace freedec {

namespace {

using Complex = std::complex<double>;
constexpr double kPi = std::numbers::pi;

double edge_substituted_integral(double lo, double hi, int power, double denom_scale,
                                 int denom_power) {
  // integral over [lo,hi] of x^power * sqrt((x-lo)(hi-x)) / (denom_scale * x^denom_power)
  const double cen = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const auto integrand = [&](double theta) {
    const double x = cen + half * std::sin(theta);
    const double ct = half * std::cos(theta);
    return std::pow(x, power - denom_power) * ct * ct / denom_scale;
  };
  double error = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      integrand, -0.5 * kPi, 0.5 * kPi, 12, 1e-12, &error);
}

struct PeakMeasurement {
  double x;
  double value;
  std::size_t index;
};

PeakMeasurement refined_peak(const DensityCurve& curve) {
  const auto& xs = curve.grid();
  const auto& fs = curve.values();
  std::size_t best = 0;
  for (std::size_t i = 1; i < fs.size(); ++i)
    if (fs[i] > fs[best]) best = i;
  PeakMeasurement peak{xs[best], fs[best], best};
  if (best == 0 || best + 1 == fs.size()) return peak;
  // parabola through the three samples around the maximum
  const double x1 = xs[best - 1], x2 = xs[best], x3 = xs[best + 1];
  const double y1 = fs[best - 1], y2 = fs[best], y3 = fs[best + 1];
  const double d1 = (y2 - y1) / (x2 - x1);
  const double d2 = (y3 - y2) / (x3 - x2);
  const double a = (d2 - d1) / (x3 - x1);
  if (a >= 0.0) return peak;
  const double xv = 0.5 * (x1 + x2) - d1 / (2.0 * a);
  peak.x = xv;
  peak.value = y1 + d1 * (xv - x1) + a * (xv - x1) * (xv - x2);
  return peak;
}

double threshold_width(const DensityCurve& curve, double threshold) {
  const auto& xs = curve.grid();
  const auto& fs = curve.values();
  const std::size_t n = fs.size();
  double lo = xs.front(), hi = xs.back();
  for (std::size_t i = 0; i < n; ++i) {
    if (fs[i] >= threshold) {
      if (i == 0) break;
      lo = xs[i - 1] + (threshold - fs[i - 1]) * (xs[i] - xs[i - 1]) / (fs[i] - fs[i - 1]);
      break;
    }
  }
  for (std::size_t i = n; i-- > 0;) {
    if (fs[i] >= threshold) {
      if (i + 1 == n) break;
      hi = xs[i + 1] - (threshold - fs[i + 1]) * (xs[i + 1] - xs[i]) / (fs[i] - fs[i + 1]);
      break;
    }
  }
  return hi - lo;
}

std::vector<Complex> polymul_linear(const std::vector<Complex>& poly, Complex a, Complex b) {
  // poly * (a + b x)
  std::vector<Complex> out(poly.size() + 1, Complex(0.0));
  for (std::size_t i = 0; i < poly.size(); ++i) {
    out[i] += poly[i] * a;
    out[i + 1] += poly[i] * b;
  }
  return out;
}

/// Coefficients (ascending) of the polynomial whose root is eta(z) for the
/// convolution with mu_c: sum_i p_i prod_{j!=i}(A_j + B_j eta) - eta prod_j(A_j + B_j eta),
/// where A_j = 1 + z lambda_j (1-c) and B_j = z lambda_j c.
std::vector<Complex> eta_polynomial(const AtomicMeasure& mu, double c, Complex z) {
  const std::size_t n = mu.atom_count();
  std::vector<Complex> a(n), b(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double l = mu.atoms()[j].location;
    a[j] = 1.0 + z * l * (1.0 - c);
    b[j] = z * l * c;
  }
  std::vector<Complex> full{Complex(1.0)};
  for (std::size_t j = 0; j < n; ++j) full = polymul_linear(full, a[j], b[j]);

  std::vector<Complex> poly(n + 2, Complex(0.0));
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Complex> part{Complex(mu.atoms()[i].mass)};
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) part = polymul_linear(part, a[j], b[j]);
    for (std::size_t k = 0; k < part.size(); ++k) poly[k] += part[k];
  }
  for (std::size_t k = 0; k < full.size(); ++k) poly[k + 1] -= full[k];
  return poly;
}

Complex horner(const std::vector<Complex>& poly, Complex x) {
  Complex acc(0.0);
  for (std::size_t i = poly.size(); i-- > 0;) acc = acc * x + poly[i];
  return acc;
}

Complex horner_derivative(const std::vector<Complex>& poly, Complex x) {
  Complex acc(0.0);
  for (std::size_t i = poly.size(); i-- > 1;)
    acc = acc * x + poly[i] * static_cast<double>(i);
  return acc;
}

std::vector<Complex> polynomial_roots(std::vector<Complex> poly) {
  // trim tiny leading coefficients relative to the largest one
  double scale = 0.0;
  for (const auto& cf : poly) scale = std::max(scale, std::abs(cf));
  while (poly.size() > 1 && std::abs(poly.back()) < 1e-14 * scale) poly.pop_back();
  const std::size_t deg = poly.size() - 1;
  if (deg == 0) return {};
  Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(deg, deg);
  for (std::size_t i = 1; i < deg; ++i) companion(i, i - 1) = 1.0;
  for (std::size_t i = 0; i < deg; ++i) companion(i, deg - 1) = -poly[i] / poly.back();
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion, false);
  std::vector<Complex> roots(deg);
  for (std::size_t i = 0; i < deg; ++i) roots[i] = solver.eigenvalues()[static_cast<Eigen::Index>(i)];
  return roots;
}

double relative_residual(const std::vector<Complex>& poly, Complex x) {
  double scale = 1e-300;
  double xp = 1.0;
  const double ax = std::abs(x);
  for (const auto& cf : poly) {
    scale += std::abs(cf) * xp;
    xp *= ax;
  }
  return std::abs(horner(poly, x)) / scale;
}

Complex polish_root(const std::vector<Complex>& poly, Complex x) {
  for (int it = 0; it < 5 && relative_residual(poly, x) > 1e-12; ++it) {
    const Complex d = horner_derivative(poly, x);
    if (d == Complex(0.0)) break;
    x -= horner(poly, x) / d;
  }
  return x;
}

Complex nearest_root(const std::vector<Complex>& roots, Complex target) {
  Complex best = roots.front();
  double dist = std::abs(best - target);
  for (const auto& r : roots) {
    const double d = std::abs(r - target);
    if (d < dist) {
      dist = d;
      best = r;
    }
  }
  return best;
}

struct EtaTracker {
  const AtomicMeasure& mu;
  double c;

  Complex solve_at(Complex z, Complex guess) const {
    const auto poly = eta_polynomial(mu, c, z);
    const auto roots = polynomial_roots(poly);
    if (roots.empty()) throw std::runtime_error("solve_eta_convolution: degenerate polynomial");
    Complex eta = polish_root(poly, nearest_root(roots, guess));
    if (relative_residual(poly, eta) > 1e-10)
      throw std::runtime_error("solve_eta_convolution: residual too large after polish");
    return eta;
  }

  static bool jump_ok(Complex prev, Complex next) {
    return std::abs(next - prev) <= 0.1 * std::max(std::abs(prev), 0.02);
  }

  // continuity-tracked advance from (z_from, eta_from) to z_to
  Complex advance(Complex z_from, Complex eta_from, Complex z_to, int depth) const {
    const Complex eta = solve_at(z_to, eta_from);
    if (jump_ok(eta_from, eta)) return eta;
    if (depth >= 24) {
      std::ostringstream msg;
      msg << "solve_eta_convolution: branch tracking failed near z = (" << z_to.real()
          << ", " << z_to.imag() << ")";
      throw std::runtime_error(msg.str());
    }
    const Complex z_mid = 0.5 * (z_from + z_to);
    const Complex eta_mid = advance(z_from, eta_from, z_mid, depth + 1);
    return advance(z_mid, eta_mid, z_to, depth + 1);
  }
};

}  // namespace

TwoAtomParams::TwoAtomParams(double p_in, double lambda_in, double c_in)
    : p(p_in), lambda(lambda_in), c(c_in) {
  if (!(p > 0.0) || p > 1.0) throw std::invalid_argument("TwoAtomParams: p outside (0, 1]");
  if (!(lambda > 0.0)) throw std::invalid_argument("TwoAtomParams: lambda must be positive");
  if (!(c > 0.0)) throw std::invalid_argument("TwoAtomParams: c must be positive");
}

bool TwoAtomParams::deconv_support_crosses_zero() const {
  const double u = c * p;
  if (u > 1.0) return true;
  return lambda * (1.0 - 2.0 * u) - 2.0 * lambda * std::sqrt(u * (1.0 - u)) < 0.0 ||
         c >= 0.5;
}

SupportInterval conv_support(const TwoAtomParams& params) {
  const double u = params.c * params.p;
  const double cen = params.lambda * (1.0 + u);
  const double half = 2.0 * params.lambda * std::sqrt(u);
  return {cen - half, cen + half};
}

SupportInterval deconv_support(const TwoAtomParams& params) {
  const double u = params.c * params.p;
  if (u > 1.0) throw std::domain_error("deconv_support: requires c*p <= 1");
  const double cen = params.lambda * (1.0 - 2.0 * u);
  const double half = 2.0 * params.lambda * std::sqrt(u * (1.0 - u));
  return {cen - half, cen + half};
}

DensityPeak conv_peak(const TwoAtomParams& params) {
  const double u = params.c * params.p;
  if (u >= 1.0) throw std::domain_error("conv_peak: interior maximum requires c*p < 1");
  const double x = params.lambda * (1.0 - u) * (1.0 - u) / (1.0 + u);
  const double value = std::sqrt(u) / (params.c * kPi * params.lambda * (1.0 - u));
  return {x, value};
}

double conv_density_at(const TwoAtomParams& params, double x) {
  const auto s = conv_support(params);
  if (x <= s.lo || x >= s.hi || x <= 0.0) return 0.0;
  return std::sqrt((x - s.lo) * (s.hi - x)) / (2.0 * params.c * params.lambda * x * kPi);
}

double deconv_density_at(const TwoAtomParams& params, double x) {
  const auto s = deconv_support(params);
  if (x <= s.lo || x >= s.hi || x == 0.0) return 0.0;
  return std::sqrt((x - s.lo) * (s.hi - x)) / (2.0 * params.c * x * x);
}

DensityCurve conv_density(const TwoAtomParams& params, std::span<const double> grid) {
  const auto s = conv_support(params);
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) values[i] = conv_density_at(params, grid[i]);
  const double atom = std::clamp(1.0 - conv_moment(params, 0), 0.0, 1.0);
  return DensityCurve(std::vector<double>(grid.begin(), grid.end()), std::move(values),
                      s.lo, s.hi, atom);
}

DensityCurve deconv_density(const TwoAtomParams& params, std::span<const double> grid) {
  const auto s = deconv_support(params);
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) values[i] = deconv_density_at(params, grid[i]);
  return DensityCurve(std::vector<double>(grid.begin(), grid.end()), std::move(values),
                      s.lo, s.hi, 0.0);
}

double conv_moment(const TwoAtomParams& params, int k) {
  if (k < 0) throw std::invalid_argument("conv_moment: k must be nonnegative");
  const auto s = conv_support(params);
  if (s.width() == 0.0) return 0.0;
  return edge_substituted_integral(s.lo, s.hi, k, 2.0 * params.c * params.lambda * kPi, 1);
}

double deconv_moment(const TwoAtomParams& params, int k) {
  if (k < 0) throw std::invalid_argument("deconv_moment: k must be nonnegative");
  const auto s = deconv_support(params);
  if (s.lo <= 0.0 && s.hi >= 0.0)
    throw std::domain_error("deconv_moment: interval crosses zero, integrand is singular");
  if (s.width() == 0.0) return 0.0;
  return edge_substituted_integral(s.lo, s.hi, k, 2.0 * params.c, 2);
}

TwoAtomParams recover_two_atom(const DensityCurve& observed, double c,
                               const RecoverOptions& options) {
  if (!(c > 0.0)) throw std::invalid_argument("recover_two_atom: c must be positive");
  const PeakMeasurement peak = refined_peak(observed);
  if (!(peak.value > 0.0))
    throw std::runtime_error("recover_two_atom: observed density has no positive maximum");
  if (peak.index == 0 || peak.index + 1 == observed.size())
    throw std::runtime_error("recover_two_atom: maximum is not interior to the grid");

  const double width = options.use_declared_support
                           ? observed.support_hi() - observed.support_lo()
                           : threshold_width(observed, options.threshold_rel * peak.value);
  if (!(width > 0.0)) throw std::runtime_error("recover_two_atom: empty support width");

  // width = 4 lambda sqrt(cp), max = sqrt(cp) / (c pi lambda (1 - cp))
  const double q = peak.value * c * kPi * width;
  const double u = q / (4.0 + q);  // u = c p
  double p = u / c;
  if (p > 1.0 + 1e-3)
    throw std::runtime_error("recover_two_atom: measured width/max imply p > 1");
  p = std::min(p, 1.0);
  const double lambda = width / (4.0 * std::sqrt(u));
  return TwoAtomParams(p, lambda, c);
}

std::vector<Complex> solve_eta_convolution(const AtomicMeasure& mu, double c,
                                           std::span<const Complex> z_grid) {
  if (!(c > 0.0)) throw std::invalid_argument("solve_eta_convolution: c must be positive");
  if (mu.atom_count() > kMaxEtaAtoms)
    throw std::invalid_argument("solve_eta_convolution: too many atoms");
  if (z_grid.empty()) return {};

  std::vector<std::size_t> order(z_grid.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return z_grid[a].real() < z_grid[b].real(); });
  // sweep from the largest |Re z| end, where the eta argument -1/z is small
  if (std::abs(z_grid[order.front()].real()) > std::abs(z_grid[order.back()].real()))
    std::reverse(order.begin(), order.end());

  const double m1 = moments_of(mu, 1).moment(1);  // first moment survives the convolution

  const EtaTracker tracker{mu, c};
  std::vector<Complex> out(z_grid.size());
  Complex prev_arg;
  Complex prev_eta;
  bool have_prev = false;
  for (std::size_t idx : order) {
    const Complex u = z_grid[idx];
    if (u == Complex(0.0)) throw std::invalid_argument("solve_eta_convolution: z = 0");
    const Complex arg = -1.0 / u;
    Complex eta;
    if (!have_prev) {
      eta = tracker.solve_at(arg, 1.0 - m1 * arg);
      have_prev = true;
    } else {
      eta = tracker.advance(prev_arg, prev_eta, arg, 0);
    }
    prev_arg = arg;
    prev_eta = eta;
    out[idx] = arg * eta;  // m(u) = z eta(z) with z = -1/u
  }
  return out;
}

DensityCurve eta_convolution_density(const AtomicMeasure& mu, double c,
                                     std::span<const double> grid, double omega) {
  if (!(omega > 0.0)) throw std::invalid_argument("eta_convolution_density: omega must be > 0");
  std::vector<Complex> zs(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) zs[i] = Complex(grid[i], omega);
  const auto ms = solve_eta_convolution(mu, c, zs);
  return stieltjes_inversion(ms, grid);
}

Complex appendix_quadratic_conv(const TwoAtomParams& params, Complex z) {
  const bool upper = z.imag() > 0.0;
  if (!upper && !(z.imag() == 0.0 && z.real() < 0.0))
    throw std::domain_error("appendix_quadratic_conv: need Im z > 0 or z < 0");
  const double p = params.p, l = params.lambda, c = params.c;
  const double delta = 1.0 - 2.0 * c + c * p;
  const Complex disc = z * z - 2.0 * l * (1.0 + c * p) * z +
                       4.0 * c * l * l * (1.0 - c) * (1.0 - p) + l * l * delta * delta;
  const Complex s = std::sqrt(disc);
  const Complex denom = 2.0 * c * l * z;
  const Complex m1 = ((l * delta - z) + s) / denom;
  const Complex m2 = ((l * delta - z) - s) / denom;
  if (upper) return m1.imag() >= m2.imag() ? m1 : m2;
  return m1.real() >= m2.real() ? m1 : m2;
}

}  // namespace freedec
