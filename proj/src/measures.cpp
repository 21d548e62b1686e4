#include "freedec/measures.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "freedec/transforms.hpp"

namespace freedec {

namespace {

bool locations_match(double a, double b) {
  return std::abs(a - b) <= kAtomMergeRelTol * std::max(std::abs(a), std::abs(b));
}

}  // namespace

AtomicMeasure::AtomicMeasure(std::vector<Atom> atoms) {
  if (atoms.empty()) throw std::invalid_argument("AtomicMeasure: no atoms");
  for (const Atom& a : atoms) {
    if (!std::isfinite(a.location) || !std::isfinite(a.mass))
      throw std::invalid_argument("AtomicMeasure: non-finite atom");
    if (a.location < 0.0)
      throw std::invalid_argument("AtomicMeasure: negative atom location");
    if (a.mass <= 0.0 || a.mass > 1.0 + kMassTolerance)
      throw std::invalid_argument("AtomicMeasure: atom mass outside (0, 1]");
  }
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& a, const Atom& b) { return a.location < b.location; });
  for (const Atom& a : atoms) {
    if (!atoms_.empty() && locations_match(atoms_.back().location, a.location)) {
      atoms_.back().mass += a.mass;
    } else {
      atoms_.push_back(a);
    }
  }
  double total = 0.0;
  for (const Atom& a : atoms_) total += a.mass;
  if (std::abs(total - 1.0) > kMassTolerance)
    throw std::invalid_argument("AtomicMeasure: masses sum to " + std::to_string(total));
}

AtomicMeasure AtomicMeasure::point_mass(double location) {
  return AtomicMeasure({{location, 1.0}});
}

AtomicMeasure AtomicMeasure::zero_and_spike(double p, double lambda) {
  if (p <= 0.0 || p > 1.0) throw std::invalid_argument("zero_and_spike: p outside (0, 1]");
  if (p == 1.0) return point_mass(lambda);
  return AtomicMeasure({{0.0, 1.0 - p}, {lambda, p}});
}

AtomicMeasure AtomicMeasure::equal_weights(std::span<const double> locations) {
  if (locations.empty()) throw std::invalid_argument("equal_weights: no locations");
  std::vector<Atom> atoms;
  atoms.reserve(locations.size());
  const double mass = 1.0 / static_cast<double>(locations.size());
  for (double x : locations) atoms.push_back({x, mass});
  return AtomicMeasure(std::move(atoms));
}

double AtomicMeasure::mass_at(double location) const {
  for (const Atom& a : atoms_)
    if (locations_match(a.location, location)) return a.mass;
  return 0.0;
}

double AtomicMeasure::mass_at_zero() const {
  return atoms_.front().location == 0.0 ? atoms_.front().mass : 0.0;
}

namespace {

std::vector<DoubleDouble> widen_checked(const std::vector<double>& values,
                                        const char* what) {
  if (values.empty()) throw std::invalid_argument(std::string(what) + ": order must be >= 1");
  std::vector<DoubleDouble> ext(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]))
      throw std::invalid_argument(std::string(what) + ": non-finite entry");
    ext[i] = DoubleDouble(values[i]);
  }
  return ext;
}

std::vector<double> narrow_checked(const std::vector<DoubleDouble>& ext, const char* what) {
  if (ext.empty()) throw std::invalid_argument(std::string(what) + ": order must be >= 1");
  std::vector<double> values(ext.size());
  for (std::size_t i = 0; i < ext.size(); ++i) {
    values[i] = static_cast<double>(ext[i]);
    if (!std::isfinite(values[i]))
      throw std::invalid_argument(std::string(what) + ": non-finite entry");
  }
  return values;
}

}  // namespace

MomentSequence::MomentSequence(std::vector<double> values)
    : ext_(widen_checked(values, "MomentSequence")), values_(std::move(values)) {}

MomentSequence::MomentSequence(std::vector<DoubleDouble> values)
    : ext_(std::move(values)), values_(narrow_checked(ext_, "MomentSequence")) {}

double MomentSequence::moment(std::size_t k) const {
  if (k < 1 || k > values_.size()) throw std::out_of_range("MomentSequence::moment");
  return values_[k - 1];
}

MomentSequence MomentSequence::truncated(std::size_t order) const {
  if (order < 1 || order > ext_.size()) throw std::out_of_range("MomentSequence::truncated");
  return MomentSequence(std::vector<DoubleDouble>(ext_.begin(), ext_.begin() + order));
}

CumulantSequence::CumulantSequence(std::vector<double> values)
    : ext_(widen_checked(values, "CumulantSequence")), values_(std::move(values)) {}

CumulantSequence::CumulantSequence(std::vector<DoubleDouble> values)
    : ext_(std::move(values)), values_(narrow_checked(ext_, "CumulantSequence")) {}

double CumulantSequence::cumulant(std::size_t k) const {
  if (k < 1 || k > values_.size()) throw std::out_of_range("CumulantSequence::cumulant");
  return values_[k - 1];
}

MarchenkoPastur::MarchenkoPastur(double c_in) : c(c_in) {
  if (!(c > 0.0)) throw std::invalid_argument("MarchenkoPastur: c must be positive");
}

double MarchenkoPastur::support_lo() const {
  const double s = 1.0 - std::sqrt(c);
  return s * s;
}

double MarchenkoPastur::support_hi() const {
  const double s = 1.0 + std::sqrt(c);
  return s * s;
}

double MarchenkoPastur::atom_at_zero() const { return std::max(0.0, 1.0 - 1.0 / c); }

double MarchenkoPastur::density(double x) const {
  const double a = support_lo();
  const double b = support_hi();
  if (x <= 0.0 || x <= a || x >= b) return 0.0;
  return std::sqrt((x - a) * (b - x)) / (2.0 * std::numbers::pi * c * x);
}

std::complex<double> MarchenkoPastur::stieltjes(std::complex<double> z) const {
  // Roots of c z m^2 - (1-c-z) m + 1 = 0. On the upper half-plane the
  // transform is the Herglotz root; on the negative real axis it is the
  // positive one (the spurious root is negative there).
  if (!(z.imag() > 0.0) && !(z.real() < 0.0 && z.imag() == 0.0))
    throw std::domain_error("MarchenkoPastur::stieltjes: need Im z > 0 or z < 0");
  const std::complex<double> d = z - (1.0 + c);
  const std::complex<double> s = std::sqrt(d * d - 4.0 * c);
  const std::complex<double> m1 = ((1.0 - c - z) + s) / (2.0 * c * z);
  const std::complex<double> m2 = ((1.0 - c - z) - s) / (2.0 * c * z);
  if (z.imag() > 0.0) return m1.imag() >= m2.imag() ? m1 : m2;
  return m1.real() >= m2.real() ? m1 : m2;
}

DensityCurve::DensityCurve(std::vector<double> grid, std::vector<double> values,
                           double support_lo, double support_hi, double atom_at_zero)
    : grid_(std::move(grid)),
      values_(std::move(values)),
      support_lo_(support_lo),
      support_hi_(support_hi),
      atom_at_zero_(atom_at_zero) {
  if (grid_.size() < 2 || grid_.size() != values_.size())
    throw std::invalid_argument("DensityCurve: grid/value size mismatch");
  for (std::size_t i = 1; i < grid_.size(); ++i)
    if (!(grid_[i] > grid_[i - 1]))
      throw std::invalid_argument("DensityCurve: grid must be strictly increasing");
  for (double& v : values_) {
    if (!std::isfinite(v)) throw std::invalid_argument("DensityCurve: non-finite value");
    if (v < 0.0) {
      if (v < -1e-9) throw std::invalid_argument("DensityCurve: negative density value");
      v = 0.0;
    }
  }
  if (atom_at_zero_ < 0.0 || !std::isfinite(atom_at_zero_))
    throw std::invalid_argument("DensityCurve: invalid zero atom");
  if (support_lo_ > support_hi_)
    throw std::invalid_argument("DensityCurve: support interval reversed");
}

double DensityCurve::mass() const {
  double acc = 0.0;
  for (std::size_t i = 1; i < grid_.size(); ++i)
    acc += 0.5 * (values_[i] + values_[i - 1]) * (grid_[i] - grid_[i - 1]);
  return acc + atom_at_zero_;
}

bool DensityCurve::is_normalized(double tol) const { return std::abs(mass() - 1.0) <= tol; }

std::vector<double> linspace(double lo, double hi, std::size_t count) {
  if (count < 2) throw std::invalid_argument("linspace: need at least 2 points");
  std::vector<double> g(count);
  const double step = (hi - lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) g[i] = lo + step * static_cast<double>(i);
  g.back() = hi;
  return g;
}

MomentSequence moments_of(const AtomicMeasure& mu, int order) {
  if (order < 1) throw std::invalid_argument("moments_of: order must be >= 1");
  std::vector<double> m(static_cast<std::size_t>(order), 0.0);
  std::vector<double> pow(mu.atom_count(), 1.0);
  for (int k = 0; k < order; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < mu.atom_count(); ++i) {
      pow[i] *= mu.atoms()[i].location;
      acc += mu.atoms()[i].mass * pow[i];
    }
    m[static_cast<std::size_t>(k)] = acc;
  }
  // Nonnegative measure: m1 >= 0 and m2 >= m1^2 must hold up to rounding.
  if (m[0] < 0.0 || (order >= 2 && m[1] < m[0] * m[0] - 1e-9 * std::max(1.0, m[1])))
    throw std::logic_error("moments_of: moment inequalities violated");
  return MomentSequence(std::move(m));
}

MomentSequence mp_moments(double c, int order) {
  if (!(c > 0.0)) throw std::invalid_argument("mp_moments: c must be positive");
  if (order < 1) throw std::invalid_argument("mp_moments: order must be >= 1");
  std::vector<DoubleDouble> alpha(static_cast<std::size_t>(order));
  DoubleDouble p(1.0);
  for (int n = 0; n < order; ++n) {
    alpha[static_cast<std::size_t>(n)] = p;
    p *= DoubleDouble(c);
  }
  return MomentSequence(transforms::cumulants_to_moments<DoubleDouble>(alpha));
}

DensityCurve mp_density(double c, std::span<const double> grid) {
  const MarchenkoPastur law(c);
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) values[i] = law.density(grid[i]);
  return DensityCurve(std::vector<double>(grid.begin(), grid.end()), std::move(values),
                      law.support_lo(), law.support_hi(), law.atom_at_zero());
}

EigenvalueRecovery newton_girard_eigenvalues(std::span<const double> power_sums, int n,
                                             RootPolicy policy) {
  if (n < 1) throw std::invalid_argument("newton_girard_eigenvalues: n must be >= 1");
  if (n > kMaxNewtonGirardSize)
    throw std::invalid_argument("newton_girard_eigenvalues: n exceeds supported maximum");
  if (static_cast<int>(power_sums.size()) < n)
    throw std::invalid_argument("newton_girard_eigenvalues: need n power sums");

  // m Pi_m = sum_{k=1..m} (-1)^(k-1) S_k Pi_{m-k}; the alternating terms
  // cancel heavily, so the recurrence runs in compensated arithmetic
  std::vector<DoubleDouble> elem(static_cast<std::size_t>(n) + 1, DoubleDouble(0.0));
  elem[0] = DoubleDouble(1.0);
  for (int m = 1; m <= n; ++m) {
    DoubleDouble acc(0.0);
    double sign = 1.0;
    for (int k = 1; k <= m; ++k) {
      acc += DoubleDouble(sign * power_sums[static_cast<std::size_t>(k - 1)]) *
             elem[static_cast<std::size_t>(m - k)];
      sign = -sign;
    }
    elem[static_cast<std::size_t>(m)] = acc / DoubleDouble(static_cast<double>(m));
  }

  // ascending coefficients of the monic characteristic polynomial
  // x^n - Pi_1 x^(n-1) + ... + (-1)^n Pi_n, kept in compensated form: root
  // accuracy at modest eigenvalue gaps is limited by coefficient precision
  std::vector<DoubleDouble> coef(static_cast<std::size_t>(n) + 1, DoubleDouble(0.0));
  coef[static_cast<std::size_t>(n)] = DoubleDouble(1.0);
  double sign = -1.0;
  for (int k = 1; k <= n; ++k) {
    coef[static_cast<std::size_t>(n - k)] =
        DoubleDouble(sign) * elem[static_cast<std::size_t>(k)];
    sign = -sign;
  }

  struct ComplexDD {
    DoubleDouble re, im;
  };
  const auto poly_and_derivative = [&](std::complex<double> x) {
    const DoubleDouble xr(x.real()), xi(x.imag());
    ComplexDD p{DoubleDouble(0.0), DoubleDouble(0.0)};
    ComplexDD dp{DoubleDouble(0.0), DoubleDouble(0.0)};
    for (int i = n; i >= 0; --i) {
      dp = {dp.re * xr - dp.im * xi + p.re, dp.re * xi + dp.im * xr + p.im};
      p = {p.re * xr - p.im * xi + coef[static_cast<std::size_t>(i)],
           p.re * xi + p.im * xr};
    }
    return std::pair{
        std::complex<double>(static_cast<double>(p.re), static_cast<double>(p.im)),
        std::complex<double>(static_cast<double>(dp.re), static_cast<double>(dp.im))};
  };

  std::vector<std::complex<double>> roots;
  if (n == 1) {
    roots.emplace_back(static_cast<double>(elem[1]), 0.0);
  } else {
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i)
      companion(i, n - 1) = -static_cast<double>(coef[static_cast<std::size_t>(i)]);
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success)
      throw std::runtime_error("newton_girard_eigenvalues: root solve did not converge");
    for (int i = 0; i < n; ++i) {
      std::complex<double> r = solver.eigenvalues()[i];
      for (int it = 0; it < 6; ++it) {  // polish simple roots to full precision
        const auto [p, dp] = poly_and_derivative(r);
        if (std::abs(dp) < 1e-300) break;
        const std::complex<double> step = p / dp;
        r -= step;
        if (std::abs(step) < 1e-16 * std::max(1.0, std::abs(r))) break;
      }
      roots.push_back(r);
    }
  }

  double scale = 0.0;
  for (const auto& r : roots) scale = std::max(scale, std::abs(r));
  if (scale == 0.0) scale = 1.0;
  const double tol = 1e-6 * scale;

  EigenvalueRecovery result;
  result.eigenvalues.reserve(roots.size());
  for (const std::complex<double>& r : roots) {
    if (std::abs(r.imag()) > tol) {
      if (policy == RootPolicy::kStrict)
        throw std::runtime_error("newton_girard_eigenvalues: complex root with |Im| = " +
                                 std::to_string(std::abs(r.imag())));
      ++result.clamped_complex;
    }
    double v = r.real();
    if (v < 0.0) {
      if (v < -tol) {
        if (policy == RootPolicy::kStrict)
          throw std::runtime_error("newton_girard_eigenvalues: negative root " +
                                   std::to_string(v));
        ++result.clamped_negative;
      }
      v = 0.0;
    }
    result.eigenvalues.push_back(v);
  }
  std::sort(result.eigenvalues.begin(), result.eigenvalues.end());
  return result;
}

std::complex<double> stieltjes(const AtomicMeasure& mu, std::complex<double> z) {
  std::complex<double> acc = 0.0;
  for (const auto& a : mu.atoms()) {
    const std::complex<double> d = a.location - z;
    if (d == std::complex<double>(0.0, 0.0))
      throw std::domain_error("stieltjes: z coincides with an atom");
    acc += a.mass / d;
  }
  return acc;
}

double eta(const AtomicMeasure& mu, double z) {
  if (z < 0.0) throw std::invalid_argument("eta: z must be nonnegative");
  double acc = 0.0;
  for (const auto& a : mu.atoms()) acc += a.mass / (1.0 + z * a.location);
  return acc;
}

double default_inversion_omega(double support_width) {
  return 1e-6 * std::max(support_width, 1e-12);
}

DensityCurve stieltjes_inversion(std::span<const std::complex<double>> stieltjes_values,
                                 std::span<const double> grid) {
  if (stieltjes_values.size() != grid.size())
    throw std::invalid_argument("stieltjes_inversion: grid/value size mismatch");
  std::vector<double> f(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    f[i] = std::max(0.0, stieltjes_values[i].imag() / std::numbers::pi);
  return DensityCurve(std::vector<double>(grid.begin(), grid.end()), std::move(f),
                      grid.front(), grid.back(), 0.0);
}

}  // namespace freedec
