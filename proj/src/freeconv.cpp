#include "freedec/freeconv.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "freedec/transforms.hpp"

namespace freedec {

namespace {

void check_order(std::size_t order) {
  if (order > kMaxMomentOrder)
    throw std::invalid_argument("moment order exceeds supported maximum");
}

void check_equal_orders(const MomentSequence& a, const MomentSequence& b) {
  if (a.order() != b.order())
    throw std::invalid_argument("moment sequences must have equal truncation orders");
}

}  // namespace

CumulantSequence moments_to_cumulants(const MomentSequence& m) {
  check_order(m.order());
  return CumulantSequence(transforms::moments_to_cumulants<DoubleDouble>(m.extended()));
}

MomentSequence cumulants_to_moments(const CumulantSequence& a) {
  check_order(a.order());
  return MomentSequence(transforms::cumulants_to_moments<DoubleDouble>(a.extended()));
}

MomentSequence additive_free_convolve(const MomentSequence& m1, const MomentSequence& m2) {
  check_equal_orders(m1, m2);
  check_order(m1.order());
  const auto a1 = transforms::moments_to_cumulants<DoubleDouble>(m1.extended());
  const auto a2 = transforms::moments_to_cumulants<DoubleDouble>(m2.extended());
  std::vector<DoubleDouble> sum(a1.size());
  for (std::size_t i = 0; i < a1.size(); ++i) sum[i] = a1[i] + a2[i];
  return MomentSequence(transforms::cumulants_to_moments<DoubleDouble>(sum));
}

MomentSequence additive_free_deconvolve(const MomentSequence& m, const MomentSequence& m2) {
  check_equal_orders(m, m2);
  check_order(m.order());
  const auto a = transforms::moments_to_cumulants<DoubleDouble>(m.extended());
  const auto a2 = transforms::moments_to_cumulants<DoubleDouble>(m2.extended());
  std::vector<DoubleDouble> diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - a2[i];
  return MomentSequence(transforms::cumulants_to_moments<DoubleDouble>(diff));
}

MomentSequence shift_moments(const MomentSequence& m, double s) {
  const std::size_t K = m.order();
  std::vector<DoubleDouble> ext(K + 1, DoubleDouble(1.0));
  for (std::size_t i = 1; i <= K; ++i) ext[i] = m.extended()[i - 1];
  std::vector<DoubleDouble> out(K);
  for (std::size_t j = 1; j <= K; ++j) {
    DoubleDouble acc(0.0);
    DoubleDouble binom(1.0);
    DoubleDouble spow(1.0);
    for (std::size_t k = 0; k <= j; ++k) {
      acc += binom * spow * ext[j - k];
      spow *= DoubleDouble(s);
      binom = binom * DoubleDouble(static_cast<double>(j - k)) /
              DoubleDouble(static_cast<double>(k + 1));
    }
    out[j - 1] = acc;
  }
  return MomentSequence(std::move(out));
}

MomentSequence shift_deconvolve(const MomentSequence& m, double s2) {
  if (s2 < 0.0) throw std::invalid_argument("shift_deconvolve: s2 must be nonnegative");
  return shift_moments(m, -s2);
}

MomentSequence mult_mp_convolve(const MomentSequence& m, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("mult_mp_convolve: c must be positive");
  check_order(m.order());
  std::vector<DoubleDouble> scaled = m.extended();
  for (auto& v : scaled) v *= DoubleDouble(c);
  auto out = transforms::cumulants_to_moments<DoubleDouble>(scaled);
  for (auto& v : out) v = v / DoubleDouble(c);
  return MomentSequence(std::move(out));
}

MomentSequence mult_mp_deconvolve(const MomentSequence& m, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("mult_mp_deconvolve: c must be positive");
  if (m.moment(1) == 0.0)
    throw std::domain_error("mult_mp_deconvolve: first moment must be nonzero");
  check_order(m.order());
  std::vector<DoubleDouble> scaled = m.extended();
  for (auto& v : scaled) v *= DoubleDouble(c);
  auto out = transforms::moments_to_cumulants<DoubleDouble>(scaled);
  for (auto& v : out) v = v / DoubleDouble(c);
  return MomentSequence(std::move(out));
}

MomentSequence scale_and_pad(const MomentSequence& m, double fraction) {
  if (!(fraction > 0.0) || fraction > 1.0)
    throw std::invalid_argument("scale_and_pad: fraction must be in (0, 1]");
  std::vector<DoubleDouble> out = m.extended();
  for (auto& v : out) v *= DoubleDouble(fraction);
  return MomentSequence(std::move(out));
}

MomentSequence unpad_zero_atom(const MomentSequence& m, double fraction) {
  if (!(fraction > 0.0) || fraction > 1.0)
    throw std::invalid_argument("unpad_zero_atom: fraction must be in (0, 1]");
  std::vector<DoubleDouble> out = m.extended();
  for (auto& v : out) v = v / DoubleDouble(fraction);
  return MomentSequence(std::move(out));
}

bool hankel_psd_advisory(const MomentSequence& m, double tol) {
  const std::size_t K = m.order();
  std::vector<double> ext(K + 1, 1.0);
  for (std::size_t i = 1; i <= K; ++i) ext[i] = m.values()[i - 1];

  double scale = 1.0;
  for (double v : ext) scale = std::max(scale, std::abs(v));

  const auto min_eig = [&](std::size_t offset, std::size_t dim) {
    Eigen::MatrixXd h(dim, dim);
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j) h(i, j) = ext[offset + i + j];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
  };

  const std::size_t q0 = K / 2;        // H0 uses moments up to 2*q0
  const std::size_t q1 = (K + 1) / 2;  // H1 uses moments up to 2*q1-1
  if (min_eig(0, q0 + 1) < -tol * scale) return false;
  if (q1 >= 1 && min_eig(1, q1) < -tol * scale) return false;
  return true;
}

}  // namespace freedec
