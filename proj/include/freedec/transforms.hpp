#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace freedec {

/// Compensated double-double scalar (Dekker/Knuth error-free transforms),
/// roughly 32 significant digits. The triangular moment recursions below
/// produce intermediate series coefficients that overflow a 53-bit mantissa
/// long before the results do, so the double-facing API runs on this type.
struct DoubleDouble {
  double hi = 0.0;
  double lo = 0.0;

  constexpr DoubleDouble() = default;
  explicit constexpr DoubleDouble(double x) : hi(x), lo(0.0) {}
  constexpr DoubleDouble(double h, double l) : hi(h), lo(l) {}

  explicit operator double() const { return hi + lo; }
};

namespace detail {

inline DoubleDouble two_sum(double a, double b) {
  const double s = a + b;
  const double bb = s - a;
  const double err = (a - (s - bb)) + (b - bb);
  return {s, err};
}

inline DoubleDouble quick_two_sum(double a, double b) {
  const double s = a + b;
  return {s, b - (s - a)};
}

inline DoubleDouble two_prod(double a, double b) {
  const double p = a * b;
  return {p, std::fma(a, b, -p)};
}

}  // namespace detail

inline DoubleDouble operator+(DoubleDouble a, DoubleDouble b) {
  DoubleDouble s = detail::two_sum(a.hi, b.hi);
  DoubleDouble t = detail::two_sum(a.lo, b.lo);
  s.lo += t.hi;
  s = detail::quick_two_sum(s.hi, s.lo);
  s.lo += t.lo;
  return detail::quick_two_sum(s.hi, s.lo);
}

inline DoubleDouble operator-(DoubleDouble a) { return {-a.hi, -a.lo}; }
inline DoubleDouble operator-(DoubleDouble a, DoubleDouble b) { return a + (-b); }

inline DoubleDouble operator*(DoubleDouble a, DoubleDouble b) {
  DoubleDouble p = detail::two_prod(a.hi, b.hi);
  p.lo += a.hi * b.lo + a.lo * b.hi;
  return detail::quick_two_sum(p.hi, p.lo);
}

inline DoubleDouble operator/(DoubleDouble a, DoubleDouble b) {
  const double q1 = a.hi / b.hi;
  DoubleDouble r = a - DoubleDouble(q1) * b;
  const double q2 = r.hi / b.hi;
  r = r - DoubleDouble(q2) * b;
  const double q3 = r.hi / b.hi;
  DoubleDouble q = detail::quick_two_sum(q1, q2);
  return q + DoubleDouble(q3);
}

inline DoubleDouble& operator+=(DoubleDouble& a, DoubleDouble b) { return a = a + b; }
inline DoubleDouble& operator-=(DoubleDouble& a, DoubleDouble b) { return a = a - b; }
inline DoubleDouble& operator*=(DoubleDouble& a, DoubleDouble b) { return a = a * b; }

namespace transforms {

/// Generic triangular transforms between a moment series (m1..mK) and the
/// coefficient series of its R-transform (a1..aK). Works for any scalar with
/// ring operations and construction from small ints (double, DoubleDouble,
/// an exact rational type, ...). No divisions are performed, so rational
/// inputs stay exact.
///
/// The moment series vector m = (1, m1, ..., mK) is folded with itself, each
/// fold truncated to K+1 coefficients, giving M_k(j) = coef_j((1+m1 z+...)^k);
/// then m_n = sum_{k<=n} a_k M_k(n-k) is solved in the wanted direction.
template <typename T>
std::vector<T> moments_to_cumulants(std::span<const T> moments) {
  const std::size_t K = moments.size();
  if (K == 0) throw std::invalid_argument("moments_to_cumulants: empty sequence");

  std::vector<T> m(K + 1, T(0));
  m[0] = T(1);
  for (std::size_t i = 0; i < K; ++i) m[i + 1] = moments[i];

  // M[k] = k-fold truncated self-convolution of m, 1-based in k.
  std::vector<std::vector<T>> M(K + 1);
  M[1] = m;
  for (std::size_t k = 2; k <= K; ++k) {
    M[k].assign(K + 1, T(0));
    for (std::size_t i = 0; i <= K; ++i) {
      for (std::size_t j = 0; i + j <= K; ++j) {
        M[k][i + j] += M[k - 1][i] * m[j];
      }
    }
  }

  std::vector<T> alpha(K + 1, T(0));
  for (std::size_t k = 1; k <= K; ++k) {
    T s = m[k];
    for (std::size_t r = 1; r < k; ++r) s -= alpha[r] * M[r][k - r];
    alpha[k] = s;  // M_k(0) == 1
  }
  return {alpha.begin() + 1, alpha.end()};
}

template <typename T>
std::vector<T> cumulants_to_moments(std::span<const T> cumulants) {
  const std::size_t K = cumulants.size();
  if (K == 0) throw std::invalid_argument("cumulants_to_moments: empty sequence");

  std::vector<T> m(K + 1, T(0));
  m[0] = T(1);
  std::vector<std::vector<T>> M(K + 1, std::vector<T>(K + 1, T(0)));
  for (std::size_t k = 1; k <= K; ++k) M[k][0] = T(1);

  // The fold vectors are extended one coefficient at a time as each new
  // moment becomes available; coefficient n of M_k needs only m_0..m_n.
  for (std::size_t n = 1; n <= K; ++n) {
    T s = T(0);
    for (std::size_t k = 1; k <= n; ++k) s += cumulants[k - 1] * M[k][n - k];
    m[n] = s;
    M[1][n] = s;
    for (std::size_t k = 2; k <= K; ++k) {
      T acc = T(0);
      for (std::size_t i = 0; i <= n; ++i) acc += M[k - 1][i] * m[n - i];
      M[k][n] = acc;
    }
  }
  return {m.begin() + 1, m.end()};
}

}  // namespace transforms
}  // namespace freedec
