#pragma once

// Test-side oracles, independent of the library implementation paths they
// check: brute-force noncrossing-partition sums for the moment-cumulant
// machinery, and a plain Simpson rule (with the edge substitution done by
// hand) for density integrals.

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace oracles {

using Partition = std::vector<std::vector<int>>;

inline bool is_noncrossing(const Partition& blocks, int n) {
  std::vector<int> block_of(static_cast<std::size_t>(n), -1);
  for (std::size_t b = 0; b < blocks.size(); ++b)
    for (int e : blocks[b]) block_of[static_cast<std::size_t>(e)] = static_cast<int>(b);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k)
        for (int l = k + 1; l < n; ++l)
          if (block_of[i] == block_of[k] && block_of[j] == block_of[l] &&
              block_of[i] != block_of[j])
            return false;
  return true;
}

/// All set partitions of {0..n-1} via restricted growth strings.
inline std::vector<Partition> all_partitions(int n) {
  std::vector<Partition> out;
  std::vector<int> rgs(static_cast<std::size_t>(n), 0);
  while (true) {
    int max_block = 0;
    for (int v : rgs) max_block = std::max(max_block, v);
    Partition blocks(static_cast<std::size_t>(max_block) + 1);
    for (int i = 0; i < n; ++i) blocks[static_cast<std::size_t>(rgs[i])].push_back(i);
    out.push_back(blocks);

    int i = n - 1;
    for (; i > 0; --i) {
      int prefix_max = 0;
      for (int j = 0; j < i; ++j) prefix_max = std::max(prefix_max, rgs[j]);
      if (rgs[i] <= prefix_max) {
        ++rgs[i];
        for (int j = i + 1; j < n; ++j) rgs[j] = 0;
        break;
      }
    }
    if (i == 0) break;
  }
  return out;
}

inline std::vector<Partition> noncrossing_partitions(int n) {
  std::vector<Partition> out;
  for (auto& part : all_partitions(n))
    if (is_noncrossing(part, n)) out.push_back(std::move(part));
  return out;
}

/// Moment-cumulant sum: m_n = sum over NC(n) of prod_B alpha_{|B|}.
template <typename T>
T nc_moment(const std::vector<T>& alpha, int n) {
  T acc(0);
  for (const auto& part : noncrossing_partitions(n)) {
    T term(1);
    for (const auto& block : part) term *= alpha[block.size() - 1];
    acc += term;
  }
  return acc;
}

/// Multiplicative MP convolution via the annotated sum: the cumulant series is
/// c * (moment series of mu), and the output moment series is scaled back.
template <typename T>
T nc_mp_convolved_moment(const std::vector<T>& mu_moments, T c, int n) {
  std::vector<T> scaled(mu_moments.size());
  for (std::size_t i = 0; i < mu_moments.size(); ++i) scaled[i] = c * mu_moments[i];
  return nc_moment(scaled, n) / c;
}

/// Simpson rule after the substitution x = center + half*sin(theta), which
/// turns sqrt((x-lo)(hi-x)) into half*cos(theta) exactly.
inline double simpson_edge_integral(double lo, double hi,
                                    const std::function<double(double)>& rest,
                                    int intervals = 4000) {
  const double cen = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double pi = 3.14159265358979323846;
  const auto g = [&](double theta) {
    const double x = cen + half * std::sin(theta);
    const double ct = half * std::cos(theta);
    return rest(x) * ct * ct;
  };
  const double a = -0.5 * pi, b = 0.5 * pi;
  const double h = (b - a) / intervals;
  double acc = g(a) + g(b);
  for (int i = 1; i < intervals; ++i) acc += g(a + h * i) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

}  // namespace oracles
