#include <doctest.h>

#include <cmath>

#include "freedec/estimators.hpp"
#include "freedec/experiments.hpp"
#include "freedec/freeconv.hpp"

using namespace freedec;

namespace {
MomentSequence seq(std::vector<double> v) { return MomentSequence(std::move(v)); }
}  // namespace

TEST_CASE("moment MSE examples") {
  CHECK(moment_mse(seq({1.0, 2.0}), seq({1.0, 2.0})) == doctest::Approx(0.0));
  CHECK(moment_mse(seq({1.0, 2.0}), seq({1.0, 3.0})) == doctest::Approx(1.0));
  CHECK(moment_mse(seq({0.0, 0.0}), seq({1.0, 1.0})) == doctest::Approx(2.0));
}

TEST_CASE("weighted MSE with the default weights ignores odd moments") {
  const auto cfg = WeightedMseConfig::catalan(4);
  CHECK(cfg.weights == std::vector<double>{0.0, 1.0, 0.0, 2.0});
  CHECK(weighted_mse(seq({1.0, 1.0, 1.0, 1.0}), seq({5.0, 1.0, -3.0, 1.0}), cfg) ==
        doctest::Approx(0.0));
  CHECK(weighted_mse(seq({0.0, 1.0, 0.0, 0.0}), seq({0.0, 2.0, 0.0, 0.0}), cfg) ==
        doctest::Approx(1.0));
  CHECK(weighted_mse(seq({1.0, 1.0}), seq({1.0, 1.0}), WeightedMseConfig::catalan(2)) ==
        doctest::Approx(0.0));

  const auto binom = WeightedMseConfig::central_binomial(8);
  CHECK(binom.weights == std::vector<double>{0.0, 2.0, 0.0, 6.0, 0.0, 20.0, 0.0, 70.0});
  const auto cat8 = WeightedMseConfig::catalan(8);
  CHECK(cat8.weights == std::vector<double>{0.0, 1.0, 0.0, 2.0, 0.0, 5.0, 0.0, 14.0});
}

TEST_CASE("covariance estimate is the identity on exact MP moments") {
  const auto est = g2_estimate(mp_moments(0.5, 6), 0.5);
  for (double v : est.values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("covariance estimate error shrinks with size and grows with order") {
  const std::vector<int> sizes{32, 128, 512};
  const auto trend = g2_mse_study(sizes, 10, 0.5, 77);
  CHECK(trend[0].mse4 > trend[1].mse4);
  CHECK(trend[1].mse4 > trend[2].mse4);
  for (const auto& point : trend) CHECK(point.mse8 > point.mse4);
}

TEST_CASE("info-plus-noise estimation examples") {
  const auto base = moments_of(AtomicMeasure::zero_and_spike(0.5, 1.0), 6);

  // zero noise: identity
  const auto same = info_plus_noise_deconvolve(info_plus_noise_forward(base, 0.5, 0.0), 0.5,
                                               0.0);
  for (std::size_t k = 0; k < 6; ++k)
    CHECK(same.gamma.values()[k] == doctest::Approx(base.values()[k]).epsilon(1e-11));

  // forward then inverse is the identity
  const auto forward = info_plus_noise_forward(base, 0.5, 0.1);
  const auto inverted = info_plus_noise_deconvolve(forward, 0.5, 0.1);
  for (std::size_t k = 0; k < 6; ++k)
    CHECK(inverted.gamma.values()[k] == doctest::Approx(base.values()[k]).epsilon(1e-10));

  // the intermediate is the measure deconvolved by the MP law
  const auto expected_intermediate = mult_mp_deconvolve(base, 0.5);
  for (std::size_t k = 0; k < 6; ++k)
    CHECK(inverted.intermediate.values()[k] ==
          doctest::Approx(expected_intermediate.values()[k]).epsilon(1e-10));
}

TEST_CASE("info-plus-noise Monte Carlo recovery") {
  const AtomicMeasure spec = AtomicMeasure::zero_and_spike(0.5, 1.0);
  const int trials = 30;
  std::vector<double> acc(4, 0.0);
  for (int t = 0; t < trials; ++t) {
    const SpectrumSample s = sample_info_plus_noise(spec, 256, 512, 0.1, split_seed(808, t));
    const auto est = info_plus_noise_deconvolve(empirical_moments(s, 4), 0.5, 0.1);
    for (std::size_t k = 0; k < 4; ++k) acc[k] += est.gamma.values()[k];
  }
  for (double& v : acc) v /= trials;
  for (double v : acc) CHECK(std::abs(v - 0.5) < 0.05);
}

TEST_CASE("power estimation is exact on noiseless-by-construction moments") {
  const AtomicMeasure powers =
      AtomicMeasure::equal_weights(std::vector<double>{0.5, 1.0, 1.5});
  const auto forward = cdma_forward_moments(moments_of(powers, 3), 256, 36, 2048, 0.1);
  const PowerEstimate est = estimate_power_distribution(forward, 256, 36, 2048, 0.1, 3);
  REQUIRE(est.locations.size() == 3);
  CHECK(est.locations[0] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(est.locations[1] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(est.locations[2] == doctest::Approx(1.5).epsilon(1e-6));
  CHECK(est.clamped_negative == 0);
  CHECK(est.clamped_complex == 0);

  // noiseless, many observations, unit powers
  const auto forward_unit = cdma_forward_moments(
      moments_of(AtomicMeasure::point_mass(1.0), 3), 256, 36, 64 * 256, 0.0);
  const PowerEstimate unit = estimate_power_distribution(forward_unit, 256, 36, 64 * 256,
                                                         0.0, 3);
  for (double v : unit.locations) CHECK(std::abs(v - 1.0) < 0.05);
}

TEST_CASE("power estimation rejects more atoms than users") {
  const auto forward =
      cdma_forward_moments(moments_of(AtomicMeasure::point_mass(1.0), 4), 64, 2, 256, 0.0);
  CHECK_THROWS_AS(estimate_power_distribution(forward, 64, 2, 256, 0.0, 4),
                  std::invalid_argument);
}

TEST_CASE("user count search is exact on composed moments and exposes its trace") {
  const auto forward =
      cdma_forward_moments(moments_of(AtomicMeasure::point_mass(1.0), 4), 256, 36, 1024, 0.1);
  const SearchResult<int> result =
      estimate_user_count(forward, 256, 1024, 0.1, AtomicMeasure::point_mass(1.0));
  CHECK(result.estimate == 36);
  CHECK(result.objective == doctest::Approx(0.0).epsilon(1e-18));
  REQUIRE(result.trace.size() == 256);
  for (int i = 0; i < 256; ++i) CHECK(result.trace[static_cast<std::size_t>(i)].first == i + 1);
}

TEST_CASE("user count Monte Carlo sanity") {
  const UserCountStudyResult study = user_count_study(256, 36, 1024, 0.1, 5, 31415);
  CHECK(UserCountStudyResult::within_fraction(study.free_estimates, 36, 2) >= 0.6);
  // the fixed-threshold count overshoots badly at this observation length
  for (int e : study.classical_estimates) CHECK(e > 60);
}

TEST_CASE("classical rank examples") {
  SpectrumSample s;
  s.config = {"scm", 3, 3, 0.1, 0, 1};
  s.eigenvalues = {0.0, 0.0, 0.0};
  CHECK(classical_rank(s, 0.1) == 0);
  s.eigenvalues = {0.05, 0.2};
  CHECK(classical_rank(s, 0.1) == 1);
  // monotone nonincreasing in the threshold factor
  s.eigenvalues = {0.05, 0.12, 0.18, 0.5};
  int prev = 1 << 20;
  for (double factor : {0.4, 0.8, 1.2, 1.6, 2.0, 6.0}) {
    const int r = classical_rank(s, 0.1, factor);
    CHECK(r <= prev);
    prev = r;
  }
}

TEST_CASE("channel covariance estimation examples") {
  // sigma = 0, exact moments: plain MP deconvolution roundtrip
  const auto base = moments_of(AtomicMeasure::zero_and_spike(0.5, 1.0), 4);
  const auto forward = mult_mp_convolve(base, 0.5);
  const auto rec = estimate_channel_covariance(forward, 0.5, 0.0);
  for (std::size_t k = 0; k < 4; ++k)
    CHECK(rec.values()[k] == doctest::Approx(base.values()[k]).epsilon(1e-10));
}

TEST_CASE("channel covariance Monte Carlo recovery at both observation lengths") {
  {
    const CovarianceStudyResult study = covariance_cdf_study(256, 128, 0.1, 512, 4, 30, 99);
    for (double v : study.mean_moments) CHECK(std::abs(v - 0.5) < 0.05);
  }
  {
    // works even with fewer observations than dimensions
    const CovarianceStudyResult study = covariance_cdf_study(256, 128, 0.1, 128, 4, 30, 98);
    for (double v : study.mean_moments) CHECK(std::abs(v - 0.5) < 0.1);
  }
}

TEST_CASE("noise variance grid search recovers an exact gridpoint") {
  const auto r = moments_of(AtomicMeasure::zero_and_spike(0.5, 1.0), 4);
  const double sigma = 0.316;  // on the grid exactly
  const auto observed = mult_mp_convolve(shift_moments(r, sigma * sigma), 0.5);
  const NoiseVarianceGrid grid{0.216, 0.416, 1e-3};
  const SearchResult<double> result = estimate_noise_variance(observed, r, 0.5, grid);
  CHECK(result.estimate == doctest::Approx(sigma).epsilon(1e-12));
  CHECK(result.objective == doctest::Approx(0.0).epsilon(1e-20));
  CHECK(result.trace.size() == 201);
}

TEST_CASE("capacity estimation examples") {
  // all eigenvalues at one, unit SNR: one bit. The repeated root limits the
  // recovery accuracy to roughly eps^(1/3), hence the tolerance.
  const auto unit = moments_of(AtomicMeasure::point_mass(1.0), 3);
  const CapacityEstimate one = estimate_capacity(unit, 12, 1, 0.0, 1.0);
  CHECK(one.capacity == doctest::Approx(1.0).epsilon(1e-6));

  // natural-log flag reports nats
  const CapacityEstimate nats = estimate_capacity(unit, 12, 1, 0.0, 1.0, true);
  CHECK(nats.capacity == doctest::Approx(std::log(2.0)).epsilon(1e-6));

  // zero spectrum: zero capacity (use a tiny-but-valid first moment)
  const CapacityEstimate zero =
      estimate_capacity(seq({1e-12, 1e-20, 1e-28}), 12, 1, 0.0, 1.0);
  CHECK(zero.capacity == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("capacity error decreases with the number of averaged blocks") {
  const std::vector<double> spectrum{0.5, 1.0, 1.5};
  const CapacityStudyResult one = capacity_study(126, spectrum, 0.01, 1.0, 1, 10, 2025);
  const CapacityStudyResult four = capacity_study(126, spectrum, 0.01, 1.0, 4, 10, 2025);
  CHECK(four.mean_abs_error < one.mean_abs_error);
  CHECK(one.true_capacity == doctest::Approx((std::log2(1.5) + 1.0 + std::log2(2.5)) / 3.0));
}

TEST_CASE("estimator pipelines invert their forward compositions") {
  const auto base = moments_of(AtomicMeasure::equal_weights(std::vector<double>{0.4, 1.2}), 6);
  // CDMA chain
  const auto cdma = cdma_inverse_moments(cdma_forward_moments(base, 128, 24, 512, 0.2), 128,
                                         24, 512, 0.2);
  for (std::size_t k = 0; k < 6; ++k)
    CHECK(cdma.values()[k] == doctest::Approx(base.values()[k]).epsilon(1e-10));
  // channel covariance chain
  const auto chan = estimate_channel_covariance(
      mult_mp_convolve(shift_moments(base, 0.2), 0.25), 0.25, 0.2);
  for (std::size_t k = 0; k < 6; ++k)
    CHECK(chan.values()[k] == doctest::Approx(base.values()[k]).epsilon(1e-10));
}

TEST_CASE("rankwise averaging") {
  const std::vector<std::vector<double>> runs{{0.0, 1.0}, {1.0, 3.0}};
  const auto avg = rankwise_average(runs);
  CHECK(avg == std::vector<double>{0.5, 2.0});
}
