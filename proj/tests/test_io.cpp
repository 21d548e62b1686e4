#include <doctest.h>

#include <sstream>

#include "freedec/experiments.hpp"
#include "freedec/io.hpp"

using namespace freedec;

TEST_CASE("measure text round-trips") {
  const AtomicMeasure mu({{0.0, 0.25}, {1.5, 0.75}});
  std::ostringstream out;
  write_measure(out, mu);
  CHECK(out.str() == "atom 0 0.25\natom 1.5 0.75\n");
  std::istringstream in(out.str());
  const AtomicMeasure back = read_measure(in);
  REQUIRE(back.atom_count() == 2);
  CHECK(back.atoms()[1].location == doctest::Approx(1.5));
}

TEST_CASE("measure parse errors carry line numbers") {
  std::istringstream bad("atom 0 0.5\nnonsense 1 2\n");
  try {
    read_measure(bad);
    FAIL("expected a parse error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }

  std::istringstream truncated("atom 0\n");
  CHECK_THROWS_AS(read_measure(truncated), std::runtime_error);
}

TEST_CASE("density CSV round-trips including support and zero atom") {
  const DensityCurve curve({0.0, 0.5, 1.0}, {0.0, 1.2, 0.0}, 0.1, 0.9, 0.4);
  std::ostringstream out;
  write_density_csv(out, curve);
  std::istringstream in(out.str());
  const DensityCurve back = read_density_csv(in);
  CHECK(back.support_lo() == doctest::Approx(0.1));
  CHECK(back.support_hi() == doctest::Approx(0.9));
  CHECK(back.atom_at_zero() == doctest::Approx(0.4));
  CHECK(back.values()[1] == doctest::Approx(1.2));
}

TEST_CASE("spectrum CSV round-trips the config header") {
  SpectrumSample s;
  s.config = {"wishart", 4, 8, 0.25, 42, 1};
  s.eigenvalues = {0.1, 0.4, 0.9, 2.0};
  std::ostringstream out;
  write_spectrum_csv(out, s);
  std::istringstream in(out.str());
  const SpectrumSample back = read_spectrum_csv(in);
  CHECK(back.config.kind == "wishart");
  CHECK(back.config.n == 4);
  CHECK(back.config.cols == 8);
  CHECK(back.config.sigma2 == doctest::Approx(0.25));
  CHECK(back.config.seed == 42);
  REQUIRE(back.eigenvalues.size() == 4);
  CHECK(back.eigenvalues[3] == doctest::Approx(2.0));
}

TEST_CASE("experiment config records defaults and round-trips through its echo") {
  ExperimentConfig cfg;
  cfg.set("n", "128");
  CHECK(cfg.get_int("n", 64) == 128);
  CHECK(cfg.get_int("trials", 50) == 50);      // default recorded
  CHECK(cfg.get_double("sigma2", 0.1) == 0.1); // default recorded
  const std::string echo = cfg.echo();
  CHECK(echo.find("trials=50") != std::string::npos);

  std::istringstream in(echo);
  ExperimentConfig back = ExperimentConfig::from_file(in);
  CHECK(back.echo() == echo);
}

TEST_CASE("unknown experiments are rejected") {
  ExperimentConfig cfg;
  CHECK_THROWS_AS(run_experiment("fig-nope", cfg), std::invalid_argument);
}

TEST_CASE("search results serialize as key-value plus trace CSV") {
  SearchResult<int> result;
  result.estimate = 36;
  result.objective = 0.5;
  result.trace = {{35, 0.9}, {36, 0.5}};
  std::ostringstream kv, trace;
  write_search_result(kv, result);
  write_search_trace_csv(trace, result);
  CHECK(kv.str() == "estimate 36\nobjective 0.5\n");
  CHECK(trace.str() == "candidate,objective\n35,0.9\n36,0.5\n");
}
