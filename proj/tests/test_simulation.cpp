#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "helpers.hpp"
#include "quest/error.hpp"
#include "quest/simulation.hpp"

using namespace quest;

TEST_CASE("shape c.d.f. values") {
  CHECK(shape_cdf(Shape::h1, 0.0) == 0.0);
  CHECK(shape_cdf(Shape::h1, 1.0) == 1.0);
  CHECK(shape_cdf(Shape::h1, 0.5) == doctest::Approx(1.0 - std::cbrt(0.875)).epsilon(1e-12));
  CHECK(std::abs(shape_cdf(Shape::h1, 0.5) - 0.0435338) <= 1e-6);
  CHECK(shape_cdf(Shape::h3, 0.5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(shape_cdf(Shape::h4, 0.5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(shape_cdf(Shape::h1, 1.5), QuestError);
  CHECK_THROWS_AS(shape_quantile(Shape::h2, -0.1), QuestError);
}

TEST_CASE("quantile inverts the c.d.f. and both are monotone") {
  for (Shape s : {Shape::h1, Shape::h2, Shape::h3, Shape::h4}) {
    CHECK(shape_cdf(s, 0.0) == doctest::Approx(0.0));
    CHECK(shape_cdf(s, 1.0) == doctest::Approx(1.0));
    double prev = -1.0;
    for (int i = 0; i <= 200; ++i) {
      const double q = i / 200.0;
      const double x = shape_quantile(s, q);
      CHECK(x >= prev);
      prev = x;
      CHECK(shape_cdf(s, x) == doctest::Approx(q).epsilon(1e-9));
    }
  }
}

TEST_CASE("H2 mirrors H1") {
  for (double x : {0.1, 0.3, 0.77}) CHECK(shape_cdf(Shape::h2, x) == doctest::Approx(1.0 - shape_cdf(Shape::h1, 1.0 - x)));
}

TEST_CASE("population from a shape") {
  const auto flat = population_from_shape({Shape::h3, 1.0}, 7);
  CHECK(std::all_of(flat.begin(), flat.end(), [](double t) { return t == 1.0; }));

  const auto four = population_from_shape({Shape::h1, 10.0}, 4);
  const double qs[] = {0.125, 0.375, 0.625, 0.875};
  for (int i = 0; i < 4; ++i) {
    CHECK(four[static_cast<std::size_t>(i)] == doctest::Approx(1.0 + 9.0 * shape_quantile(Shape::h1, qs[i])));
    CHECK(four[static_cast<std::size_t>(i)] >= 1.0);
    CHECK(four[static_cast<std::size_t>(i)] <= 10.0);
  }

  for (Shape s : {Shape::h1, Shape::h2, Shape::h3, Shape::h4}) {
    double prev = 1.0;
    for (int p : {10, 100, 1000, 10000}) {
      const auto v = population_from_shape({s, 10.0}, p);
      CHECK(std::is_sorted(v.begin(), v.end()));
      const double ratio = v.back() / v.front();
      CHECK(ratio > prev);
      CHECK(ratio < 10.0);
      prev = ratio;
    }
  }
}

TEST_CASE("extreme population eigenvalues reach the condition number at p = 1000") {
  for (Shape s : {Shape::h1, Shape::h2, Shape::h3, Shape::h4}) {
    const auto big = population_from_shape({s, 10.0}, 1000);
    CHECK(big.back() / big.front() == doctest::Approx(10.0).epsilon(0.02));
  }
}

TEST_CASE("sample trace concentrates around the population trace") {
  const auto tau = testing::h1_spectrum(100);
  const double mean_tau = std::accumulate(tau.begin(), tau.end(), 0.0) / 100.0;
  const double bound = 3.0 / std::sqrt(100.0 * 300.0);
  for (int seed = 0; seed < 100; ++seed) {
    const auto lam = sample_eigenvalues(tau, 300, Distribution::gaussian, stream_seed(42, 100, seed));
    const double mean = std::accumulate(lam.begin(), lam.end(), 0.0) / 100.0;
    CHECK(std::abs(mean - mean_tau) / mean_tau <= bound);
  }
}

TEST_CASE("spread of the sample trace matches its exact variance") {
  // Var(tr S / p) = 2 sum(tau^2) / (n p^2) for gaussian data.
  const int p = 100, n = 300, seeds = 100;
  const auto tau = testing::h1_spectrum(p);
  double sum_sq = 0.0;
  for (double t : tau) sum_sq += t * t;
  const double sd_exact = std::sqrt(2.0 * sum_sq / n) / p;
  double acc = 0.0;
  for (int seed = 0; seed < seeds; ++seed) {
    const auto lam = sample_eigenvalues(tau, n, Distribution::gaussian, stream_seed(42, p, seed));
    const double dev = std::accumulate(lam.begin(), lam.end(), 0.0) / p - std::accumulate(tau.begin(), tau.end(), 0.0) / p;
    acc += dev * dev;
  }
  CHECK(std::sqrt(acc / seeds) == doctest::Approx(sd_exact).epsilon(0.2));
}

TEST_CASE("rank deficiency gives exact zeros") {
  const auto tau = testing::h1_spectrum(50);
  for (Distribution d : {Distribution::gaussian, Distribution::student5, Distribution::coin, Distribution::exponential}) {
    const auto lam = sample_eigenvalues(tau, 20, d, 7);
    REQUIRE(lam.size() == 50);
    CHECK(std::count(lam.begin(), lam.end(), 0.0) == 30);
    CHECK(lam[30] > 1e-10);
    CHECK(std::is_sorted(lam.begin(), lam.end()));
  }
}

TEST_CASE("sampling is deterministic per seed") {
  const auto tau = testing::h1_spectrum(30);
  for (Distribution d : {Distribution::gaussian, Distribution::student5, Distribution::coin, Distribution::exponential}) {
    CHECK(sample_eigenvalues(tau, 90, d, 123) == sample_eigenvalues(tau, 90, d, 123));
    CHECK(sample_eigenvalues(tau, 90, d, 123) != sample_eigenvalues(tau, 90, d, 124));
  }
}

TEST_CASE("variates are standardized") {
  // Flat population, so the sample trace is the mean of n p squared variates.
  const std::vector<double> tau(200, 1.0);
  for (Distribution d : {Distribution::gaussian, Distribution::student5, Distribution::coin, Distribution::exponential}) {
    const auto lam = sample_eigenvalues(tau, 500, d, 99);
    const double mean = std::accumulate(lam.begin(), lam.end(), 0.0) / 200.0;
    CHECK(mean == doctest::Approx(1.0).epsilon(0.02));
  }
}

TEST_CASE("NMSE") {
  const std::vector<double> ones(5, 1.0), twos(5, 2.0);
  CHECK(nmse(ones, ones) == 0.0);
  CHECK(nmse(twos, ones) == 1.0);
  const std::vector<double> tau = {1, 2, 3}, est = {1.5, 1.5, 3.5};
  const std::vector<double> tau_s = {4, 8, 12}, est_s = {6, 6, 14};
  CHECK(nmse(est_s, tau_s) == doctest::Approx(nmse(est, tau)).epsilon(1e-15));
  CHECK_THROWS_AS(nmse(ones, tau), QuestError);
}

TEST_CASE("names parse and print") {
  for (const char* s : {"h1", "h2", "h3", "h4"}) CHECK(std::string(shape_name(parse_shape(s))) == s);
  for (const char* s : {"gaussian", "student5", "coin", "exponential"}) {
    CHECK(std::string(distribution_name(parse_distribution(s))) == s);
  }
  CHECK_THROWS_AS(parse_shape("h5"), QuestError);
  CHECK_THROWS_AS(parse_distribution("cauchy"), QuestError);
  CHECK(sample_size_for(30, 1.0 / 3.0) == 90);
  CHECK(sample_size_for(30, 2.0) == 15);
  CHECK(sample_size_for(1, 5.0) == 1);
}

TEST_CASE("convergence runs are reproducible and independent of threads") {
  ConvergenceConfig cfg;
  cfg.dims = {12, 24};
  cfg.reps = 3;
  cfg.seed = 77;
  cfg.threads = 1;
  const auto a = run_convergence(cfg);
  cfg.threads = 3;
  const auto b = run_convergence(cfg);
  REQUIRE(a.records.size() == 6);
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].p == b.records[i].p);
    CHECK(a.records[i].rep == b.records[i].rep);
    CHECK(a.records[i].seed == b.records[i].seed);
    CHECK(a.records[i].nmse == b.records[i].nmse);
    CHECK(a.records[i].error.empty());
  }
  CHECK(a.records[0].p == 12);
  CHECK(a.records[3].p == 24);
  CHECK(a.summary.dims.size() == 2);
  CHECK(std::isfinite(a.summary.slope));
}

TEST_CASE("every shape and distribution runs through the pipeline") {
  for (Shape s : {Shape::h1, Shape::h2, Shape::h3, Shape::h4}) {
    for (Distribution d : {Distribution::gaussian, Distribution::student5, Distribution::coin, Distribution::exponential}) {
      ConvergenceConfig cfg;
      cfg.shape = {s, 10.0};
      cfg.dist = d;
      cfg.dims = {15};
      cfg.reps = 1;
      cfg.threads = 1;
      const auto run = run_convergence(cfg);
      CHECK(run.records[0].error.empty());
      CHECK(std::isfinite(run.records[0].nmse));
    }
  }
}

TEST_CASE("summary slope is the least-squares fit") {
  std::vector<SimulationRecord> recs;
  auto rec = [](int p, double v) {
    return SimulationRecord{Shape::h1, Distribution::gaussian, p, 3 * p, 0, 0, v, true, 1, 0.0, {}};
  };
  recs.push_back(rec(10, 1.0));
  recs.push_back(rec(100, 0.1));
  recs.push_back(rec(1000, 0.01));
  const std::vector<int> dims = {10, 100, 1000};
  const auto s = summarize(recs, dims);
  CHECK(s.slope == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(s.dims[1].mean_nmse == doctest::Approx(0.1));
  const std::vector<int> one = {10};
  CHECK(std::isnan(summarize(recs, one).slope));
}

TEST_CASE("invalid configurations") {
  ConvergenceConfig cfg;
  CHECK_THROWS_AS(run_convergence(cfg), QuestError);
  cfg.dims = {10};
  cfg.reps = 0;
  CHECK_THROWS_AS(run_convergence(cfg), QuestError);
  cfg.reps = 1;
  cfg.concentration = 0.0;
  CHECK_THROWS_AS(run_convergence(cfg), QuestError);
  CHECK_THROWS_AS(population_from_shape({Shape::h1, 0.5}, 10), QuestError);
}
