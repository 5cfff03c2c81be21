#include <doctest.h>

#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "quest/error.hpp"
#include "quest/support.hpp"

using namespace quest;

namespace {

GroupedSpectrum grouped(std::vector<double> tau, int n) { return group_spectrum(PopulationSpectrum(std::move(tau), n)); }

GroupedSpectrum one_cluster() { return grouped({1.0}, 3); }

GroupedSpectrum two_clusters() { return grouped({1.0, 2.0}, 20); }

// Every zero of phi(u) - 1/c located by a dense sign scan followed by
// bisection, skipping the poles.
std::vector<double> scan_endpoints(const GroupedSpectrum& g, double c) {
  const double inv_c = 1.0 / c;
  const double lo = g.t.front() - 10.0, hi = g.t.back() + 10.0;
  const int n = 400000;
  auto h = [&](double u) { return phi(u, g) - inv_c; };
  std::vector<double> roots;
  double prev_u = lo, prev = h(lo);
  for (int i = 1; i <= n; ++i) {
    double u = lo + (hi - lo) * i / n;
    bool at_pole = false;
    for (double t : g.t) at_pole = at_pole || std::abs(u - t) < 1e-9;
    if (at_pole) {
      prev_u = u + 1e-9;
      prev = h(prev_u);
      continue;
    }
    const double cur = h(u);
    // A sign change across a pole is not a root: phi - 1/c is positive on both sides.
    if ((prev < 0.0) != (cur < 0.0)) {
      double a = prev_u, b = u, fa = prev;
      for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (a + b);
        const double fm = h(m);
        if ((fm < 0.0) == (fa < 0.0)) {
          a = m;
          fa = fm;
        } else {
          b = m;
        }
      }
      roots.push_back(0.5 * (a + b));
    }
    prev_u = u;
    prev = cur;
  }
  return roots;
}

}  // namespace

TEST_CASE("phi and phi' on simple inputs") {
  const auto g = one_cluster();
  CHECK(phi(0.5, g) == doctest::Approx(4.0));
  CHECK(phi(3.0, g) == doctest::Approx(0.25));
  CHECK(phi_prime(0.5, g) == doctest::Approx(16.0));
  CHECK(phi_prime(2.0, g) == doctest::Approx(-2.0));
  CHECK(phi(1.3865, two_clusters()) == doctest::Approx(8.6609).epsilon(1e-3 / 8.6609));
  CHECK(std::abs(phi_prime(1.38650, two_clusters())) < 1e-2);
}

TEST_CASE("phi at a population eigenvalue is a pole") {
  CHECK_THROWS_WITH(phi(1.0, one_cluster()), doctest::Contains("pole"));
  CHECK_THROWS_WITH(phi_prime(2.0, two_clusters()), doctest::Contains("pole"));
}

TEST_CASE("theta minimizer") {
  CHECK(theta_minimizer(0, two_clusters()) == doctest::Approx(1.38650).epsilon(1e-4 / 1.3865));

  const auto near = grouped({1.0, 1.0 + 1e-6}, 20);
  const double mid = theta_minimizer(0, near);
  CHECK(mid > 1.0);
  CHECK(mid < 1.0 + 1e-6);
  CHECK(mid == doctest::Approx(1.0 + 0.5e-6).epsilon(1e-9));

  const auto wide = grouped({1.0, 10.0}, 20);
  const double x = theta_minimizer(0, wide);
  CHECK(x > 1.0);
  CHECK(x < 10.0);
  // The two-term derivative is phi' itself when K = 2.
  CHECK(std::abs(phi_prime(x, wide)) < 1e-8);

  CHECK_THROWS_AS(theta_minimizer(1, two_clusters()), QuestError);
}

TEST_CASE("theta minimizer matches a brute-force argmin of the two-pole part") {
  const auto g = grouped({1.0, 1.0, 1.0, 3.0, 7.0, 7.0}, 20);
  for (std::size_t k = 0; k + 1 < g.size(); ++k) {
    const double t0 = g.t[k], t1 = g.t[k + 1];
    auto theta = [&](double u) {
      return g.w[k] * t0 * t0 / ((t0 - u) * (t0 - u)) + g.w[k + 1] * t1 * t1 / ((t1 - u) * (t1 - u));
    };
    double best = t0, best_val = INFINITY;
    for (int i = 1; i < 200000; ++i) {
      const double u = t0 + (t1 - t0) * i / 200000.0;
      if (theta(u) < best_val) {
        best_val = theta(u);
        best = u;
      }
    }
    CHECK(theta_minimizer(k, g) == doctest::Approx(best).epsilon(1e-4));
  }
}

TEST_CASE("spectral separation") {
  CHECK_FALSE(spectral_separation(0, two_clusters(), 1.0 / 3.0).has_value());
  const auto xs = spectral_separation(0, two_clusters(), 0.1);
  REQUIRE(xs.has_value());
  CHECK(*xs == doctest::Approx(1.3865).epsilon(1e-4));
  CHECK(std::abs(phi_prime(*xs, two_clusters())) < 1e-10);
  CHECK(phi(*xs, two_clusters()) <= phi(theta_minimizer(0, two_clusters()), two_clusters()));
  CHECK_FALSE(spectral_separation(0, one_cluster(), 0.1).has_value());
}

TEST_CASE("single cluster support in closed form") {
  const auto g = grouped(std::vector<double>(12, 1.0), 36);
  const auto s = find_support(g, 1.0 / 3.0);
  CHECK(s.nu() == 1);
  REQUIRE(s.endpoints.size() == 2);
  CHECK(s.endpoints[0] == doctest::Approx(1.0 - std::sqrt(1.0 / 3.0)).epsilon(1e-8));
  CHECK(s.endpoints[1] == doctest::Approx(1.0 + std::sqrt(1.0 / 3.0)).epsilon(1e-8));
  CHECK(s.omega == std::vector<int>{12});
}

TEST_CASE("two clusters split at small c") {
  const auto g = grouped({1, 1, 1, 1, 1, 2, 2, 2, 2, 2}, 100);
  const auto s = find_support(g, 0.1);
  CHECK(s.nu() == 2);
  CHECK(s.omega == std::vector<int>{5, 5});
  REQUIRE(s.endpoints.size() == 4);
  CHECK(s.endpoints[1] < 1.3865);
  CHECK(s.endpoints[2] > 1.3865);

  const auto oracle = scan_endpoints(g, 0.1);
  REQUIRE(oracle.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(s.endpoints[i] == doctest::Approx(oracle[i]).epsilon(1e-9));
}

TEST_CASE("two clusters stay joined at c = 1/3") {
  const auto g = grouped({1, 1, 1, 2, 2, 2}, 18);
  const auto s = find_support(g, 1.0 / 3.0);
  CHECK(s.nu() == 1);
  CHECK(s.omega == std::vector<int>{6});
}

TEST_CASE("endpoints agree with a brute-force scan on several spectra") {
  const std::vector<std::pair<std::vector<double>, int>> cases = {
      {{1, 2, 4, 8, 16}, 200}, {{1, 1.2, 5, 5.5, 30}, 1000}, {testing::h1_spectrum(20), 60}, {{0.3, 3, 30}, 3000}};
  for (const auto& [tau, n] : cases) {
    const auto g = grouped(tau, n);
    const double c = static_cast<double>(tau.size()) / n;
    const auto s = find_support(g, c);
    const auto oracle = scan_endpoints(g, c);
    REQUIRE(oracle.size() == s.endpoints.size());
    for (std::size_t i = 0; i < oracle.size(); ++i) {
      CHECK(s.endpoints[i] == doctest::Approx(oracle[i]).epsilon(1e-9));
      CHECK(std::abs(phi(s.endpoints[i], g) - 1.0 / c) <= 1e-8 / c);
    }
    int total = 0;
    for (int w : s.omega) {
      CHECK(w > 0);
      total += w;
    }
    CHECK(total == static_cast<int>(tau.size()));
  }
}

TEST_CASE("support scales with the spectrum") {
  const std::vector<double> tau = {1, 1.5, 4, 4.2, 9};
  const auto base = find_support(grouped(tau, 100), 0.05);
  for (double s : {0.1, 7.0}) {
    std::vector<double> scaled = tau;
    for (double& t : scaled) t *= s;
    const auto sup = find_support(grouped(scaled, 100), 0.05);
    CHECK(sup.nu() == base.nu());
    CHECK(sup.omega == base.omega);
    for (std::size_t i = 0; i < sup.endpoints.size(); ++i) {
      CHECK(sup.endpoints[i] == doctest::Approx(s * base.endpoints[i]).epsilon(1e-10));
    }
  }
}

TEST_CASE("shrinking c only splits intervals") {
  const auto g = two_clusters();
  CHECK(find_support(g, 0.1160).nu() == 1);
  CHECK(find_support(g, 0.1150).nu() == 2);
  int prev = 1;
  for (double c = 0.2; c > 0.01; c *= 0.97) {
    const int nu = find_support(g, c).nu();
    CHECK(nu >= prev);
    prev = nu;
  }
}

TEST_CASE("zero eigenvalues are added to the first interval count") {
  const auto g = grouped({0, 0, 1, 1, 2, 2}, 600);
  const auto s = find_support(g, 0.01);
  REQUIRE(s.nu() == 2);
  CHECK(s.omega == std::vector<int>{4, 2});
}

TEST_CASE("endpoint Jacobian") {
  SUBCASE("flat spectrum rows sum to 1 -+ sqrt(c)") {
    const std::vector<double> tau = {1.0, 1.0};
    const double c = 1.0 / 3.0;
    const auto s = find_support(grouped(tau, 6), c);
    const auto J = support_jacobian(s, tau);
    CHECK(J.row(0).sum() == doctest::Approx(1.0 - std::sqrt(c)).epsilon(1e-10));
    CHECK(J.row(1).sum() == doctest::Approx(1.0 + std::sqrt(c)).epsilon(1e-10));
  }
  SUBCASE("Euler identity") {
    for (const auto& tau : {testing::h1_spectrum(15), std::vector<double>{1, 1, 1, 1, 1, 2, 2, 2, 2, 2}}) {
      const PopulationSpectrum spec(tau, 100);
      const auto s = find_support(group_spectrum(spec), spec.c());
      const auto J = support_jacobian(s, tau);
      const Eigen::VectorXd euler = J * testing::as_vector(tau);
      for (std::size_t i = 0; i < s.endpoints.size(); ++i) {
        CHECK(euler[static_cast<Eigen::Index>(i)] == doctest::Approx(s.endpoints[i]).epsilon(1e-8));
      }
    }
  }
  SUBCASE("finite differences") {
    const std::vector<double> tau = {1, 1, 1, 1, 1, 2, 2, 2, 2, 2};
    const auto s = find_support(grouped(tau, 100), 0.1);
    const auto J = support_jacobian(s, tau);
    const auto fd = testing::central_fd(
        tau, [](const std::vector<double>& t) { return find_support(grouped(t, 100), 0.1).endpoints; }, 1e-6);
    CHECK(testing::max_abs(J - fd) <= 1e-5);
  }
  SUBCASE("zero eigenvalues have zero columns") {
    const std::vector<double> tau = {0, 1, 2};
    const auto s = find_support(grouped(tau, 300), 0.01);
    const auto J = support_jacobian(s, tau);
    CHECK(J.col(0).isZero());
  }
}
