#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "quest/quest.hpp"
#include "quest/simulation.hpp"

namespace quest::testing {

inline std::vector<double> h1_spectrum(int p, double kappa = 10.0) {
  return population_from_shape({Shape::h1, kappa}, p);
}

inline double max_abs(const Eigen::MatrixXd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline Eigen::Map<const Eigen::VectorXd> as_vector(const std::vector<double>& v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

/// Central differences of a vector-valued function of tau, with step
/// h * tau_k per column.
inline Eigen::MatrixXd central_fd(const std::vector<double>& tau,
                                  const std::function<std::vector<double>(const std::vector<double>&)>& f,
                                  double h) {
  const std::vector<double> base = f(tau);
  Eigen::MatrixXd jac(static_cast<Eigen::Index>(base.size()), static_cast<Eigen::Index>(tau.size()));
  for (std::size_t k = 0; k < tau.size(); ++k) {
    const double step = h * tau[k];
    std::vector<double> up = tau, down = tau;
    up[k] += step;
    down[k] -= step;
    const std::vector<double> a = f(up), b = f(down);
    for (std::size_t r = 0; r < base.size(); ++r) {
      jac(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = (a[r] - b[r]) / (2.0 * step);
    }
  }
  return jac;
}

/// Closed-form Marcenko-Pastur density for tau = 1 and ratio c < 1.
inline double mp_density_exact(double x, double c) {
  const double a = (1.0 - std::sqrt(c)) * (1.0 - std::sqrt(c));
  const double b = (1.0 + std::sqrt(c)) * (1.0 + std::sqrt(c));
  if (x <= a || x >= b) return 0.0;
  return std::sqrt((b - x) * (x - a)) / (2.0 * std::numbers::pi * c * x);
}

/// Integral of the closed-form density from the lower edge to x. The
/// substitution x = a + (b - a) sin^2(theta) removes the square-root edge,
/// leaving a smooth integrand for composite Simpson.
inline double mp_cdf_exact(double x, double c, int panels = 20000) {
  const double a = (1.0 - std::sqrt(c)) * (1.0 - std::sqrt(c));
  const double b = (1.0 + std::sqrt(c)) * (1.0 + std::sqrt(c));
  if (x <= a) return 0.0;
  if (x >= b) return 1.0;
  const double theta_end = std::asin(std::sqrt((x - a) / (b - a)));
  auto g = [&](double th) {
    const double s = std::sin(th), co = std::cos(th);
    const double xx = a + (b - a) * s * s;
    return mp_density_exact(xx, c) * 2.0 * (b - a) * s * co;
  };
  const double h = theta_end / panels;
  double sum = g(0.0) + g(theta_end);
  for (int i = 1; i < panels; ++i) sum += g(i * h) * (i % 2 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

}  // namespace quest::testing
