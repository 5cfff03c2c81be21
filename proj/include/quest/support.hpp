#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "quest/spectrum.hpp"

namespace quest {

/// Support of the limiting sample spectral distribution, expressed in
/// u-space as nu disjoint intervals [u_1,u_2], ..., [u_{2nu-1},u_{2nu}].
struct SupportU {
  std::vector<double> endpoints;
  /// Number of population eigenvalues attached to each interval; sums to p.
  std::vector<int> omega;
  /// Cluster index k (0-based) such that the i-th split lies in (t_k, t_{k+1}).
  std::vector<std::size_t> gaps;
  /// d u_i / d tau_k, 2nu x p. Empty until filled by support_jacobian.
  Eigen::MatrixXd endpoint_jacobian;

  int nu() const noexcept { return static_cast<int>(omega.size()); }
  double lower(std::size_t i) const { return endpoints[2 * i]; }
  double upper(std::size_t i) const { return endpoints[2 * i + 1]; }
};

/// sum_j w_j t_j^2 / (t_j - u)^2. Throws at a pole.
double phi(double u, const GroupedSpectrum& g);

/// 2 sum_j w_j t_j^2 / (t_j - u)^3. Throws at a pole.
double phi_prime(double u, const GroupedSpectrum& g);

/// Closed-form minimizer in (t_k, t_{k+1}) of the two-pole part of phi.
/// k is 0-based and must satisfy k + 1 < K.
double theta_minimizer(std::size_t k, const GroupedSpectrum& g);

/// Returns argmin of phi over (t_k, t_{k+1}) when the support splits inside
/// that gap, i.e. when phi at the minimizer is below 1/c; otherwise nullopt.
/// A cheap lower bound rules most gaps out before any root finding.
std::optional<double> spectral_separation(std::size_t k, const GroupedSpectrum& g, double c);

/// Locates all support endpoints (solutions of phi(u) = 1/c) and the
/// eigenvalue count of each interval. Zero eigenvalues are added to the
/// first interval's count.
SupportU find_support(const GroupedSpectrum& g, double c);

/// Implicit-function derivative of every endpoint with respect to each raw
/// population eigenvalue. Columns for zero eigenvalues are zero.
Eigen::MatrixXd support_jacobian(const SupportU& support, std::span<const double> tau);

}  // namespace quest
