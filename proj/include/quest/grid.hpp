#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "quest/support.hpp"

namespace quest {

/// Arcsine-distributed grid over one support interval: omega interior
/// points plus both endpoints. weight[j] = sin^2(pi j / (2 (omega + 1)))
/// is the interpolation weight shared by the points and their Jacobian.
struct IntervalGrid {
  std::vector<double> xi;
  std::vector<double> weight;
  /// d xi_j / d tau_k, (omega + 2) x p. Empty until grid_jacobian is applied.
  Eigen::MatrixXd jacobian;

  std::size_t size() const noexcept { return xi.size(); }
};

IntervalGrid build_grid(const SupportU& support, std::size_t interval);

/// Rows interpolate the two endpoint rows of support_jac with the grid weights.
Eigen::MatrixXd grid_jacobian(const IntervalGrid& grid, const Eigen::MatrixXd& support_jac, std::size_t interval);

}  // namespace quest
