#include "quest/grid.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "quest/error.hpp"

namespace quest {

IntervalGrid build_grid(const SupportU& support, std::size_t interval) {
  if (interval >= support.omega.size()) {
    throw QuestError(Stage::grid, "interval index " + std::to_string(interval) + " out of range");
  }
  const int omega = support.omega[interval];
  const double lo = support.lower(interval);
  const double hi = support.upper(interval);
  const auto n_points = static_cast<std::size_t>(omega) + 2;

  IntervalGrid grid;
  grid.xi.resize(n_points);
  grid.weight.resize(n_points);
  for (std::size_t j = 0; j < n_points; ++j) {
    const double s = std::sin(std::numbers::pi * static_cast<double>(j) / (2.0 * (omega + 1)));
    grid.weight[j] = s * s;
  }
  grid.weight.front() = 0.0;
  grid.weight.back() = 1.0;
  for (std::size_t j = 0; j < n_points; ++j) grid.xi[j] = lo + (hi - lo) * grid.weight[j];
  grid.xi.front() = lo;
  grid.xi.back() = hi;
  return grid;
}

Eigen::MatrixXd grid_jacobian(const IntervalGrid& grid, const Eigen::MatrixXd& support_jac, std::size_t interval) {
  const auto lo_row = static_cast<Eigen::Index>(2 * interval);
  if (lo_row + 1 >= support_jac.rows()) {
    throw QuestError(Stage::grid, "support Jacobian has no rows for interval " + std::to_string(interval));
  }
  Eigen::MatrixXd jac(static_cast<Eigen::Index>(grid.size()), support_jac.cols());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double s = grid.weight[j];
    jac.row(static_cast<Eigen::Index>(j)) = (1.0 - s) * support_jac.row(lo_row) + s * support_jac.row(lo_row + 1);
  }
  return jac;
}

}  // namespace quest
