#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "quest/grid.hpp"
#include "quest/spectrum.hpp"

namespace quest {

/// Solution of the Marcenko-Pastur equation along one interval grid:
/// z_j = xi_j + i y_j with y_j = 0 at both endpoints.
struct MpSolution {
  std::vector<double> y;
  std::vector<std::complex<double>> z;
  Eigen::MatrixXd dy_dtau;
};

/// Limiting sample spectral density sampled at the images of the grid.
struct DensityCurve {
  std::vector<double> x;
  std::vector<double> f;
  Eigen::MatrixXd dx_dtau;
  Eigen::MatrixXd df_dtau;

  std::size_t size() const noexcept { return x.size(); }
};

/// Gamma(y; xi) = sum_k w_k t_k^2 / ((t_k - xi)^2 + y^2) - 1/c. Strictly
/// decreasing in y; its zero is the imaginary part of z above xi.
double mp_gamma(double y, double xi, const GroupedSpectrum& g, double c);

/// Unique y > 0 with Gamma(y; xi) = 0. xi must lie in the interior of the
/// support; throws QuestError when the lower bracket is not above zero.
double solve_mp_at(double xi, const GroupedSpectrum& g, double c);

struct DensityPoint {
  double x;
  double f;
};

/// Maps a u-space solution z back to a point (x, f) of the sample density.
/// Throws if the image has a non-negligible imaginary part.
DensityPoint map_to_density(std::complex<double> z, std::span<const double> tau, double c);

/// Solves at every interior grid point; endpoints get y = 0.
MpSolution solve_mp(const IntervalGrid& grid, const GroupedSpectrum& g, double c);

/// Values of (x, f) along the grid. x must come out strictly increasing.
DensityCurve density_curve(const MpSolution& solution, std::span<const double> tau, double c);

struct MpJacobians {
  Eigen::MatrixXd dy;
  Eigen::MatrixXd dx;
  Eigen::MatrixXd df;
};

/// Chain-rule derivatives of y, x and f with respect to each raw tau_k,
/// given the grid Jacobian d xi / d tau. Endpoint rows use y = 0, dy = 0.
MpJacobians mp_jacobians(const Eigen::MatrixXd& grid_jac, const MpSolution& solution, std::span<const double> tau,
                         double c);

}  // namespace quest
