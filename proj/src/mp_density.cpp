#include "quest/mp_density.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "quest/error.hpp"
#include "quest/root_finder.hpp"

namespace quest {

namespace {

using cplx = std::complex<double>;

constexpr double kImagResidualTol = 1e-8;

// (1/p) sum tau_l / (tau_l - z) and its z-derivative (1/p) sum tau_l / (tau_l - z)^2.
struct MlhValue {
  cplx m;
  cplx dm_dz;
};

MlhValue m_lh(cplx z, std::span<const double> tau) {
  cplx m = 0.0, dm = 0.0;
  for (double t : tau) {
    if (t == 0.0) continue;
    const cplx inv = 1.0 / (t - z);
    m += t * inv;
    dm += t * inv * inv;
  }
  const double inv_p = 1.0 / static_cast<double>(tau.size());
  return {m * inv_p, dm * inv_p};
}

}  // namespace

double mp_gamma(double y, double xi, const GroupedSpectrum& g, double c) {
  double s = 0.0;
  const double y2 = y * y;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double d = g.t[k] - xi;
    s += g.w[k] * g.t[k] * g.t[k] / (d * d + y2);
  }
  return s - 1.0 / c;
}

double solve_mp_at(double xi, const GroupedSpectrum& g, double c) {
  if (g.size() == 0) throw QuestError(Stage::mp_density, "no nonzero population eigenvalues");
  double delta = std::numeric_limits<double>::infinity();
  for (double t : g.t) delta = std::min(delta, (t - xi) * (t - xi));
  double near_mass = 0.0, total_mass = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double m = g.w[k] * g.t[k] * g.t[k];
    total_mass += m;
    if ((g.t[k] - xi) * (g.t[k] - xi) == delta) near_mass += m;
  }

  const double y_lo = 0.5 * std::sqrt(std::max(0.0, c * near_mass - delta));
  const double y_hi = std::sqrt(std::max(0.0, c * total_mass - delta)) + 1.0;
  auto gamma = [&](double y) { return mp_gamma(y, xi, g, c); };
  const Bracket br = make_bracket(gamma, y_lo, y_hi);
  if (!(br.f_lo > 0.0)) {
    throw QuestError(Stage::mp_density,
                     "lower bound for y is not inside the solution region at xi = " + std::to_string(xi));
  }
  if (!(br.f_hi < 0.0)) {
    throw QuestError(Stage::mp_density, "upper bound for y is not past the solution at xi = " + std::to_string(xi));
  }
  return find_zero(gamma, br).x;
}

DensityPoint map_to_density(std::complex<double> z, std::span<const double> tau, double c) {
  const cplx image = z - c * z * m_lh(z, tau).m;
  const double x = image.real();
  if (std::abs(image.imag()) > kImagResidualTol * std::max(1.0, std::abs(x))) {
    throw QuestError(Stage::mp_density, "not on MP solution manifold (imaginary residual " +
                                            std::to_string(image.imag()) + ")");
  }
  const double f = z.imag() == 0.0 ? 0.0 : (-1.0 / z).imag() / (c * std::numbers::pi);
  return {x, f};
}

MpSolution solve_mp(const IntervalGrid& grid, const GroupedSpectrum& g, double c) {
  MpSolution sol;
  const std::size_t n = grid.size();
  sol.y.assign(n, 0.0);
  sol.z.resize(n);
  for (std::size_t j = 1; j + 1 < n; ++j) sol.y[j] = solve_mp_at(grid.xi[j], g, c);
  for (std::size_t j = 0; j < n; ++j) sol.z[j] = cplx(grid.xi[j], sol.y[j]);
  return sol;
}

DensityCurve density_curve(const MpSolution& solution, std::span<const double> tau, double c) {
  DensityCurve curve;
  const std::size_t n = solution.z.size();
  curve.x.resize(n);
  curve.f.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto pt = map_to_density(solution.z[j], tau, c);
    curve.x[j] = pt.x;
    curve.f[j] = pt.f;
  }
  curve.f.front() = 0.0;
  curve.f.back() = 0.0;
  for (std::size_t j = 1; j < n; ++j) {
    if (!(curve.x[j] > curve.x[j - 1])) {
      throw QuestError(Stage::mp_density, "density abscissae not increasing at grid index " + std::to_string(j));
    }
  }
  return curve;
}

MpJacobians mp_jacobians(const Eigen::MatrixXd& grid_jac, const MpSolution& solution, std::span<const double> tau,
                         double c) {
  const auto n_pts = static_cast<Eigen::Index>(solution.z.size());
  const auto p = static_cast<Eigen::Index>(tau.size());
  const double inv_p = 1.0 / static_cast<double>(p);
  const double inv_cpi = 1.0 / (c * std::numbers::pi);

  MpJacobians out{Eigen::MatrixXd::Zero(n_pts, p), Eigen::MatrixXd::Zero(n_pts, p), Eigen::MatrixXd::Zero(n_pts, p)};
  std::vector<double> dy_row(static_cast<std::size_t>(p));

  for (Eigen::Index j = 0; j < n_pts; ++j) {
    const cplx z = solution.z[static_cast<std::size_t>(j)];
    const double xi = z.real();
    const double y = z.imag();
    const bool interior = y > 0.0;

    if (interior) {
      // Implicit differentiation of Gamma = 0, first holding xi fixed, then
      // through xi's own dependence on tau.
      double denom = 0.0, num_xi = 0.0;
      for (double t : tau) {
        const double d = t - xi;
        const double D = d * d + y * y;
        denom += t * t * y / (D * D);
        num_xi += t * t * d / (D * D);
      }
      const double dy_dxi = num_xi / denom;
      for (Eigen::Index k = 0; k < p; ++k) {
        const double t = tau[static_cast<std::size_t>(k)];
        const double d = t - xi;
        const double D = d * d + y * y;
        const double direct = (t / D - t * t * d / (D * D)) / denom;
        dy_row[static_cast<std::size_t>(k)] = direct + dy_dxi * grid_jac(j, k);
      }
    } else {
      std::fill(dy_row.begin(), dy_row.end(), 0.0);
    }

    const auto [m, dm_dz] = m_lh(z, tau);
    const cplx one_minus_cm = 1.0 - c * m;
    const cplx z2 = z * z;
    for (Eigen::Index k = 0; k < p; ++k) {
      const double t = tau[static_cast<std::size_t>(k)];
      const double dyk = dy_row[static_cast<std::size_t>(k)];
      const cplx dz(grid_jac(j, k), dyk);
      const cplx inv = 1.0 / (t - z);
      const cplx dm = -z * inv_p * inv * inv + dz * dm_dz;
      const cplx dx = dz * one_minus_cm - c * z * dm;
      out.dy(j, k) = dyk;
      out.dx(j, k) = dx.real();
      out.df(j, k) = interior ? (dz / z2).imag() * inv_cpi : 0.0;
    }
  }
  return out;
}

}  // namespace quest
