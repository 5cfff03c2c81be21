#include "quest/support.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "quest/error.hpp"
#include "quest/root_finder.hpp"

namespace quest {

namespace {

// Fraction of a gap kept between a bracket point and the nearest pole.
constexpr double kPoleMargin = 1e-12;

double wt2(const GroupedSpectrum& g, std::size_t j) { return g.w[j] * g.t[j] * g.t[j]; }

double nudge_inside(double x, double left_pole, double right_pole) {
  const double margin = kPoleMargin * (right_pole - left_pole);
  return std::clamp(x, left_pole + margin, right_pole - margin);
}

// Moves x toward `pole` until phi(x) - 1/c > 0. phi diverges at the pole, so
// this terminates; it only matters when rounding defeats an analytic bound.
double push_above_level(double x, double pole, const GroupedSpectrum& g, double inv_c) {
  for (int i = 0; i < 200 && !(phi(x, g) - inv_c > 0.0); ++i) x = pole + 0.5 * (x - pole);
  return x;
}

RootResult solve_level(const GroupedSpectrum& g, double inv_c, double lo, double hi) {
  auto f = [&](double u) { return phi(u, g) - inv_c; };
  return find_zero(f, make_bracket(f, lo, hi));
}

}  // namespace

double phi(double u, const GroupedSpectrum& g) {
  double s = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double d = g.t[j] - u;
    if (d == 0.0) throw QuestError(Stage::support, "pole: phi evaluated at a population eigenvalue");
    s += wt2(g, j) / (d * d);
  }
  return s;
}

double phi_prime(double u, const GroupedSpectrum& g) {
  double s = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double d = g.t[j] - u;
    if (d == 0.0) throw QuestError(Stage::support, "pole: phi' evaluated at a population eigenvalue");
    s += wt2(g, j) / (d * d * d);
  }
  return 2.0 * s;
}

double theta_minimizer(std::size_t k, const GroupedSpectrum& g) {
  if (k + 1 >= g.size()) {
    throw QuestError(Stage::support, "theta_minimizer: cluster index " + std::to_string(k) + " out of range");
  }
  const double t0 = g.t[k], t1 = g.t[k + 1];
  const double a = std::cbrt(g.w[k]), b = std::cbrt(g.w[k + 1]);
  const double num = a * std::cbrt(t1) + b * std::cbrt(t0);
  const double den = a * std::cbrt(t0 * t0) + b * std::cbrt(t1 * t1);
  return std::cbrt(t0 * t1) * std::cbrt(t0 * t1) * num / den;
}

std::optional<double> spectral_separation(std::size_t k, const GroupedSpectrum& g, double c) {
  if (k + 1 >= g.size()) return std::nullopt;
  const double inv_c = 1.0 / c;
  const double tk = g.t[k], tk1 = g.t[k + 1];
  const double xhat = nudge_inside(theta_minimizer(k, g), tk, tk1);

  // Lower bound of phi on the gap: two-pole part at its minimum plus the
  // outer poles evaluated at the far end of the gap.
  double bound = wt2(g, k) / ((tk - xhat) * (tk - xhat)) + wt2(g, k + 1) / ((tk1 - xhat) * (tk1 - xhat));
  for (std::size_t j = 0; j < k; ++j) bound += wt2(g, j) / ((g.t[j] - tk1) * (g.t[j] - tk1));
  for (std::size_t j = k + 2; j < g.size(); ++j) bound += wt2(g, j) / ((g.t[j] - tk) * (g.t[j] - tk));
  if (!(bound < inv_c)) return std::nullopt;

  const double dphi_hat = phi_prime(xhat, g);
  double xstar = xhat;
  if (dphi_hat != 0.0) {
    double lo, hi;
    if (dphi_hat < 0.0) {
      const double dk = tk - xhat;
      const double denom = -2.0 * wt2(g, k) / (dk * dk * dk) - dphi_hat;
      lo = xhat;
      hi = nudge_inside(tk1 - std::cbrt(2.0 * wt2(g, k + 1) / denom), tk, tk1);
    } else {
      const double dk1 = tk1 - xhat;
      const double denom = 2.0 * wt2(g, k + 1) / (dk1 * dk1 * dk1) + dphi_hat;
      lo = nudge_inside(tk + std::cbrt(2.0 * wt2(g, k) / denom), tk, tk1);
      hi = xhat;
    }
    auto dphi = [&](double u) { return phi_prime(u, g); };
    Bracket br = make_bracket(dphi, lo, hi);
    // Rounding can leave the analytic bound on the wrong side when the
    // minimizer sits next to a pole; fall back to the pole margin.
    if (dphi_hat < 0.0 && !(br.f_hi > 0.0)) br = make_bracket(dphi, lo, nudge_inside(tk1, tk, tk1));
    if (dphi_hat > 0.0 && !(br.f_lo < 0.0)) br = make_bracket(dphi, nudge_inside(tk, tk, tk1), hi);
    xstar = find_zero(dphi, br).x;
  }
  if (phi(xstar, g) < inv_c) return xstar;
  return std::nullopt;
}

SupportU find_support(const GroupedSpectrum& g, double c) {
  const std::size_t K = g.size();
  if (K == 0) throw QuestError(Stage::support, "no nonzero population eigenvalues");
  if (!(c > 0.0) || !std::isfinite(c)) throw QuestError(Stage::support, "concentration ratio must be positive");
  const double inv_c = 1.0 / c;

  double sum_wt2 = 0.0;
  for (std::size_t j = 0; j < K; ++j) sum_wt2 += wt2(g, j);

  SupportU out;
  {
    const double t1 = g.t.front();
    const double lo = t1 - std::sqrt(c * sum_wt2) - 1.0;
    const double hi = push_above_level(t1 - 0.5 * std::sqrt(c * wt2(g, 0)), t1, g, inv_c);
    out.endpoints.push_back(solve_level(g, inv_c, lo, hi).x);
  }

  for (std::size_t k = 0; k + 1 < K; ++k) {
    const auto xstar = spectral_separation(k, g, c);
    if (!xstar) continue;
    const double xs = *xstar;
    const double tk = g.t[k], tk1 = g.t[k + 1];
    const double excess = inv_c - phi(xs, g);

    // Right edge of the interval below the gap, in (t_k, x*).
    double right_sum = 0.0;
    for (std::size_t j = k + 1; j < K; ++j) {
      right_sum += wt2(g, j) / ((g.t[j] - xs) * (g.t[j] - xs)) - wt2(g, j) / ((g.t[j] - tk) * (g.t[j] - tk));
    }
    const double den_lo = wt2(g, k) / ((tk - xs) * (tk - xs)) + excess + right_sum;
    double lo = nudge_inside(tk + std::sqrt(wt2(g, k) / den_lo), tk, tk1);
    lo = push_above_level(lo, tk, g, inv_c);
    out.endpoints.push_back(solve_level(g, inv_c, lo, xs).x);

    // Left edge of the interval above the gap, in (x*, t_{k+1}). The
    // correction runs over every cluster at or below t_k.
    double left_sum = 0.0;
    for (std::size_t j = 0; j <= k; ++j) {
      left_sum += wt2(g, j) / ((g.t[j] - xs) * (g.t[j] - xs)) - wt2(g, j) / ((g.t[j] - tk1) * (g.t[j] - tk1));
    }
    const double den_hi = wt2(g, k + 1) / ((tk1 - xs) * (tk1 - xs)) + excess + left_sum;
    double hi = nudge_inside(tk1 - std::sqrt(wt2(g, k + 1) / den_hi), tk, tk1);
    hi = push_above_level(hi, tk1, g, inv_c);
    out.endpoints.push_back(solve_level(g, inv_c, xs, hi).x);

    out.gaps.push_back(k);
  }

  {
    const double tK = g.t.back();
    const double lo = push_above_level(tK + 0.5 * std::sqrt(c * wt2(g, K - 1)), tK, g, inv_c);
    const double hi = tK + std::sqrt(c * sum_wt2) + 1.0;
    out.endpoints.push_back(solve_level(g, inv_c, lo, hi).x);
  }

  std::size_t first = 0;
  for (std::size_t i = 0; i <= out.gaps.size(); ++i) {
    const std::size_t last = i < out.gaps.size() ? out.gaps[i] : K - 1;
    int count = 0;
    for (std::size_t j = first; j <= last; ++j) count += g.counts[j];
    out.omega.push_back(count);
    first = last + 1;
  }
  out.omega.front() += g.zero_count;
  return out;
}

Eigen::MatrixXd support_jacobian(const SupportU& support, std::span<const double> tau) {
  const auto n_end = static_cast<Eigen::Index>(support.endpoints.size());
  const auto p = static_cast<Eigen::Index>(tau.size());
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n_end, p);
  for (Eigen::Index i = 0; i < n_end; ++i) {
    const double u = support.endpoints[static_cast<std::size_t>(i)];
    double denom = 0.0;
    for (double tk : tau) {
      if (tk == 0.0) continue;
      const double d = tk - u;
      if (d == 0.0) throw QuestError(Stage::support, "degenerate support: endpoint coincides with an eigenvalue");
      denom += tk * tk / (d * d * d);
    }
    for (Eigen::Index k = 0; k < p; ++k) {
      const double tk = tau[static_cast<std::size_t>(k)];
      if (tk == 0.0) continue;
      const double d = tk - u;
      jac(i, k) = tk * u / (d * d * d) / denom;
    }
  }
  return jac;
}

}  // namespace quest
