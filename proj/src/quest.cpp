#include "quest/quest.hpp"

#include <limits>
#include <optional>
#include <string>
#include <utility>

#include "quest/error.hpp"

namespace quest {

namespace {

// Root-finder failures are reported under the stage that asked for the root.
template <class F>
auto at_stage(Stage stage, F&& f) {
  try {
    return std::forward<F>(f)();
  } catch (const RootNotConverged& e) {
    throw QuestError(stage, e.message());
  } catch (const QuestError& e) {
    if (e.stage() == Stage::root) throw QuestError(stage, e.message());
    throw;
  }
}

}  // namespace

PipelineCurves evaluate_pipeline(const PopulationSpectrum& spec, const QuestOptions& opts) {
  const int p = spec.p();
  const double c = spec.c();
  const auto tau = spec.tau();

  PipelineCurves out;
  out.grouped = at_stage(Stage::grouping, [&] { return group_spectrum(spec, opts.grouping_tol); });
  out.support = at_stage(Stage::support, [&] { return find_support(out.grouped, c); });
  if (opts.jacobian) {
    out.support.endpoint_jacobian = at_stage(Stage::support, [&] { return support_jacobian(out.support, tau); });
  }
  out.zero_atoms = zero_atom_count(p, spec.n(), out.grouped.zero_count);
  const auto masses = at_stage(Stage::cdf, [&] { return interval_masses(out.support, p, out.zero_atoms); });

  out.lambda.assign(static_cast<std::size_t>(out.zero_atoms), 0.0);
  if (opts.jacobian) out.jacobian = Eigen::MatrixXd::Zero(p, p);

  for (std::size_t i = 0; i < masses.size(); ++i) {
    IntervalCurves iv;
    iv.grid = build_grid(out.support, i);
    iv.mp = at_stage(Stage::mp_density, [&] { return solve_mp(iv.grid, out.grouped, c); });
    iv.density = density_curve(iv.mp, tau, c);
    if (opts.jacobian) {
      iv.grid.jacobian = grid_jacobian(iv.grid, out.support.endpoint_jacobian, i);
      MpJacobians mj = mp_jacobians(iv.grid.jacobian, iv.mp, tau, c);
      iv.mp.dy_dtau = std::move(mj.dy);
      iv.density.dx_dtau = std::move(mj.dx);
      iv.density.df_dtau = std::move(mj.df);
    }
    iv.cdf = integrate_cdf(iv.density, masses[i], p);
    if (opts.jacobian) iv.cdf.dF_dtau = cdf_jacobian(iv.density, iv.cdf);

    const std::vector<double> lam = at_stage(Stage::quantize, [&] { return quantize(iv.cdf, iv.density, p); });
    out.lambda.insert(out.lambda.end(), lam.begin(), lam.end());
    if (opts.jacobian) {
      out.jacobian.middleRows(masses[i].count_lo, masses[i].count_hi - masses[i].count_lo) =
          quantize_jacobian(iv.cdf, iv.density, p);
    }
    out.intervals.push_back(std::move(iv));
  }
  if (out.lambda.size() != static_cast<std::size_t>(p)) {
    throw QuestError(Stage::quantize, "produced " + std::to_string(out.lambda.size()) + " eigenvalues for p = " +
                                          std::to_string(p));
  }
  return out;
}

QuestOutput quest(const PopulationSpectrum& spec, const QuestOptions& opts) {
  const double scale = spec.mean();
  if (!(scale > 0.0)) throw QuestError(Stage::grouping, "degenerate spectrum: all eigenvalues are zero");
  PipelineCurves curves = evaluate_pipeline(spec.scaled(1.0 / scale), opts);

  QuestOutput out;
  out.lambda = std::move(curves.lambda);
  for (double& l : out.lambda) l *= scale;
  // Every derivative is homogeneous of degree zero, so only values rescale.
  out.jacobian = std::move(curves.jacobian);
  out.support = std::move(curves.support);
  for (double& u : out.support.endpoints) u *= scale;
  for (const auto& iv : curves.intervals) {
    out.x_endpoints.push_back(iv.density.x.front() * scale);
    out.x_endpoints.push_back(iv.density.x.back() * scale);
  }
  out.zero_atoms = curves.zero_atoms;
  out.joint_zero_case = spec.p() > spec.n() && curves.grouped.zero_count > 0;
  return out;
}

FdJacobian quest_fd_jacobian(const PopulationSpectrum& spec, double h, bool relative, const QuestOptions& opts) {
  if (!(h > 0.0)) throw QuestError(Stage::input, "finite-difference step must be positive");
  const int p = spec.p();
  QuestOptions value_opts = opts;
  value_opts.jacobian = false;

  const std::vector<double> tau(spec.tau().begin(), spec.tau().end());
  FdJacobian out{Eigen::MatrixXd::Zero(p, p), std::vector<bool>(static_cast<std::size_t>(p), false)};

  auto evaluate = [&](std::size_t k, double delta) {
    std::vector<double> t = tau;
    t[k] += delta;
    return quest(PopulationSpectrum(std::move(t), spec.n()), value_opts);
  };

  std::optional<QuestOutput> base;
  for (std::size_t k = 0; k < tau.size(); ++k) {
    double step = relative ? h * tau[k] : h;
    if (step == 0.0) step = h * spec.mean();
    try {
      QuestOutput plus = evaluate(k, step);
      QuestOutput minus;
      double width = 2.0 * step;
      if (tau[k] - step >= 0.0) {
        minus = evaluate(k, -step);
      } else {
        if (!base) base = quest(spec, value_opts);
        minus = *base;
        width = step;
      }
      if (plus.support.nu() != minus.support.nu()) out.flagged[k] = true;
      for (int r = 0; r < p; ++r) {
        const auto rs = static_cast<std::size_t>(r);
        out.jacobian(r, static_cast<Eigen::Index>(k)) = (plus.lambda[rs] - minus.lambda[rs]) / width;
      }
    } catch (const QuestError&) {
      out.flagged[k] = true;
      out.jacobian.col(static_cast<Eigen::Index>(k)).setConstant(std::numeric_limits<double>::quiet_NaN());
    }
  }
  return out;
}

}  // namespace quest
