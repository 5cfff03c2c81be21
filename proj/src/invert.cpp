#include "quest/invert.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>

#include "quest/error.hpp"

namespace quest {

namespace {

// Parameters are theta_k = log(t_k + floor); theta_k >= log(floor) keeps t_k >= 0.
constexpr double kFloor = 1e-8;
constexpr double kInitialDamping = 1e-3;
// Stall: the last kStallWindow accepted steps together gained less than
// kStallGain relative.
constexpr std::size_t kStallWindow = 5;
constexpr double kStallGain = 1e-10;

struct Evaluation {
  Eigen::VectorXd residual;
  double objective;
  Eigen::MatrixXd jac_theta;
  int nu;
};

std::vector<double> to_spectrum(const Eigen::VectorXd& theta) {
  std::vector<double> t(static_cast<std::size_t>(theta.size()));
  for (Eigen::Index k = 0; k < theta.size(); ++k) t[static_cast<std::size_t>(k)] = std::max(0.0, std::exp(theta[k]) - kFloor);
  return t;
}

Evaluation evaluate(const Eigen::VectorXd& theta, const Eigen::VectorXd& target, int n, const QuestOptions& base,
                    bool with_jacobian) {
  QuestOptions opts = base;
  opts.jacobian = with_jacobian;
  const QuestOutput q = quest(PopulationSpectrum(to_spectrum(theta), n), opts);
  Evaluation ev;
  ev.residual = Eigen::Map<const Eigen::VectorXd>(q.lambda.data(), static_cast<Eigen::Index>(q.lambda.size())) - target;
  ev.objective = ev.residual.squaredNorm() / static_cast<double>(target.size());
  ev.nu = q.support.nu();
  // theta is kept sorted at every point where the Jacobian is requested, so
  // its columns line up with the sorted spectrum used by quest.
  if (with_jacobian) ev.jac_theta = q.jacobian * theta.array().exp().matrix().asDiagonal();
  return ev;
}

void validate(std::span<const double> lambda) {
  if (lambda.empty()) throw QuestError(Stage::invert, "empty eigenvalue list");
  bool any_positive = false;
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    if (!std::isfinite(lambda[i])) throw QuestError(Stage::invert, "non-finite eigenvalue at index " + std::to_string(i));
    if (lambda[i] < 0.0) throw QuestError(Stage::invert, "negative eigenvalue at index " + std::to_string(i));
    any_positive = any_positive || lambda[i] > 0.0;
  }
  if (!any_positive) throw QuestError(Stage::invert, "all eigenvalues are zero");
}

}  // namespace

std::vector<double> initial_spectrum(std::span<const double> sorted_lambda) {
  std::vector<double> nonzero;
  for (double l : sorted_lambda) {
    if (l > 0.0) nonzero.push_back(l);
  }
  if (nonzero.size() == sorted_lambda.size()) return {sorted_lambda.begin(), sorted_lambda.end()};

  const std::size_t p = sorted_lambda.size();
  const auto m = static_cast<double>(nonzero.size());
  std::vector<double> t(p);
  for (std::size_t i = 0; i < p; ++i) {
    const double pos = std::clamp((static_cast<double>(i) + 0.5) / static_cast<double>(p) * m - 0.5, 0.0, m - 1.0);
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, nonzero.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    t[i] = (1.0 - frac) * nonzero[lo] + frac * nonzero[hi];
  }
  return t;
}

InversionResult invert(std::span<const double> lambda_obs, int n, const InvertOptions& opts) {
  validate(lambda_obs);
  if (n < 1) throw QuestError(Stage::invert, "sample size must be positive");
  std::vector<double> sorted(lambda_obs.begin(), lambda_obs.end());
  std::sort(sorted.begin(), sorted.end());
  const auto p = static_cast<Eigen::Index>(sorted.size());
  const double scale = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(p);

  Eigen::VectorXd target(p);
  for (Eigen::Index i = 0; i < p; ++i) target[i] = sorted[static_cast<std::size_t>(i)] / scale;

  const std::vector<double> start = initial_spectrum(sorted);
  const double theta_min = std::log(kFloor);
  Eigen::VectorXd theta(p);
  for (Eigen::Index k = 0; k < p; ++k) {
    theta[k] = std::max(theta_min, std::log(start[static_cast<std::size_t>(k)] / scale + kFloor));
  }

  InversionResult result;
  Evaluation cur = evaluate(theta, target, n, opts.quest, true);
  result.support_trace.push_back({0, cur.nu});
  std::vector<double> accepted_objectives = {cur.objective};

  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(p, p);
  auto damping_from = [&](const Eigen::MatrixXd& A) { return kInitialDamping * std::max(A.diagonal().maxCoeff(), 1e-300); };

  Eigen::MatrixXd A = cur.jac_theta.transpose() * cur.jac_theta;
  Eigen::VectorXd g = cur.jac_theta.transpose() * cur.residual;
  double mu = damping_from(A);
  double nu_factor = 2.0;
  const double grad_scale = 2.0 / static_cast<double>(p);

  int iter = 0;
  for (; iter < opts.max_iter; ++iter) {
    if ((grad_scale * g).lpNorm<Eigen::Infinity>() <= opts.g_tol) {
      result.converged = true;
      result.stop_reason = "gradient tolerance";
      break;
    }
    if (cur.objective <= opts.f_tol) {
      result.converged = true;
      result.stop_reason = "objective tolerance";
      break;
    }

    const Eigen::VectorXd step = (A + mu * identity).ldlt().solve(-g);
    if (!step.allFinite()) {
      result.stop_reason = "singular step";
      break;
    }
    if (step.norm() <= 1e-15 * (theta.norm() + 1e-15)) {
      result.stop_reason = "step below resolution";
      break;
    }
    Eigen::VectorXd trial = (theta + step).cwiseMax(theta_min);
    std::sort(trial.data(), trial.data() + trial.size());

    std::optional<Evaluation> next;
    try {
      next = evaluate(trial, target, n, opts.quest, false);
    } catch (const QuestError&) {
      next.reset();
    }

    // Gain ratio uses the half sum of squares, as does the linear model.
    const double actual = next ? 0.5 * (cur.residual.squaredNorm() - next->residual.squaredNorm()) : -1.0;
    const double predicted = 0.5 * step.dot(mu * step - g);
    const double rho = predicted > 0.0 ? actual / predicted : -1.0;

    if (next && rho > 0.0) {
      Evaluation accepted;
      try {
        accepted = evaluate(trial, target, n, opts.quest, true);
      } catch (const QuestError&) {
        mu *= nu_factor;
        nu_factor *= 2.0;
        continue;
      }
      const bool nu_changed = accepted.nu != cur.nu;
      theta = trial;
      cur = std::move(accepted);
      accepted_objectives.push_back(cur.objective);
      A = cur.jac_theta.transpose() * cur.jac_theta;
      g = cur.jac_theta.transpose() * cur.residual;
      if (nu_changed) {
        result.support_trace.push_back({iter + 1, cur.nu});
        mu = damping_from(A);
        nu_factor = 2.0;
      } else {
        mu *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
        nu_factor = 2.0;
      }
      const std::size_t m = accepted_objectives.size();
      if (m > kStallWindow &&
          accepted_objectives[m - 1 - kStallWindow] - cur.objective <= kStallGain * cur.objective) {
        ++iter;
        result.stop_reason = "stalled";
        break;
      }
    } else {
      mu *= nu_factor;
      nu_factor *= 2.0;
      if (!std::isfinite(mu) || mu > 1e300) {
        result.stop_reason = "damping overflow";
        break;
      }
    }
  }
  if (result.stop_reason.empty()) result.stop_reason = "iteration limit";

  result.iterations = iter;
  result.tau_hat = to_spectrum(theta);
  for (double& t : result.tau_hat) t *= scale;
  result.objective = cur.objective * scale * scale;
  for (double f : accepted_objectives) result.objective_trace.push_back(f * scale * scale);
  return result;
}

}  // namespace quest
