#pragma once

#include <span>
#include <string>
#include <vector>

#include "quest/quest.hpp"

namespace quest {

struct InvertOptions {
  int max_iter = 300;
  /// Stop when the infinity norm of the objective gradient falls below this.
  double g_tol = 1e-8;
  /// Stop when the objective falls below f_tol * mean(lambda)^2.
  double f_tol = 1e-12;
  QuestOptions quest;
};

struct SupportTraceEntry {
  int iteration;
  int nu;
};

struct InversionResult {
  std::vector<double> tau_hat;
  /// (1/p) sum of squared residuals at tau_hat.
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string stop_reason;
  /// Number of support intervals at every accepted iterate where it changed.
  std::vector<SupportTraceEntry> support_trace;
  /// Objective (in the normalized scale) at the start and after every accepted step.
  std::vector<double> objective_trace;
};

/// Levenberg-Marquardt fit of quest(t, n) to the observed eigenvalues over
/// log-parameterized t >= 0. The input is rescaled to unit mean before
/// fitting, so the result is scale equivariant.
InversionResult invert(std::span<const double> lambda_obs, int n, const InvertOptions& opts = {});

/// Starting spectrum: the observed eigenvalues, or, when some of them are
/// zero, quantiles of the nonzero ones spread over all p positions.
std::vector<double> initial_spectrum(std::span<const double> sorted_lambda);

}  // namespace quest
