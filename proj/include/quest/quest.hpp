#pragma once

#include <vector>

#include <Eigen/Dense>

#include "quest/cdf.hpp"
#include "quest/grid.hpp"
#include "quest/mp_density.hpp"
#include "quest/spectrum.hpp"
#include "quest/support.hpp"

namespace quest {

struct QuestOptions {
  bool jacobian = true;
  double grouping_tol = kDefaultGroupingTol;
};

/// Everything computed along one support interval.
struct IntervalCurves {
  IntervalGrid grid;
  MpSolution mp;
  DensityCurve density;
  CdfCurve cdf;
};

/// All intermediate stages for a spectrum, in the spectrum's own scale.
struct PipelineCurves {
  GroupedSpectrum grouped;
  SupportU support;
  int zero_atoms = 0;
  std::vector<IntervalCurves> intervals;
  std::vector<double> lambda;
  Eigen::MatrixXd jacobian;
};

/// Runs every stage without rescaling. Errors carry the stage that failed.
PipelineCurves evaluate_pipeline(const PopulationSpectrum& spec, const QuestOptions& opts = {});

struct QuestOutput {
  /// p limiting sample eigenvalues, ascending.
  std::vector<double> lambda;
  /// d lambda_kappa / d tau_k (p x p); empty when not requested.
  Eigen::MatrixXd jacobian;
  /// u-space support, with its endpoint Jacobian when requested.
  SupportU support;
  /// Edges of each support interval on the sample eigenvalue axis.
  std::vector<double> x_endpoints;
  int zero_atoms = 0;
  /// Both p > n and zero population eigenvalues; the zero atom takes the max.
  bool joint_zero_case = false;
};

/// The QuEST function. The spectrum is rescaled to unit mean internally and
/// the results mapped back, so tolerances do not depend on its scale.
QuestOutput quest(const PopulationSpectrum& spec, const QuestOptions& opts = {});

struct FdJacobian {
  Eigen::MatrixXd jacobian;
  /// Column k is unreliable: the number of support intervals differs between
  /// the two perturbed evaluations, or one of them failed.
  std::vector<bool> flagged;
};

/// Central finite differences of quest(). The step for column k is h * tau_k
/// when relative (h * mean(tau) for a zero entry), otherwise h. A step that
/// would make tau_k negative falls back to a forward difference.
FdJacobian quest_fd_jacobian(const PopulationSpectrum& spec, double h, bool relative = true,
                             const QuestOptions& opts = {});

}  // namespace quest
