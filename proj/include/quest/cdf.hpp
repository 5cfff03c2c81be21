#pragma once

#include <vector>

#include <Eigen/Dense>

#include "quest/mp_density.hpp"
#include "quest/support.hpp"

namespace quest {

/// Eigenvalue counts delimiting one support interval on the CDF axis: the
/// interval carries sample eigenvalues count_lo + 1, ..., count_hi.
struct IntervalMass {
  int count_lo;
  int count_hi;
};

/// Number of sample eigenvalues pinned at zero: max(p - n, #zero tau).
int zero_atom_count(int p, int n, int zero_count);

/// Per-interval counts from the cumulative omegas, with the first interval
/// starting after the zero atoms. Throws when an interval ends up empty.
std::vector<IntervalMass> interval_masses(const SupportU& support, int p, int zero_atoms);

/// Limiting sample CDF along one interval.
struct CdfCurve {
  std::vector<double> F;
  std::vector<double> F_tilde;
  IntervalMass mass;
  Eigen::MatrixXd dF_dtau;

  std::size_t size() const noexcept { return F.size(); }
};

/// Cumulative trapezoid of the density, then an affine rescaling so the
/// interval carries exactly (count_hi - count_lo) / p.
CdfCurve integrate_cdf(const DensityCurve& density, IntervalMass mass, int p);

/// d F_j / d tau_k. The interval masses are fixed, so endpoint rows vanish.
Eigen::MatrixXd cdf_jacobian(const DensityCurve& density, const CdfCurve& cdf);

/// Sample eigenvalues count_lo + 1 .. count_hi of one interval: p times the
/// integral of the piecewise-linear inverse CDF over each 1/p slice.
std::vector<double> quantize(const CdfCurve& cdf, const DensityCurve& density, int p);

/// Rows of d lambda / d tau for the eigenvalues returned by quantize.
Eigen::MatrixXd quantize_jacobian(const CdfCurve& cdf, const DensityCurve& density, int p);

}  // namespace quest
