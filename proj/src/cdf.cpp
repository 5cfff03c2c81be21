#include "quest/cdf.hpp"

#include <algorithm>
#include <string>

#include "quest/error.hpp"

namespace quest {

namespace {

// Raw cumulative trapezoid area A_j along the grid, A_0 = 0.
std::vector<double> cumulative_area(const DensityCurve& d) {
  std::vector<double> area(d.size(), 0.0);
  for (std::size_t j = 1; j < d.size(); ++j) {
    area[j] = area[j - 1] + 0.5 * (d.x[j] - d.x[j - 1]) * (d.f[j] + d.f[j - 1]);
  }
  return area;
}

// Integral of the piecewise-linear inverse CDF from F_0 to alpha, with the
// node integrals X_j precomputed. Segment j is the one holding alpha.
struct InverseCdfIntegral {
  const std::vector<double>& F;
  const std::vector<double>& x;
  std::vector<double> X;

  InverseCdfIntegral(const std::vector<double>& F_, const std::vector<double>& x_) : F(F_), x(x_), X(F_.size(), 0.0) {
    for (std::size_t j = 0; j + 1 < F.size(); ++j) X[j + 1] = X[j] + (F[j + 1] - F[j]) * 0.5 * (x[j] + x[j + 1]);
  }

  // Last segment j with F_j <= alpha and F_{j+1} > F_j; plateaus are skipped.
  std::size_t segment(double alpha, std::size_t start) const {
    std::size_t j = start;
    while (j + 2 < F.size() && (F[j + 1] <= alpha || F[j + 1] == F[j])) ++j;
    return j;
  }

  double value(double alpha, std::size_t j) const {
    const double dF = F[j + 1] - F[j];
    if (dF <= 0.0) return X[j];
    const double a = alpha - F[j];
    return X[j] + a * x[j] + a * a / (2.0 * dF) * (x[j + 1] - x[j]);
  }
};

}  // namespace

int zero_atom_count(int p, int n, int zero_count) { return std::max(std::max(p - n, 0), zero_count); }

std::vector<IntervalMass> interval_masses(const SupportU& support, int p, int zero_atoms) {
  std::vector<IntervalMass> out;
  int cum = 0;
  for (std::size_t i = 0; i < support.omega.size(); ++i) {
    const int lo = std::max(zero_atoms, cum);
    cum += support.omega[i];
    const int hi = std::min(cum, p);
    if (lo >= hi) {
      throw QuestError(Stage::cdf, "degenerate interval " + std::to_string(i) + ": no eigenvalue mass left");
    }
    out.push_back({lo, hi});
  }
  return out;
}

CdfCurve integrate_cdf(const DensityCurve& density, IntervalMass mass, int p) {
  const double F0 = static_cast<double>(mass.count_lo) / p;
  const double F_end = static_cast<double>(mass.count_hi) / p;
  const std::vector<double> area = cumulative_area(density);
  const double total = area.back();
  if (!(total > 0.0)) throw QuestError(Stage::cdf, "degenerate interval: zero raw mass");

  CdfCurve cdf;
  cdf.mass = mass;
  cdf.F.resize(area.size());
  cdf.F_tilde.resize(area.size());
  for (std::size_t j = 0; j < area.size(); ++j) {
    cdf.F_tilde[j] = F0 + area[j];
    cdf.F[j] = F0 + area[j] * (F_end - F0) / total;
  }
  cdf.F.front() = F0;
  cdf.F.back() = F_end;
  return cdf;
}

Eigen::MatrixXd cdf_jacobian(const DensityCurve& density, const CdfCurve& cdf) {
  const auto n_pts = static_cast<Eigen::Index>(density.size());
  const Eigen::Index p = density.dx_dtau.cols();
  const std::vector<double> area = cumulative_area(density);
  const double total = area.back();
  const double span = cdf.F.back() - cdf.F.front();

  // d A_j / d tau, accumulated segment by segment.
  Eigen::MatrixXd dA = Eigen::MatrixXd::Zero(n_pts, p);
  for (Eigen::Index j = 1; j < n_pts; ++j) {
    const auto js = static_cast<std::size_t>(j);
    const double dx = density.x[js] - density.x[js - 1];
    const double fs = density.f[js] + density.f[js - 1];
    dA.row(j) = dA.row(j - 1) + 0.5 * (density.dx_dtau.row(j) - density.dx_dtau.row(j - 1)) * fs +
                0.5 * dx * (density.df_dtau.row(j) + density.df_dtau.row(j - 1));
  }

  Eigen::MatrixXd dF(n_pts, p);
  const Eigen::RowVectorXd dA_end = dA.row(n_pts - 1);
  for (Eigen::Index j = 0; j < n_pts; ++j) {
    dF.row(j) = span * (dA.row(j) * total - area[static_cast<std::size_t>(j)] * dA_end) / (total * total);
  }
  dF.row(0).setZero();
  dF.row(n_pts - 1).setZero();
  return dF;
}

std::vector<double> quantize(const CdfCurve& cdf, const DensityCurve& density, int p) {
  const InverseCdfIntegral X(cdf.F, density.x);
  const double X_end = X.X.back();
  std::vector<double> lambda;
  lambda.reserve(static_cast<std::size_t>(cdf.mass.count_hi - cdf.mass.count_lo));

  double prev = 0.0;
  std::size_t seg = 0;
  for (int kappa = cdf.mass.count_lo + 1; kappa <= cdf.mass.count_hi; ++kappa) {
    double cur;
    if (kappa == cdf.mass.count_hi) {
      cur = X_end;
    } else {
      const double alpha = static_cast<double>(kappa) / p;
      seg = X.segment(alpha, seg);
      cur = X.value(alpha, seg);
    }
    lambda.push_back(p * (cur - prev));
    prev = cur;
  }
  return lambda;
}

Eigen::MatrixXd quantize_jacobian(const CdfCurve& cdf, const DensityCurve& density, int p) {
  const InverseCdfIntegral X(cdf.F, density.x);
  const auto n_pts = static_cast<Eigen::Index>(cdf.size());
  const Eigen::Index n_tau = density.dx_dtau.cols();
  const Eigen::MatrixXd& dx = density.dx_dtau;
  const Eigen::MatrixXd& dF = cdf.dF_dtau;

  Eigen::MatrixXd dX = Eigen::MatrixXd::Zero(n_pts, n_tau);
  for (Eigen::Index j = 0; j + 1 < n_pts; ++j) {
    const auto js = static_cast<std::size_t>(j);
    const double dFj = cdf.F[js + 1] - cdf.F[js];
    dX.row(j + 1) = dX.row(j) + 0.5 * (dF.row(j + 1) - dF.row(j)) * (density.x[js] + density.x[js + 1]) +
                    0.5 * dFj * (dx.row(j) + dx.row(j + 1));
  }

  const int count = cdf.mass.count_hi - cdf.mass.count_lo;
  Eigen::MatrixXd jac(count, n_tau);
  Eigen::RowVectorXd prev = Eigen::RowVectorXd::Zero(n_tau);
  Eigen::RowVectorXd cur(n_tau);
  std::size_t seg = 0;
  for (int r = 0; r < count; ++r) {
    const int kappa = cdf.mass.count_lo + 1 + r;
    if (kappa == cdf.mass.count_hi) {
      cur = dX.row(n_pts - 1);
    } else {
      const double alpha = static_cast<double>(kappa) / p;
      seg = X.segment(alpha, seg);
      const auto j = static_cast<Eigen::Index>(seg);
      const double Fj = cdf.F[seg];
      const double span = cdf.F[seg + 1] - Fj;
      const double dxs = density.x[seg + 1] - density.x[seg];
      const double a = alpha - Fj;
      cur = dX.row(j) + a * dx.row(j) - density.x[seg] * dF.row(j);
      if (span > 0.0) {
        cur += -(a / span) * dxs * dF.row(j) - a * a / (2.0 * span * span) * dxs * (dF.row(j + 1) - dF.row(j)) +
               a * a / (2.0 * span) * (dx.row(j + 1) - dx.row(j));
      }
    }
    jac.row(r) = p * (cur - prev);
    prev = cur;
  }
  return jac;
}

}  // namespace quest
