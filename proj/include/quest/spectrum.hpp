#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace quest {

/// Population eigenvalues together with the sample size they are observed at.
///
/// The constructor sorts and validates: every entry must be finite and
/// nonnegative, and at least one entry must be present. The concentration
/// ratio is c = p / n.
class PopulationSpectrum {
 public:
  PopulationSpectrum(std::vector<double> tau, int n);

  std::span<const double> tau() const noexcept { return tau_; }
  int n() const noexcept { return n_; }
  int p() const noexcept { return static_cast<int>(tau_.size()); }
  double c() const noexcept { return static_cast<double>(tau_.size()) / n_; }

  double mean() const noexcept;
  PopulationSpectrum scaled(double factor) const;

 private:
  std::vector<double> tau_;
  int n_;
};

/// Distinct nonzero population eigenvalues t_k with weights w_k = count_k / p.
/// Eigenvalues treated as zero are collected into zero_count / zero_weight.
struct GroupedSpectrum {
  std::vector<double> t;
  std::vector<double> w;
  std::vector<int> counts;
  int zero_count = 0;
  double zero_weight = 0.0;
  int p = 0;

  std::size_t size() const noexcept { return t.size(); }
};

inline constexpr double kDefaultGroupingTol = 1e-9;

/// Merges consecutive eigenvalues within rel_tol * max(tau) of each other.
/// Each cluster is represented by its first (smallest) member, which makes
/// regrouping an expanded spectrum reproduce it exactly.
GroupedSpectrum group_spectrum(const PopulationSpectrum& spec, double rel_tol = kDefaultGroupingTol);

/// Inverse of grouping: zero_count zeros followed by count_k copies of t_k.
std::vector<double> expand(const GroupedSpectrum& grouped);

}  // namespace quest
