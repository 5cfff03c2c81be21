#include "quest/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "quest/error.hpp"

namespace quest {

PopulationSpectrum::PopulationSpectrum(std::vector<double> tau, int n) : tau_(std::move(tau)), n_(n) {
  if (tau_.empty()) throw QuestError(Stage::input, "empty spectrum");
  if (n_ < 1) throw QuestError(Stage::input, "sample size must be positive");
  for (std::size_t i = 0; i < tau_.size(); ++i) {
    if (!std::isfinite(tau_[i])) {
      throw QuestError(Stage::input, "non-finite eigenvalue at index " + std::to_string(i));
    }
    if (tau_[i] < 0.0) {
      throw QuestError(Stage::input, "negative eigenvalue at index " + std::to_string(i));
    }
  }
  std::sort(tau_.begin(), tau_.end());
}

double PopulationSpectrum::mean() const noexcept {
  return std::accumulate(tau_.begin(), tau_.end(), 0.0) / static_cast<double>(tau_.size());
}

PopulationSpectrum PopulationSpectrum::scaled(double factor) const {
  std::vector<double> out(tau_);
  for (double& v : out) v *= factor;
  return PopulationSpectrum(std::move(out), n_);
}

GroupedSpectrum group_spectrum(const PopulationSpectrum& spec, double rel_tol) {
  if (rel_tol < 0.0) throw QuestError(Stage::grouping, "negative grouping tolerance");
  const auto tau = spec.tau();
  const double tau_max = tau.back();
  if (!(tau_max > 0.0)) throw QuestError(Stage::grouping, "degenerate spectrum (all eigenvalues are zero)");

  const double tol = rel_tol * tau_max;
  GroupedSpectrum g;
  g.p = spec.p();

  std::size_t i = 0;
  while (i < tau.size() && tau[i] <= tol) ++i;
  g.zero_count = static_cast<int>(i);

  while (i < tau.size()) {
    const double rep = tau[i];
    int count = 1;
    std::size_t j = i + 1;
    while (j < tau.size() && tau[j] - tau[j - 1] <= tol) {
      ++count;
      ++j;
    }
    g.t.push_back(rep);
    g.counts.push_back(count);
    i = j;
  }

  const double inv_p = 1.0 / static_cast<double>(g.p);
  g.w.reserve(g.counts.size());
  for (int count : g.counts) g.w.push_back(count * inv_p);
  g.zero_weight = g.zero_count * inv_p;
  return g;
}

std::vector<double> expand(const GroupedSpectrum& grouped) {
  std::vector<double> out(static_cast<std::size_t>(grouped.zero_count), 0.0);
  for (std::size_t k = 0; k < grouped.size(); ++k) {
    out.insert(out.end(), static_cast<std::size_t>(grouped.counts[k]), grouped.t[k]);
  }
  return out;
}

}  // namespace quest
