#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "quest/invert.hpp"

namespace quest {

/// Population shapes on [0,1] built from the Kumaraswamy family.
enum class Shape { h1, h2, h3, h4 };

/// Standardized (mean 0, variance 1) variate used to draw the data matrix.
enum class Distribution { gaussian, student5, coin, exponential };

Shape parse_shape(std::string_view name);
Distribution parse_distribution(std::string_view name);
const char* shape_name(Shape shape) noexcept;
const char* distribution_name(Distribution dist) noexcept;

double shape_cdf(Shape shape, double x);
double shape_quantile(Shape shape, double q);

struct ShapeSpec {
  Shape kind = Shape::h1;
  double condition_number = 10.0;
};

/// tau_i = 1 + (kappa - 1) * quantile((i - 0.5) / p), ascending.
std::vector<double> population_from_shape(const ShapeSpec& shape, int p);

/// Seed of the random stream for one (p, rep) cell, independent of the
/// order in which cells are executed.
std::uint64_t stream_seed(std::uint64_t master, int p, int rep);

/// Eigenvalues (ascending) of (1/n) Y^T Y where Y is n x p with column j
/// scaled by sqrt(tau_j). When p > n the p - n trailing zeros are exact.
std::vector<double> sample_eigenvalues(std::span<const double> tau, int n, Distribution dist, std::uint64_t seed);

/// Mean squared error normalized by the squared mean of the truth.
double nmse(std::span<const double> estimate, std::span<const double> truth);

/// n = max(1, round(p / concentration)).
int sample_size_for(int p, double concentration);

struct ConvergenceConfig {
  ShapeSpec shape;
  Distribution dist = Distribution::gaussian;
  double concentration = 1.0 / 3.0;
  std::vector<int> dims;
  int reps = 1;
  std::uint64_t seed = 1;
  /// 0 selects the hardware concurrency.
  int threads = 0;
  InvertOptions invert;
};

struct SimulationRecord {
  Shape shape;
  Distribution dist;
  int p;
  int n;
  int rep;
  std::uint64_t seed;
  double nmse;
  bool converged;
  int iterations;
  double seconds;
  /// Non-empty when the inversion threw; nmse is NaN in that case.
  std::string error;
};

struct DimensionSummary {
  int p;
  int n;
  double mean_nmse;
  int reps_used;
};

struct ConvergenceSummary {
  std::vector<DimensionSummary> dims;
  /// Least-squares slope of log(mean NMSE) against log(p); NaN with fewer
  /// than two usable dimensions.
  double slope;
};

struct ConvergenceRun {
  std::vector<SimulationRecord> records;
  ConvergenceSummary summary;
};

/// One record per (p, rep), ordered by p then rep regardless of threading.
ConvergenceRun run_convergence(const ConvergenceConfig& config);

ConvergenceSummary summarize(std::span<const SimulationRecord> records, std::span<const int> dims);

}  // namespace quest
