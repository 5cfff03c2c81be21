#include "quest/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

#include <Eigen/Dense>

#include "quest/error.hpp"

namespace quest {

namespace {

// Kumaraswamy(3, 1/3) c.d.f. and its inverse, which is Kumaraswamy(1/3, 3).
double kuma_low(double x) { return 1.0 - std::cbrt(1.0 - x * x * x); }
double kuma_high(double x) {
  const double y = 1.0 - x;
  return std::cbrt(1.0 - y * y * y);
}

void check_unit(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw QuestError(Stage::simulation, std::string(what) + " argument outside [0, 1]: " + std::to_string(v));
  }
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Fresh distribution objects per matrix: normal_distribution caches a
// second variate, which must not leak from one stream into the next.
struct VariateSource {
  Distribution dist;
  std::mt19937_64 gen;
  std::normal_distribution<double> normal{};
  std::student_t_distribution<double> student{5.0};
  std::exponential_distribution<double> expo{1.0};

  double operator()() {
    switch (dist) {
      case Distribution::gaussian: return normal(gen);
      case Distribution::student5: return student(gen) * std::sqrt(3.0 / 5.0);
      case Distribution::coin: return (gen() >> 63) ? 1.0 : -1.0;
      case Distribution::exponential: return expo(gen) - 1.0;
    }
    return 0.0;
  }
};

}  // namespace

Shape parse_shape(std::string_view name) {
  if (name == "h1" || name == "H1") return Shape::h1;
  if (name == "h2" || name == "H2") return Shape::h2;
  if (name == "h3" || name == "H3") return Shape::h3;
  if (name == "h4" || name == "H4") return Shape::h4;
  throw QuestError(Stage::simulation, "unknown shape '" + std::string(name) + "'");
}

Distribution parse_distribution(std::string_view name) {
  if (name == "gaussian") return Distribution::gaussian;
  if (name == "student5") return Distribution::student5;
  if (name == "coin") return Distribution::coin;
  if (name == "exponential") return Distribution::exponential;
  throw QuestError(Stage::simulation, "unknown distribution '" + std::string(name) + "'");
}

const char* shape_name(Shape shape) noexcept {
  switch (shape) {
    case Shape::h1: return "h1";
    case Shape::h2: return "h2";
    case Shape::h3: return "h3";
    case Shape::h4: return "h4";
  }
  return "?";
}

const char* distribution_name(Distribution dist) noexcept {
  switch (dist) {
    case Distribution::gaussian: return "gaussian";
    case Distribution::student5: return "student5";
    case Distribution::coin: return "coin";
    case Distribution::exponential: return "exponential";
  }
  return "?";
}

double shape_cdf(Shape shape, double x) {
  check_unit(x, "shape_cdf");
  switch (shape) {
    case Shape::h1: return kuma_low(x);
    case Shape::h2: return kuma_high(x);
    case Shape::h3: return x <= 0.5 ? 0.5 * kuma_high(2.0 * x) : 1.0 - 0.5 * kuma_high(2.0 - 2.0 * x);
    case Shape::h4: return x <= 0.5 ? 0.5 * kuma_low(2.0 * x) : 0.5 + 0.5 * kuma_high(2.0 * x - 1.0);
  }
  return 0.0;
}

double shape_quantile(Shape shape, double q) {
  check_unit(q, "shape_quantile");
  switch (shape) {
    case Shape::h1: return kuma_high(q);
    case Shape::h2: return kuma_low(q);
    case Shape::h3: return q <= 0.5 ? 0.5 * kuma_low(2.0 * q) : 1.0 - 0.5 * kuma_low(2.0 - 2.0 * q);
    case Shape::h4: return q <= 0.5 ? 0.5 * kuma_high(2.0 * q) : 0.5 + 0.5 * kuma_low(2.0 * q - 1.0);
  }
  return 0.0;
}

std::vector<double> population_from_shape(const ShapeSpec& shape, int p) {
  if (p < 1) throw QuestError(Stage::simulation, "dimension must be positive");
  if (!(shape.condition_number >= 1.0)) throw QuestError(Stage::simulation, "condition number must be at least 1");
  std::vector<double> tau(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i) {
    const double q = (i + 0.5) / p;
    tau[static_cast<std::size_t>(i)] = 1.0 + (shape.condition_number - 1.0) * shape_quantile(shape.kind, q);
  }
  std::sort(tau.begin(), tau.end());
  return tau;
}

std::uint64_t stream_seed(std::uint64_t master, int p, int rep) {
  std::uint64_t s = splitmix64(master);
  s = splitmix64(s ^ static_cast<std::uint64_t>(p));
  return splitmix64(s ^ (static_cast<std::uint64_t>(rep) << 32));
}

std::vector<double> sample_eigenvalues(std::span<const double> tau, int n, Distribution dist, std::uint64_t seed) {
  const auto p = static_cast<Eigen::Index>(tau.size());
  if (p < 1 || n < 1) throw QuestError(Stage::simulation, "dimension and sample size must be positive");
  VariateSource draw{dist, std::mt19937_64(seed), std::normal_distribution<double>(),
                     std::student_t_distribution<double>(5.0), std::exponential_distribution<double>(1.0)};
  Eigen::MatrixXd Y(n, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double s = std::sqrt(tau[static_cast<std::size_t>(j)]);
    for (Eigen::Index i = 0; i < n; ++i) Y(i, j) = s * draw();
  }

  // The nonzero spectrum of Y^T Y equals that of Y Y^T; use the smaller one.
  const bool wide = p > n;
  Eigen::MatrixXd S(wide ? n : p, wide ? n : p);
  if (wide) {
    S.noalias() = Y * Y.transpose();
  } else {
    S.setZero();
    S.selfadjointView<Eigen::Lower>().rankUpdate(Y.transpose());
  }
  S /= static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(S, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw QuestError(Stage::simulation, "eigen decomposition failed");

  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(p));
  if (wide) out.assign(static_cast<std::size_t>(p - n), 0.0);
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) out.push_back(std::max(0.0, solver.eigenvalues()[i]));
  std::sort(out.begin(), out.end());
  return out;
}

double nmse(std::span<const double> estimate, std::span<const double> truth) {
  if (estimate.size() != truth.size() || truth.empty()) {
    throw QuestError(Stage::simulation, "nmse: size mismatch");
  }
  double sq = 0.0, mean = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double d = estimate[i] - truth[i];
    sq += d * d;
    mean += truth[i];
  }
  const auto p = static_cast<double>(truth.size());
  mean /= p;
  return (sq / p) / (mean * mean);
}

int sample_size_for(int p, double concentration) {
  if (!(concentration > 0.0)) throw QuestError(Stage::simulation, "concentration must be positive");
  return std::max(1, static_cast<int>(std::lround(p / concentration)));
}

ConvergenceSummary summarize(std::span<const SimulationRecord> records, std::span<const int> dims) {
  ConvergenceSummary summary;
  std::vector<double> lx, ly;
  for (int p : dims) {
    DimensionSummary d{p, 0, 0.0, 0};
    double total = 0.0;
    for (const auto& r : records) {
      if (r.p != p) continue;
      d.n = r.n;
      if (!r.error.empty() || !std::isfinite(r.nmse)) continue;
      total += r.nmse;
      ++d.reps_used;
    }
    d.mean_nmse = d.reps_used > 0 ? total / d.reps_used : std::numeric_limits<double>::quiet_NaN();
    if (d.reps_used > 0 && d.mean_nmse > 0.0) {
      lx.push_back(std::log(static_cast<double>(p)));
      ly.push_back(std::log(d.mean_nmse));
    }
    summary.dims.push_back(d);
  }

  summary.slope = std::numeric_limits<double>::quiet_NaN();
  if (lx.size() >= 2) {
    const auto m = static_cast<double>(lx.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      mx += lx[i];
      my += ly[i];
    }
    mx /= m;
    my /= m;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sxy += (lx[i] - mx) * (ly[i] - my);
      sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    if (sxx > 0.0) summary.slope = sxy / sxx;
  }
  return summary;
}

ConvergenceRun run_convergence(const ConvergenceConfig& config) {
  if (config.dims.empty()) throw QuestError(Stage::simulation, "no dimensions given");
  if (config.reps < 1) throw QuestError(Stage::simulation, "reps must be at least 1");
  for (int p : config.dims) {
    if (p < 1) throw QuestError(Stage::simulation, "dimension must be positive");
  }
  sample_size_for(1, config.concentration);

  struct Cell {
    int p;
    int rep;
  };
  std::vector<Cell> cells;
  for (int p : config.dims) {
    for (int rep = 0; rep < config.reps; ++rep) cells.push_back({p, rep});
  }

  ConvergenceRun run;
  run.records.resize(cells.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t idx = next++; idx < cells.size(); idx = next++) {
      const Cell cell = cells[idx];
      SimulationRecord& rec = run.records[idx];
      rec.shape = config.shape.kind;
      rec.dist = config.dist;
      rec.p = cell.p;
      rec.n = sample_size_for(cell.p, config.concentration);
      rec.rep = cell.rep;
      rec.seed = stream_seed(config.seed, cell.p, cell.rep);
      rec.nmse = std::numeric_limits<double>::quiet_NaN();
      rec.converged = false;
      rec.iterations = 0;

      const auto start = std::chrono::steady_clock::now();
      try {
        const std::vector<double> tau = population_from_shape(config.shape, cell.p);
        const std::vector<double> lambda = sample_eigenvalues(tau, rec.n, config.dist, rec.seed);
        const InversionResult inv = invert(lambda, rec.n, config.invert);
        rec.nmse = nmse(inv.tau_hat, tau);
        rec.converged = inv.converged;
        rec.iterations = inv.iterations;
      } catch (const std::exception& e) {
        rec.error = e.what();
      }
      rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
  };

  unsigned n_threads = config.threads > 0 ? static_cast<unsigned>(config.threads) : std::thread::hardware_concurrency();
  n_threads = std::clamp<unsigned>(n_threads, 1, static_cast<unsigned>(cells.size()));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  run.summary = summarize(run.records, config.dims);
  return run;
}

}  // namespace quest
