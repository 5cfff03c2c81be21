#include "cli.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "quest/error.hpp"
#include "quest/invert.hpp"
#include "quest/quest.hpp"
#include "quest/simulation.hpp"

namespace quest::cli {

namespace {

using nlohmann::json;

constexpr int kSchemaVersion = 1;
constexpr double kJacobianCheckTol = 1e-4;

constexpr std::string_view kSchema = R"({
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "$id": "quest-cli-output/1",
  "title": "quest CLI output",
  "type": "object",
  "required": ["schema_version", "command"],
  "properties": {
    "schema_version": {"const": 1},
    "command": {"enum": ["eval", "invert"]}
  },
  "allOf": [
    {
      "if": {"properties": {"command": {"const": "eval"}}},
      "then": {
        "required": ["p", "n", "lambda", "support", "zero_atoms", "joint_zero_case"],
        "properties": {
          "p": {"type": "integer", "minimum": 1},
          "n": {"type": "integer", "minimum": 1},
          "lambda": {"type": "array", "items": {"type": "number", "minimum": 0}},
          "zero_atoms": {"type": "integer", "minimum": 0},
          "joint_zero_case": {"type": "boolean"},
          "jacobian_file": {"type": "string"},
          "support": {
            "type": "object",
            "required": ["nu", "omega", "u_endpoints", "x_endpoints"],
            "properties": {
              "nu": {"type": "integer", "minimum": 1},
              "omega": {"type": "array", "items": {"type": "integer", "minimum": 1}},
              "u_endpoints": {"type": "array", "items": {"type": "number"}},
              "x_endpoints": {"type": "array", "items": {"type": "number"}}
            }
          }
        }
      }
    },
    {
      "if": {"properties": {"command": {"const": "invert"}}},
      "then": {
        "required": ["p", "n", "tau_hat", "objective", "iterations", "converged", "stop_reason", "support_trace"],
        "properties": {
          "p": {"type": "integer", "minimum": 1},
          "n": {"type": "integer", "minimum": 1},
          "tau_hat": {"type": "array", "items": {"type": "number", "minimum": 0}},
          "objective": {"type": "number", "minimum": 0},
          "iterations": {"type": "integer", "minimum": 0},
          "converged": {"type": "boolean"},
          "stop_reason": {"type": "string"},
          "support_trace": {
            "type": "array",
            "items": {
              "type": "object",
              "required": ["iteration", "nu"],
              "properties": {"iteration": {"type": "integer"}, "nu": {"type": "integer"}}
            }
          }
        }
      }
    }
  ]
}
)";

// Raised for anything the caller got wrong; maps to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<double> read_values(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + std::string(what) + " file '" + path + "'");
  std::vector<double> values;
  std::string line;
  for (int line_no = 1; std::getline(in, line); ++line_no) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t\r");
    const std::string token = line.substr(first, last - first + 1);
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size() || errno == ERANGE || !std::isfinite(v)) {
      throw UsageError("invalid number '" + token + "' at line " + std::to_string(line_no));
    }
    if (v < 0.0) throw UsageError("negative eigenvalue at line " + std::to_string(line_no));
    values.push_back(v);
  }
  if (values.empty()) throw UsageError(std::string(what) + " file '" + path + "' has no values");
  return values;
}

std::vector<int> parse_dims(const std::string& csv) {
  std::vector<int> dims;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    char* end = nullptr;
    const long v = std::strtol(item.c_str(), &end, 10);
    if (item.empty() || *end != '\0' || v < 1 || v > 1000000) throw UsageError("invalid dimension '" + item + "'");
    dims.push_back(static_cast<int>(v));
  }
  if (dims.empty()) throw UsageError("--dims is empty");
  return dims;
}

// Writes to --out when given, otherwise to the command's output stream.
void emit(const std::string& path, std::ostream& out, const std::string& text) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot write '" + path + "'");
  f << text;
}

std::string jacobian_csv(const Eigen::MatrixXd& jac) {
  std::string s;
  for (Eigen::Index r = 0; r < jac.rows(); ++r) {
    for (Eigen::Index c = 0; c < jac.cols(); ++c) {
      if (c > 0) s += ',';
      s += fmt17(jac(r, c));
    }
    s += '\n';
  }
  return s;
}

json support_json(const QuestOutput& q) {
  return {{"nu", q.support.nu()},
          {"omega", q.support.omega},
          {"u_endpoints", q.support.endpoints},
          {"x_endpoints", q.x_endpoints}};
}

std::string join17(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt17(v[i]);
  return s;
}

struct EvalArgs {
  std::string tau_file, jacobian_file, out_file, format = "json";
  int n = 0;
};

void cmd_eval(const EvalArgs& a, std::ostream& out) {
  const std::vector<double> tau = read_values(a.tau_file, "tau");
  QuestOptions opts;
  opts.jacobian = !a.jacobian_file.empty();
  const QuestOutput q = quest::quest(PopulationSpectrum(tau, a.n), opts);
  if (opts.jacobian) emit(a.jacobian_file, out, jacobian_csv(q.jacobian));

  std::string text;
  if (a.format == "json") {
    json j = {{"schema_version", kSchemaVersion},
              {"command", "eval"},
              {"p", static_cast<int>(tau.size())},
              {"n", a.n},
              {"lambda", q.lambda},
              {"support", support_json(q)},
              {"zero_atoms", q.zero_atoms},
              {"joint_zero_case", q.joint_zero_case}};
    if (opts.jacobian) j["jacobian_file"] = a.jacobian_file;
    text = j.dump(2) + "\n";
  } else {
    text += "# nu=" + std::to_string(q.support.nu()) + "\n";
    std::string omega;
    for (std::size_t i = 0; i < q.support.omega.size(); ++i) omega += (i ? "," : "") + std::to_string(q.support.omega[i]);
    text += "# omega=" + omega + "\n";
    text += "# u_endpoints=" + join17(q.support.endpoints) + "\n";
    text += "# x_endpoints=" + join17(q.x_endpoints) + "\n";
    text += "index,lambda\n";
    for (std::size_t i = 0; i < q.lambda.size(); ++i) text += std::to_string(i + 1) + "," + fmt17(q.lambda[i]) + "\n";
  }
  emit(a.out_file, out, text);
}

struct InvertArgs {
  std::string lambda_file, out_file, format = "json";
  int n = 0;
  int max_iter = InvertOptions{}.max_iter;
  double tol = InvertOptions{}.g_tol;
};

void cmd_invert(const InvertArgs& a, std::ostream& out) {
  const std::vector<double> lambda = read_values(a.lambda_file, "lambda");
  InvertOptions opts;
  opts.max_iter = a.max_iter;
  opts.g_tol = a.tol;
  const InversionResult r = invert(lambda, a.n, opts);

  std::string text;
  if (a.format == "json") {
    json trace = json::array();
    for (const auto& e : r.support_trace) trace.push_back({{"iteration", e.iteration}, {"nu", e.nu}});
    const json j = {{"schema_version", kSchemaVersion},
                    {"command", "invert"},
                    {"p", static_cast<int>(lambda.size())},
                    {"n", a.n},
                    {"tau_hat", r.tau_hat},
                    {"objective", r.objective},
                    {"iterations", r.iterations},
                    {"converged", r.converged},
                    {"stop_reason", r.stop_reason},
                    {"support_trace", trace}};
    text = j.dump(2) + "\n";
  } else {
    text += "# objective=" + fmt17(r.objective) + "\n";
    text += "# iterations=" + std::to_string(r.iterations) + "\n";
    text += std::string("# converged=") + (r.converged ? "true" : "false") + "\n";
    text += "index,tau_hat\n";
    for (std::size_t i = 0; i < r.tau_hat.size(); ++i) text += std::to_string(i + 1) + "," + fmt17(r.tau_hat[i]) + "\n";
  }
  emit(a.out_file, out, text);
}

struct SimulateArgs {
  std::string shape, dist = "gaussian", dims, out_file;
  double kappa = 10.0, conc = 1.0 / 3.0;
  int reps = 1, threads = 0;
  std::uint64_t seed = 1;
  bool timing = false;
};

void cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  ConvergenceConfig cfg;
  try {
    cfg.shape = {parse_shape(a.shape), a.kappa};
    cfg.dist = parse_distribution(a.dist);
  } catch (const QuestError& e) {
    throw UsageError(e.message());
  }
  if (!(a.kappa >= 1.0)) throw UsageError("--kappa must be at least 1");
  if (!(a.conc > 0.0) || !std::isfinite(a.conc)) throw UsageError("--conc must be positive");
  if (a.reps < 1) throw UsageError("--reps must be at least 1");
  cfg.concentration = a.conc;
  cfg.dims = parse_dims(a.dims);
  cfg.reps = a.reps;
  cfg.seed = a.seed;
  cfg.threads = a.threads;

  const ConvergenceRun run = run_convergence(cfg);
  std::string text = "shape,dist,p,n,rep,seed,nmse,seconds\n";
  for (const auto& r : run.records) {
    text += std::string(shape_name(r.shape)) + "," + distribution_name(r.dist) + "," + std::to_string(r.p) + "," +
            std::to_string(r.n) + "," + std::to_string(r.rep) + "," + std::to_string(r.seed) + "," + fmt17(r.nmse) +
            "," + fmt17(a.timing ? r.seconds : 0.0) + "\n";
  }
  text += "\n# summary\np,n,mean_nmse,reps_used\n";
  for (const auto& d : run.summary.dims) {
    text += std::to_string(d.p) + "," + std::to_string(d.n) + "," + fmt17(d.mean_nmse) + "," +
            std::to_string(d.reps_used) + "\n";
  }
  text += "# slope=" + fmt17(run.summary.slope) + "\n";
  emit(a.out_file, out, text);
}

struct CheckArgs {
  std::string tau_file;
  int n = 0;
  double h = 1e-6;
};

int cmd_check_jacobian(const CheckArgs& a, std::ostream& out) {
  if (!(a.h > 0.0)) throw UsageError("--h must be positive");
  const PopulationSpectrum spec(read_values(a.tau_file, "tau"), a.n);
  const QuestOutput q = quest::quest(spec);
  const FdJacobian fd = quest_fd_jacobian(spec, a.h);

  double worst = 0.0;
  int flagged = 0;
  for (Eigen::Index k = 0; k < q.jacobian.cols(); ++k) {
    const bool skip = fd.flagged[static_cast<std::size_t>(k)];
    const double d = skip ? 0.0 : (q.jacobian.col(k) - fd.jacobian.col(k)).cwiseAbs().maxCoeff();
    out << "column " << k + 1 << " max_abs=" << (skip ? std::string("n/a") : fmt17(d)) << (skip ? " flagged" : "")
        << "\n";
    if (skip) {
      ++flagged;
    } else if (!(d <= worst)) {
      worst = d;
    }
  }
  out << "max_abs_discrepancy=" << fmt17(worst) << " flagged_columns=" << flagged << "\n";
  const bool ok = worst <= kJacobianCheckTol;
  out << (ok ? "OK" : "MISMATCH") << "\n";
  return ok ? kExitOk : kExitCheckFailed;
}

}  // namespace

std::string_view output_schema() { return kSchema; }

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"QuEST function: evaluation, inversion and simulation"};
  app.name("quest");
  bool print_schema = false;
  app.add_flag("--print-schema", print_schema, "Print the JSON schema of eval/invert output and exit");

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Evaluate the QuEST function");
  eval->add_option("--tau", ea.tau_file, "File with one population eigenvalue per line")->required();
  eval->add_option("--n", ea.n, "Sample size")->required()->check(CLI::PositiveNumber);
  eval->add_option("--jacobian", ea.jacobian_file, "Write the p x p Jacobian as CSV");
  eval->add_option("--out", ea.out_file, "Output file (default stdout)");
  eval->add_option("--format", ea.format, "Output format")->check(CLI::IsMember({"json", "csv"}));

  InvertArgs ia;
  auto* inv = app.add_subcommand("invert", "Estimate population eigenvalues from sample eigenvalues");
  inv->add_option("--lambda", ia.lambda_file, "File with one sample eigenvalue per line")->required();
  inv->add_option("--n", ia.n, "Sample size")->required()->check(CLI::PositiveNumber);
  inv->add_option("--max-iter", ia.max_iter, "Iteration limit")->check(CLI::NonNegativeNumber);
  inv->add_option("--tol", ia.tol, "Gradient tolerance")->check(CLI::PositiveNumber);
  inv->add_option("--out", ia.out_file, "Output file (default stdout)");
  inv->add_option("--format", ia.format, "Output format")->check(CLI::IsMember({"json", "csv"}));

  SimulateArgs sa;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo convergence sweep");
  sim->add_option("--shape", sa.shape, "h1|h2|h3|h4")->required();
  sim->add_option("--kappa", sa.kappa, "Condition number")->required();
  sim->add_option("--conc", sa.conc, "Concentration ratio p/n")->required();
  sim->add_option("--dims", sa.dims, "Comma-separated dimensions")->required();
  sim->add_option("--reps", sa.reps, "Replications per dimension")->required();
  sim->add_option("--dist", sa.dist, "gaussian|student5|coin|exponential")->required();
  sim->add_option("--seed", sa.seed, "Master seed")->required();
  sim->add_option("--threads", sa.threads, "Worker threads (default: available parallelism)")
      ->check(CLI::NonNegativeNumber);
  sim->add_flag("--timing", sa.timing, "Fill the seconds column (output is then not reproducible)");
  sim->add_option("--out", sa.out_file, "Output file (default stdout)");

  CheckArgs ca;
  auto* chk = app.add_subcommand("check-jacobian", "Compare analytic and finite-difference Jacobians");
  // --h is the step size here, so help is reachable through --help only.
  chk->set_help_flag("--help", "Print this help message and exit");
  chk->add_option("--tau", ca.tau_file, "File with one population eigenvalue per line")->required();
  chk->add_option("--n", ca.n, "Sample size")->required()->check(CLI::PositiveNumber);
  chk->add_option("--h", ca.h, "Relative finite-difference step");

  app.require_subcommand(0, 1);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    if (print_schema) {
      out << kSchema;
      return kExitOk;
    }
    if (eval->parsed()) {
      cmd_eval(ea, out);
    } else if (inv->parsed()) {
      cmd_invert(ia, out);
    } else if (sim->parsed()) {
      cmd_simulate(sa, out);
    } else if (chk->parsed()) {
      return cmd_check_jacobian(ca, out);
    } else {
      err << "error: a subcommand is required\n" << app.help();
      return kExitUsage;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const QuestError& e) {
    err << "error: " << e.what() << "\n";
    return e.stage() == Stage::input ? kExitUsage : kExitNumerical;
  }
  return kExitOk;
}

}  // namespace quest::cli
