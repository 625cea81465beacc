// resbound: certified error bounds from residuals.
//
//   resbound bound  --problem P.json --method tight [--out B.csv] [--format csv|json]
//   resbound verify [--case ODE-A] [--seed N] [--perturbation-scale A]
//   resbound export [--case ODE-A] --out DIR
//
// Exit codes: 0 ok, 1 verification failure, 2 bad input, 3 method does not
// fit the problem kind, 4 a mathematical precondition failed.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "resbound/resbound.hpp"

namespace {

using resbound::Error;
using resbound::ErrorKind;
using resbound::Json;
using resbound::ProblemFile;
using resbound::ProblemKind;

constexpr int kExitVerifyFailed = 1;
constexpr int kExitSchema = 2;
constexpr int kExitMismatch = 3;
constexpr int kExitPrecondition = 4;

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::MethodMismatch:
      return kExitMismatch;
    case ErrorKind::SchemaError:
    case ErrorKind::SyntaxError:
    case ErrorKind::UnknownIdentifier:
    case ErrorKind::UnboundVariable:
    case ErrorKind::InvalidDomain:
    case ErrorKind::OutOfDomain:
    case ErrorKind::DegreeTooLarge:
      return kExitSchema;
    default:
      return kExitPrecondition;
  }
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct BoundOptions {
  std::string problem;
  std::string method;
  std::string out;
  std::string format;
  std::size_t grid_k = 0;
  bool plot_data = false;
};

// CSV rows or a JSON document, written to --out or stdout.
class Output {
 public:
  explicit Output(const BoundOptions& o) : path_(o.out) {}

  std::ostream& stream() { return buf_; }

  void flush() {
    if (path_.empty()) {
      std::cout << buf_.str();
      std::cout.flush();
      return;
    }
    std::ofstream f(path_, std::ios::binary);
    if (!f) throw Error(ErrorKind::SchemaError, "cannot write '" + path_ + "'");
    f << buf_.str();
  }

 private:
  std::string path_;
  std::ostringstream buf_;
};

void warn(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

void require_method(const ProblemFile& p, const std::string& method, std::initializer_list<const char*> allowed) {
  for (const char* m : allowed) {
    if (method == m) return;
  }
  std::string list;
  for (const char* m : allowed) list += (list.empty() ? "" : ", ") + std::string(m);
  throw Error(ErrorKind::MethodMismatch, "method '" + method + "' does not apply to kind '" +
                                             resbound::kind_name(p.kind) + "' (use " + list + ")");
}

// u - v at t for plot data, when the file carries both.
std::optional<std::vector<resbound::Expression>> surrogate_and_exact(const ProblemFile& p,
                                                                     std::vector<resbound::Expression>& exact) {
  exact = p.exact.empty() ? p.residual.exact : p.exact;
  if (p.residual.surrogate.empty() || exact.empty()) return std::nullopt;
  return p.residual.surrogate;
}

void bound_ode(const ProblemFile& p, const BoundOptions& o, Output& out, bool json) {
  const resbound::LinearODEProblem problem = resbound::build_ode(p);
  resbound::BoundSeries series;
  Json extra = Json::object();
  if (p.a0) {
    if (o.method == "loose") throw Error(ErrorKind::MethodMismatch, "the loose bound needs constant coefficients");
    series = resbound::first_order_variable_bound(problem);
  } else if (o.method == "loose") {
    const auto rep = resbound::loose_bound(problem);
    series = rep.series;
    extra = {{"Z", rep.zero_roots}, {"C", rep.coefficient}, {"R_max", rep.r_max}};
  } else {
    series = resbound::tight_bound(problem);
  }
  warn(series.warnings);

  std::vector<double> abs_error;
  if (o.plot_data) {
    std::vector<resbound::Expression> exact;
    if (const auto u = surrogate_and_exact(p, exact)) {
      for (double t : series.t) {
        const auto at = resbound::Bindings::at_t(t);
        abs_error.push_back(std::abs(u->front().eval(at) - exact.front().eval(at)));
      }
    } else {
      warn({"--emit-plot-data needs a surrogate residual and an exact solution; no abs_error column"});
    }
  }

  if (json) {
    Json j = {{"method", o.method}, {"t", series.t}, {"B", series.bound}};
    for (const auto& [k, v] : extra.items()) j[k] = v;
    if (!abs_error.empty()) j["abs_error"] = abs_error;
    if (!series.warnings.empty()) j["warnings"] = series.warnings;
    out.stream() << j.dump(2) << "\n";
    return;
  }
  out.stream() << "t,B" << (abs_error.empty() ? "" : ",abs_error") << "\n";
  for (std::size_t k = 0; k < series.t.size(); ++k) {
    out.stream() << num(series.t[k]) << "," << num(series.bound[k]);
    if (!abs_error.empty()) out.stream() << "," << num(abs_error[k]);
    out.stream() << "\n";
  }
}

void bound_system(const ProblemFile& p, const BoundOptions& o, Output& out, bool json) {
  const resbound::SystemProblem problem = resbound::build_system(p);
  const std::size_t n = problem.jordan.dimension();
  const bool componentwise = o.method == "componentwise";
  const resbound::VectorBoundSeries series =
      componentwise ? resbound::componentwise_bound(problem) : resbound::norm_bound(problem);
  std::vector<double> norm = series.norm;
  if (componentwise) {
    // Euclidean norm of the componentwise bound is itself a norm bound.
    for (const auto& row : series.componentwise) {
      double sq = 0.0;
      for (double b : row) sq += b * b;
      norm.push_back(std::sqrt(sq));
    }
  }

  std::vector<std::vector<double>> abs_error;
  if (o.plot_data) {
    std::vector<resbound::Expression> exact;
    if (const auto u = surrogate_and_exact(p, exact)) {
      for (double t : series.t) {
        const auto at = resbound::Bindings::at_t(t);
        std::vector<double> row;
        double sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          row.push_back(std::abs((*u)[i].eval(at) - exact[i].eval(at)));
          sq += row.back() * row.back();
        }
        row.push_back(std::sqrt(sq));
        abs_error.push_back(std::move(row));
      }
    } else {
      warn({"--emit-plot-data needs a surrogate residual and an exact solution; no abs_error columns"});
    }
  }

  if (json) {
    Json j = {{"method", o.method}, {"t", series.t}};
    if (componentwise) j["B"] = series.componentwise;
    j["B_norm"] = norm;
    if (!abs_error.empty()) j["abs_error"] = abs_error;
    out.stream() << j.dump(2) << "\n";
    return;
  }
  out.stream() << "t";
  if (componentwise) {
    for (std::size_t i = 1; i <= n; ++i) out.stream() << ",B_" << i;
  }
  out.stream() << ",B_norm";
  if (!abs_error.empty()) {
    for (std::size_t i = 1; i <= n; ++i) out.stream() << ",abs_error_" << i;
    out.stream() << ",abs_error_norm";
  }
  out.stream() << "\n";
  for (std::size_t k = 0; k < series.t.size(); ++k) {
    out.stream() << num(series.t[k]);
    if (componentwise) {
      for (double b : series.componentwise[k]) out.stream() << "," << num(b);
    }
    out.stream() << "," << num(norm[k]);
    if (!abs_error.empty()) {
      for (double e : abs_error[k]) out.stream() << "," << num(e);
    }
    out.stream() << "\n";
  }
}

void bound_nonlinear(const ProblemFile& p, const BoundOptions& o, Output& out, bool json) {
  const resbound::PerturbationProblem problem = resbound::build_nonlinear(p);
  const auto method = o.method == "loose" ? resbound::BoundMethod::Loose : resbound::BoundMethod::Tight;
  const resbound::PerturbationBounds b = resbound::component_bounds(problem, method);
  const std::vector<double> times = p.query.empty() ? b.grid.nodes() : p.query;
  std::vector<resbound::EpsPoint> q;
  for (double eps : p.eps) {
    if (std::abs(eps) > p.eps_radius) {
      warn({"eps = " + num(eps) + " lies outside the declared validity radius " + num(p.eps_radius)});
    }
    for (double t : times) q.push_back({t, eps});
  }
  const auto rec = resbound::reconstruct(problem, b, q);
  std::cerr << "note: B covers the series truncated at order " << problem.order()
            << "; the tail column estimates the omitted terms (validity radius " << num(p.eps_radius) << ")\n";

  if (json) {
    Json j = {{"method", o.method}, {"order", problem.order()}, {"eps_radius", p.eps_radius},
              {"conditional_on_truncation", true}, {"t", Json::array()}, {"eps", Json::array()}, {"u", Json::array()},
              {"B", Json::array()}, {"tail", Json::array()}};
    for (const auto& r : rec) {
      j["t"].push_back(r.t);
      j["eps"].push_back(r.eps);
      j["u"].push_back(r.u);
      j["B"].push_back(r.bound);
      j["tail"].push_back(resbound::tail_estimate(b, r.eps));
    }
    out.stream() << j.dump(2) << "\n";
    return;
  }
  out.stream() << "t,eps,u,B,tail\n";
  for (const auto& r : rec) {
    out.stream() << num(r.t) << "," << num(r.eps) << "," << num(r.u) << "," << num(r.bound) << ","
                 << num(resbound::tail_estimate(b, r.eps)) << "\n";
  }
}

void bound_pde(const ProblemFile& p, const BoundOptions& o, Output& out, const std::string& format) {
  const resbound::PDEProblem problem = resbound::build_pde(p);
  if (o.method == "const") {
    const auto rep = resbound::constant_bound(problem, p.nx, p.ny);
    // a single number reads best as JSON unless CSV is asked for
    if (format != "csv") {
      Json j = {{"B", rep.bound}, {"x_at_max", rep.x_at_max}, {"y_at_max", rep.y_at_max}, {"min_abs_c", rep.min_abs_c}};
      out.stream() << j.dump(2) << "\n";
    } else {
      out.stream() << "B\n" << num(rep.bound) << "\n";
    }
    return;
  }

  std::vector<std::array<double, 2>> points = p.points;
  if (points.empty()) {
    const auto& d = p.rect;
    // cell centres of an 8x8 partition: avoids edges and the centre point
    for (int j = 0; j < 8; ++j) {
      for (int i = 0; i < 8; ++i) {
        points.push_back({d.x_min + (d.x_max - d.x_min) * (i + 0.5) / 8.0, d.y_min + (d.y_max - d.y_min) * (j + 0.5) / 8.0});
      }
    }
  }
  const std::vector<double> bounds = resbound::characteristic_bounds(problem, points, p.step);

  std::vector<double> abs_error;
  if (o.plot_data) {
    if (!p.residual.surrogate.empty() && !p.exact.empty()) {
      for (const auto& q : points) {
        const auto at = resbound::Bindings::at_xy(q[0], q[1]);
        abs_error.push_back(std::abs(p.residual.surrogate.front().eval(at) - p.exact.front().eval(at)));
      }
    } else {
      warn({"--emit-plot-data needs a surrogate residual and an exact solution; no abs_error column"});
    }
  }

  if (format == "json") {
    Json j = {{"method", o.method}, {"x", Json::array()}, {"y", Json::array()}, {"B", bounds}};
    for (const auto& q : points) {
      j["x"].push_back(q[0]);
      j["y"].push_back(q[1]);
    }
    if (!abs_error.empty()) j["abs_error"] = abs_error;
    out.stream() << j.dump(2) << "\n";
    return;
  }
  out.stream() << "x,y,B" << (abs_error.empty() ? "" : ",abs_error") << "\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    out.stream() << num(points[i][0]) << "," << num(points[i][1]) << "," << num(bounds[i]);
    if (!abs_error.empty()) out.stream() << "," << num(abs_error[i]);
    out.stream() << "\n";
  }
}

int cmd_bound(const BoundOptions& o) {
  ProblemFile p = resbound::load_problem(o.problem);
  if (o.grid_k > 0) p.intervals = o.grid_k;
  Output out(o);
  switch (p.kind) {
    case ProblemKind::Ode:
      require_method(p, o.method, {"loose", "tight"});
      bound_ode(p, o, out, o.format == "json");
      break;
    case ProblemKind::OdeSystem:
      require_method(p, o.method, {"componentwise", "norm"});
      bound_system(p, o, out, o.format == "json");
      break;
    case ProblemKind::NonlinearOde:
      require_method(p, o.method, {"loose", "tight"});
      bound_nonlinear(p, o, out, o.format == "json");
      break;
    case ProblemKind::Pde:
      require_method(p, o.method, {"const", "characteristic"});
      bound_pde(p, o, out, o.format);
      break;
  }
  out.flush();
  return 0;
}

struct VerifyCliOptions {
  std::string case_id;
  std::uint64_t seed = resbound::oracle::kDefaultSeed;
  double scale = resbound::oracle::kDefaultPerturbation;
  std::size_t grid_k = 0;
  std::string out;
};

std::string fmt_sci(double v) {
  if (std::isnan(v)) return "-";
  if (std::isinf(v)) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

int cmd_verify(const VerifyCliOptions& o) {
  namespace orc = resbound::oracle;
  orc::VerifyOptions opt;
  opt.seed = o.seed;
  opt.scale = o.scale;
  if (o.grid_k > 0) opt.intervals = o.grid_k;

  std::ostringstream report;
  bool ok = true;
  const auto start = std::chrono::steady_clock::now();

  std::vector<std::string> ids = orc::case_ids();
  if (!o.case_id.empty()) ids = {o.case_id};
  char line[256];
  std::snprintf(line, sizeof line, "%-11s %-22s %-11s %-11s %-8s %s\n", "case", "method", "max|eta|", "min slack",
                "time[s]", "result");
  report << line;
  for (const auto& id : ids) {
    const auto mc = orc::make_case(id, o.seed, o.scale);
    for (const auto& row : orc::verify_case(mc, opt)) {
      ok = ok && row.pass;
      std::snprintf(line, sizeof line, "%-11s %-22s %-11s %-11s %-8.2f %s", row.case_id.c_str(), row.method.c_str(),
                    fmt_sci(row.max_error).c_str(), fmt_sci(row.min_slack).c_str(), row.seconds,
                    row.pass ? "PASS" : "FAIL");
      report << line << (row.note.empty() ? "" : "  (" + row.note + ")") << "\n";
    }
  }

  if (o.case_id.empty()) {
    report << "\n";
    for (const auto& c : orc::run_criteria(opt)) {
      ok = ok && c.pass;
      std::snprintf(line, sizeof line, "criterion %2d %s  %6.2fs / %5.0fs  ", c.id, c.pass ? "PASS" : "FAIL", c.seconds,
                    c.limit_seconds);
      report << line << c.name << ": " << c.detail << "\n";
    }
  }
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::snprintf(line, sizeof line, "\n%s in %.2f s\n", ok ? "ALL PASS" : "FAILURES", total);
  report << line;

  std::cout << report.str();
  if (!o.out.empty()) {
    std::ofstream f(o.out);
    if (!f) throw Error(ErrorKind::SchemaError, "cannot write '" + o.out + "'");
    f << report.str();
  }
  return ok ? 0 : kExitVerifyFailed;
}

int cmd_export(const VerifyCliOptions& o) {
  namespace orc = resbound::oracle;
  std::vector<std::string> ids = orc::case_ids();
  if (!o.case_id.empty()) ids = {o.case_id};
  const std::filesystem::path dir = o.out.empty() ? std::filesystem::path(".") : std::filesystem::path(o.out);
  std::filesystem::create_directories(dir);
  for (const auto& id : ids) {
    const Json j = resbound::to_json(resbound::export_case(orc::make_case(id, o.seed, o.scale)));
    std::string name = id;
    for (auto& ch : name) ch = static_cast<char>(ch == '-' ? '_' : std::tolower(static_cast<unsigned char>(ch)));
    const auto path = dir / (name + ".json");
    std::ofstream f(path);
    if (!f) throw Error(ErrorKind::SchemaError, "cannot write '" + path.string() + "'");
    f << j.dump(2) << "\n";
    std::cout << path.string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certified a-posteriori error bounds from residuals"};
  app.require_subcommand(1);

  BoundOptions bound;
  auto* b = app.add_subcommand("bound", "Bound the error of an approximate solution");
  b->add_option("--problem", bound.problem, "Problem JSON file")->required()->check(CLI::ExistingFile);
  b->add_option("--method", bound.method, "loose | tight | componentwise | norm | const | characteristic")
      ->required()
      ->check(CLI::IsMember({"loose", "tight", "componentwise", "norm", "const", "characteristic"}));
  b->add_option("--out", bound.out, "Output file (default: standard output)");
  b->add_option("--format", bound.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  b->add_option("--grid-k", bound.grid_k, "Grid intervals, overriding domain.K")->check(CLI::PositiveNumber);
  b->add_flag("--emit-plot-data", bound.plot_data, "Add abs_error columns when the file has an exact solution");
  std::uint64_t unused_seed = 0;
  double unused_scale = 0.0;
  b->add_option("--seed", unused_seed, "Accepted for symmetry with verify; bound is deterministic");
  b->add_option("--perturbation-scale", unused_scale, "Accepted for symmetry with verify");

  VerifyCliOptions verify;
  auto* v = app.add_subcommand("verify", "Run the manufactured-solution verification suite");
  v->add_option("--case", verify.case_id, "Run a single case")->check(CLI::IsMember(resbound::oracle::case_ids()));
  v->add_option("--seed", verify.seed, "Seed for the random orthogonal matrices and draws");
  v->add_option("--perturbation-scale", verify.scale, "Amplitude of the surrogate perturbations");
  v->add_option("--grid-k", verify.grid_k, "Grid intervals")->check(CLI::PositiveNumber);
  v->add_option("--out", verify.out, "Also write the report to this file");

  VerifyCliOptions exp;
  auto* e = app.add_subcommand("export", "Write catalog cases as problem JSON files");
  e->add_option("--case", exp.case_id, "Export a single case")->check(CLI::IsMember(resbound::oracle::case_ids()));
  e->add_option("--seed", exp.seed, "Seed for the random orthogonal matrix");
  e->add_option("--perturbation-scale", exp.scale, "Amplitude of the surrogate perturbations");
  e->add_option("--out", exp.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : kExitSchema;
  }

  try {
    if (*b) return cmd_bound(bound);
    if (*v) return cmd_verify(verify);
    return cmd_export(exp);
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return exit_code(err.kind());
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitSchema;
  }
}
