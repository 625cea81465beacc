#pragma once

// JSON problem files. One document describes one problem:
//
//   kind: "ode" | "ode_system" | "nonlinear_ode" | "pde"
//
// plus kind-specific fields, a `domain`, a `residual` and an optional
// `query`. See README.md for the full schema.

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "resbound/error.hpp"
#include "resbound/expr.hpp"
#include "resbound/nonlinear_bounds.hpp"
#include "resbound/ode_bounds.hpp"
#include "resbound/oracle/catalog.hpp"
#include "resbound/pde_bounds.hpp"
#include "resbound/residual.hpp"
#include "resbound/system_bounds.hpp"

namespace resbound {

using Json = nlohmann::ordered_json;

enum class ProblemKind { Ode, OdeSystem, NonlinearOde, Pde };

inline const char* kind_name(ProblemKind k) {
  switch (k) {
    case ProblemKind::Ode: return "ode";
    case ProblemKind::OdeSystem: return "ode_system";
    case ProblemKind::NonlinearOde: return "nonlinear_ode";
    case ProblemKind::Pde: return "pde";
  }
  return "?";
}

/// Exactly one of: direct residual expressions, a CSV file, or a surrogate
/// solution together with the forcing (or an exact solution the forcing is
/// derived from). PDE surrogates use the problem's own f.
struct ResidualSource {
  std::vector<Expression> expressions;
  std::string csv;
  std::vector<Expression> surrogate;
  std::vector<Expression> forcing;
  std::vector<Expression> exact;
};

struct ProblemFile {
  ProblemKind kind = ProblemKind::Ode;

  // ode, nonlinear_ode
  std::vector<double> coefficients;
  std::optional<Expression> a0;
  double t_end = 1.0;
  std::size_t intervals = kDefaultGridIntervals;
  std::vector<double> query;

  // ode_system
  std::optional<Eigen::MatrixXd> matrix;
  std::optional<JordanSpec> jordan;

  // nonlinear_ode
  int degree = 2;
  Expression forcing;
  std::vector<Expression> components;
  std::vector<Expression> component_residuals;
  double eps_radius = 1.0;
  std::vector<double> eps;

  // pde
  Expression a, b, c, f;
  Rectangle rect;
  std::vector<BoundarySegment> gamma;
  std::size_t nx = kDefaultMesh;
  std::size_t ny = kDefaultMesh;
  double step = 0.0;
  std::vector<std::array<double, 2>> points;

  ResidualSource residual;
  std::vector<Expression> exact;  // optional closed-form solution, enables error columns
  std::filesystem::path base_dir;  // CSV paths are relative to the problem file
};

namespace io {

[[noreturn]] inline void schema(const std::string& what) { throw Error(ErrorKind::SchemaError, what); }

inline void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) schema(where + " must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.contains(key)) schema("unknown field '" + key + "' in " + where);
  }
}

inline const Json& require(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) schema(where + " needs field '" + key + "'");
  return j.at(key);
}

inline double number(const Json& j, const std::string& where) {
  if (!j.is_number()) schema(where + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) schema(where + " must be finite");
  return v;
}

inline std::size_t count(const Json& j, const std::string& where) {
  if (!j.is_number_integer() || j.get<long long>() < 1) schema(where + " must be a positive integer");
  return j.get<std::size_t>();
}

inline std::vector<double> numbers(const Json& j, const std::string& where) {
  if (!j.is_array()) schema(where + " must be an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

inline Expression expression(const Json& j, const std::string& where, std::initializer_list<Var> vars) {
  if (j.is_number()) return Expression::constant(number(j, where));
  if (!j.is_string()) schema(where + " must be an expression string");
  Expression e = Expression::parse(j.get<std::string>());
  for (Var v : {Var::t, Var::x, Var::y, Var::s}) {
    if (e.uses(v) && std::find(vars.begin(), vars.end(), v) == vars.end()) {
      schema(where + " uses variable '" + std::string(1, var_name(v)) + "', which this problem does not bind");
    }
  }
  return e;
}

inline std::vector<Expression> expressions(const Json& j, const std::string& where, std::initializer_list<Var> vars) {
  if (!j.is_array()) return {expression(j, where, vars)};
  std::vector<Expression> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(expression(j[i], where + "[" + std::to_string(i) + "]", vars));
  return out;
}

inline std::complex<double> complex_number(const Json& j, const std::string& where) {
  if (j.is_number()) return {number(j, where), 0.0};
  if (j.is_array() && j.size() == 2) return {number(j[0], where + ".re"), number(j[1], where + ".im")};
  schema(where + " must be a number or a [re, im] pair");
}

inline Eigen::MatrixXcd complex_matrix(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) schema(where + " must be a non-empty array of rows");
  const auto n = static_cast<Eigen::Index>(j.size());
  const auto m = static_cast<Eigen::Index>(j[0].is_array() ? j[0].size() : 0);
  Eigen::MatrixXcd out(n, m);
  for (Eigen::Index r = 0; r < n; ++r) {
    const Json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != m) schema(where + " rows must have equal length");
    for (Eigen::Index c = 0; c < m; ++c) {
      out(r, c) = complex_number(row[static_cast<std::size_t>(c)], where + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
    }
  }
  return out;
}

/// A list of values, or {"linspace": [start, stop, count]}.
inline std::vector<double> axis(const Json& j, const std::string& where) {
  if (j.is_object()) {
    check_keys(j, {"linspace"}, where);
    const std::vector<double> l = numbers(require(j, "linspace", where), where + ".linspace");
    if (l.size() != 3 || l[2] < 1 || l[2] != std::floor(l[2])) schema(where + ".linspace must be [start, stop, count]");
    const auto n = static_cast<std::size_t>(l[2]);
    std::vector<double> out;
    for (std::size_t i = 0; i < n; ++i) {
      out.push_back(n == 1 ? l[0] : (i + 1 == n ? l[1] : l[0] + (l[1] - l[0]) * static_cast<double>(i) / static_cast<double>(n - 1)));
    }
    return out;
  }
  return numbers(j, where);
}

inline ResidualSource residual(const Json& j, ProblemKind kind, std::initializer_list<Var> vars) {
  const std::string where = "residual";
  check_keys(j, {"expression", "csv", "surrogate", "forcing", "exact"}, where);
  ResidualSource r;
  int forms = 0;
  if (j.contains("expression")) {
    r.expressions = expressions(j.at("expression"), where + ".expression", vars);
    ++forms;
  }
  if (j.contains("csv")) {
    if (!j.at("csv").is_string()) schema("residual.csv must be a path");
    r.csv = j.at("csv").get<std::string>();
    ++forms;
  }
  if (j.contains("surrogate")) {
    r.surrogate = expressions(j.at("surrogate"), where + ".surrogate", vars);
    if (j.contains("forcing")) r.forcing = expressions(j.at("forcing"), where + ".forcing", vars);
    if (j.contains("exact")) r.exact = expressions(j.at("exact"), where + ".exact", vars);
    if (kind == ProblemKind::Pde) {
      if (!r.forcing.empty() || !r.exact.empty()) schema("pde residual surrogates use the problem's f");
    } else if (r.forcing.empty() == r.exact.empty()) {
      schema("residual.surrogate needs exactly one of 'forcing' or 'exact'");
    }
    ++forms;
  } else if (j.contains("forcing") || j.contains("exact")) {
    schema("residual.forcing / residual.exact need residual.surrogate");
  }
  if (forms != 1) schema("residual needs exactly one of 'expression', 'csv' or 'surrogate'");
  return r;
}

inline void domain_t(const Json& j, ProblemFile& p) {
  check_keys(j, {"T", "K"}, "domain");
  p.t_end = number(require(j, "T", "domain"), "domain.T");
  if (j.contains("K")) p.intervals = count(j.at("K"), "domain.K");
  if (!(p.t_end > 0.0)) throw Error(ErrorKind::InvalidDomain, "domain.T must be positive");
}

inline void domain_xy(const Json& j, ProblemFile& p) {
  check_keys(j, {"x", "y", "mesh"}, "domain");
  const auto x = numbers(require(j, "x", "domain"), "domain.x");
  const auto y = numbers(require(j, "y", "domain"), "domain.y");
  if (x.size() != 2 || y.size() != 2) schema("domain.x and domain.y must be [min, max]");
  p.rect = Rectangle{x[0], x[1], y[0], y[1]};
  if (p.rect.degenerate()) throw Error(ErrorKind::InvalidDomain, "domain rectangle is degenerate");
  if (j.contains("mesh")) {
    const Json& m = j.at("mesh");
    if (!m.is_array() || m.size() != 2) schema("domain.mesh must be [nx, ny]");
    p.nx = count(m[0], "domain.mesh[0]");
    p.ny = count(m[1], "domain.mesh[1]");
  }
}

}  // namespace io

inline ProblemFile parse_problem(const Json& j, const std::filesystem::path& base_dir = {}) {
  using namespace io;
  if (!j.is_object()) schema("problem file must be a JSON object");
  const Json& kind = require(j, "kind", "problem");
  if (!kind.is_string()) schema("kind must be a string");
  ProblemFile p;
  p.base_dir = base_dir;
  const std::string k = kind.get<std::string>();
  const std::set<std::string> common = {"kind", "domain", "residual", "query", "exact", "description"};
  auto with = [&](std::initializer_list<const char*> extra) {
    std::set<std::string> s = common;
    s.insert(extra.begin(), extra.end());
    return s;
  };

  if (k == "ode") {
    p.kind = ProblemKind::Ode;
    check_keys(j, with({"coefficients", "a0"}), "ode problem");
    if (j.contains("coefficients") == j.contains("a0")) schema("ode needs exactly one of 'coefficients' or 'a0'");
    if (j.contains("coefficients")) {
      p.coefficients = numbers(j.at("coefficients"), "coefficients");
      if (p.coefficients.empty()) schema("coefficients must not be empty");
    } else {
      p.a0 = expression(j.at("a0"), "a0", {Var::t});
    }
    domain_t(require(j, "domain", "problem"), p);
    p.residual = residual(require(j, "residual", "problem"), p.kind, {Var::t});
    if (j.contains("exact")) p.exact = expressions(j.at("exact"), "exact", {Var::t});
    if (j.contains("query")) p.query = axis(j.at("query"), "query");
    const std::size_t dim = 1;
    if (!p.residual.expressions.empty() && p.residual.expressions.size() != dim) schema("ode residual must be scalar");
    if (!p.residual.surrogate.empty() && p.residual.surrogate.size() != dim) schema("ode surrogate must be scalar");
    if (!p.exact.empty() && p.exact.size() != dim) schema("ode exact solution must be scalar");
  } else if (k == "ode_system") {
    p.kind = ProblemKind::OdeSystem;
    check_keys(j, with({"matrix", "jordan"}), "ode_system problem");
    if (!j.contains("matrix") && !j.contains("jordan")) schema("ode_system needs 'matrix' or 'jordan'");
    if (j.contains("matrix")) {
      const Eigen::MatrixXcd m = complex_matrix(j.at("matrix"), "matrix");
      if (m.imag().cwiseAbs().maxCoeff() != 0.0) schema("matrix must be real");
      if (m.rows() != m.cols()) schema("matrix must be square");
      p.matrix = m.real();
    }
    if (j.contains("jordan")) {
      const Json& jj = j.at("jordan");
      check_keys(jj, {"P", "blocks"}, "jordan");
      JordanSpec spec;
      spec.P = complex_matrix(require(jj, "P", "jordan"), "jordan.P");
      const Json& blocks = require(jj, "blocks", "jordan");
      if (!blocks.is_array() || blocks.empty()) schema("jordan.blocks must be a non-empty array");
      for (std::size_t i = 0; i < blocks.size(); ++i) {
        const std::string w = "jordan.blocks[" + std::to_string(i) + "]";
        check_keys(blocks[i], {"lambda", "size"}, w);
        spec.blocks.push_back({complex_number(require(blocks[i], "lambda", w), w + ".lambda"),
                               count(require(blocks[i], "size", w), w + ".size")});
      }
      validate(spec);
      p.jordan = std::move(spec);
    }
    domain_t(require(j, "domain", "problem"), p);
    p.residual = residual(require(j, "residual", "problem"), p.kind, {Var::t});
    if (j.contains("exact")) p.exact = expressions(j.at("exact"), "exact", {Var::t});
    if (j.contains("query")) p.query = axis(j.at("query"), "query");
    const std::size_t n = p.jordan ? p.jordan->dimension() : static_cast<std::size_t>(p.matrix->rows());
    if (p.matrix && static_cast<std::size_t>(p.matrix->rows()) != n) schema("matrix and jordan dimensions differ");
    for (const auto* v : {&p.residual.expressions, &p.residual.surrogate, &p.residual.forcing, &p.residual.exact, &p.exact}) {
      if (!v->empty() && v->size() != n) schema("expected " + std::to_string(n) + " components");
    }
  } else if (k == "nonlinear_ode") {
    p.kind = ProblemKind::NonlinearOde;
    check_keys(j, {"kind", "description", "coefficients", "degree", "forcing", "components", "residuals", "eps_radius",
                   "domain", "query", "eps"},
               "nonlinear_ode problem");
    p.coefficients = numbers(require(j, "coefficients", "problem"), "coefficients");
    if (p.coefficients.empty()) schema("coefficients must not be empty");
    const Json& deg = require(j, "degree", "problem");
    if (!deg.is_number_integer() || deg.get<int>() < 2) schema("degree must be an integer >= 2");
    p.degree = deg.get<int>();
    if (j.contains("forcing")) p.forcing = expression(j.at("forcing"), "forcing", {Var::t});
    p.components = expressions(require(j, "components", "problem"), "components", {Var::t});
    if (j.contains("residuals")) {
      p.component_residuals = expressions(j.at("residuals"), "residuals", {Var::t});
      if (p.component_residuals.size() != p.components.size()) schema("need one residual per component");
    }
    if (j.contains("eps_radius")) p.eps_radius = number(j.at("eps_radius"), "eps_radius");
    domain_t(require(j, "domain", "problem"), p);
    if (j.contains("query")) p.query = axis(j.at("query"), "query");
    p.eps = j.contains("eps") ? axis(j.at("eps"), "eps") : std::vector<double>{0.0};
  } else if (k == "pde") {
    p.kind = ProblemKind::Pde;
    check_keys(j, with({"a", "b", "c", "f", "gamma", "step"}), "pde problem");
    p.a = expression(require(j, "a", "problem"), "a", {Var::x, Var::y});
    p.b = expression(require(j, "b", "problem"), "b", {Var::x, Var::y});
    p.c = expression(require(j, "c", "problem"), "c", {Var::x, Var::y});
    p.f = j.contains("f") ? expression(j.at("f"), "f", {Var::x, Var::y}) : Expression::constant(0.0);
    domain_xy(require(j, "domain", "problem"), p);
    const Json& g = require(j, "gamma", "problem");
    if (!g.is_array() || g.empty()) schema("gamma must be a non-empty array of edges");
    for (std::size_t i = 0; i < g.size(); ++i) {
      const std::string w = "gamma[" + std::to_string(i) + "]";
      check_keys(g[i], {"edge", "from", "to"}, w);
      const Json& e = require(g[i], "edge", w);
      const auto edge = e.is_string() ? parse_edge(e.get<std::string>()) : std::nullopt;
      if (!edge) schema(w + ".edge must be left, right, bottom or top");
      BoundarySegment seg{*edge};
      const bool vertical = *edge == Edge::Left || *edge == Edge::Right;
      seg.lo = g[i].contains("from") ? number(g[i].at("from"), w + ".from") : (vertical ? p.rect.y_min : p.rect.x_min);
      seg.hi = g[i].contains("to") ? number(g[i].at("to"), w + ".to") : (vertical ? p.rect.y_max : p.rect.x_max);
      if (!(seg.lo <= seg.hi)) schema(w + " needs from <= to");
      p.gamma.push_back(seg);
    }
    if (j.contains("step")) p.step = number(j.at("step"), "step");
    p.residual = residual(require(j, "residual", "problem"), p.kind, {Var::x, Var::y});
    if (j.contains("exact")) p.exact = expressions(j.at("exact"), "exact", {Var::x, Var::y});
    if (p.residual.expressions.size() > 1 || p.residual.surrogate.size() > 1 || p.exact.size() > 1) {
      schema("pde expressions must be scalar");
    }
    if (j.contains("query")) {
      const Json& q = j.at("query");
      if (q.is_object()) {
        check_keys(q, {"x", "y"}, "query");
        for (double y : axis(require(q, "y", "query"), "query.y")) {
          for (double x : axis(require(q, "x", "query"), "query.x")) p.points.push_back({x, y});
        }
      } else {
        if (!q.is_array()) schema("query must be a list of [x, y] points or {x: axis, y: axis}");
        for (std::size_t i = 0; i < q.size(); ++i) {
          const auto pt = numbers(q[i], "query[" + std::to_string(i) + "]");
          if (pt.size() != 2) schema("query points must be [x, y]");
          p.points.push_back({pt[0], pt[1]});
        }
      }
    }
  } else {
    schema("unknown kind '" + k + "'");
  }
  return p;
}

inline ProblemFile load_problem(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::SchemaError, "cannot open problem file '" + path.string() + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::SchemaError, "invalid JSON in '" + path.string() + "': " + e.what());
  }
  return parse_problem(j, path.parent_path());
}

// ------------------------------------------------------------------- export

namespace io {

inline Json expr_json(const std::vector<Expression>& v) {
  if (v.size() == 1) return v.front().to_string();
  Json out = Json::array();
  for (const auto& e : v) out.push_back(e.to_string());
  return out;
}

inline Json complex_json(std::complex<double> z) {
  if (z.imag() == 0.0) return z.real();
  return Json::array({z.real(), z.imag()});
}

inline Json axis_json(const std::vector<double>& v) { return Json(v); }

}  // namespace io

inline Json to_json(const ProblemFile& p) {
  Json j;
  j["kind"] = kind_name(p.kind);
  auto put_residual = [&] {
    Json r = Json::object();
    const ResidualSource& s = p.residual;
    if (!s.expressions.empty()) r["expression"] = io::expr_json(s.expressions);
    if (!s.csv.empty()) r["csv"] = s.csv;
    if (!s.surrogate.empty()) {
      r["surrogate"] = io::expr_json(s.surrogate);
      if (!s.forcing.empty()) r["forcing"] = io::expr_json(s.forcing);
      if (!s.exact.empty()) r["exact"] = io::expr_json(s.exact);
    }
    j["residual"] = r;
  };
  switch (p.kind) {
    case ProblemKind::Ode:
      if (p.a0) {
        j["a0"] = p.a0->to_string();
      } else {
        j["coefficients"] = p.coefficients;
      }
      j["domain"] = {{"T", p.t_end}, {"K", p.intervals}};
      put_residual();
      break;
    case ProblemKind::OdeSystem: {
      if (p.matrix) {
        Json rows = Json::array();
        for (Eigen::Index r = 0; r < p.matrix->rows(); ++r) {
          Json row = Json::array();
          for (Eigen::Index c = 0; c < p.matrix->cols(); ++c) row.push_back((*p.matrix)(r, c));
          rows.push_back(row);
        }
        j["matrix"] = rows;
      }
      if (p.jordan) {
        Json rows = Json::array();
        for (Eigen::Index r = 0; r < p.jordan->P.rows(); ++r) {
          Json row = Json::array();
          for (Eigen::Index c = 0; c < p.jordan->P.cols(); ++c) row.push_back(io::complex_json(p.jordan->P(r, c)));
          rows.push_back(row);
        }
        Json blocks = Json::array();
        for (const auto& b : p.jordan->blocks) blocks.push_back({{"lambda", io::complex_json(b.lambda)}, {"size", b.size}});
        j["jordan"] = {{"P", rows}, {"blocks", blocks}};
      }
      j["domain"] = {{"T", p.t_end}, {"K", p.intervals}};
      put_residual();
      break;
    }
    case ProblemKind::NonlinearOde: {
      j["coefficients"] = p.coefficients;
      j["degree"] = p.degree;
      j["forcing"] = p.forcing.to_string();
      Json comps = Json::array();
      for (const auto& c : p.components) comps.push_back(c.to_string());
      j["components"] = comps;
      if (!p.component_residuals.empty()) {
        Json rs = Json::array();
        for (const auto& r : p.component_residuals) rs.push_back(r.to_string());
        j["residuals"] = rs;
      }
      j["eps_radius"] = p.eps_radius;
      j["domain"] = {{"T", p.t_end}, {"K", p.intervals}};
      j["eps"] = p.eps;
      break;
    }
    case ProblemKind::Pde: {
      j["a"] = p.a.to_string();
      j["b"] = p.b.to_string();
      j["c"] = p.c.to_string();
      j["f"] = p.f.to_string();
      j["domain"] = {{"x", {p.rect.x_min, p.rect.x_max}}, {"y", {p.rect.y_min, p.rect.y_max}}, {"mesh", {p.nx, p.ny}}};
      Json g = Json::array();
      for (const auto& s : p.gamma) g.push_back({{"edge", edge_name(s.edge)}, {"from", s.lo}, {"to", s.hi}});
      j["gamma"] = g;
      if (p.step > 0.0) j["step"] = p.step;
      put_residual();
      if (!p.points.empty()) {
        Json q = Json::array();
        for (const auto& pt : p.points) q.push_back({pt[0], pt[1]});
        j["query"] = q;
      }
      break;
    }
  }
  if (!p.exact.empty()) j["exact"] = io::expr_json(p.exact);
  if (!p.query.empty()) j["query"] = p.query;
  return j;
}

// ------------------------------------------------------------ engine input

namespace io {

inline std::vector<Series> csv_series(const ProblemFile& p) {
  const std::filesystem::path path = std::filesystem::path(p.residual.csv).is_absolute()
                                         ? std::filesystem::path(p.residual.csv)
                                         : p.base_dir / p.residual.csv;
  return read_residual_series(path.string());
}

inline Eigen::MatrixXd system_matrix(const ProblemFile& p) {
  if (p.matrix) return *p.matrix;
  const Eigen::MatrixXcd a = p.jordan->reassemble();
  if (a.imag().cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, a.cwiseAbs().maxCoeff())) {
    throw Error(ErrorKind::SchemaError, "P J P^-1 is not real; give 'matrix' explicitly");
  }
  return a.real();
}

}  // namespace io

inline LinearODEProblem build_ode(const ProblemFile& p) {
  LinearODEProblem out;
  out.coefficients = p.coefficients;
  out.a0 = p.a0;
  out.t_end = p.t_end;
  out.intervals = p.intervals;
  out.query = p.query;
  const ResidualSource& r = p.residual;
  if (!r.expressions.empty()) {
    out.residual = ResidualProvider(r.expressions.front());
  } else if (!r.csv.empty()) {
    auto series = io::csv_series(p);
    if (series.size() != 1) throw Error(ErrorKind::SchemaError, "ode residual CSV must have columns t,r");
    out.residual = ResidualProvider(std::move(series.front()));
  } else if (p.a0) {
    if (r.forcing.empty()) throw Error(ErrorKind::SchemaError, "variable-coefficient surrogates need 'forcing'");
    out.residual = residual_from_surrogate(*p.a0, r.surrogate.front(), r.forcing.front());
  } else if (!r.forcing.empty()) {
    out.residual = residual_from_surrogate(p.coefficients, r.surrogate.front(), r.forcing.front());
  } else {
    out.residual =
        residual_from_surrogate(p.coefficients, r.surrogate.front(), forcing_from_exact(p.coefficients, r.exact.front()));
  }
  return out;
}

inline SystemProblem build_system(const ProblemFile& p) {
  SystemProblem out;
  out.jordan = p.jordan ? *p.jordan : jordan_from_matrix(*p.matrix);
  out.t_end = p.t_end;
  out.intervals = p.intervals;
  out.query = p.query;
  const ResidualSource& r = p.residual;
  if (!r.expressions.empty()) {
    for (const auto& e : r.expressions) out.residual.emplace_back(e);
  } else if (!r.csv.empty()) {
    for (auto& s : io::csv_series(p)) out.residual.emplace_back(std::move(s));
  } else {
    const Eigen::MatrixXd A = io::system_matrix(p);
    VectorFunction forcing;
    if (!r.forcing.empty()) {
      for (const auto& f : r.forcing) forcing.push_back(as_function(f));
    } else {
      forcing = system_forcing_from_exact(A, r.exact);
    }
    out.residual = system_residual_from_surrogate(A, r.surrogate, forcing);
  }
  return out;
}

inline PerturbationProblem build_nonlinear(const ProblemFile& p) {
  PerturbationProblem out;
  out.coefficients = p.coefficients;
  out.degree = p.degree;
  out.components = p.components;
  for (const auto& r : p.component_residuals) out.residuals.emplace_back(r);
  out.forcing = p.forcing;
  out.t_end = p.t_end;
  out.intervals = p.intervals;
  out.eps_radius = p.eps_radius;
  return out;
}

inline PDEProblem build_pde(const ProblemFile& p) {
  PDEProblem out;
  out.a = p.a;
  out.b = p.b;
  out.c = p.c;
  out.f = p.f;
  out.domain = p.rect;
  out.gamma = p.gamma;
  if (!p.exact.empty()) out.g = p.exact.front();
  const ResidualSource& r = p.residual;
  if (!r.expressions.empty()) {
    out.residual = FieldResidual(r.expressions.front());
  } else if (!r.csv.empty()) {
    const std::filesystem::path path =
        std::filesystem::path(r.csv).is_absolute() ? std::filesystem::path(r.csv) : p.base_dir / r.csv;
    out.residual = FieldResidual(MeshSeries::from_table(read_csv(path.string())));
  } else {
    out.residual = residual_from_surrogate(out, r.surrogate.front());
  }
  return out;
}

// ---------------------------------------------------------- catalog export

inline ProblemFile export_case(const oracle::ManufacturedCase& mc) {
  return std::visit(
      [&](const auto& c) -> ProblemFile {
        using C = std::decay_t<decltype(c)>;
        ProblemFile p;
        if constexpr (std::is_same_v<C, oracle::OdeCase>) {
          p.kind = ProblemKind::Ode;
          p.coefficients = c.coefficients;
          p.t_end = c.t_end;
          p.residual.surrogate = {c.surrogate()};
          p.residual.forcing = {c.forcing};
          p.exact = {c.exact};
        } else if constexpr (std::is_same_v<C, oracle::SystemCase>) {
          p.kind = ProblemKind::OdeSystem;
          p.matrix = c.A;
          p.jordan = c.jordan;
          p.t_end = c.t_end;
          p.residual.surrogate = c.surrogate();
          p.residual.exact = c.exact;
          p.exact = c.exact;
        } else if constexpr (std::is_same_v<C, oracle::DuffingCase>) {
          p.kind = ProblemKind::NonlinearOde;
          p.coefficients = c.coefficients;
          p.degree = c.degree;
          p.forcing = c.forcing;
          p.components = c.components;
          p.eps_radius = c.eps_radius;
          p.t_end = c.t_end;
          p.eps = {-0.5, -0.25, 0.0, 0.25, 0.5};
        } else {
          p.kind = ProblemKind::Pde;
          p.a = c.pde.a;
          p.b = c.pde.b;
          p.c = c.pde.c;
          p.f = c.pde.f;
          p.rect = c.pde.domain;
          p.gamma = c.pde.gamma;
          p.residual.surrogate = {c.surrogate()};
          p.exact = {c.exact};
        }
        return p;
      },
      mc.definition);
}

}  // namespace resbound
