#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "resbound/error.hpp"
#include "resbound/expr.hpp"
#include "resbound/grid.hpp"

namespace resbound {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

/// Comma-separated numeric table with a mandatory header row.
inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::SchemaError, "cannot open CSV file '" + path + "'");
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::SchemaError, "CSV file '" + path + "' is empty");
  table.header = split_csv_line(line);
  for (const auto& h : table.header) {
    if (h.empty() || (!std::isalpha(static_cast<unsigned char>(h.front())) && h.front() != '_')) {
      throw Error(ErrorKind::SchemaError, "CSV file '" + path + "' needs a header row");
    }
  }
  table.columns.resize(table.header.size());
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != table.header.size()) {
      throw Error(ErrorKind::SchemaError, path + ":" + std::to_string(lineno) + ": wrong column count");
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      char* end = nullptr;
      const double v = std::strtod(cells[c].c_str(), &end);
      if (cells[c].empty() || end != cells[c].c_str() + cells[c].size() || !std::isfinite(v)) {
        throw Error(ErrorKind::SchemaError, path + ":" + std::to_string(lineno) + ": bad number '" + cells[c] + "'");
      }
      table.columns[c].push_back(v);
    }
  }
  return table;
}

/// Samples (t_i, r_i) with strictly increasing t, read linearly between samples.
class Series {
 public:
  Series(std::vector<double> t, std::vector<double> r) : t_(std::move(t)), r_(std::move(r)) {
    if (t_.size() != r_.size() || t_.size() < 2) throw Error(ErrorKind::SchemaError, "series needs at least 2 samples");
    for (std::size_t i = 1; i < t_.size(); ++i) {
      if (!(t_[i] > t_[i - 1])) throw Error(ErrorKind::SchemaError, "series abscissae must be strictly increasing");
    }
  }

  double at(double t) const {
    if (t < t_.front() || t > t_.back()) {
      throw Error(ErrorKind::OutOfDomain, "residual series does not cover t = " + std::to_string(t));
    }
    auto it = std::upper_bound(t_.begin(), t_.end(), t);
    if (it == t_.end()) return r_.back();
    const auto i = static_cast<std::size_t>(it - t_.begin()) - 1;
    if (t_[i] == t) return r_[i];
    const double w = (t - t_[i]) / (t_[i + 1] - t_[i]);
    return r_[i] + w * (r_[i + 1] - r_[i]);
  }

  const std::vector<double>& abscissae() const { return t_; }
  const std::vector<double>& values() const { return r_; }

 private:
  std::vector<double> t_;
  std::vector<double> r_;
};

/// Reads `t,r` (one component) or `t,r_1,...,r_n` (systems).
inline std::vector<Series> read_residual_series(const std::string& path) {
  const CsvTable table = read_csv(path);
  if (table.header.size() < 2 || table.header.front() != "t") {
    throw Error(ErrorKind::SchemaError, "residual CSV '" + path + "' must start with columns t,r");
  }
  std::vector<Series> out;
  for (std::size_t c = 1; c < table.columns.size(); ++c) out.emplace_back(table.columns[0], table.columns[c]);
  return out;
}

/// Source of the residual r(t) of an approximate solution.
class ResidualProvider {
 public:
  using Function = std::function<double(double)>;

  ResidualProvider() : source_(Expression::constant(0.0)) {}
  explicit ResidualProvider(Expression e) : source_(std::move(e)) {}
  explicit ResidualProvider(Series s) : source_(std::move(s)) {}
  explicit ResidualProvider(Function f) : source_(std::move(f)) {}

  double at(double t) const {
    return std::visit(
        [t](const auto& src) -> double {
          using S = std::decay_t<decltype(src)>;
          if constexpr (std::is_same_v<S, Expression>) {
            return src.eval(Bindings::at_t(t));
          } else if constexpr (std::is_same_v<S, Series>) {
            return src.at(t);
          } else {
            return src(t);
          }
        },
        source_);
  }

  SampledFunction sample(const Grid& grid) const {
    return SampledFunction::from_function(grid, [this](double t) { return at(t); });
  }

  bool is_series() const { return std::holds_alternative<Series>(source_); }

 private:
  std::variant<Expression, Series, Function> source_;
};

using ScalarFunction = std::function<double(double)>;

inline ScalarFunction as_function(Expression e) {
  return [e = std::move(e)](double t) { return e.eval(Bindings::at_t(t)); };
}

/// L w = w^(n) + sum_j a_j w^(j) for a closed-form w.
inline double apply_linear_operator(const std::vector<double>& coefficients, const Expression& w, double t) {
  const int n = static_cast<int>(coefficients.size());
  if (n == 0 || n > kMaxDualOrder) throw Error(ErrorKind::SchemaError, "closed-form operators support order 1..4");
  const DualValue d = w.eval_dual(Var::t, Bindings::at_t(t), n);
  double acc = d.derivative(n);
  for (int j = 0; j < n; ++j) acc += coefficients[static_cast<std::size_t>(j)] * d.derivative(j);
  return acc;
}

/// f = L v for a manufactured exact solution v.
inline ScalarFunction forcing_from_exact(std::vector<double> coefficients, Expression exact) {
  return [coefficients = std::move(coefficients), exact = std::move(exact)](double t) {
    return apply_linear_operator(coefficients, exact, t);
  };
}

/// r = u^(n) + sum_j a_j u^(j) - f for a closed-form approximate solution u.
inline ResidualProvider residual_from_surrogate(std::vector<double> coefficients, Expression u, ScalarFunction forcing) {
  if (coefficients.empty() || coefficients.size() > static_cast<std::size_t>(kMaxDualOrder)) {
    throw Error(ErrorKind::SchemaError, "surrogate residuals support operator order 1..4");
  }
  return ResidualProvider(ResidualProvider::Function(
      [coefficients = std::move(coefficients), u = std::move(u), forcing = std::move(forcing)](double t) {
        return apply_linear_operator(coefficients, u, t) - forcing(t);
      }));
}

inline ResidualProvider residual_from_surrogate(std::vector<double> coefficients, Expression u, Expression forcing) {
  return residual_from_surrogate(std::move(coefficients), std::move(u), as_function(std::move(forcing)));
}

/// r = u' + a_0(t) u - f for the first-order variable-coefficient operator.
inline ResidualProvider residual_from_surrogate(Expression a0, Expression u, Expression forcing) {
  return ResidualProvider(ResidualProvider::Function(
      [a0 = std::move(a0), u = std::move(u), forcing = std::move(forcing)](double t) {
        const auto at = Bindings::at_t(t);
        const DualValue d = u.eval_dual(Var::t, at, 1);
        return d.derivatives[0] + a0.eval(at) * d.value - forcing.eval(at);
      }));
}

}  // namespace resbound
