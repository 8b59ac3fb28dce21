#ifndef MGFLEX_MILP_PROBLEM_HPP
#define MGFLEX_MILP_PROBLEM_HPP

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "mgflex/error.hpp"

namespace mgflex::milp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { less_equal, equal, greater_equal };

struct Variable {
  std::string name;
  double lower = 0.0;
  double upper = kInf;
  double cost = 0.0;
  bool integer = false;
};

struct Term {
  int var;
  double coef;
};

struct Row {
  std::string name;
  std::vector<Term> terms;
  Sense sense = Sense::less_equal;
  double rhs = 0.0;
};

// Minimization problem: min c'x + offset s.t. rows, variable bounds,
// integrality marks.
class MilpProblem {
 public:
  int add_variable(std::string name, double lower, double upper, double cost = 0.0,
                   bool integer = false) {
    vars_.push_back({std::move(name), lower, upper, cost, integer});
    return static_cast<int>(vars_.size()) - 1;
  }

  int add_row(std::string name, std::vector<Term> terms, Sense sense, double rhs) {
    rows_.push_back({std::move(name), std::move(terms), sense, rhs});
    return static_cast<int>(rows_.size()) - 1;
  }

  void add_cost(int var, double cost) { vars_[var].cost += cost; }
  void set_objective_offset(double offset) { offset_ = offset; }
  double objective_offset() const { return offset_; }

  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<Row>& rows() const { return rows_; }
  const Variable& variable(int j) const { return vars_[j]; }
  Variable& variable(int j) { return vars_[j]; }
  int num_variables() const { return static_cast<int>(vars_.size()); }
  int num_rows() const { return static_cast<int>(rows_.size()); }
  int num_integer() const {
    return static_cast<int>(std::count_if(vars_.begin(), vars_.end(),
                                          [](const Variable& v) { return v.integer; }));
  }

  void validate() const {
    for (std::size_t j = 0; j < vars_.size(); ++j) {
      const auto& v = vars_[j];
      if (std::isnan(v.lower) || std::isnan(v.upper) || v.lower > v.upper ||
          v.lower == kInf || v.upper == -kInf) {
        throw Error(ErrorCode::model, "variable '" + v.name + "' has invalid bounds");
      }
      if (!std::isfinite(v.cost)) {
        throw Error(ErrorCode::model, "variable '" + v.name + "' has a non-finite cost");
      }
      if (v.integer && (!std::isfinite(v.lower) || !std::isfinite(v.upper))) {
        throw Error(ErrorCode::model, "integer variable '" + v.name + "' needs finite bounds");
      }
    }
    for (const auto& r : rows_) {
      if (!std::isfinite(r.rhs)) {
        throw Error(ErrorCode::model, "row '" + r.name + "' has a non-finite rhs");
      }
      for (const auto& t : r.terms) {
        if (t.var < 0 || t.var >= num_variables()) {
          throw Error(ErrorCode::model, "row '" + r.name + "' references an unknown variable");
        }
        if (!std::isfinite(t.coef)) {
          throw Error(ErrorCode::model, "row '" + r.name + "' has a non-finite coefficient");
        }
      }
    }
  }

  double objective(const std::vector<double>& x) const {
    double obj = offset_;
    for (std::size_t j = 0; j < vars_.size(); ++j) obj += vars_[j].cost * x[j];
    return obj;
  }

 private:
  std::vector<Variable> vars_;
  std::vector<Row> rows_;
  double offset_ = 0.0;
};

enum class Status { optimal, feasible_gap, infeasible, unbounded, node_limit };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::feasible_gap: return "feasible_gap";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    case Status::node_limit: return "node_limit";
  }
  return "unknown";
}

struct MilpSolution {
  Status status = Status::infeasible;
  std::vector<double> values;
  double objective = kInf;
  double best_bound = -kInf;
  double root_bound = -kInf;
  double gap = kInf;
  long nodes = 0;
  long lp_iterations = 0;
  double wall_seconds = 0.0;

  bool has_solution() const { return !values.empty(); }
};

struct Residuals {
  double max_bound_violation = 0.0;
  double max_row_violation = 0.0;
  double max_integrality = 0.0;
  int worst_row = -1;
  int worst_bound_var = -1;
  int worst_integer_var = -1;

  double worst() const {
    return std::max({max_bound_violation, max_row_violation, max_integrality});
  }
};

// Independent feasibility check of a point against the problem as stated.
inline Residuals check_point(const MilpProblem& p, const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != p.num_variables()) {
    throw Error(ErrorCode::dimension, "check_point: value vector has " + std::to_string(x.size()) +
                                          " entries, problem has " +
                                          std::to_string(p.num_variables()) + " variables");
  }
  Residuals res;
  for (int j = 0; j < p.num_variables(); ++j) {
    const auto& v = p.variable(j);
    double viol = std::max({0.0, v.lower - x[j], x[j] - v.upper});
    if (viol > res.max_bound_violation) {
      res.max_bound_violation = viol;
      res.worst_bound_var = j;
    }
    if (v.integer) {
      double frac = std::abs(x[j] - std::round(x[j]));
      if (frac > res.max_integrality) {
        res.max_integrality = frac;
        res.worst_integer_var = j;
      }
    }
  }
  for (int i = 0; i < p.num_rows(); ++i) {
    const auto& r = p.rows()[i];
    double act = 0.0;
    for (const auto& t : r.terms) act += t.coef * x[t.var];
    double viol = 0.0;
    switch (r.sense) {
      case Sense::less_equal: viol = std::max(0.0, act - r.rhs); break;
      case Sense::greater_equal: viol = std::max(0.0, r.rhs - act); break;
      case Sense::equal: viol = std::abs(act - r.rhs); break;
    }
    if (viol > res.max_row_violation) {
      res.max_row_violation = viol;
      res.worst_row = i;
    }
  }
  return res;
}

// Plain-text dump, one record per line:
//   MGFLEX-MILP 1
//   OFFSET <value>
//   VARIABLES <n>
//   <index> <name> <lower> <upper> <cost> <C|I>
//   ROWS <m>
//   <index> <name> <L|E|G> <rhs> <nterms> <var>:<coef> ...
//   END
// Numbers use 17 significant digits; infinities are written inf / -inf.
namespace detail {

inline std::string format_number(double v) {
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_number(const std::string& s) {
  if (s == "inf") return kInf;
  if (s == "-inf") return -kInf;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size()) throw Error(ErrorCode::schema, "bad number '" + s + "' in problem dump");
  return v;
}

inline std::string safe_name(const std::string& name) {
  std::string out = name.empty() ? "_" : name;
  std::replace_if(out.begin(), out.end(), [](char c) { return c == ' ' || c == '\t' || c == '\n'; },
                  '_');
  return out;
}

}  // namespace detail

inline void write_problem(std::ostream& os, const MilpProblem& p) {
  using detail::format_number;
  os << "MGFLEX-MILP 1\n";
  os << "OFFSET " << format_number(p.objective_offset()) << "\n";
  os << "VARIABLES " << p.num_variables() << "\n";
  for (int j = 0; j < p.num_variables(); ++j) {
    const auto& v = p.variable(j);
    os << j << ' ' << detail::safe_name(v.name) << ' ' << format_number(v.lower) << ' '
       << format_number(v.upper) << ' ' << format_number(v.cost) << ' ' << (v.integer ? 'I' : 'C')
       << "\n";
  }
  os << "ROWS " << p.num_rows() << "\n";
  for (int i = 0; i < p.num_rows(); ++i) {
    const auto& r = p.rows()[i];
    char sense = r.sense == Sense::less_equal ? 'L' : r.sense == Sense::equal ? 'E' : 'G';
    os << i << ' ' << detail::safe_name(r.name) << ' ' << sense << ' ' << format_number(r.rhs)
       << ' ' << r.terms.size();
    for (const auto& t : r.terms) os << ' ' << t.var << ':' << format_number(t.coef);
    os << "\n";
  }
  os << "END\n";
}

inline MilpProblem read_problem(std::istream& is) {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::schema, "problem dump: " + msg); };
  std::string tag;
  int version = 0;
  if (!(is >> tag >> version) || tag != "MGFLEX-MILP" || version != 1) fail("bad header");
  MilpProblem p;
  std::string word;
  if (!(is >> tag >> word) || tag != "OFFSET") fail("missing OFFSET");
  p.set_objective_offset(detail::parse_number(word));
  int n = 0;
  if (!(is >> tag >> n) || tag != "VARIABLES" || n < 0) fail("missing VARIABLES");
  for (int j = 0; j < n; ++j) {
    int idx;
    std::string name, lo, hi, cost, kind;
    if (!(is >> idx >> name >> lo >> hi >> cost >> kind) || idx != j) {
      fail("bad variable record " + std::to_string(j));
    }
    p.add_variable(name, detail::parse_number(lo), detail::parse_number(hi),
                   detail::parse_number(cost), kind == "I");
  }
  int m = 0;
  if (!(is >> tag >> m) || tag != "ROWS" || m < 0) fail("missing ROWS");
  for (int i = 0; i < m; ++i) {
    int idx;
    std::size_t nterms;
    std::string name, sense, rhs;
    if (!(is >> idx >> name >> sense >> rhs >> nterms) || idx != i) {
      fail("bad row record " + std::to_string(i));
    }
    std::vector<Term> terms;
    for (std::size_t k = 0; k < nterms; ++k) {
      if (!(is >> word)) fail("truncated row " + std::to_string(i));
      auto colon = word.find(':');
      if (colon == std::string::npos) fail("bad term '" + word + "'");
      terms.push_back({std::stoi(word.substr(0, colon)), detail::parse_number(word.substr(colon + 1))});
    }
    Sense s = sense == "L" ? Sense::less_equal : sense == "E" ? Sense::equal : Sense::greater_equal;
    if (sense != "L" && sense != "E" && sense != "G") fail("bad sense '" + sense + "'");
    p.add_row(name, std::move(terms), s, detail::parse_number(rhs));
  }
  if (!(is >> tag) || tag != "END") fail("missing END");
  return p;
}

}  // namespace mgflex::milp

#endif  // MGFLEX_MILP_PROBLEM_HPP
