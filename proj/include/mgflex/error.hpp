#ifndef MGFLEX_ERROR_HPP
#define MGFLEX_ERROR_HPP

#include <stdexcept>
#include <string>

namespace mgflex {

// Values double as CLI exit codes; keep them stable.
enum class ErrorCode : int {
  usage = 1,
  io = 2,
  schema = 3,
  dimension = 4,
  model = 5,
  infeasible = 6,
  no_solution = 7,
  integrity = 8,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::usage: return "usage";
    case ErrorCode::io: return "io";
    case ErrorCode::schema: return "schema";
    case ErrorCode::dimension: return "dimension";
    case ErrorCode::model: return "model";
    case ErrorCode::infeasible: return "infeasible";
    case ErrorCode::no_solution: return "no_solution";
    case ErrorCode::integrity: return "integrity";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mgflex

#endif  // MGFLEX_ERROR_HPP
