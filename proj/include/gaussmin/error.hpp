#pragma once

#include <stdexcept>
#include <string>

namespace gaussmin {

enum class ErrorCode {
    invalid_dimension,
    invalid_rank,
    invalid_matrix,
    invalid_exponent,
    invalid_argument,
    search_infeasible,
    domain,
    dimension_mismatch,
    evaluation,
};

inline const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::invalid_dimension: return "invalid dimension";
        case ErrorCode::invalid_rank: return "invalid rank";
        case ErrorCode::invalid_matrix: return "invalid matrix";
        case ErrorCode::invalid_exponent: return "invalid exponent";
        case ErrorCode::invalid_argument: return "invalid argument";
        case ErrorCode::search_infeasible: return "exhaustive search infeasible";
        case ErrorCode::domain: return "domain error";
        case ErrorCode::dimension_mismatch: return "dimension mismatch";
        case ErrorCode::evaluation: return "evaluation error";
    }
    return "error";
}

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

}  // namespace gaussmin
