#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace streamglm {

// Precondition breach: bad dimensions, unordered index sets, invalid configs.
struct contract_violation : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Non-finite value escaped a computation (overflowed linear predictor etc.).
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// No coordinate carries information (all-zero design); the stream cannot start.
struct degenerate_stream_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The cumulative active-block Hessian is singular or indefinite.
struct refit_degenerate_error : std::runtime_error {
  std::vector<int> active;  // offending index set, 0-based
  refit_degenerate_error(const std::string& msg, std::vector<int> idx)
      : std::runtime_error(msg), active(std::move(idx)) {}
};

struct parse_error : std::runtime_error {
  long row = 0;  // 1-based, header counts as row 1; 0 = not row-specific
  parse_error(const std::string& msg, long row_number = 0)
      : std::runtime_error(msg), row(row_number) {}
};

struct corrupt_checkpoint_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct unsupported_version_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace streamglm
