#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "streamglm/state.hpp"

namespace streamglm {

// ---------------------------------------------------------------------------
// Batch files: CSV with a header row; the first column is the response, the
// remaining p columns are covariates. Every data row must have exactly the
// header's column count and parse as finite numbers; violations raise
// parse_error naming the 1-based row (the header is row 1).
// ---------------------------------------------------------------------------

Batch read_batch(std::istream& in, int batch_index = 1);
Batch read_batch_file(const std::string& path, int batch_index = 1);

void write_batch(std::ostream& out, const Batch& batch,
                 const std::vector<std::string>& column_names = {});
void write_batch_file(const std::string& path, const Batch& batch,
                      const std::vector<std::string>& column_names = {});

// ---------------------------------------------------------------------------
// Checkpoints: a line-oriented, versioned text container holding the entire
// solver state plus the penalty configuration. Numbers are written with 17
// significant digits so every double round-trips exactly; indices are
// 1-based in the file. The final line carries an FNV-1a 64 checksum of all
// preceding bytes; any mismatch is a hard corruption error. Layout:
//
//   streamglm-checkpoint 1
//   family <gaussian_identity|binomial_logit>
//   penalty <lasso|scad|mcp> <r>
//   p <dimension>
//   batches <count>
//   samples <count>
//   beta <p values>
//   cumw <p values>
//   tracked <k> <k 1-based indices>
//   cumh <k(k+1)/2 values, lower triangle row-major>
//   active <m> <m 1-based indices>
//   lambda_history <b values>
//   checksum <16 hex digits>
// ---------------------------------------------------------------------------

struct Checkpoint {
  SolverState state;
  PenaltyConfig penalty;
};

void save_checkpoint(std::ostream& out, const SolverState& state,
                     const PenaltyConfig& penalty);
void save_checkpoint_file(const std::string& path, const SolverState& state,
                          const PenaltyConfig& penalty);

Checkpoint load_checkpoint(std::istream& in);
Checkpoint load_checkpoint_file(const std::string& path);

}  // namespace streamglm
