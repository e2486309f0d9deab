#include "streamglm/persistence.hpp"

#include <algorithm>
#include <cctype>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace streamglm {

namespace {

constexpr int kFormatVersion = 1;

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t hash = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double_strict(const std::string& token, long row) {
  if (token.empty()) throw parse_error("empty numeric field", row);
  const char* begin = token.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end != begin + token.size()) {
    throw parse_error("non-numeric field '" + token + "'", row);
  }
  if (!std::isfinite(v)) {
    throw parse_error("non-finite field '" + token + "'", row);
  }
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    // trim surrounding whitespace
    std::size_t a = 0, b = field.size();
    while (a < b && std::isspace(static_cast<unsigned char>(field[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(field[b - 1]))) --b;
    fields.push_back(field.substr(a, b - a));
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

Batch read_batch(std::istream& in, int batch_index) {
  std::string line;
  if (!std::getline(in, line)) throw parse_error("empty batch file", 1);
  const std::vector<std::string> header = split_csv(strip_cr(line));
  if (header.size() < 2) {
    throw parse_error("header must name a response and at least one covariate", 1);
  }
  const std::size_t columns = header.size();

  std::vector<double> ys;
  std::vector<double> xs;
  long row = 1;
  while (std::getline(in, line)) {
    ++row;
    line = strip_cr(line);
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv(line);
    if (fields.size() != columns) {
      throw parse_error("row " + std::to_string(row) + " has " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(columns),
                        row);
    }
    ys.push_back(parse_double_strict(fields[0], row));
    for (std::size_t c = 1; c < columns; ++c) {
      xs.push_back(parse_double_strict(fields[c], row));
    }
  }
  if (ys.empty()) throw parse_error("batch file has no data rows", row);

  Batch batch;
  batch.batch_index = batch_index;
  const Eigen::Index n = static_cast<Eigen::Index>(ys.size());
  const Eigen::Index p = static_cast<Eigen::Index>(columns - 1);
  batch.y = Eigen::Map<Eigen::VectorXd>(ys.data(), n);
  batch.X.resize(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      batch.X(i, j) = xs[static_cast<std::size_t>(i) * p + j];
    }
  }
  batch.validate();
  return batch;
}

Batch read_batch_file(const std::string& path, int batch_index) {
  std::ifstream in(path);
  if (!in) throw parse_error("cannot open batch file: " + path);
  return read_batch(in, batch_index);
}

void write_batch(std::ostream& out, const Batch& batch,
                 const std::vector<std::string>& column_names) {
  batch.validate();
  const Eigen::Index p = batch.p();
  if (!column_names.empty() &&
      column_names.size() != static_cast<std::size_t>(p) + 1) {
    throw contract_violation("column_names must cover response plus covariates");
  }
  if (column_names.empty()) {
    out << 'y';
    for (Eigen::Index j = 0; j < p; ++j) out << ",x" << (j + 1);
  } else {
    for (std::size_t c = 0; c < column_names.size(); ++c) {
      if (c) out << ',';
      out << column_names[c];
    }
  }
  out << '\n';
  for (Eigen::Index i = 0; i < batch.n(); ++i) {
    out << format_double(batch.y[i]);
    for (Eigen::Index j = 0; j < p; ++j) {
      out << ',' << format_double(batch.X(i, j));
    }
    out << '\n';
  }
}

void write_batch_file(const std::string& path, const Batch& batch,
                      const std::vector<std::string>& column_names) {
  std::ofstream out(path);
  if (!out) throw parse_error("cannot open for writing: " + path);
  write_batch(out, batch, column_names);
}

void save_checkpoint(std::ostream& out, const SolverState& state,
                     const PenaltyConfig& penalty) {
  std::ostringstream body;
  body << "streamglm-checkpoint " << kFormatVersion << '\n';
  body << "family " << state.family.name() << '\n';
  body << "penalty " << penalty.name() << ' ' << format_double(penalty.r) << '\n';
  body << "p " << state.p << '\n';
  body << "batches " << state.batches_consumed << '\n';
  body << "samples " << state.total_samples << '\n';

  body << "beta";
  for (int j = 0; j < state.p; ++j) body << ' ' << format_double(state.beta[j]);
  body << '\n';

  body << "cumw";
  for (int j = 0; j < state.p; ++j) {
    body << ' ' << format_double(state.cum_hessian_diag[j]);
  }
  body << '\n';

  body << "tracked " << state.tracked.size();
  for (int idx : state.tracked) body << ' ' << (idx + 1);
  body << '\n';

  body << "cumh";
  for (std::size_t a = 0; a < state.tracked.size(); ++a) {
    for (std::size_t b = 0; b <= a; ++b) {
      body << ' ' << format_double(state.cum_hessian_block(a, b));
    }
  }
  body << '\n';

  body << "active " << state.active.size();
  for (int idx : state.active) body << ' ' << (idx + 1);
  body << '\n';

  body << "lambda_history";
  for (double lam : state.lambda_history) body << ' ' << format_double(lam);
  body << '\n';

  const std::string payload = body.str();
  char checksum[32];
  std::snprintf(checksum, sizeof(checksum), "%016" PRIx64, fnv1a64(payload));
  out << payload << "checksum " << checksum << '\n';
}

void save_checkpoint_file(const std::string& path, const SolverState& state,
                          const PenaltyConfig& penalty) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw parse_error("cannot open for writing: " + path);
  save_checkpoint(out, state, penalty);
}

namespace {

struct LineReader {
  std::istream& in;
  std::string payload;  // accumulated checksummed bytes

  // Returns the tokenized line; records its bytes into the payload.
  std::vector<std::string> next(const std::string& expected_key) {
    std::string line;
    if (!std::getline(in, line)) {
      throw corrupt_checkpoint_error("checkpoint truncated before '" +
                                     expected_key + "'");
    }
    line = strip_cr(line);
    payload += line;
    payload += '\n';
    std::vector<std::string> tokens;
    std::stringstream ss(line);
    std::string tok;
    while (ss >> tok) tokens.push_back(tok);
    if (tokens.empty() || tokens[0] != expected_key) {
      throw corrupt_checkpoint_error("expected '" + expected_key +
                                     "' line in checkpoint");
    }
    return tokens;
  }
};

double checkpoint_double(const std::string& token) {
  const char* begin = token.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end != begin + token.size() || !std::isfinite(v)) {
    throw corrupt_checkpoint_error("bad numeric token '" + token + "'");
  }
  return v;
}

long long checkpoint_int(const std::string& token) {
  const char* begin = token.c_str();
  char* end = nullptr;
  const long long v = std::strtoll(begin, &end, 10);
  if (end != begin + token.size()) {
    throw corrupt_checkpoint_error("bad integer token '" + token + "'");
  }
  return v;
}

std::vector<int> checkpoint_indices(const std::vector<std::string>& tokens, int p,
                                    const char* what) {
  if (tokens.size() < 2) {
    throw corrupt_checkpoint_error(std::string(what) + " line is incomplete");
  }
  const long long count = checkpoint_int(tokens[1]);
  if (count < 0 || tokens.size() != static_cast<std::size_t>(count) + 2) {
    throw corrupt_checkpoint_error(std::string(what) + " count mismatch");
  }
  std::vector<int> idx(count);
  for (long long k = 0; k < count; ++k) {
    const long long one_based = checkpoint_int(tokens[static_cast<std::size_t>(k) + 2]);
    if (one_based < 1 || one_based > p) {
      throw corrupt_checkpoint_error(std::string(what) + " index out of range");
    }
    idx[static_cast<std::size_t>(k)] = static_cast<int>(one_based - 1);
    if (k > 0 && idx[static_cast<std::size_t>(k)] <= idx[static_cast<std::size_t>(k - 1)]) {
      throw corrupt_checkpoint_error(std::string(what) + " indices not sorted");
    }
  }
  return idx;
}

}  // namespace

Checkpoint load_checkpoint(std::istream& in) {
  LineReader reader{in, {}};

  const auto magic = reader.next("streamglm-checkpoint");
  if (magic.size() != 2) throw corrupt_checkpoint_error("malformed version line");
  const long long version = checkpoint_int(magic[1]);
  if (version != kFormatVersion) {
    throw unsupported_version_error("unsupported checkpoint version " +
                                    std::to_string(version));
  }

  Checkpoint cp;
  const auto family_line = reader.next("family");
  if (family_line.size() != 2) throw corrupt_checkpoint_error("malformed family line");
  cp.state.family = family_from_name(family_line[1]);

  const auto penalty_line = reader.next("penalty");
  if (penalty_line.size() != 3) throw corrupt_checkpoint_error("malformed penalty line");
  cp.penalty = penalty_from_name(penalty_line[1], checkpoint_double(penalty_line[2]));

  const auto p_line = reader.next("p");
  if (p_line.size() != 2) throw corrupt_checkpoint_error("malformed p line");
  const long long p = checkpoint_int(p_line[1]);
  if (p < 1) throw corrupt_checkpoint_error("dimension must be positive");
  cp.state.p = static_cast<int>(p);

  const auto batches_line = reader.next("batches");
  if (batches_line.size() != 2) throw corrupt_checkpoint_error("malformed batches line");
  cp.state.batches_consumed = static_cast<int>(checkpoint_int(batches_line[1]));

  const auto samples_line = reader.next("samples");
  if (samples_line.size() != 2) throw corrupt_checkpoint_error("malformed samples line");
  cp.state.total_samples = checkpoint_int(samples_line[1]);

  const auto beta_line = reader.next("beta");
  if (beta_line.size() != static_cast<std::size_t>(p) + 1) {
    throw corrupt_checkpoint_error("beta length mismatch");
  }
  cp.state.beta.resize(p);
  for (long long j = 0; j < p; ++j) {
    cp.state.beta[j] = checkpoint_double(beta_line[static_cast<std::size_t>(j) + 1]);
  }

  const auto cumw_line = reader.next("cumw");
  if (cumw_line.size() != static_cast<std::size_t>(p) + 1) {
    throw corrupt_checkpoint_error("cumw length mismatch");
  }
  cp.state.cum_hessian_diag.resize(p);
  for (long long j = 0; j < p; ++j) {
    cp.state.cum_hessian_diag[j] =
        checkpoint_double(cumw_line[static_cast<std::size_t>(j) + 1]);
  }

  cp.state.tracked =
      checkpoint_indices(reader.next("tracked"), cp.state.p, "tracked");

  const auto cumh_line = reader.next("cumh");
  const std::size_t k = cp.state.tracked.size();
  if (cumh_line.size() != k * (k + 1) / 2 + 1) {
    throw corrupt_checkpoint_error("cumh length mismatch");
  }
  cp.state.cum_hessian_block.resize(k, k);
  std::size_t cursor = 1;
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b <= a; ++b) {
      const double v = checkpoint_double(cumh_line[cursor++]);
      cp.state.cum_hessian_block(a, b) = v;
      cp.state.cum_hessian_block(b, a) = v;
    }
  }

  cp.state.active = checkpoint_indices(reader.next("active"), cp.state.p, "active");
  if (!std::includes(cp.state.tracked.begin(), cp.state.tracked.end(),
                     cp.state.active.begin(), cp.state.active.end())) {
    throw corrupt_checkpoint_error("active set is not contained in tracked set");
  }

  const auto lambda_line = reader.next("lambda_history");
  cp.state.lambda_history.clear();
  for (std::size_t i = 1; i < lambda_line.size(); ++i) {
    cp.state.lambda_history.push_back(checkpoint_double(lambda_line[i]));
  }

  // checksum line is not part of the checksummed payload
  std::string line;
  if (!std::getline(in, line)) {
    throw corrupt_checkpoint_error("checkpoint truncated before checksum");
  }
  line = strip_cr(line);
  std::stringstream ss(line);
  std::string key, hex;
  if (!(ss >> key >> hex) || key != "checksum" || hex.size() != 16) {
    throw corrupt_checkpoint_error("malformed checksum line");
  }
  char expected[32];
  std::snprintf(expected, sizeof(expected), "%016" PRIx64, fnv1a64(reader.payload));
  if (hex != expected) {
    throw corrupt_checkpoint_error("checksum mismatch: checkpoint is corrupt");
  }
  return cp;
}

Checkpoint load_checkpoint_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw parse_error("cannot open checkpoint: " + path);
  return load_checkpoint(in);
}

}  // namespace streamglm
