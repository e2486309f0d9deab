// streamglm command-line front end: fit / resume / simulate / report.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "streamglm/persistence.hpp"
#include "streamglm/simulation.hpp"
#include "streamglm/solver.hpp"

namespace fs = std::filesystem;
using namespace streamglm;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

// Files created by the running command; removed if it fails partway.
struct OutputGuard {
  std::vector<fs::path> created;
  bool committed = false;

  std::ofstream open(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw parse_error("cannot open for writing: " + path.string());
    created.push_back(path);
    return out;
  }
  void note(const fs::path& path) { created.push_back(path); }
  ~OutputGuard() {
    if (committed) return;
    for (const auto& path : created) {
      std::error_code ec;
      fs::remove(path, ec);
    }
  }
};

struct SolverFlags {
  std::string family;
  std::string penalty;
  double r = 0.0;  // 0 = penalty default
  int grid_size = 100;
  double min_ratio = 1e-3;
  double cd_tol = 1e-7;
  int cd_max_passes = 1000;
  int refit_steps = 1;
  bool exempt_intercept = false;

  SolverConfig to_config() const {
    SolverConfig config;
    config.penalty = penalty_from_name(penalty, r);
    config.lambda_grid_size = grid_size;
    config.lambda_min_ratio = min_ratio;
    config.cd_tol = cd_tol;
    config.cd_max_passes = cd_max_passes;
    config.refit_max_steps = refit_steps;
    config.exempt_intercept = exempt_intercept;
    config.validate();
    return config;
  }
};

void add_tuning_flags(CLI::App* cmd, SolverFlags& flags) {
  cmd->add_option("--grid-size", flags.grid_size, "lambda grid size");
  cmd->add_option("--min-ratio", flags.min_ratio, "lambda grid floor ratio");
  cmd->add_option("--cd-tol", flags.cd_tol, "batch-1 relinearization tolerance");
  cmd->add_option("--cd-max-passes", flags.cd_max_passes,
                  "batch-1 relinearization cycle cap");
  cmd->add_option("--refit-steps", flags.refit_steps, "refit Newton steps per batch");
  cmd->add_flag("--exempt-intercept", flags.exempt_intercept,
                "leave the first coordinate unpenalized");
}

void check_input_files(const std::vector<std::string>& paths) {
  for (const auto& path : paths) {
    if (!fs::exists(path)) {
      throw parse_error("input file does not exist: " + path);
    }
  }
}

void write_coefficients(std::ofstream& out, const SolverState& state) {
  out << "index\tvalue\tactive\n";
  char buf[40];
  for (int j = 0; j < state.p; ++j) {
    const bool active =
        std::binary_search(state.active.begin(), state.active.end(), j);
    std::snprintf(buf, sizeof(buf), "%.17g", state.beta[j]);
    out << (j + 1) << '\t' << buf << '\t' << (active ? 1 : 0) << '\n';
  }
}

void write_lambda_history(std::ofstream& out, const SolverState& state) {
  out << "batch\tlambda\n";
  char buf[40];
  for (std::size_t t = 0; t < state.lambda_history.size(); ++t) {
    std::snprintf(buf, sizeof(buf), "%.17g", state.lambda_history[t]);
    out << (state.batches_consumed - state.lambda_history.size() + 1 + t) << '\t'
        << buf << '\n';
  }
}

void append_bic_trace(std::ofstream& out, int batch, const BicTrace& trace) {
  char buf[40];
  for (std::size_t i = 0; i < trace.lambdas.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", trace.lambdas[i]);
    out << batch << '\t' << buf << '\t';
    std::snprintf(buf, sizeof(buf), "%.17g", trace.bic_values[i]);
    out << buf << '\t' << trace.support_sizes[i] << '\t'
        << (static_cast<int>(i) == trace.chosen_index ? 1 : 0) << '\n';
  }
}

int run_stream_command(const std::vector<std::string>& files,
                       const SolverFlags& flags, const std::string& out_dir,
                       const std::string& checkpoint_out,
                       const std::string& checkpoint_in) {
  check_input_files(files);
  const SolverConfig config = flags.to_config();

  SolverState state;
  PenaltyConfig penalty = config.penalty;
  bool have_state = false;
  if (!checkpoint_in.empty()) {
    Checkpoint cp = load_checkpoint_file(checkpoint_in);
    state = std::move(cp.state);
    penalty = cp.penalty;
    have_state = true;
  }
  SolverConfig effective = config;
  effective.penalty = penalty;

  if (files.empty() && !have_state) {
    throw parse_error("no batch files given");
  }

  fs::create_directories(out_dir);
  OutputGuard guard;
  std::ofstream trace_out = guard.open(fs::path(out_dir) / "bic_trace.tsv");
  trace_out << "batch\tlambda\tbic\ts_hat\tchosen\n";

  for (const auto& path : files) {
    const int index = have_state ? state.batches_consumed + 1 : 1;
    const Batch batch = read_batch_file(path, index);
    if (have_state && batch.p() != state.p) {
      throw parse_error("file " + path + " has " + std::to_string(batch.p()) +
                        " covariates, stream expects " + std::to_string(state.p));
    }
    BicTrace trace;
    if (!have_state) {
      const Family family = family_from_name(flags.family);
      state = init_first_batch(batch, effective, family, &trace);
      have_state = true;
    } else {
      auto [next, t] = process_batch(state, batch, effective);
      state = std::move(next);
      trace = std::move(t);
    }
    append_bic_trace(trace_out, state.batches_consumed, trace);
  }

  std::ofstream coef_out = guard.open(fs::path(out_dir) / "coefficients.tsv");
  write_coefficients(coef_out, state);
  std::ofstream lambda_out = guard.open(fs::path(out_dir) / "lambda_history.tsv");
  write_lambda_history(lambda_out, state);
  if (!checkpoint_out.empty()) {
    guard.note(checkpoint_out);
    save_checkpoint_file(checkpoint_out, state, effective.penalty);
  }
  guard.committed = true;
  return kExitOk;
}

int run_simulate(const SolverFlags& flags, ExperimentConfig config,
                 const std::string& metrics_path, const std::string& records_path) {
  config.family = family_from_name(flags.family);
  config.penalty = penalty_from_name(flags.penalty, flags.r);
  config.solver = flags.to_config();
  config.validate();

  const ExperimentResult result = run_experiment(config);

  OutputGuard guard;
  char buf[64];
  {
    std::ofstream out = guard.open(metrics_path);
    out << "Size\tMethod\tNV\tIN\tCS\tI\tII\n";
    auto row = [&](const SelectionMetrics& m, bool offline) {
      std::snprintf(buf, sizeof(buf), "n=%d,B=%d", config.n_per_batch,
                    config.n_batches);
      out << buf << '\t' << method_label(config.penalty, offline) << '\t';
      std::snprintf(buf, sizeof(buf), "%.2f\t%.2f\t%.2f\t%.4f\t%.4f\n", m.nv,
                    m.in_rate, m.cs_rate, m.type1, m.type2);
      out << buf;
    };
    row(result.metrics, false);
    if (result.has_offline) row(result.offline_metrics, true);
  }
  if (!records_path.empty()) {
    std::ofstream out = guard.open(records_path);
    out << "method\treplication\tbatch\tn_seen\tl2_sq\n";
    auto rows = [&](const std::vector<ReplicationRecord>& records, bool offline) {
      const std::string label = method_label(config.penalty, offline);
      for (const auto& rec : records) {
        if (rec.failed) {
          out << label << '\t' << rec.replication << "\tfailed\t0\t" << rec.error
              << '\n';
          continue;
        }
        for (std::size_t k = 0; k < rec.n_trajectory.size(); ++k) {
          std::snprintf(buf, sizeof(buf), "%.17g", rec.l2_trajectory[k]);
          out << label << '\t' << rec.replication << '\t' << (k + 1) << '\t'
              << rec.n_trajectory[k] << '\t' << buf << '\n';
        }
      }
    };
    rows(result.records, false);
    if (result.has_offline) rows(result.offline_records, true);
  }
  guard.committed = true;
  return kExitOk;
}

int run_report(const std::string& records_path, const std::string& out_path) {
  std::ifstream in(records_path);
  if (!in) throw parse_error("cannot open records file: " + records_path);

  std::string line;
  if (!std::getline(in, line)) throw parse_error("records file is empty");

  // (method, n_seen) -> running sum and count of l2
  std::map<std::pair<std::string, long long>, std::pair<double, long>> series;
  long row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string method, rep, batch, n_seen, l2;
    if (!std::getline(ss, method, '\t') || !std::getline(ss, rep, '\t') ||
        !std::getline(ss, batch, '\t') || !std::getline(ss, n_seen, '\t') ||
        !std::getline(ss, l2, '\t')) {
      throw parse_error("malformed records row", row);
    }
    if (batch == "failed") continue;
    char* end = nullptr;
    const long long n = std::strtoll(n_seen.c_str(), &end, 10);
    if (end != n_seen.c_str() + n_seen.size()) {
      throw parse_error("bad n_seen field '" + n_seen + "'", row);
    }
    const double value = std::strtod(l2.c_str(), &end);
    if (end != l2.c_str() + l2.size()) {
      throw parse_error("bad l2_sq field '" + l2 + "'", row);
    }
    auto& cell = series[{method, n}];
    cell.first += value;
    cell.second += 1;
  }
  if (series.empty()) throw parse_error("records file has no data rows");

  OutputGuard guard;
  std::ofstream out = guard.open(out_path);
  out << "method\tn_seen\tmean_l2_sq\n";
  char buf[40];
  for (const auto& [key, cell] : series) {
    std::snprintf(buf, sizeof(buf), "%.17g", cell.first / cell.second);
    out << key.first << '\t' << key.second << '\t' << buf << '\n';
  }
  guard.committed = true;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming penalized GLM: online variable selection and estimation"};
  app.require_subcommand(1);

  SolverFlags flags;
  std::vector<std::string> files;
  std::string out_dir = ".";
  std::string checkpoint_out, checkpoint_in;
  std::string metrics_path = "metrics.tsv";
  std::string records_path;
  std::string report_out = "series.tsv";
  ExperimentConfig experiment;

  CLI::App* fit = app.add_subcommand("fit", "fit a stream of batch files in order");
  fit->add_option("files", files, "batch CSV files, in stream order")->required();
  fit->add_option("--family", flags.family, "gaussian | logit")->required();
  fit->add_option("--penalty", flags.penalty, "lasso | scad | mcp")->required();
  fit->add_option("--r", flags.r, "penalty shape constant");
  fit->add_option("--out", out_dir, "output directory")->required();
  fit->add_option("--checkpoint", checkpoint_out, "write final state here");
  add_tuning_flags(fit, flags);

  CLI::App* resume = app.add_subcommand("resume", "continue from a checkpoint");
  resume->add_option("files", files, "batch CSV files, in stream order")->required();
  resume->add_option("--checkpoint", checkpoint_in, "checkpoint to resume from")
      ->required();
  resume->add_option("--out", out_dir, "output directory")->required();
  resume->add_option("--checkpoint-out", checkpoint_out, "write final state here");
  add_tuning_flags(resume, flags);

  CLI::App* simulate = app.add_subcommand("simulate", "run a synthetic experiment");
  simulate->add_option("--family", flags.family, "gaussian | logit")->required();
  simulate->add_option("--penalty", flags.penalty, "lasso | scad | mcp")->required();
  simulate->add_option("--r", flags.r, "penalty shape constant");
  simulate->add_option("--p", experiment.p, "covariate dimension");
  simulate->add_option("--n", experiment.n_per_batch, "observations per batch");
  simulate->add_option("--batches", experiment.n_batches, "number of batches");
  simulate->add_option("--rho", experiment.rho, "compound-symmetry correlation");
  simulate->add_option("--reps", experiment.replications, "replications");
  simulate->add_option("--seed", experiment.seed, "random seed");
  simulate->add_option("--noise-sd", experiment.noise_sd, "gaussian noise sd");
  simulate->add_option("--init-samples", experiment.init_samples,
                       "observations pooled into the starting fit");
  simulate->add_flag("--include-offline", experiment.include_offline,
                     "also fit the pooled offline reference");
  simulate->add_option("--out", metrics_path, "metrics table path");
  simulate->add_option("--records", records_path, "per-replication records path");
  add_tuning_flags(simulate, flags);

  CLI::App* report = app.add_subcommand("report", "aggregate records into series");
  report->add_option("--records", records_path, "records file from simulate")
      ->required();
  report->add_option("--out", report_out, "series output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    // CLI11 returns 0 for --help; everything else is a usage error
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (fit->parsed()) {
      return run_stream_command(files, flags, out_dir, checkpoint_out, "");
    }
    if (resume->parsed()) {
      flags.penalty = "lasso";  // placeholder; real penalty comes from the checkpoint
      return run_stream_command(files, flags, out_dir, checkpoint_out,
                                checkpoint_in);
    }
    if (simulate->parsed()) {
      return run_simulate(flags, experiment, metrics_path, records_path);
    }
    if (report->parsed()) {
      return run_report(records_path, report_out);
    }
  } catch (const parse_error& e) {
    std::cerr << "streamglm: " << e.what() << '\n';
    return kExitUsage;
  } catch (const contract_violation& e) {
    std::cerr << "streamglm: " << e.what() << '\n';
    return kExitUsage;
  } catch (const unsupported_version_error& e) {
    std::cerr << "streamglm: " << e.what() << '\n';
    return kExitUsage;
  } catch (const corrupt_checkpoint_error& e) {
    std::cerr << "streamglm: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "streamglm: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
