#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "streamglm/persistence.hpp"
#include "streamglm/simulation.hpp"
#include "streamglm/solver.hpp"

namespace py = pybind11;
using namespace streamglm;

PYBIND11_MODULE(streamglm, m) {
  m.doc() = "Streaming penalized GLM: online variable selection and estimation";

  py::register_exception<contract_violation>(m, "ContractViolation",
                                             PyExc_ValueError);
  py::register_exception<numeric_error>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception<degenerate_stream_error>(m, "DegenerateStreamError",
                                                  PyExc_RuntimeError);
  py::register_exception<refit_degenerate_error>(m, "RefitDegenerateError",
                                                 PyExc_RuntimeError);
  py::register_exception<parse_error>(m, "ParseError", PyExc_ValueError);
  py::register_exception<corrupt_checkpoint_error>(m, "CorruptCheckpointError",
                                                   PyExc_RuntimeError);
  py::register_exception<unsupported_version_error>(m, "UnsupportedVersionError",
                                                    PyExc_RuntimeError);

  py::enum_<FamilyKind>(m, "FamilyKind")
      .value("gaussian_identity", FamilyKind::gaussian_identity)
      .value("binomial_logit", FamilyKind::binomial_logit);

  py::class_<Family>(m, "Family")
      .def(py::init<FamilyKind>(), py::arg("kind"))
      .def_static("gaussian", &Family::gaussian)
      .def_static("logit", &Family::logit)
      .def_readonly("kind", &Family::kind)
      .def("cumulant", &Family::cumulant)
      .def("mean", &Family::mean)
      .def("variance", &Family::variance)
      .def("__repr__",
           [](const Family& f) { return std::string("Family(") + f.name() + ")"; });
  m.def("family_from_name", &family_from_name, py::arg("name"));

  py::enum_<PenaltyKind>(m, "PenaltyKind")
      .value("lasso", PenaltyKind::lasso)
      .value("scad", PenaltyKind::scad)
      .value("mcp", PenaltyKind::mcp);

  py::class_<PenaltyConfig>(m, "PenaltyConfig")
      .def(py::init([](PenaltyKind kind, double r) {
             PenaltyConfig config{kind, r};
             config.validate();
             return config;
           }),
           py::arg("kind"), py::arg("r") = 3.7)
      .def_static("lasso", &PenaltyConfig::lasso)
      .def_static("scad", &PenaltyConfig::scad, py::arg("r") = 3.7)
      .def_static("mcp", &PenaltyConfig::mcp, py::arg("r") = 3.0)
      .def_readwrite("kind", &PenaltyConfig::kind)
      .def_readwrite("r", &PenaltyConfig::r)
      .def("__repr__", [](const PenaltyConfig& p) {
        return std::string("PenaltyConfig(") + p.name() + ", r=" +
               std::to_string(p.r) + ")";
      });

  py::class_<Batch>(m, "Batch")
      .def(py::init([](Eigen::VectorXd y, Eigen::MatrixXd X, int batch_index) {
             Batch b;
             b.y = std::move(y);
             b.X = std::move(X);
             b.batch_index = batch_index;
             b.validate();
             return b;
           }),
           py::arg("y"), py::arg("X"), py::arg("batch_index") = 1)
      .def_readonly("y", &Batch::y)
      .def_readonly("X", &Batch::X)
      .def_readonly("batch_index", &Batch::batch_index)
      .def_property_readonly("n", &Batch::n)
      .def_property_readonly("p", &Batch::p);

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("penalty", &SolverConfig::penalty)
      .def_readwrite("lambda_grid_size", &SolverConfig::lambda_grid_size)
      .def_readwrite("lambda_min_ratio", &SolverConfig::lambda_min_ratio)
      .def_readwrite("cd_tol", &SolverConfig::cd_tol)
      .def_readwrite("cd_max_passes", &SolverConfig::cd_max_passes)
      .def_readwrite("refit_max_steps", &SolverConfig::refit_max_steps)
      .def_readwrite("exempt_intercept", &SolverConfig::exempt_intercept)
      .def_readwrite("fixed_active", &SolverConfig::fixed_active);

  py::class_<SolverState>(m, "SolverState")
      .def_readonly("p", &SolverState::p)
      .def_readonly("family", &SolverState::family)
      .def_readonly("batches_consumed", &SolverState::batches_consumed)
      .def_readonly("total_samples", &SolverState::total_samples)
      .def_readonly("beta", &SolverState::beta)
      .def_readonly("cum_hessian_diag", &SolverState::cum_hessian_diag)
      .def_readonly("cum_hessian_block", &SolverState::cum_hessian_block)
      .def_readonly("tracked", &SolverState::tracked)
      .def_readonly("active", &SolverState::active)
      .def_readonly("lambda_history", &SolverState::lambda_history);

  py::class_<BicTrace>(m, "BicTrace")
      .def_readonly("lambdas", &BicTrace::lambdas)
      .def_readonly("bic_values", &BicTrace::bic_values)
      .def_readonly("support_sizes", &BicTrace::support_sizes)
      .def_readonly("chosen_lambda", &BicTrace::chosen_lambda)
      .def_readonly("chosen_index", &BicTrace::chosen_index)
      .def("degenerate", &BicTrace::degenerate);

  // family-level primitives
  m.def("log_likelihood", &log_likelihood, py::arg("family"), py::arg("batch"),
        py::arg("beta"));
  m.def("score", &score, py::arg("family"), py::arg("batch"), py::arg("beta"));
  m.def("hessian_diag", &hessian_diag, py::arg("family"), py::arg("batch"),
        py::arg("beta"));
  m.def("hessian_sub", &hessian_sub, py::arg("family"), py::arg("batch"),
        py::arg("beta"), py::arg("idx"));

  // thresholding operators
  m.def("soft_threshold", &soft_threshold, py::arg("z"), py::arg("gamma"));
  m.def(
      "coord_update_lasso",
      [](double z, double w, double lam) { return coord_update_lasso({z, w}, lam); },
      py::arg("z"), py::arg("w"), py::arg("lambda"));
  m.def(
      "coord_update_scad",
      [](double z, double w, double lam, double r) {
        return coord_update_scad({z, w}, lam, r);
      },
      py::arg("z"), py::arg("w"), py::arg("lambda"), py::arg("r") = 3.7);
  m.def(
      "coord_update_mcp",
      [](double z, double w, double lam, double r) {
        return coord_update_mcp({z, w}, lam, r);
      },
      py::arg("z"), py::arg("w"), py::arg("lambda"), py::arg("r") = 3.0);
  m.def("penalty_value", &penalty_value, py::arg("penalty"), py::arg("beta"),
        py::arg("lambda"));

  // tuning
  m.def("lambda_max", &lambda_max, py::arg("z"));
  m.def("lambda_grid", &lambda_grid, py::arg("lmax"), py::arg("size"),
        py::arg("min_ratio"));
  m.def("bic", &bic, py::arg("state"), py::arg("batch"), py::arg("candidate"));
  m.def("select_lambda", &select_lambda, py::arg("state"), py::arg("batch"),
        py::arg("config"));

  // solver
  m.def(
      "compute_zw",
      [](const SolverState& state, const Batch& batch) {
        const WorkingStats zw = compute_zw(state, batch);
        return py::make_tuple(zw.z, zw.w, zw.n_total);
      },
      py::arg("state"), py::arg("batch"));
  m.def("coordinate_descent", &coordinate_descent, py::arg("state"),
        py::arg("batch"), py::arg("lambda"), py::arg("config"));
  m.def("select_active", &select_active, py::arg("candidate"));
  m.def("refit_renewable_mle", &refit_renewable_mle, py::arg("state"),
        py::arg("batch"), py::arg("active"), py::arg("refit_max_steps") = 1);
  m.def(
      "init_first_batch",
      [](const Batch& batch, const SolverConfig& config, const Family& family) {
        BicTrace trace;
        SolverState state = init_first_batch(batch, config, family, &trace);
        return py::make_tuple(std::move(state), std::move(trace));
      },
      py::arg("batch"), py::arg("config"), py::arg("family"));
  m.def("process_batch", &process_batch, py::arg("state"), py::arg("batch"),
        py::arg("config"));

  // persistence
  m.def("save_checkpoint", &save_checkpoint_file, py::arg("path"),
        py::arg("state"), py::arg("penalty"));
  m.def(
      "load_checkpoint",
      [](const std::string& path) {
        Checkpoint cp = load_checkpoint_file(path);
        return py::make_tuple(std::move(cp.state), cp.penalty);
      },
      py::arg("path"));
  m.def("read_batch", &read_batch_file, py::arg("path"), py::arg("batch_index") = 1);
  m.def("write_batch",
        [](const std::string& path, const Batch& batch) {
          write_batch_file(path, batch);
        },
        py::arg("path"), py::arg("batch"));

  // simulation
  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_readwrite("family", &ExperimentConfig::family)
      .def_readwrite("p", &ExperimentConfig::p)
      .def_readwrite("n_per_batch", &ExperimentConfig::n_per_batch)
      .def_readwrite("n_batches", &ExperimentConfig::n_batches)
      .def_readwrite("rho", &ExperimentConfig::rho)
      .def_readwrite("replications", &ExperimentConfig::replications)
      .def_readwrite("seed", &ExperimentConfig::seed)
      .def_readwrite("penalty", &ExperimentConfig::penalty)
      .def_readwrite("noise_sd", &ExperimentConfig::noise_sd)
      .def_readwrite("init_samples", &ExperimentConfig::init_samples)
      .def_readwrite("include_offline", &ExperimentConfig::include_offline)
      .def_readwrite("solver", &ExperimentConfig::solver);

  py::class_<SelectionMetrics>(m, "SelectionMetrics")
      .def_readonly("nv", &SelectionMetrics::nv)
      .def_readonly("in_rate", &SelectionMetrics::in_rate)
      .def_readonly("cs_rate", &SelectionMetrics::cs_rate)
      .def_readonly("type1", &SelectionMetrics::type1)
      .def_readonly("type2", &SelectionMetrics::type2)
      .def_readonly("l2_sq", &SelectionMetrics::l2_sq)
      .def_readonly("replications", &SelectionMetrics::replications);

  py::class_<SelectionRecord>(m, "SelectionRecord")
      .def_readonly("nv", &SelectionRecord::nv)
      .def_readonly("includes_all", &SelectionRecord::includes_all)
      .def_readonly("exact", &SelectionRecord::exact)
      .def_readonly("type1", &SelectionRecord::type1)
      .def_readonly("type2", &SelectionRecord::type2);

  py::class_<ReplicationRecord>(m, "ReplicationRecord")
      .def_readonly("replication", &ReplicationRecord::replication)
      .def_readonly("selection", &ReplicationRecord::selection)
      .def_readonly("l2_sq", &ReplicationRecord::l2_sq)
      .def_readonly("selected", &ReplicationRecord::selected)
      .def_readonly("beta_hat", &ReplicationRecord::beta_hat)
      .def_readonly("n_trajectory", &ReplicationRecord::n_trajectory)
      .def_readonly("l2_trajectory", &ReplicationRecord::l2_trajectory)
      .def_readonly("failed", &ReplicationRecord::failed)
      .def_readonly("error", &ReplicationRecord::error);

  py::class_<ExperimentResult>(m, "ExperimentResult")
      .def_readonly("metrics", &ExperimentResult::metrics)
      .def_readonly("records", &ExperimentResult::records)
      .def_readonly("has_offline", &ExperimentResult::has_offline)
      .def_readonly("offline_metrics", &ExperimentResult::offline_metrics)
      .def_readonly("offline_records", &ExperimentResult::offline_records);

  m.def("true_beta", &true_beta, py::arg("p"), py::arg("family"));
  m.def(
      "gen_covariates",
      [](int n, int p, double rho, std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        return gen_covariates(n, p, rho, rng);
      },
      py::arg("n"), py::arg("p"), py::arg("rho"), py::arg("seed"));
  m.def(
      "gen_response",
      [](const Family& family, const Eigen::MatrixXd& X,
         const Eigen::VectorXd& beta0, std::uint64_t seed, double noise_sd) {
        std::mt19937_64 rng(seed);
        return gen_response(family, X, beta0, rng, noise_sd);
      },
      py::arg("family"), py::arg("X"), py::arg("beta0"), py::arg("seed"),
      py::arg("noise_sd") = 1.0);
  m.def("eval_selection", &eval_selection, py::arg("s_hat"), py::arg("s_true"),
        py::arg("p"));
  m.def("l2_error", &l2_error, py::arg("beta_hat"), py::arg("beta0"));
  m.def("r_squared", &r_squared, py::arg("y"), py::arg("y_hat"));
  m.def("run_experiment", &run_experiment, py::arg("config"));
  m.def("method_label", &method_label, py::arg("penalty"), py::arg("offline"));
}
