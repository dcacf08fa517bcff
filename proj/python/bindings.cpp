#include "dbalign/align.hpp"
#include "dbalign/error.hpp"
#include "dbalign/harness.hpp"
#include "dbalign/measures.hpp"
#include "dbalign/model.hpp"
#include "dbalign/synth.hpp"
#include "dbalign/theory.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace dbalign;

namespace {

CanonicalModel to_model(const std::vector<double>& rho) { return CanonicalModel(rho); }

py::dict verdict_dict(const RegimeVerdict& v) {
  py::dict d;
  d["quantity"] = v.quantity;
  d["verdict"] = std::string(to_string(v.verdict));
  d["margin"] = v.margin;
  d["failure_probability_bound"] = v.failure_probability_bound;
  d["asymptotic_only"] = v.asymptotic_only;
  return d;
}

py::dict window_dict(const ThresholdWindow& w) {
  py::dict d;
  d["feasible"] = w.feasible;
  d["lower"] = w.lower;
  d["upper"] = w.upper;
  d["tau"] = w.feasible ? py::cast(w.tau) : py::none();
  d["gap"] = w.gap;
  return d;
}

py::dict errors_dict(const ErrorCounts& e) {
  py::dict d;
  d["false_negatives"] = e.false_negatives;
  d["false_positives"] = e.false_positives;
  d["exact"] = e.exact;
  return d;
}

}  // namespace

PYBIND11_MODULE(_dbalign, m) {
  m.doc() = "Gaussian database alignment: canonical models, MAP and threshold alignment, sweeps";

  // Held for the lifetime of the interpreter; never released.
  static PyObject* error_type = py::exception<Error>(m, "DbalignError", PyExc_ValueError).inc_ref().ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object err = py::handle(error_type)(e.what());
      err.attr("kind") = std::string(to_string(e.kind()));
      PyErr_SetObject(error_type, err.ptr());
    }
  });

  py::class_<CorrelationModel>(m, "CorrelationModel")
      .def(py::init([](Vector mu_a, Vector mu_b, Matrix sigma_a, Matrix sigma_b, Matrix sigma_ab) {
             return CorrelationModel{std::move(mu_a), std::move(mu_b), std::move(sigma_a), std::move(sigma_b),
                                     std::move(sigma_ab)};
           }),
           py::arg("mu_a"), py::arg("mu_b"), py::arg("sigma_a"), py::arg("sigma_b"), py::arg("sigma_ab"))
      .def_static("from_canonical", &CorrelationModel::from_canonical, py::arg("rho"))
      .def_readwrite("mu_a", &CorrelationModel::mu_a)
      .def_readwrite("mu_b", &CorrelationModel::mu_b)
      .def_readwrite("sigma_a", &CorrelationModel::sigma_a)
      .def_readwrite("sigma_b", &CorrelationModel::sigma_b)
      .def_readwrite("sigma_ab", &CorrelationModel::sigma_ab);

  m.def(
      "validate_covariance",
      [](const CorrelationModel& model) {
        const auto v = validate_covariance(model);
        return py::dict(py::arg("min_eigenvalue_a") = v.min_eigenvalue_a,
                        py::arg("min_eigenvalue_b") = v.min_eigenvalue_b,
                        py::arg("min_eigenvalue_joint") = v.min_eigenvalue_joint);
      },
      py::arg("model"));

  m.def(
      "canonicalize",
      [](const CorrelationModel& model, double drop_tolerance) {
        const auto c = canonicalize(model, drop_tolerance);
        py::dict d;
        d["rho"] = c.model.rho();
        d["offset_a"] = c.transform_a.offset;
        d["map_a"] = c.transform_a.linear_map;
        d["offset_b"] = c.transform_b.offset;
        d["map_b"] = c.transform_b.linear_map;
        return d;
      },
      py::arg("model"), py::arg("drop_tolerance") = kDefaultDropTolerance);

  m.def(
      "apply_transform",
      [](const Vector& offset, const Matrix& linear_map, const Matrix& rows) {
        return apply_transform(FeatureTransform{offset, linear_map}, rows);
      },
      py::arg("offset"), py::arg("linear_map"), py::arg("rows"));

  m.def(
      "mutual_information", [](const std::vector<double>& rho) { return mutual_information(to_model(rho)); },
      py::arg("rho"));
  m.def("sigma", [](const std::vector<double>& rho) { return sigma(to_model(rho)); }, py::arg("rho"));
  m.def("mutual_information_general", &mutual_information_general, py::arg("model"));
  m.def("sigma_general", &sigma_general, py::arg("model"));
  m.def(
      "log_likelihood_ratio",
      [](const std::vector<double>& rho, const std::vector<double>& x, const std::vector<double>& y) {
        return log_likelihood_ratio(to_model(rho), x, y);
      },
      py::arg("rho"), py::arg("x"), py::arg("y"));

  m.def(
      "sample_instance",
      [](std::size_t n, const std::vector<double>& rho, std::uint64_t master_seed, std::uint64_t trial_index) {
        const auto inst = sample_instance(n, to_model(rho), derive_trial_seed(master_seed, trial_index));
        py::dict d;
        d["a"] = inst.databases.a;
        d["b"] = inst.databases.b;
        d["users_a"] = inst.databases.users_a;
        d["users_b"] = inst.databases.users_b;
        d["truth"] = inst.truth_permutation;
        return d;
      },
      py::arg("n"), py::arg("rho"), py::arg("master_seed") = 0, py::arg("trial_index") = 0);

  m.def(
      "score_matrix",
      [](const Matrix& a, const Matrix& b, const std::vector<double>& rho) {
        const auto n = static_cast<std::size_t>(a.rows());
        return score_matrix(DatabasePair{default_ids('u', n), default_ids('v', n), a, b}, to_model(rho)).scores;
      },
      py::arg("a"), py::arg("b"), py::arg("rho"));

  m.def(
      "map_align",
      [](const Matrix& scores) {
        const auto a = max_weight_assignment(scores);
        return py::make_tuple(a.column_of_row, a.weight);
      },
      py::arg("scores"), "Maximum-weight assignment: (column_of_row, weight).");
  m.def(
      "brute_force_align",
      [](const Matrix& scores, std::size_t cap) {
        const auto a = brute_force_assignment(scores, cap);
        return py::make_tuple(a.column_of_row, a.weight);
      },
      py::arg("scores"), py::arg("cap") = kDefaultBruteForceCap);
  m.def(
      "bht_align",
      [](const Matrix& scores, double tau) {
        if (!std::isfinite(tau)) throw Error(ErrorKind::InvalidArgument, "tau must be finite");
        std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
        for (Eigen::Index u = 0; u < scores.rows(); ++u)
          for (Eigen::Index v = 0; v < scores.cols(); ++v)
            if (scores(u, v) >= tau) pairs.emplace_back(u, v);
        return pairs;
      },
      py::arg("scores"), py::arg("tau"), "Index pairs (row, column) with score >= tau.");
  m.def(
      "select_threshold",
      [](double info, double sig, std::size_t n, double eps_fn, double eps_fp) {
        return window_dict(select_threshold({info, sig}, n, eps_fn, eps_fp));
      },
      py::arg("mutual_information"), py::arg("sigma"), py::arg("n"), py::arg("eps_fn"), py::arg("eps_fp"));
  m.def(
      "score_assignment",
      [](const std::vector<std::size_t>& predicted, const std::vector<std::size_t>& truth) {
        return errors_dict(score_assignment(predicted, truth));
      },
      py::arg("predicted"), py::arg("truth"));
  m.def(
      "score_threshold",
      [](const Matrix& scores, double tau, const std::vector<std::size_t>& truth) {
        return errors_dict(score_threshold(scores, tau, truth));
      },
      py::arg("scores"), py::arg("tau"), py::arg("truth"));

  m.def(
      "cycle_type",
      [](const std::vector<std::size_t>& perm) { return cycle_type_of_permutation(perm).counts; },
      py::arg("permutation"));
  m.def("shifted_laplacian_det", &shifted_laplacian_det, py::arg("ell"), py::arg("s"), py::arg("t"));
  m.def(
      "bhattacharyya_r",
      [](const std::map<std::size_t, std::size_t>& counts, const std::vector<double>& rho) {
        return bhattacharyya_r(CycleType{counts}, to_model(rho));
      },
      py::arg("cycle_counts"), py::arg("rho"));
  m.def(
      "map_achievability_margin",
      [](const std::vector<double>& rho, std::size_t n) { return verdict_dict(map_achievability_margin(to_model(rho), n)); },
      py::arg("rho"), py::arg("n"));
  m.def(
      "map_converse_predicate",
      [](double rho, std::size_t d, std::size_t n) { return verdict_dict(map_converse_predicate(rho, d, n)); },
      py::arg("rho"), py::arg("d"), py::arg("n"));
  m.def("bht_converse_bound", &bht_converse_bound, py::arg("mutual_information"), py::arg("n"));

  m.def(
      "run_sweep",
      [](const std::string& config_json) {
        const auto config = sweep_config_from_json(nlohmann::json::parse(config_json));
        SweepResult r;
        {
          py::gil_scoped_release release;
          r = config.output_dir.empty() ? run_sweep(config) : sweep(config);
        }
        return cells_to_csv(r.cells);
      },
      py::arg("config_json"),
      "Runs a sweep from a JSON config string and returns cells.csv text. Artifacts are written when "
      "output_dir is set.");
}
