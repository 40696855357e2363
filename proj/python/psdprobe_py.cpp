#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "psdprobe/harness.hpp"
#include "psdprobe/mv_testers.hpp"
#include "psdprobe/spectrum.hpp"
#include "psdprobe/vmv_testers.hpp"

namespace py = pybind11;
using namespace psdprobe;

PYBIND11_MODULE(_psdprobe, m) {
  m.doc() = "PSD testing with matrix-vector and vector-matrix-vector queries";

  py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<DenseOperator>(m, "DenseOperator")
      .def(py::init([](const Matrix& A, std::uint64_t seed) { return DenseOperator(A, seed); }),
           py::arg("A"), py::arg("seed") = 0)
      .def_static("identity", &DenseOperator::identity)
      .def_property_readonly("dim", &DenseOperator::dim)
      .def_property_readonly("matrix", &DenseOperator::backing)
      .def("quad_form", &DenseOperator::quad_form)
      .def("bilinear", &DenseOperator::bilinear)
      .def("mat_vec", &DenseOperator::mat_vec)
      .def_property_readonly("vmv_queries", &DenseOperator::vmv_queries)
      .def_property_readonly("mv_queries", &DenseOperator::mv_queries);

  py::class_<Verdict>(m, "Verdict")
      .def_readonly("is_psd", &Verdict::is_psd)
      .def_readonly("witness", &Verdict::witness)
      .def_readonly("queries_used", &Verdict::queries_used)
      .def_readonly("statistic", &Verdict::statistic)
      .def_property_readonly("one_sided",
                             [](const Verdict& v) { return v.mode == TesterMode::one_sided; });

  py::class_<EigenEstimate>(m, "EigenEstimate")
      .def_readonly("values", &EigenEstimate::values)
      .def_readonly("error_bound", &EigenEstimate::error_bound)
      .def_readonly("queries", &EigenEstimate::queries);

  py::class_<PsdFit>(m, "PsdFit").def_readonly("cost", &PsdFit::cost).def_readonly("Y", &PsdFit::Y);

  m.def("rotated_diag",
        [](std::vector<double> ev, std::uint64_t seed) { return gen_rotated_diag({std::move(ev), seed}); },
        py::arg("eigenvalues"), py::arg("seed") = 0);
  m.def("wishart", &gen_wishart, py::arg("d"), py::arg("seed") = 0);
  m.def("family_spectrum", &make_family_spectrum, py::arg("family"), py::arg("d"), py::arg("eps"),
        py::arg("p"), py::arg("seed") = 0);

  const Constants defaults = Constants::defaults();
  m.def(
      "oja_l1_tester",
      [defaults](const DenseOperator& op, double eps, std::uint64_t seed) {
        return oja_l1_tester(op, eps, OjaConfig::from_constants(defaults), seed);
      },
      py::arg("op"), py::arg("eps"), py::arg("seed") = 0);
  m.def(
      "bilinear_sketch_tester",
      [defaults](const DenseOperator& op, double eps, std::uint64_t seed) {
        return bilinear_sketch_tester(op, eps, defaults.c_psd, seed, defaults);
      },
      py::arg("op"), py::arg("eps"), py::arg("seed") = 0);
  m.def(
      "adaptive_l2_tester",
      [defaults](const DenseOperator& op, double eps, std::uint64_t seed) {
        return adaptive_l2_tester(op, eps, seed, defaults);
      },
      py::arg("op"), py::arg("eps"), py::arg("seed") = 0);
  m.def(
      "nonadaptive_l1_tester",
      [defaults](const DenseOperator& op, double eps, std::uint64_t seed) {
        return nonadaptive_l1_tester(op, eps, seed, defaults);
      },
      py::arg("op"), py::arg("eps"), py::arg("seed") = 0);
  m.def(
      "krylov_tester",
      [defaults](const DenseOperator& op, double eps, double p, double norm_estimate,
                 std::uint64_t seed) { return krylov_tester(op, eps, p, norm_estimate, seed, defaults); },
      py::arg("op"), py::arg("eps"), py::arg("p") = 1.0, py::arg("norm_estimate") = 0.0,
      py::arg("seed") = 0);
  m.def(
      "nonadaptive_mv_tester",
      [defaults](const DenseOperator& op, double eps, double p, std::uint64_t seed) {
        return nonadaptive_mv_tester(op, eps, p, seed, defaults);
      },
      py::arg("op"), py::arg("eps"), py::arg("p") = 1.0, py::arg("seed") = 0);
  m.def(
      "top_eigs_signed",
      [defaults](const DenseOperator& op, int k, double eps, std::uint64_t seed) {
        return top_eigs_signed(op, k, eps, seed, defaults);
      },
      py::arg("op"), py::arg("k"), py::arg("eps"), py::arg("seed") = 0);
  m.def("psd_rank_k_fit", &psd_rank_k_fit, py::arg("M1"), py::arg("M2"), py::arg("Q"), py::arg("k"),
        py::arg("seed") = 0);

  m.def(
      "run_experiment",
      [](const std::string& config_json) {
        ExperimentConfig cfg = ExperimentConfig::from_json(config_json);
        cfg.validate();
        ExperimentResult res = run_experiment(cfg);
        return py::make_tuple(records_csv(res.records), res.summary_json);
      },
      py::arg("config_json"), "Runs an experiment; returns (trials_csv, summary_json).");
}
