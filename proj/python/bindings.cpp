#include "koopbrs/control.hpp"
#include "koopbrs/errors.hpp"
#include "koopbrs/io.hpp"
#include "koopbrs/pipeline.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace koopbrs;

namespace {

void bind_errors(py::module_& m) {
  static py::exception<Error> base(m, "KoopbrsError");
  py::register_exception<DimensionMismatch>(m, "DimensionMismatch", base.ptr());
  py::register_exception<EmptyPolytope>(m, "EmptyPolytope", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<KsRejected>(m, "KsRejected", base.ptr());
  py::register_exception<NotInBrs>(m, "NotInBrs", base.ptr());
  py::register_exception<GuaranteeViolation>(m, "GuaranteeViolation", base.ptr());
  py::register_exception<EmptyAdmissible>(m, "EmptyAdmissible", base.ptr());
}

void bind_sets(py::module_& m) {
  py::class_<Box>(m, "Box")
      .def(py::init<Vec, Vec>(), py::arg("center"), py::arg("radii"))
      .def_static("from_bounds", &Box::from_bounds, py::arg("lower"), py::arg("upper"))
      .def_readonly("center", &Box::center)
      .def_readonly("radii", &Box::radii)
      .def("lower", &Box::lower)
      .def("upper", &Box::upper)
      .def("volume", &Box::volume)
      .def_property_readonly("dim", &Box::dim);

  py::class_<HPolytope>(m, "HPolytope")
      .def(py::init<Mat, Vec>(), py::arg("H"), py::arg("h"))
      .def_property_readonly("H", &HPolytope::H)
      .def_property_readonly("h", &HPolytope::h)
      .def_property_readonly("dim", &HPolytope::dim)
      .def_property_readonly("rows", &HPolytope::rows)
      .def("__repr__", [](const HPolytope& P) {
        return "<HPolytope dim=" + std::to_string(P.dim()) + " rows=" + std::to_string(P.rows()) + ">";
      });

  m.def("from_interval_box", &from_interval_box, py::arg("lower"), py::arg("upper"));
  m.def("to_polytope", &to_polytope);
  m.def("support", py::overload_cast<const HPolytope&, const Vec&>(&support), py::arg("P"), py::arg("direction"));
  m.def("erode", &erode);
  m.def("intersect", &intersect);
  m.def("is_empty", &is_empty);
  m.def("contains_point", &contains_point, py::arg("P"), py::arg("x"), py::arg("tol") = 1e-8);
  m.def("remove_redundant", &remove_redundant);
  m.def("project_leading", &project_leading, py::arg("P"), py::arg("k"));
  m.def("chebyshev_center", [](const HPolytope& P) {
    const auto ball = chebyshev_center(P);
    return py::make_tuple(ball.center, ball.radius);
  });
}

void bind_models(py::module_& m) {
  py::class_<Lifting>(m, "Lifting")
      .def_static("from_descriptors", &Lifting::from_descriptors, py::arg("state_dim"), py::arg("descriptors"))
      .def_static("identity", &Lifting::identity)
      .def_property_readonly("state_dim", &Lifting::state_dim)
      .def_property_readonly("dim", &Lifting::dim)
      .def("descriptors", &Lifting::descriptors)
      .def("lift", &Lifting::lift);

  py::class_<Dataset>(m, "Dataset")
      .def_readonly("X", &Dataset::X)
      .def_readonly("U", &Dataset::U)
      .def_readonly("Xp", &Dataset::Xp)
      .def("__len__", &Dataset::size);

  py::class_<SystemSpec>(m, "SystemSpec")
      .def_readonly("name", &SystemSpec::name)
      .def_readonly("domain", &SystemSpec::domain)
      .def_readonly("inputs", &SystemSpec::inputs)
      .def_readonly("target", &SystemSpec::target)
      .def_readonly("dt", &SystemSpec::dt);
  m.def("duffing_spec", &duffing_spec);
  m.def("pendulum_spec", &pendulum_spec);
  m.def("duffing_step", &duffing_step, py::arg("x"), py::arg("u"), py::arg("dt") = 0.025);
  m.def("pendulum_step", &pendulum_step, py::arg("x"), py::arg("u"), py::arg("dt") = 0.1);
  m.def("sample_random", &sample_random, py::arg("spec"), py::arg("count"), py::arg("seed"));
  m.def("sample_grid", &sample_grid, py::arg("spec"), py::arg("spacing"), py::arg("cap") = 10'000'000);

  py::class_<GlobalFit>(m, "GlobalFit")
      .def_readonly("A", &GlobalFit::A)
      .def_readonly("B", &GlobalFit::B)
      .def_readonly("center", &GlobalFit::center)
      .def_readonly("residual", &GlobalFit::residual);
  m.def("fit_global", &fit_global);

  py::class_<KoopmanModel>(m, "KoopmanModel")
      .def_readonly("lifting", &KoopmanModel::lifting)
      .def_readonly("A", &KoopmanModel::A)
      .def_readonly("B", &KoopmanModel::B)
      .def_readonly("W", &KoopmanModel::W);
}

void bind_pipeline(py::module_& m) {
  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def_readonly("system", &ExperimentConfig::system)
      .def_readonly("lifting", &ExperimentConfig::lifting)
      .def_readwrite("horizon", &ExperimentConfig::horizon)
      .def_readwrite("threshold", &ExperimentConfig::threshold)
      .def_readwrite("seed", &ExperimentConfig::seed)
      .def_property(
          "mode", [](const ExperimentConfig& c) { return to_string(c.mode); },
          [](ExperimentConfig& c, const std::string& s) { c.mode = parse_mode(s); });
  m.def("parse_config", &parse_config, py::arg("text"), py::arg("source") = "<config>");
  m.def("load_config", &load_config);

  py::class_<DataSets>(m, "DataSets").def_readonly("fit", &DataSets::fit);
  m.def("generate_data", &generate_data);

  py::class_<FitOutcome>(m, "FitOutcome")
      .def_readonly("model", &FitOutcome::model)
      .def_readonly("residual", &FitOutcome::residual)
      .def_readonly("lipschitz", &FitOutcome::lipschitz)
      .def_readonly("b", &FitOutcome::b)
      .def_readonly("b_x", &FitOutcome::b_x)
      .def_readonly("route", &FitOutcome::route);
  m.def("fit_model", &fit_model);

  py::class_<BrsResult>(m, "BrsResult")
      .def_property_readonly("horizon", &BrsResult::horizon)
      .def_readonly("warnings", &BrsResult::warnings)
      .def("pieces", [](const BrsResult& R, int k) { return R.layers.at(static_cast<std::size_t>(k)).size(); })
      .def("layer", [](const BrsResult& R, int k) {
        std::vector<HPolytope> out;
        for (const auto& piece : R.layers.at(static_cast<std::size_t>(k))) out.push_back(piece.polytope);
        return out;
      });
  m.def("compute_brs", [](const ExperimentConfig& cfg, const FitOutcome& f, const Dataset& data) {
    py::gil_scoped_release release;
    return compute_brs(cfg, f, data);
  });
  m.def("brs_global", &brs_global, py::arg("model"), py::arg("target"), py::arg("S_x"), py::arg("S_u"), py::arg("K"));
  m.def("membership", &membership, py::arg("R"), py::arg("x"), py::arg("k"), py::arg("tol") = 1e-8);

  py::class_<ControlAction>(m, "ControlAction")
      .def_readonly("u", &ControlAction::u)
      .def_readonly("piece", &ControlAction::piece)
      .def_readonly("at_target", &ControlAction::at_target);
  m.def("extract_input", &extract_input, py::arg("R"), py::arg("x"), py::arg("k"));

  py::class_<Trajectory>(m, "Trajectory")
      .def_readonly("states", &Trajectory::states)
      .def_readonly("inputs", &Trajectory::inputs)
      .def_readonly("reached", &Trajectory::reached)
      .def_readonly("steps_used", &Trajectory::steps_used);
  m.def("simulate", &simulate, py::arg("cfg"), py::arg("R"), py::arg("x0"));

  m.def("_brs_json", [](const BrsResult& R) { return io::to_json(R).dump(); });
  m.def("_brs_from_json", [](const std::string& s) { return io::brs_from_json(io::json::parse(s)); });
  m.def(
      "_export_bundle",
      [](const BrsResult& R, const Trajectory* T) { return io::export_bundle(R, T).dump(); }, py::arg("R"),
      py::arg("trajectory") = nullptr);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Koopman-lifted backward reachable sets from data";
  bind_errors(m);
  bind_sets(m);
  bind_models(m);
  bind_pipeline(m);
}
