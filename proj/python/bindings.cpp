#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fblts/scenario.hpp"

namespace py = pybind11;
using namespace fblts;

namespace {

template <class T> py::array_t<T> to_array(const std::vector<T> &v) {
  return py::array_t<T>(v.size(), v.data());
}

py::dict record_columns(const RunRecord &r) {
  std::vector<double> t, mass, vort, pv, courant;
  std::vector<long> step;
  for (const RunRow &row : r.rows) {
    step.push_back(row.step);
    t.push_back(row.t);
    mass.push_back(row.mass);
    vort.push_back(row.absVorticity);
    pv.push_back(row.pvVolume);
    courant.push_back(row.maxCourant);
  }
  py::dict d;
  d["step"] = to_array(step);
  d["t"] = to_array(t);
  d["mass"] = to_array(mass);
  d["abs_vorticity"] = to_array(vort);
  d["pv_volume"] = to_array(pv);
  d["max_courant"] = to_array(courant);
  return d;
}

py::dict work_dict(const WorkCounters &w) {
  py::dict d;
  d["fast_cell_evals"] = w.fastCellEvals;
  d["fast_edge_evals"] = w.fastEdgeEvals;
  d["slow_cell_evals"] = w.slowCellEvals;
  d["slow_edge_evals"] = w.slowEdgeEvals;
  return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "TRiSK shallow-water core with FB-LTS time stepping";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<RunAbort>(m, "RunAbort", PyExc_RuntimeError);
  py::register_exception<MeshError>(m, "MeshError", PyExc_ValueError);

  py::class_<Mesh>(m, "Mesh")
      .def_readonly("n_cells", &Mesh::nCells)
      .def_readonly("n_edges", &Mesh::nEdges)
      .def_readonly("n_vertices", &Mesh::nVertices)
      .def_property_readonly("x_cell", [](const Mesh &s) { return to_array(s.xCell); })
      .def_property_readonly("y_cell", [](const Mesh &s) { return to_array(s.yCell); })
      .def_property_readonly("area_cell", [](const Mesh &s) { return to_array(s.areaCell); })
      .def_property_readonly("area_dual", [](const Mesh &s) { return to_array(s.areaDual); })
      .def_property_readonly("l_edge", [](const Mesh &s) { return to_array(s.lEdge); })
      .def_property_readonly("d_edge", [](const Mesh &s) { return to_array(s.dEdge); })
      .def("to_json", &mesh_to_json)
      .def("save", &save_mesh, py::arg("path"));

  py::class_<ValidationReport>(m, "ValidationReport")
      .def_readonly("boundary_edges", &ValidationReport::boundaryEdges)
      .def_readonly("conservation_hypothesis", &ValidationReport::conservationHypothesis)
      .def("all_passed", &ValidationReport::all_passed)
      .def_property_readonly("checks", [](const ValidationReport &r) {
        py::dict d;
        for (const auto &c : r.checks)
          d[py::str(c.name)] = py::make_tuple(c.passed, c.worstIndex, c.worstMagnitude);
        return d;
      });

  m.def("hex_mesh", &build_periodic_hex_mesh, py::arg("nx"), py::arg("ny"),
        py::arg("dc"), py::arg("resting_depth") = 1000.0);
  m.def("load_mesh", &load_mesh, py::arg("path"));
  m.def("validate_mesh", &validate_mesh, py::arg("mesh"));

  m.def(
      "run",
      [](const std::string &configJson) {
        ScenarioConfig cfg = parse_config(configJson);
        ScenarioResult r;
        {
          py::gil_scoped_release unlock;
          r = run_scenario(cfg);
        }
        py::dict d;
        d["h"] = to_array(r.final.h);
        d["u"] = to_array(r.final.u);
        d["eta"] = to_array(r.eta);
        d["steps"] = r.steps;
        d["record"] = record_columns(r.record);
        d["work"] = work_dict(r.work);
        d["expected_work"] = work_dict(r.expectedWork);
        return d;
      },
      py::arg("config_json"),
      "Run a scenario given as a JSON config string.");

  m.def(
      "conservation",
      [](const std::string &configJson, int steps) {
        ScenarioConfig cfg = parse_config(configJson);
        ConservationReport r;
        {
          py::gil_scoped_release unlock;
          r = conservation_driver(cfg, steps);
        }
        py::dict d;
        d["steps"] = r.steps;
        d["mass_drift"] = r.massDrift;
        d["vorticity_drift"] = r.vorticityDrift;
        d["pv_volume_drift"] = r.pvVolumeDrift;
        d["diagnostic_gap"] = r.diagnosticGap;
        return d;
      },
      py::arg("config_json"), py::arg("steps") = 200);
}
