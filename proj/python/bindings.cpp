// Python bindings: check groups and a few core operators.

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mrlab/fractional.hpp"
#include "mrlab/heat.hpp"
#include "mrlab/suite.hpp"

namespace py = pybind11;
using namespace mrlab;

PYBIND11_MODULE(_mrlab, m) {
  m.doc() = "Maximal regularity and boundary perturbation checks";
  py::register_exception<LinalgError>(m, "LinalgError", PyExc_ValueError);

  m.def("check_groups", &check_groups);
  m.def(
      "run_group_json",
      [](const std::string& name, const std::string& config) {
        SuiteConfig cfg = SuiteConfig::from_json(nlohmann::json::parse(config));
        cfg.validate();
        Report rep;
        {
          py::gil_scoped_release release;
          rep = run_group(name, cfg);
        }
        return rep.to_json().dump();
      },
      py::arg("name"), py::arg("config") = "{}");

  m.def("heat_generator", [](int N, bool perturbed) {
    const BoundarySystem bs = build_heat(N);
    return perturbed ? bs.realize_perturbed().A : bs.realize_A().A;
  }, py::arg("N") = 64, py::arg("perturbed") = true);
  m.def("heat_boundary_row", [](int N) { return build_heat(N).k_state(); }, py::arg("N") = 64);
  m.def("resolvent", [](const CMatrix& a, cplx lambda) { return resolvent(a, lambda); });
  m.def("frac_power_contour", [](const CMatrix& a, double beta) { return frac_power_contour(a, beta); });
  m.def("frac_power_eig", &frac_power_eig);
  m.def("expm", &expm);
}
