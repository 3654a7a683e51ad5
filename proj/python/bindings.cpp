#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "prescurv/config.hpp"
#include "prescurv/estimates.hpp"
#include "prescurv/field_io.hpp"
#include "prescurv/run.hpp"
#include "prescurv/spectral.hpp"

namespace py = pybind11;
using namespace prescurv;

namespace {

py::array_t<double> to_numpy(const ScalarField& f) {
  py::array_t<double> a({f.g->n1, f.g->n2});
  std::copy(f.v.begin(), f.v.end(), a.mutable_data());
  return a;
}

ScalarField from_numpy(const GridPtr& g,
                       const py::array_t<double, py::array::c_style |
                                                     py::array::forcecast>& a) {
  if (a.ndim() != 2 || a.shape(0) != g->n1 || a.shape(1) != g->n2)
    throw std::invalid_argument("field array must have shape (n1, n2)");
  ScalarField f(g);
  std::copy(a.data(), a.data() + f.v.size(), f.v.begin());
  return f;
}

}  // namespace

PYBIND11_MODULE(_prescurv, m) {
  m.doc() = "conformal solver for prescribed negative curvature";

  py::class_<Grid, std::shared_ptr<Grid>>(m, "Grid")
      .def_readonly("n1", &Grid::n1)
      .def_readonly("n2", &Grid::n2)
      .def_readonly("r_in", &Grid::r_in)
      .def_readonly("r_out", &Grid::r_out)
      .def_readonly("lx", &Grid::lx)
      .def_readonly("ly", &Grid::ly)
      .def_property_readonly(
          "kind",
          [](const Grid& g) {
            return g.kind == GridKind::annulus ? "annulus" : "rectangle";
          })
      .def("size", &Grid::size)
      .def("is_boundary", &Grid::is_boundary)
      .def("boundary_distance", &Grid::boundary_distance);

  m.def("build_annulus", &build_annulus, py::arg("r_in"), py::arg("r_out"),
        py::arg("n_r"), py::arg("n_theta"));
  m.def("build_rectangle", &build_rectangle, py::arg("lx"), py::arg("ly"),
        py::arg("nx"), py::arg("ny"));

  py::class_<ScalarField>(m, "ScalarField")
      .def(py::init(&from_numpy), py::arg("grid"), py::arg("values"))
      .def_property_readonly("grid",
                             [](const ScalarField& f) { return f.g; })
      .def("to_numpy", &to_numpy);
  m.def("zeros", [](const GridPtr& g) { return ScalarField(g); },
        py::arg("grid"));
  m.def("field", &from_numpy, py::arg("grid"), py::arg("values"));

  m.def("flat_laplacian", &flat_laplacian);
  m.def("dirichlet_energy", &dirichlet_energy);
  m.def("boundary_flux_integral", &boundary_flux_integral);
  m.def("integrate", &integrate);

  py::class_<ConformalMetric>(m, "ConformalMetric")
      .def_readonly("h", &ConformalMetric::h)
      .def_readonly("K0", &ConformalMetric::K0)
      .def_readonly("weights", &ConformalMetric::weights)
      .def_property_readonly("grid",
                             [](const ConformalMetric& m_) { return m_.g; });
  m.def("flat_metric", &flat_metric);
  m.def("cusp_metric", &cusp_metric);
  m.def("poincare_metric", &poincare_metric);
  m.def("log4_metric", &log4_metric);
  m.def("from_factor", &from_factor);
  m.def("curvature_conformal", &curvature_conformal);

  py::class_<CurvatureProblem>(m, "CurvatureProblem")
      .def_readonly("metric", &CurvatureProblem::metric)
      .def_readonly("K", &CurvatureProblem::K)
      .def_readonly("collar_width", &CurvatureProblem::collar_width);
  m.def(
      "scaled_target",
      [](const ConformalMetric& base, double value, double collar) {
        TargetSpec spec;
        spec.kind = TargetKind::scale;
        spec.value = value;
        return blend_target(base, spec, collar);
      },
      py::arg("metric"), py::arg("value"), py::arg("collar_width"));
  m.def(
      "offset_target",
      [](const ConformalMetric& base, double value, double collar) {
        TargetSpec spec;
        spec.kind = TargetKind::offset;
        spec.value = value;
        return blend_target(base, spec, collar);
      },
      py::arg("metric"), py::arg("value"), py::arg("collar_width"));
  m.def("make_problem", &make_problem, py::arg("metric"), py::arg("K"),
        py::arg("collar_width"));

  m.def("laplace_beltrami", &laplace_beltrami);
  m.def("curvature_of", &curvature_of);
  m.def("functional_S", &functional_S);
  m.def("gradient_S", &gradient_S);
  m.def("domain_area", &domain_area);

  py::class_<Residual>(m, "Residual")
      .def_readonly("b", &Residual::b)
      .def_readonly("S", &Residual::S)
      .def_readonly("b_l2", &Residual::b_l2);
  m.def("residual_b", &residual_b);

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_property(
          "method",
          [](const SolverConfig& c) {
            return c.method == SolveMethod::newton ? "newton" : "gradient";
          },
          [](SolverConfig& c, const std::string& v) {
            if (v == "newton")
              c.method = SolveMethod::newton;
            else if (v == "gradient")
              c.method = SolveMethod::gradient;
            else
              throw std::invalid_argument("method must be newton or gradient");
          })
      .def_readwrite("tol_b", &SolverConfig::tol_b)
      .def_readwrite("max_iter", &SolverConfig::max_iter)
      .def_readwrite("cg_tol", &SolverConfig::cg_tol)
      .def_readwrite("cg_max_iter", &SolverConfig::cg_max_iter)
      .def_readwrite("seed", &SolverConfig::seed)
      .def_readwrite("history_stride", &SolverConfig::history_stride);

  py::class_<IterationRecord>(m, "IterationRecord")
      .def_readonly("iter", &IterationRecord::iter)
      .def_readonly("S", &IterationRecord::S)
      .def_readonly("b_l2", &IterationRecord::b_l2)
      .def_readonly("grad_norm", &IterationRecord::grad_norm)
      .def_readonly("step_size", &IterationRecord::step_size)
      .def_readonly("lap_sigma_l2", &IterationRecord::lap_sigma_l2);

  py::class_<BoundaryReport>(m, "BoundaryReport")
      .def_readonly("max_abs_sigma", &BoundaryReport::max_abs_sigma)
      .def_readonly("max_abs_dn_sigma", &BoundaryReport::max_abs_dn_sigma)
      .def_readonly("max_abs_lap_sigma", &BoundaryReport::max_abs_lap_sigma);

  py::class_<SolveResult>(m, "SolveResult")
      .def_readonly("sigma", &SolveResult::sigma)
      .def_readonly("history", &SolveResult::history)
      .def_readonly("converged", &SolveResult::converged)
      .def_readonly("boundary_report", &SolveResult::boundary_report);

  m.def("newton_solve", &newton_solve, py::arg("problem"), py::arg("sigma0"),
        py::arg("config"));
  m.def("gradient_descent_solve", &gradient_descent_solve, py::arg("problem"),
        py::arg("sigma0"), py::arg("config"));
  m.def("solve", &solve, py::arg("problem"), py::arg("sigma0"),
        py::arg("config"));

  py::class_<EigenPair>(m, "EigenPair")
      .def_readonly("lam", &EigenPair::lambda)
      .def_readonly("phi", &EigenPair::phi);
  py::class_<Spectrum>(m, "Spectrum").def_readonly("pairs", &Spectrum::pairs);
  m.def(
      "dirichlet_eigenpairs",
      [](const ConformalMetric& m_, int k, std::uint64_t seed) {
        EigenOptions opt;
        opt.seed = seed;
        return dirichlet_eigenpairs(m_, k, opt);
      },
      py::arg("metric"), py::arg("k"), py::arg("seed") = 1);
  m.def("green_apply", &green_apply, py::arg("metric"), py::arg("tau"),
        py::arg("cg_tol") = 1e-12);

  py::class_<EstimateReport>(m, "EstimateReport")
      .def_readonly("B1", &EstimateReport::B1)
      .def_readonly("B2", &EstimateReport::B2)
      .def_readonly("B3", &EstimateReport::B3)
      .def_readonly("D2", &EstimateReport::D2)
      .def_readonly("mu", &EstimateReport::mu)
      .def_readonly("max_abs_g", &EstimateReport::max_abs_g)
      .def_readonly("identity_residual", &EstimateReport::identity_residual)
      .def_readonly("laplacian_energy", &EstimateReport::laplacian_energy)
      .def_readonly("boundary_term", &EstimateReport::boundary_term)
      .def_readonly("by_parts_lhs", &EstimateReport::by_parts_lhs)
      .def_readonly("by_parts_rhs", &EstimateReport::by_parts_rhs)
      .def_readonly("by_parts_residual", &EstimateReport::by_parts_residual)
      .def("ok", &EstimateReport::ok);
  m.def("b_terms_report", &b_terms_report);

  m.def("write_field", &write_field, py::arg("dir"), py::arg("name"),
        py::arg("field"));
  m.def("read_field", &read_field, py::arg("csv_path"));

  m.def(
      "run_solve",
      [](const std::filesystem::path& config,
         std::optional<std::filesystem::path> out) {
        return run_solve(config, out);
      },
      py::arg("config"), py::arg("out") = std::nullopt);
  m.def("run_verify", &run_verify, py::arg("dir"));
}
