#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fraclap/bn.hpp"
#include "fraclap/cli_io.hpp"
#include "fraclap/domain.hpp"
#include "fraclap/error.hpp"
#include "fraclap/fourier.hpp"
#include "fraclap/navier.hpp"

namespace py = pybind11;
using namespace fraclap;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// Cube grid matching a square n-d array of node values.
UniformGrid grid_for(const Array& a, double half_width) {
  const int n = static_cast<int>(a.ndim());
  if (n < 1 || n > 3) throw py::value_error("arrays must be 1-, 2- or 3-dimensional");
  for (int k = 1; k < n; ++k)
    if (a.shape(k) != a.shape(0)) throw py::value_error("arrays must have equal extent on every axis");
  return UniformGrid::cube(n, half_width, static_cast<int>(a.shape(0)));
}

GridFunction to_grid_function(const Array& a, double half_width) {
  auto g = grid_for(a, half_width);
  return GridFunction(g, std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const GridFunction& u) {
  std::vector<py::ssize_t> shape(u.grid().dim(), u.grid().points(0));
  Array out(shape);
  std::copy(u.values().begin(), u.values().end(), out.mutable_data());
  return out;
}

}  // namespace

PYBIND11_MODULE(_fraclap, m) {
  m.doc() = "Fractional Dirichlet and Navier forms on boxes";

  static py::exception<Error> exc(m, "FraclapError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      exc(e.what());
    }
  });

  m.def("version", &version);
  m.def("set_threads", &set_threads, py::arg("n"));

  m.def(
      "bubble",
      [](int n, double order, double eps, double delta, double half_width, int points) {
        return to_array(make_bubble({n, order, eps, delta}, UniformGrid::cube(n, half_width, points)));
      },
      py::arg("n"), py::arg("m"), py::arg("eps"), py::arg("delta"), py::arg("half_width") = 1.0,
      py::arg("points") = 512);

  m.def(
      "q_dirichlet",
      [](const Array& values, double order, double half_width, int pad_factor) {
        return q_dirichlet(to_grid_function(values, half_width), order, pad_factor).value;
      },
      py::arg("values"), py::arg("m"), py::arg("half_width") = 1.0, py::arg("pad_factor") = 8);

  m.def(
      "q_navier",
      [](const Array& values, double order, double half_width, int J) {
        auto u = to_grid_function(values, half_width);
        if (J <= 0) J = u.grid().points(0) / 2;
        return q_navier(expand(u, SineBasis(u.grid().domain(), J)), order).value;
      },
      py::arg("values"), py::arg("m"), py::arg("half_width") = 1.0, py::arg("J") = 0);

  m.def(
      "lambda1",
      [](double order, double s, int n, double half_width) {
        return lambda1(order, s, SineBasis(BoxDomain::cube(n, half_width), 1));
      },
      py::arg("m"), py::arg("s"), py::arg("n") = 1, py::arg("half_width") = 1.0);

  m.def(
      "lambda1_hardy",
      [](double order, double s, int n, double half_width, int points, int J) {
        auto g = UniformGrid::cube(n, half_width, points);
        return lambda1_hardy(order, s, SineBasis(g.domain(), J > 0 ? J : points / 2), g);
      },
      py::arg("m"), py::arg("s"), py::arg("n") = 1, py::arg("half_width") = 1.0, py::arg("points") = 256,
      py::arg("J") = 0);

  m.def(
      "sobolev_estimate",
      [](int n, double order, std::vector<double> scales) {
        if (scales.empty()) scales = default_sobolev_scales(n);
        const auto e = sobolev_ladder(n, order, scales);
        return py::dict(py::arg("value") = e.value, py::arg("uncertainty") = e.uncertainty,
                        py::arg("scales") = e.scales, py::arg("quotients") = e.quotients);
      },
      py::arg("n"), py::arg("m"), py::arg("scales") = std::vector<double>{});

  m.def(
      "minimize",
      [](const std::string& variant, int n, double order, double s, double lambda_frac, int points, int restarts,
         std::uint64_t seed) {
        auto p = BNProblem::make(variant_from_string(variant), n, order, s, 0.0, 1.0, points);
        p = p.with_lambda(lambda_frac * lambda_bound(p));
        MinimizeOptions opt;
        opt.restarts = restarts;
        opt.seed = seed;
        RayleighReport r;
        {
          py::gil_scoped_release release;
          r = minimize(p, opt);
        }
        return py::dict(py::arg("value") = r.value, py::arg("lambda") = p.lambda,
                        py::arg("sobolev_ref") = r.sobolev_ref, py::arg("below_sobolev") = r.below_sobolev,
                        py::arg("el_residual") = r.el_residual, py::arg("iterations") = r.iterations,
                        py::arg("converged") = r.converged, py::arg("restart_values") = r.restart_values,
                        py::arg("coeffs") = r.minimizer.coeffs);
      },
      py::arg("variant") = "spectral_perturbation", py::arg("n") = 1, py::arg("m") = 0.4, py::arg("s") = 0.3,
      py::arg("lambda_frac") = 0.1, py::arg("points") = 0, py::arg("restarts") = 3, py::arg("seed") = 0);

  m.def("experiments", &experiment_names);

  m.def(
      "normalize_config",
      [](const std::string& text, const std::string& experiment) { return serialize(parse_config(text, experiment)); },
      py::arg("text"), py::arg("experiment") = "");

  m.def(
      "run_config",
      [](const std::string& text, const std::string& output_dir) {
        auto cfg = parse_config(text);
        if (!output_dir.empty()) cfg.output_dir = output_dir;
        std::string out;
        {
          py::gil_scoped_release release;
          out = run(cfg).to_json().dump();
        }
        return out;
      },
      py::arg("text"), py::arg("output_dir") = "");
}
