#include "quadlik/bootstrap.hpp"
#include "quadlik/cli/commands.hpp"
#include "quadlik/funcspace.hpp"
#include "quadlik/inference.hpp"
#include "quadlik/models.hpp"
#include "quadlik/newton.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace quadlik;

namespace {

// NaO crosses the boundary as None.
py::object to_py(const MaybeParam& p) {
  if (p.is_nao()) return py::none();
  return py::cast(p.value());
}

py::object to_py(const MaybeEval& e) {
  if (!e) return py::none();
  return py::make_tuple(e->value, e->gradient, e->hessian);
}

py::dict to_py(const MleResult& fit) {
  py::dict d;
  d["theta_hat"] = to_py(fit.theta_hat);
  d["observed_info"] = fit.theta_hat.is_nao() ? py::none() : py::cast(fit.observed_info);
  d["converged"] = fit.trace.converged;
  d["steps"] = fit.trace.steps;
  return d;
}

}  // namespace

PYBIND11_MODULE(_quadlik, m) {
  m.doc() = "Quadratic likelihood approximations (C++ core)";

  m.def(
      "quadratic_mle",
      [](const Vector& z, const Matrix& k) { return to_py(quadratic_mle(QuadraticForm(0.0, z, k))); },
      py::arg("z"), py::arg("k"));
  m.def(
      "newton_step_quadratic",
      [](double u, const Vector& z, const Matrix& k, const Vector& delta) {
        return to_py(newton_step(as_objective(QuadraticForm(u, z, k)), MaybeParam(delta)));
      },
      py::arg("u"), py::arg("z"), py::arg("k"), py::arg("delta"));

  py::class_<LikModel, std::shared_ptr<LikModel>>(m, "LikModel")
      .def_property_readonly("dim", &LikModel::dim)
      .def_property_readonly("name", &LikModel::name)
      .def("loglik", [](const LikModel& self, const Vector& data, const Vector& theta) {
        return to_py(self.eval(data, theta));
      })
      .def(
          "simulate",
          [](const LikModel& self, const Vector& theta, std::uint64_t seed) {
            Rng rng(seed);
            return self.simulate(theta, rng);
          },
          py::arg("theta"), py::arg("seed"))
      .def("start", &LikModel::start);

  py::class_<LanNormalLocation, LikModel, std::shared_ptr<LanNormalLocation>>(m, "LanNormalLocation")
      .def(py::init<Matrix>(), py::arg("k"));
  py::class_<WishartLamnModel, LikModel, std::shared_ptr<WishartLamnModel>>(m, "WishartLamnModel")
      .def(py::init([](double dof, const Matrix& scale) {
             return std::make_shared<WishartLamnModel>(
                 LamnSpec(static_cast<int>(scale.rows()), WishartCurvature{dof, scale}));
           }),
           py::arg("dof"), py::arg("scale"));
  py::class_<Ar1Model, LikModel, std::shared_ptr<Ar1Model>>(m, "Ar1Model")
      .def(py::init<int, double, bool>(), py::arg("n"), py::arg("x0") = 0.0, py::arg("random_x0") = false);
  py::class_<AnimalModel, LikModel, std::shared_ptr<AnimalModel>>(m, "AnimalModel")
      .def(py::init([](const Matrix& a) { return std::make_shared<AnimalModel>(RelationshipMatrix{a}); }),
           py::arg("a"));

  m.def(
      "fit_mle",
      [](std::shared_ptr<const LikModel> model, const Vector& data) { return to_py(fit_mle(model, data)); },
      py::arg("model"), py::arg("data"));
  m.def(
      "wald_pivots",
      [](std::shared_ptr<const LikModel> model, const Vector& theta_hat, int b, std::uint64_t seed,
         int workers) {
        BootstrapOptions options;
        options.seed = seed;
        options.workers = workers;
        const StartFunction start = [model](const Data& d) { return model->start(d); };
        const auto s = parametric_bootstrap(model, theta_hat, b, wald_pivot_function(), start, options);
        return py::make_tuple(s.values, s.n_nao);
      },
      py::arg("model"), py::arg("theta_hat"), py::arg("B"), py::arg("seed"), py::arg("workers") = 1);
  m.def(
      "quadraticity",
      [](std::shared_ptr<const LikModel> model, const Vector& data, const Vector& psi, double tau,
         double half_width) {
        const Vector h = Vector::Constant(psi.size(), half_width);
        const auto r = quadraticity_report(local_shift(model, data, psi, tau), Vector::Zero(psi.size()),
                                           GridBox::with_default_resolution(-h, h));
        py::dict d;
        d["d0"] = r.d0;
        d["d1"] = r.d1;
        d["d2"] = r.d2;
        return d;
      },
      py::arg("model"), py::arg("data"), py::arg("psi"), py::arg("tau") = 1.0, py::arg("half_width") = 1.0);

  m.def(
      "relationship_matrix",
      [](const std::string& csv) { return relationship_matrix(Pedigree::parse_csv(csv)).a; },
      py::arg("pedigree_csv"));
  m.def(
      "synthetic_relationship_matrix",
      [](int n, std::uint64_t seed) { return relationship_matrix(Pedigree::synthetic(n, seed)).a; },
      py::arg("n"), py::arg("seed"));

  m.def(
      "run",
      [](const std::string& command, const std::string& config_json, const std::string& base_dir, int workers) {
        const auto config = cli::parse_config(config_json, base_dir);
        const auto result = cli::run_command(command, config, workers);
        return py::make_tuple(cli::render(result.report, std::nullopt).json, result.exit_code);
      },
      py::arg("command"), py::arg("config_json"), py::arg("base_dir") = ".", py::arg("workers") = 1);

  py::register_exception<cli::InputError>(m, "InputError", PyExc_ValueError);
}
