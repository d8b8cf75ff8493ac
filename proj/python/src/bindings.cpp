#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "rootflow/catalog.hpp"
#include "rootflow/diffflow.hpp"
#include "rootflow/errors.hpp"
#include "rootflow/freeops.hpp"
#include "rootflow/kz.hpp"
#include "rootflow/measure.hpp"
#include "rootflow/pde.hpp"
#include "rootflow/polylab.hpp"
#include "rootflow/report.hpp"
#include "rootflow/transforms.hpp"
#include "rootflow/verify.hpp"

namespace py = pybind11;
using namespace rootflow;

namespace {

PyObject* g_error = nullptr;

FamilyTag tag_of(const std::string& text) { return FamilyTag::parse(text); }

std::vector<double> grid_or_default(std::optional<std::size_t> n) {
  return chebyshev_grid(n.value_or(default_grid_size()));
}

py::dict report_dict(const ExperimentReport& r) {
  py::list metrics;
  for (const auto& m : r.metrics) {
    py::dict d;
    d["name"] = m.name;
    d["value"] = m.value;
    d["tolerance"] = m.tolerance;
    d["bound"] = m.bound == Bound::at_most ? "<=" : "<";
    d["pass"] = m.pass();
    metrics.append(d);
  }
  py::dict out;
  out["id"] = r.id;
  out["params"] = r.params;
  out["metrics"] = metrics;
  out["diagnostics"] = r.diagnostics;
  out["seed"] = r.seed;
  out["seconds"] = r.seconds;
  out["error"] = r.error;
  out["passed"] = r.passed();
  return out;
}

PdeForm form_of(const std::string& name) {
  if (name == "cdf") return PdeForm::cdf;
  if (name == "rescaled") return PdeForm::rescaled;
  fail(ErrorCode::config, "form must be 'cdf' or 'rescaled'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Quantile-level free convolution powers, differentiation flows and their checks";

  g_error = PyErr_NewException("rootflow.RootflowError", PyExc_ValueError, nullptr);
  m.attr("RootflowError") = py::handle(g_error);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      auto inst = py::reinterpret_steal<py::object>(PyObject_CallFunction(g_error, "s", e.what()));
      inst.attr("code") = std::string(code_name(e.code()));
      PyErr_SetObject(g_error, inst.ptr());
    }
  });

  // Measures ----------------------------------------------------------------
  py::class_<RadialQuantile>(m, "RadialQuantile")
      .def_static("from_table", &RadialQuantile::from_table, py::arg("probs"), py::arg("radii"),
                  py::arg("atom0") = 0.0)
      .def("quantile", py::overload_cast<double>(&RadialQuantile::quantile, py::const_))
      .def("cdf", &RadialQuantile::cdf)
      .def("quantiles", [](const RadialQuantile& q, const std::vector<double>& ps) {
        return q.quantiles(ps);
      })
      .def_property_readonly("probs", [](const RadialQuantile& q) {
        return std::vector<double>(q.probs().begin(), q.probs().end());
      })
      .def_property_readonly("radii", [](const RadialQuantile& q) {
        return std::vector<double>(q.radii().begin(), q.radii().end());
      })
      .def_property_readonly("atom0", &RadialQuantile::atom0)
      .def("on_grid", &RadialQuantile::on_grid)
      .def("__len__", &RadialQuantile::size)
      .def("to_csv", [](const RadialQuantile& q) {
        std::ostringstream out;
        write_quantile_csv(out, q);
        return out.str();
      })
      .def_static("from_csv", [](const std::string& text) {
        std::istringstream in(text);
        return read_quantile_csv(in);
      });

  m.def("family_names", &family_names);
  m.def("family", [](const std::string& tag, std::optional<std::size_t> grid) {
    return catalog::make(tag_of(tag), grid_or_default(grid));
  }, py::arg("tag"), py::arg("grid") = py::none(),
        "Closed-form family from a tag such as 'haar-sum:k=3'.");
  m.def("family_cdf", [](const std::string& tag, double r) {
    return catalog::family_cdf(tag_of(tag), r);
  });
  m.def("pareto_tail", py::overload_cast<double>(&catalog::pareto_tail));
  m.def("default_grid_size", &default_grid_size);
  m.def("chebyshev_grid", &chebyshev_grid, py::arg("n") = default_grid_size(),
        py::arg("p_min") = 1e-6, py::arg("p_max") = 1.0 - 1e-6);
  m.def("sq", &sq);
  m.def("sq_inv", &sq_inv);
  m.def("dilate", &dilate);
  m.def("quantile_distance", [](const RadialQuantile& a, const RadialQuantile& b,
                                const std::vector<double>& probs) {
    return quantile_distance(a, b, probs);
  });
  m.def("ks_distance", [](const RadialQuantile& a, const RadialQuantile& b) {
    return ks_distance(a, b);
  });

  // Transforms and free operations ------------------------------------------
  m.def("s_transform", [](const RadialQuantile& q, const std::vector<double>& zs) {
    const auto s = s_from_quantile(q);
    std::vector<double> out;
    for (double z : zs) out.push_back(s(z));
    return out;
  });
  m.def("support_endpoints", [](const RadialQuantile& q) {
    const auto e = support_endpoints(q);
    return py::make_tuple(e.inner, e.outer);
  });
  m.def("oplus_power", &oplus_power);
  m.def("product", &product);
  m.def("commutator", &commutator);
  m.def("stable_quantile", &stable_quantile, py::arg("alpha"), py::arg("theta") = 1.0);

  // Flow ----------------------------------------------------------------------
  m.def("flow", [](const RadialQuantile& q, double t, const std::string& rescale,
                   std::optional<double> alpha) {
    FlowParams p;
    p.t = t;
    p.rescale_mode = parse_rescale_mode(rescale);
    p.alpha = alpha;
    return flow(q, p);
  }, py::arg("measure"), py::arg("t"), py::arg("rescale") = "none",
        py::arg("alpha") = py::none());
  m.def("bridge_route", &bridge_route);
  m.def("bridge_residual", [](const RadialQuantile& q, double t, const std::vector<double>& g) {
    return bridge_residual(q, t, g);
  });
  m.def("clt_error", [](const RadialQuantile& q, double alpha, double t,
                        const std::vector<double>& g) {
    FlowParams p;
    p.alpha = alpha;
    return clt_error(q, p, t, g);
  });

  // Coefficient profiles ----------------------------------------------------
  py::class_<CoefProfile>(m, "CoefProfile")
      .def_readonly("t", &CoefProfile::t)
      .def_readonly("u", &CoefProfile::u)
      .def_readonly("mass", &CoefProfile::mass)
      .def("__call__", &CoefProfile::operator());
  m.def("kac_profile", &kac_profile);
  m.def("taylor_profile", &taylor_profile);
  m.def("elliptic_profile", &elliptic_profile);
  m.def("stable_profile", &stable_profile);
  m.def("derivative_profile", &derivative_profile);
  m.def("profile_to_measure", &profile_to_measure);
  m.def("profile_from_coeffs", [](const std::vector<double>& c) { return profile_from_coeffs(c); });
  m.def("measure_to_coeffs", [](const RadialQuantile& q, std::size_t n) {
    return measure_to_profile(q, n).log_coeffs;
  });

  // Polynomials -----------------------------------------------------------------
  m.def("aberth_roots", [](const std::vector<std::complex<double>>& coeffs, double tol,
                           int max_iter, std::uint64_t seed) {
    return aberth_roots(LogCoeffPoly::from_coefficients(coeffs), {tol, max_iter, seed}).roots;
  }, py::arg("coeffs"), py::arg("tol") = 1e-10, py::arg("max_iter") = 200,
        py::arg("seed") = 0, "Roots of sum_k coeffs[k] z^k.");
  m.def("derivative_experiment", [](const std::string& profile, std::size_t n, double t,
                                    std::size_t trials, std::uint64_t seed,
                                    const std::string& sampler, unsigned threads) {
    ExperimentConfig cfg;
    cfg.profile = PolyProfile::parse(profile);
    cfg.n = n;
    cfg.t = t;
    cfg.trials = trials;
    cfg.seed = seed;
    cfg.aberth.seed = seed;
    cfg.sampler = parse_sampler(sampler);
    cfg.threads = threads;
    const auto r = derivative_experiment(cfg);
    py::list rows;
    for (const auto& tr : r.trials) {
      py::dict d;
      d["trial"] = tr.trial;
      d["ks_flow"] = tr.ks_flow;
      d["ks_bridge"] = tr.ks_bridge;
      d["roots_converged"] = tr.roots_converged;
      d["gauss_lucas"] = tr.gauss_lucas;
      rows.append(d);
    }
    py::dict out;
    out["trials"] = rows;
    out["mean_ks_flow"] = r.mean_ks_flow;
    out["mean_ks_bridge"] = r.mean_ks_bridge;
    out["max_ks_flow"] = r.max_ks_flow;
    out["max_ks_bridge"] = r.max_ks_bridge;
    out["gauss_lucas_violations"] = r.gauss_lucas_violations;
    return out;
  }, py::arg("profile") = "kac", py::arg("n") = 800, py::arg("t") = 0.5,
        py::arg("trials") = 20, py::arg("seed") = 42, py::arg("sampler") = "gaussian",
        py::arg("threads") = 0);

  // PDE ---------------------------------------------------------------------------
  py::class_<PdeState>(m, "PdeState")
      .def_readonly("x", &PdeState::x)
      .def_readonly("phi", &PdeState::phi)
      .def_readonly("t", &PdeState::t)
      .def_readonly("projections", &PdeState::projections)
      .def_readonly("max_projection", &PdeState::max_projection)
      .def("cdf", &PdeState::cdf);
  m.def("uniform_nodes", &uniform_nodes);
  m.def("stretched_nodes", &stretched_nodes);
  m.def("pde_state", [](const RadialQuantile& q, std::vector<double> nodes, double t) {
    return make_state(q, std::move(nodes), t);
  }, py::arg("measure"), py::arg("nodes"), py::arg("t") = 0.0);
  m.def("pde_state_from_cdf", [](std::function<double(double)> f, std::vector<double> nodes,
                                 double t) { return make_state(std::move(f), std::move(nodes), t); },
        py::arg("cdf"), py::arg("nodes"), py::arg("t") = 0.0);
  m.def("integrate", [](const PdeState& s, double t_end, const std::string& form, double dt) {
    py::gil_scoped_release release;
    return integrate(s, t_end, form_of(form), {dt});
  }, py::arg("state"), py::arg("t_end"), py::arg("form") = "cdf", py::arg("dt") = 1e-4);
  m.def("ode_residual", [](const std::vector<double>& x, const std::vector<double>& f) {
    return ode_residual(x, f);
  });

  // Verification ----------------------------------------------------------------
  m.def("suite_names", &Verifier::suite_names);
  m.def("verify", [](const std::string& suite, std::size_t grid, std::uint64_t seed) {
    std::vector<ExperimentReport> reports;
    {
      py::gil_scoped_release release;
      Verifier v({grid, seed, 0});
      reports = v.run_suite(suite);
    }
    py::list out;
    for (const auto& r : reports) out.append(report_dict(r));
    return out;
  }, py::arg("suite") = "closed-form", py::arg("grid") = 4096, py::arg("seed") = 42);
}
