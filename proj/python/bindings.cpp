#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "zomd/analysis.hpp"
#include "zomd/cli/commands.hpp"
#include "zomd/errors.hpp"

namespace py = pybind11;
using namespace zomd;

namespace {

// Enums cross the boundary as the same strings the config files use.
SmoothnessClass Class(const std::string& name) { return parse_smoothness_class(name); }

BiasField Field(const std::string& name) {
  if (name == "sine") return BiasField::kSine;
  if (name == "constant") return BiasField::kConstant;
  throw ConfigError("unknown bias field '" + name + "'");
}

py::dict SummaryDict(const TrajectorySummary& s) {
  py::dict d;
  d["trial"] = s.trial;
  d["iterations"] = s.iterations;
  d["final_x"] = s.final_x;
  d["final_z"] = s.final_z;
  d["final_f_z"] = s.final_f_z;
  d["final_gap_z"] = s.final_gap_z;
  d["best_f_z"] = s.best_f_z;
  d["cum_alpha"] = s.cum_alpha;
  d["cum_alpha_sq"] = s.cum_alpha_sq;
  d["diag_sum"] = s.diag_sum;
  d["start_bregman"] = s.start_bregman;
  return d;
}

py::dict TheoryDict(const TheoryParams& tp) {
  py::dict d;
  d["class"] = std::string(to_string(tp.cls));
  d["delta"] = tp.delta;
  d["B1"] = tp.B1;
  d["K"] = tp.K;
  d["K1"] = tp.K1;
  d["C"] = tp.C;
  d["D"] = tp.D;
  d["sigma_R"] = tp.sigma_R;
  d["kappa1"] = tp.kappa1;
  d["kappa2"] = tp.kappa2;
  d["n"] = tp.n;
  d["mu"] = tp.mu;
  d["L0"] = tp.L0;
  d["L1"] = tp.L1;
  d["G"] = tp.G;
  d["B"] = tp.B;
  d["V"] = tp.V;
  d["radius"] = neighborhood_radius(tp);
  return d;
}

TheoryParams ParamsFromDict(const py::dict& d) {
  TheoryParams tp;
  tp.K = d["K"].cast<double>();
  tp.C = d["C"].cast<double>();
  tp.D = d["D"].cast<double>();
  return tp;
}

cli::CommandOptions Options(const std::string& config, std::optional<std::string> out,
                            std::optional<std::uint64_t> seed, std::optional<std::int64_t> trials) {
  cli::CommandOptions o;
  o.config = config;
  if (out) o.out = *out;
  o.seed = seed;
  o.trials = trials;
  o.quiet = true;
  return o;
}

// Runs a command and returns (exit code, stderr text).
template <class Fn>
py::tuple Command(Fn&& fn) {
  std::ostringstream out, err;
  int code = 0;
  {
    py::gil_scoped_release release;
    code = fn(out, err);
  }
  return py::make_tuple(code, err.str());
}

}  // namespace

PYBIND11_MODULE(_zomd, m) {
  m.doc() = "Zeroth-order mirror descent with Gaussian smoothing under biased noise";

  // Translators run newest first, so the base class goes in before its subclasses.
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ArithmeticError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);

  py::class_<FeasibleSet>(m, "FeasibleSet")
      .def_static(
          "box", [](Vector lo, Vector hi, const std::string& norm) { return FeasibleSet::box(lo, hi, parse_norm(norm)); },
          py::arg("lo"), py::arg("hi"), py::arg("norm") = "l2")
      .def_static(
          "ball",
          [](Vector c, double r, const std::string& norm) { return FeasibleSet::ball(c, r, parse_norm(norm)); },
          py::arg("center"), py::arg("radius"), py::arg("norm") = "l2")
      .def_static(
          "simplex", [](int n, const std::string& norm) { return FeasibleSet::simplex(n, parse_norm(norm)); },
          py::arg("n"), py::arg("norm") = "l1")
      .def_property_readonly("kind", [](const FeasibleSet& s) { return std::string(s.kind_name()); })
      .def_property_readonly("dimension", &FeasibleSet::dimension)
      .def_property_readonly("diameter", &FeasibleSet::diameter)
      .def("contains", &FeasibleSet::contains, py::arg("x"), py::arg("tol") = 1e-12)
      .def("project", &FeasibleSet::project);

  py::class_<Geometry>(m, "Geometry")
      .def(py::init([](FeasibleSet set, const std::string& mirror) { return Geometry(set, parse_mirror_kind(mirror)); }),
           py::arg("set"), py::arg("mirror_map") = "euclidean")
      .def_property_readonly("kappa1", [](const Geometry& g) { return g.norms().kappa1(); })
      .def_property_readonly("kappa2", [](const Geometry& g) { return g.norms().kappa2(); })
      .def_property_readonly("sigma", [](const Geometry& g) { return g.map().sigma(); })
      .def("dual_norm", [](const Geometry& g, const Vector& v) { return g.norms().dual_norm(v); })
      .def("bregman", [](const Geometry& g, const Vector& x, const Vector& y) { return bregman(g.map(), x, y); })
      .def("prox", &Geometry::prox, py::arg("x"), py::arg("g"), py::arg("alpha"));

  py::class_<ObjectiveSpec>(m, "Objective")
      .def_static("quadratic", &make_quadratic, py::arg("Q"), py::arg("c"), py::arg("set"))
      .def_static("abs_sum", &make_abs_sum, py::arg("a"), py::arg("set"))
      .def_static("log_sum_exp", &make_log_sum_exp, py::arg("scale"), py::arg("set"))
      .def_property_readonly("kind", [](const ObjectiveSpec& o) { return std::string(o.kind_name()); })
      .def_property_readonly("natural_class", [](const ObjectiveSpec& o) { return std::string(to_string(o.natural_class())); })
      .def_property_readonly("f_star", &ObjectiveSpec::f_star)
      .def_property_readonly("x_star", &ObjectiveSpec::x_star)
      .def("value", &ObjectiveSpec::value)
      .def("gradient", &ObjectiveSpec::gradient)
      .def("lipschitz", &ObjectiveSpec::lipschitz, py::arg("margin") = 0.0)
      .def("gradient_lipschitz", &ObjectiveSpec::gradient_lipschitz)
      .def("gradient_bound", &ObjectiveSpec::gradient_bound, py::arg("margin") = 0.0);

  py::class_<NoiseModel>(m, "Noise")
      .def_static("none", &NoiseModel::none)
      .def_static("additive_gaussian", &NoiseModel::additive_gaussian, py::arg("sd"), py::arg("V") = py::none())
      .def_static(
          "biased",
          [](double B, double sd, const std::string& field, std::optional<double> V) {
            return NoiseModel::biased(B, sd, Field(field), V);
          },
          py::arg("B"), py::arg("sd"), py::arg("bias_field") = "sine", py::arg("V") = py::none())
      .def_property_readonly("B", &NoiseModel::bias_bound)
      .def_property_readonly("sd", &NoiseModel::sd)
      .def_property_readonly("V", &NoiseModel::v)
      .def_property_readonly("V_valid", &NoiseModel::v_valid)
      .def("bias", &NoiseModel::bias);

  m.def(
      "estimate_gradient",
      [](const ObjectiveSpec& obj, const NoiseModel& noise, const Vector& x, double mu, std::uint64_t seed) {
        const GradientSample s = estimate_gradient(obj, noise, x, NgaConfig(mu, static_cast<int>(x.size())),
                                                   RandomStream(seed));
        return py::make_tuple(s.g_tilde, s.u, s.f_hat_far, s.f_hat_near);
      },
      py::arg("objective"), py::arg("noise"), py::arg("x"), py::arg("mu"), py::arg("seed"),
      "One two-point estimate; returns (g_tilde, u, f_hat_far, f_hat_near).");

  m.def(
      "verify_estimator",
      [](const ObjectiveSpec& obj, const NoiseModel& noise, const Geometry& geometry, const Vector& x, double mu,
         std::int64_t samples, std::uint64_t seed) {
        const EstimatorReport r = verify_estimator_bounds(obj, noise, geometry, x, NgaConfig(mu, geometry.dimension()),
                                                          samples, RandomStream(seed));
        py::dict d;
        d["empirical_bias"] = r.empirical_bias_dual_norm;
        d["bias_se"] = r.bias_stderr;
        d["bias_bound"] = r.bias_bound;
        d["bias_pass"] = r.bias_pass;
        d["empirical_second_moment"] = r.empirical_second_moment;
        d["second_moment_se"] = r.second_moment_stderr;
        d["second_moment_bound"] = r.second_moment_bound;
        d["second_moment_pass"] = r.second_moment_pass;
        d["second_moment_bound_alt"] = r.second_moment_bound_alt;
        d["second_moment_pass_alt"] = r.second_moment_pass_alt;
        d["pass"] = r.pass();
        return d;
      },
      py::arg("objective"), py::arg("noise"), py::arg("geometry"), py::arg("x"), py::arg("mu"),
      py::arg("samples") = 10000, py::arg("seed") = 0);

  py::class_<StepSchedule>(m, "StepSchedule")
      .def(py::init([](double a, double p, std::optional<std::int64_t> t_max) { return StepSchedule::power(a, p, t_max); }),
           py::arg("a"), py::arg("p"), py::arg("T_max") = py::none())
      .def_property_readonly("a", &StepSchedule::a)
      .def_property_readonly("p", &StepSchedule::p)
      .def("alpha", &StepSchedule::alpha_at);

  py::class_<Problem>(m, "Problem")
      .def(py::init([](ObjectiveSpec obj, NoiseModel noise, Geometry geometry, double mu) {
             const NgaConfig nga(mu, geometry.dimension());
             return Problem{std::move(obj), noise, std::move(geometry), nga};
           }),
           py::arg("objective"), py::arg("noise"), py::arg("geometry"), py::arg("mu"))
      .def_property_readonly("dimension", &Problem::dimension)
      .def_property_readonly("mu", [](const Problem& p) { return p.nga.mu; })
      .def(
          "theory",
          [](const Problem& p, std::optional<std::string> cls) {
            TheoryOptions o;
            if (cls) o.cls = Class(*cls);
            return TheoryDict(make_theory_params(p, o));
          },
          py::arg("smoothness_class") = py::none());

  m.def(
      "run",
      [](const Problem& problem, const StepSchedule& schedule, const Vector& x1, std::int64_t T, std::uint64_t seed) {
        RunOptions options;
        options.record = false;
        Trajectory tr;
        {
          py::gil_scoped_release release;
          tr = run_zomd(problem, schedule, x1, T, RandomStream(seed), options);
        }
        return SummaryDict(tr.summary);
      },
      py::arg("problem"), py::arg("schedule"), py::arg("x1"), py::arg("T"), py::arg("seed") = 0,
      "Single run on the given stream; returns the trajectory summary.");

  m.def(
      "run_ensemble",
      [](const Problem& problem, const StepSchedule& schedule, const Vector& x1, std::int64_t T, std::int64_t trials,
         std::uint64_t seed, unsigned workers) {
        std::vector<TrajectorySummary> out;
        {
          py::gil_scoped_release release;
          out = run_ensemble(Experiment{problem, schedule, x1, T}, trials, seed, {}, workers);
        }
        py::list l;
        for (const auto& s : out) l.append(SummaryDict(s));
        return l;
      },
      py::arg("problem"), py::arg("schedule"), py::arg("x1"), py::arg("T"), py::arg("trials"), py::arg("seed") = 0,
      py::arg("workers") = 0);

  m.def(
      "optimal_mu",
      [](const std::string& cls, double L, double kappa1, double B, double D, int n) {
        return optimal_mu(Class(cls), L, kappa1, B, D, n);
      },
      py::arg("smoothness_class"), py::arg("lipschitz"), py::arg("kappa1"), py::arg("B"), py::arg("D"), py::arg("n"));
  m.def(
      "radius_at_mu",
      [](const std::string& cls, double mu, double L, double kappa1, double B, double D, int n) {
        return radius_at_mu(Class(cls), mu, L, kappa1, B, D, n);
      },
      py::arg("smoothness_class"), py::arg("mu"), py::arg("lipschitz"), py::arg("kappa1"), py::arg("B"), py::arg("D"),
      py::arg("n"));
  m.def("burn_in_index", &burn_in_index, py::arg("schedule"), py::arg("epsilon"), py::arg("D"),
        py::arg("cap") = kDefaultScanCap);
  m.def(
      "concentration_bound",
      [](std::int64_t t, double eps, const StepSchedule& s, const py::dict& theory) {
        return concentration_bound(t, eps, s, ParamsFromDict(theory));
      },
      py::arg("t"), py::arg("epsilon"), py::arg("schedule"), py::arg("theory"),
      "Bound at t from a theory dict with K, C and D.");
  m.def(
      "min_iterations_for_confidence",
      [](double confidence, double eps, const StepSchedule& s, const py::dict& theory, std::int64_t cap) {
        return min_iterations_for_confidence(confidence, eps, s, ParamsFromDict(theory), cap);
      },
      py::arg("confidence"), py::arg("epsilon"), py::arg("schedule"), py::arg("theory"),
      py::arg("cap") = kDefaultScanCap);
  m.def(
      "wilson_interval",
      [](std::int64_t k, std::int64_t n) {
        const ProbabilityEstimate e = wilson_interval(k, n);
        return py::make_tuple(e.lower, e.upper);
      },
      py::arg("successes"), py::arg("trials"));

  m.def(
      "cmd_run",
      [](const std::string& config, std::optional<std::string> out, std::optional<std::uint64_t> seed,
         std::optional<std::int64_t> trials) {
        return Command([&](auto& o, auto& e) { return cli::cmd_run(Options(config, out, seed, trials), o, e); });
      },
      py::arg("config"), py::arg("out") = py::none(), py::arg("seed") = py::none(), py::arg("trials") = py::none());
  m.def(
      "cmd_bounds",
      [](const std::string& config, std::optional<std::string> out) {
        return Command(
            [&](auto& o, auto& e) { return cli::cmd_bounds(Options(config, out, std::nullopt, std::nullopt), o, e); });
      },
      py::arg("config"), py::arg("out") = py::none());
  m.def(
      "cmd_verify_estimator",
      [](const std::string& config, std::optional<std::string> out, std::optional<std::uint64_t> seed) {
        return Command([&](auto& o, auto& e) {
          return cli::cmd_verify_estimator(Options(config, out, seed, std::nullopt), o, e);
        });
      },
      py::arg("config"), py::arg("out") = py::none(), py::arg("seed") = py::none());
}
