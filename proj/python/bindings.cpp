#include "illiquid/arrivals.hpp"
#include "illiquid/benchmark.hpp"
#include "illiquid/config.hpp"
#include "illiquid/dp.hpp"
#include "illiquid/experiment.hpp"
#include "illiquid/market.hpp"
#include "illiquid/montecarlo.hpp"
#include "illiquid/utility.hpp"

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace illiquid;

namespace {

MarketModel make_market(double horizon, std::vector<double> drift, std::vector<double> volatility,
                        std::vector<double> drift_breaks, std::vector<double> volatility_breaks,
                        std::optional<double> jump_rate, double jump_log_mean, double jump_log_stdev,
                        std::optional<double> jump_moment_r) {
  std::optional<JumpSpec> jumps;
  if (jump_rate)
    jumps = JumpSpec{PiecewiseConstant::constant(horizon, *jump_rate), LogNormalJumps{jump_log_mean, jump_log_stdev},
                     2.0, jump_moment_r};
  return MarketModel(PiecewiseConstant(horizon, std::move(drift_breaks), std::move(drift)),
                     PiecewiseConstant(horizon, std::move(volatility_breaks), std::move(volatility)), jumps);
}

std::vector<double> to_vector(std::span<const double> s) { return {s.begin(), s.end()}; }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Portfolio choice when trading happens only at random arrival times";
  m.attr("__version__") = version();

  py::class_<UtilitySpec>(m, "Utility")
      .def_static("power", &UtilitySpec::power, py::arg("gamma"))
      .def_static("log", &UtilitySpec::log)
      .def_property_readonly("is_log", &UtilitySpec::is_log)
      .def_property_readonly("gamma", &UtilitySpec::gamma)
      .def("__call__", &UtilitySpec::evaluate, py::arg("x"))
      .def("conjugate", &UtilitySpec::conjugate, py::arg("y"))
      .def("__repr__", &UtilitySpec::describe);

  py::class_<IntensityProfile>(m, "Intensity")
      .def_static("power_blowup", &IntensityProfile::power_blowup, py::arg("horizon"), py::arg("kappa"),
                  py::arg("beta"))
      .def("scaled", &IntensityProfile::scaled, py::arg("k"))
      .def_property_readonly("horizon", &IntensityProfile::horizon)
      .def_property_readonly("scale", &IntensityProfile::scale)
      .def("__call__", &IntensityProfile::intensity, py::arg("t"))
      .def("cumulative", &IntensityProfile::cumulative, py::arg("t"))
      .def("inverse_cumulative", &IntensityProfile::inverse_cumulative, py::arg("level"))
      .def("warp", &IntensityProfile::warp, py::arg("t"))
      .def("unwarp", &IntensityProfile::unwarp, py::arg("w"))
      .def("density", [](const IntensityProfile& p, double t, double s) { return arrival_density(p, t, s); },
           py::arg("t"), py::arg("s"));

  py::class_<MarketModel>(m, "Market")
      .def(py::init(&make_market), py::arg("horizon"), py::arg("drift"), py::arg("volatility"),
           py::arg("drift_breaks") = std::vector<double>{}, py::arg("volatility_breaks") = std::vector<double>{},
           py::arg("jump_rate") = std::nullopt, py::arg("jump_log_mean") = 0.0, py::arg("jump_log_stdev") = 0.0,
           py::arg("jump_moment_r") = std::nullopt)
      .def_static("constant", &MarketModel::constant, py::arg("horizon"), py::arg("drift"), py::arg("volatility"))
      .def_property_readonly("horizon", &MarketModel::horizon)
      .def_property_readonly("has_jumps", &MarketModel::has_jumps)
      .def("assumptions",
           [](const MarketModel& model, const UtilitySpec& u) {
             py::dict out;
             for (const auto& c : validate_assumptions(model, u).checks) out[py::str(c.name)] = c.passed;
             return out;
           },
           py::arg("utility"));

  py::enum_<Representation>(m, "Representation")
      .value("separable", Representation::separable)
      .value("grid", Representation::grid);

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("representation", &SolverConfig::representation)
      .def_readwrite("time_nodes", &SolverConfig::time_nodes)
      .def_readwrite("wealth_nodes", &SolverConfig::wealth_nodes)
      .def_readwrite("wealth_min", &SolverConfig::wealth_min)
      .def_readwrite("wealth_max", &SolverConfig::wealth_max)
      .def_readwrite("time_quadrature_nodes", &SolverConfig::time_quadrature_nodes)
      .def_readwrite("return_quadrature_nodes", &SolverConfig::return_quadrature_nodes)
      .def_readwrite("tolerance", &SolverConfig::tolerance)
      .def_readwrite("max_iterations", &SolverConfig::max_iterations)
      .def_readwrite("pi_tolerance", &SolverConfig::pi_tolerance)
      .def_readwrite("threads", &SolverConfig::threads);

  py::class_<ValueSurface>(m, "ValueSurface")
      .def("__call__", &ValueSurface::operator(), py::arg("t"), py::arg("x"))
      .def_property_readonly("values", [](const ValueSurface& v) { return to_vector(v.values()); })
      .def_property_readonly("times", [](const ValueSurface& v) { return v.support().times; })
      .def_property_readonly("wealth", [](const ValueSurface& v) { return v.support().wealth; })
      .def("to_csv", [](const ValueSurface& v) {
        std::ostringstream os;
        write_surface_csv(os, v);
        return os.str();
      });

  py::class_<PolicySurface>(m, "PolicySurface")
      .def("__call__", &PolicySurface::lookup, py::arg("t"), py::arg("x"))
      .def_property_readonly("values", [](const PolicySurface& p) { return to_vector(p.values()); });

  py::class_<IterationResult>(m, "Solution")
      .def_readonly("value", &IterationResult::value)
      .def_readonly("policy", &IterationResult::policy)
      .def_readonly("iterations", &IterationResult::iterations)
      .def_readonly("residual", &IterationResult::residual)
      .def_readonly("converged", &IterationResult::converged);

  py::class_<PiChoice>(m, "PiChoice")
      .def_readonly("pi", &PiChoice::pi)
      .def_readonly("value", &PiChoice::value);

  py::class_<DpSolver>(m, "Solver")
      .def(py::init<MarketModel, IntensityProfile, UtilitySpec, SolverConfig>(), py::arg("market"),
           py::arg("intensity"), py::arg("utility"), py::arg("config") = SolverConfig{})
      .def("terminal_value", &DpSolver::terminal_value)
      .def("inner_objective", &DpSolver::inner_objective, py::arg("w"), py::arg("t"), py::arg("x"), py::arg("pi"))
      .def("maximize_over_pi", &DpSolver::maximize_over_pi, py::arg("w"), py::arg("t"), py::arg("x"))
      .def("apply", [](const DpSolver& s, const ValueSurface& w) {
        auto r = s.apply_operator(w);
        return py::make_tuple(r.value, r.policy);
      }, py::arg("w"))
      .def("solve", [](const DpSolver& s) { return s.value_iterate(); },
           py::call_guard<py::gil_scoped_release>())
      .def("finite_horizon_value", &DpSolver::finite_horizon_value, py::arg("m"),
           py::call_guard<py::gil_scoped_release>());

  m.def("supersolution",
        [](const UtilitySpec& u, const MarketModel& model, double t, double x) {
          return supersolution(u, DualDensityParams::from_model(model), t, x);
        },
        py::arg("utility"), py::arg("market"), py::arg("t"), py::arg("x"));
  m.def("merton_value",
        [](const UtilitySpec& u, const MarketModel& model, double t, double x) {
          const auto r = merton_value(u, model, t, x);
          return py::make_tuple(r.value, r.policy(t));
        },
        py::arg("utility"), py::arg("market"), py::arg("t"), py::arg("x"));

  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init<>())
      .def_readwrite("n_paths", &SimConfig::n_paths)
      .def_readwrite("seed", &SimConfig::seed)
      .def_readwrite("initial_wealth", &SimConfig::initial_wealth)
      .def_readwrite("time_cutoff", &SimConfig::time_cutoff)
      .def_readwrite("max_arrivals", &SimConfig::max_arrivals)
      .def_readwrite("threads", &SimConfig::threads);

  py::class_<SimResult>(m, "SimResult")
      .def_readonly("n_paths", &SimResult::n_paths)
      .def_readonly("mean_utility", &SimResult::mean_utility)
      .def_readonly("std_error", &SimResult::std_error)
      .def_readonly("mean_wealth", &SimResult::mean_wealth)
      .def_readonly("mean_arrivals", &SimResult::mean_arrivals)
      .def_readonly("max_arrivals", &SimResult::max_arrivals)
      .def_readonly("clamped_paths", &SimResult::clamped_paths)
      .def_readonly("wealth_quantiles", &SimResult::wealth_quantiles);

  m.def("simulate",
        [](const PolicySurface& policy, const UtilitySpec& u, const MarketModel& model,
           const IntensityProfile& prof, const SimConfig& cfg) {
          return estimate_expected_utility(feedback(policy), u, model, prof, cfg);
        },
        py::arg("policy"), py::arg("utility"), py::arg("market"), py::arg("intensity"), py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def("simulate_constant",
        [](double pi, const UtilitySpec& u, const MarketModel& model, const IntensityProfile& prof,
           const SimConfig& cfg) { return estimate_expected_utility(constant_policy(pi), u, model, prof, cfg); },
        py::arg("pi"), py::arg("utility"), py::arg("market"), py::arg("intensity"), py::arg("config"),
        py::call_guard<py::gil_scoped_release>());

  py::class_<SweepRow>(m, "SweepRow")
      .def_readonly("k", &SweepRow::k)
      .def_readonly("v_lambda", &SweepRow::v_lambda)
      .def_readonly("v_merton", &SweepRow::v_merton)
      .def_readonly("abs_gap", &SweepRow::abs_gap)
      .def_readonly("rel_gap", &SweepRow::rel_gap)
      .def_readonly("dp_iterations", &SweepRow::dp_iterations)
      .def_readonly("dp_residual", &SweepRow::dp_residual)
      .def_readonly("converged", &SweepRow::converged);

  m.def("convergence_sweep", &convergence_sweep, py::arg("utility"), py::arg("market"), py::arg("base_intensity"),
        py::arg("k_list"), py::arg("x0"), py::arg("config") = SolverConfig{},
        py::call_guard<py::gil_scoped_release>());

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<UnsupportedModel>(m, "UnsupportedModel", PyExc_ValueError);

  m.def("run", [](const std::string& command, const std::string& config_path, std::optional<std::string> out,
                  std::optional<std::uint64_t> seed) {
    RunOptions opts;
    opts.output_directory = out;
    opts.seed = seed;
    const auto cfg = load_config(config_path);
    if (command == "solve") return run_solve(cfg, opts);
    if (command == "simulate") return run_simulate(cfg, opts);
    if (command == "converge") return run_converge(cfg, opts);
    if (command == "trace") return run_iterate_trace(cfg, opts);
    throw py::value_error("unknown command '" + command + "'");
  }, py::arg("command"), py::arg("config"), py::arg("out") = std::nullopt, py::arg("seed") = std::nullopt);
}
