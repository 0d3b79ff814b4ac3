#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "fdsc/orchestrator.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace fdsc;

namespace {

nlohmann::json to_json(const py::dict& d) {
  auto dumps = py::module_::import("json").attr("dumps");
  return nlohmann::json::parse(dumps(d).cast<std::string>());
}

py::object to_py(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

py::dict log_to_dict(const MetricsLog& l) {
  py::list spca;
  for (const auto& r : l.spca) {
    spca.append(py::dict("iteration"_a = r.iteration, "objective"_a = r.objective,
                         "residual_backlog"_a = r.residual_backlog, "relative_change"_a = r.relative_change,
                         "inner_iterations"_a = r.inner_iterations, "status"_a = r.status));
  }
  py::list admm;
  for (const auto& r : l.admm) {
    admm.append(py::dict("spca_iteration"_a = r.spca_iteration, "iteration"_a = r.iteration,
                         "objective"_a = r.objective, "primal_residual"_a = r.primal_residual,
                         "dual_residual"_a = r.dual_residual, "messages"_a = r.messages, "bytes"_a = r.bytes));
  }
  return py::dict("mode"_a = to_string(l.mode), "spca"_a = spca, "admm"_a = admm,
                  "spca_iterations"_a = l.spca_iterations, "converged"_a = l.converged,
                  "residual_backlog"_a = l.residual_backlog, "q_dev_dl"_a = l.q_dev_dl, "q_dev_ul"_a = l.q_dev_ul,
                  "sum_rate_dl"_a = l.sum_rate_dl, "sum_rate_ul"_a = l.sum_rate_ul, "tx_power"_a = l.tx_power,
                  "decode_power"_a = l.decode_power, "power_total"_a = l.power_total,
                  "available_power"_a = l.available_power, "relaxed_objective"_a = l.relaxed_objective,
                  "objective"_a = l.objective, "extraction_gap"_a = l.extraction_gap, "seconds"_a = l.seconds);
}

py::dict run(const py::dict& config, const std::string& mode, int max_spca_iterations, int trials, double rho) {
  ScenarioConfig cfg = config_from_json(to_json(config));
  cfg.validate();
  Scenario sc = make_scenario(cfg);
  ChannelSet ch = draw_channels(sc.topology, cfg);
  RunOptions o;
  o.mode = parse_mode(mode);
  o.max_spca_iterations = max_spca_iterations;
  o.trials = trials;
  o.extraction_seed = cfg.seed;
  o.admm.rho.rho1 = o.admm.rho.rho2 = o.admm.rho.rho3 = o.admm.rho.rho4 = rho;
  RunResult r;
  {
    py::gil_scoped_release release;
    r = run_algorithm1(sc, ch, o);
  }
  py::dict out = log_to_dict(r.log);
  out["feasible"] = r.feasibility.feasible();
  out["violations"] = r.feasibility.violations;
  out["beams"] = r.beams;
  out["ul_power"] = r.p.p;
  return out;
}

py::dict run_plan_py(const py::dict& plan_json) {
  ExperimentPlan plan = plan_from_json(to_json(plan_json));
  PlanResult res;
  {
    py::gil_scoped_release release;
    res = run_plan(plan);
  }
  py::list runs;
  for (const auto& r : res.runs) {
    py::dict d = log_to_dict(r.log);
    d["sweep"] = r.sweep;
    d["setup"] = to_string(r.setup);
    d["duplex"] = to_string(r.duplex);
    d["eh_rate"] = r.eh_rate;
    d["alpha"] = r.alpha;
    d["seed"] = r.seed;
    d["ok"] = r.ok;
    d["error"] = r.error;
    d["feasible"] = r.feasible;
    runs.append(d);
  }
  auto rows = [](const std::vector<SweepRow>& v) {
    py::list l;
    for (const auto& r : v) {
      l.append(py::dict("setup"_a = to_string(r.setup), "duplex"_a = to_string(r.duplex), "x"_a = r.x,
                        "runs"_a = r.runs, "sum_rate_dl"_a = r.dl_mean, "sum_rate_dl_se"_a = r.dl_se,
                        "sum_rate_ul"_a = r.ul_mean, "sum_rate_ul_se"_a = r.ul_se,
                        "residual_backlog"_a = r.backlog_mean, "residual_backlog_se"_a = r.backlog_se));
    }
    return l;
  };
  return py::dict("runs"_a = runs, "eh"_a = rows(res.eh_rows), "alpha"_a = rows(res.alpha_rows));
}

std::string surrogate_dump(const py::dict& config) {
  ScenarioConfig cfg = config_from_json(to_json(config));
  cfg.validate();
  Scenario sc = make_scenario(cfg);
  ChannelSet ch = draw_channels(sc.topology, cfg);
  SurrogateProblem sp = build_surrogate(initial_iterate(sc, ch), sc, ch);
  std::ostringstream os;
  conic::write_program(os, sp.program);
  return os.str();
}

}  // namespace

PYBIND11_MODULE(fdsc, m) {
  m.doc() = "Full-duplex small-cell scheduling: SPCA with centralized or consensus-ADMM solves";

  m.def("default_config", [] { return to_py(config_to_json(ScenarioConfig{})); },
        "Scenario configuration with the default values, as a dict.");
  m.def("run", &run, "config"_a, "mode"_a = "centralized", "max_spca_iterations"_a = 50, "trials"_a = 200,
        "rho"_a = 1.0, "Solve one scenario; config keys override the defaults.");
  m.def("run_plan", &run_plan_py, "plan"_a, "Run an experiment plan given as a dict (same keys as the JSON file).");
  m.def("surrogate_dump", &surrogate_dump, "config"_a, "Text dump of the first surrogate program.");

  m.def("amgm_bound", &amgm_bound, "z"_a, "beta"_a, "xi"_a);
  m.def("matrix_fractional", &matrix_fractional, "x"_a, "X"_a, "h"_a);
  m.def(
      "matrix_fractional_minorant",
      [](double x0, const CMatrix& X0, const CVector& h, double x, const CMatrix& X) {
        return linearize_matrix_fractional(x0, X0, h).evaluate(x, X);
      },
      "x0"_a, "X0"_a, "h"_a, "x"_a, "X"_a, "Affine minorant expanded at (x0, X0), evaluated at (x, X).");
}
