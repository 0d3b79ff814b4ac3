// Command-line front end: single runs, plan sweeps and surrogate dumps.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "fdsc/orchestrator.hpp"

namespace fs = std::filesystem;
using namespace fdsc;

namespace {

struct ScenarioFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string setup;
  std::string duplex;
  std::optional<int> cells;
  std::optional<int> ues;

  void attach(CLI::App* app) {
    app->add_option("-c,--config", config, "scenario JSON (default: built-in parameters)")->check(CLI::ExistingFile);
    app->add_option("--seed", seed, "RNG seed");
    app->add_option("--setup", setup, "energy setup A, B or C")->check(CLI::IsMember({"A", "B", "C"}));
    app->add_option("--duplex", duplex, "FD or HD")->check(CLI::IsMember({"FD", "HD"}));
    app->add_option("--cells", cells, "number of SBSs")->check(CLI::PositiveNumber);
    app->add_option("--ues", ues, "DL and UL UEs per cell")->check(CLI::PositiveNumber);
  }

  ScenarioConfig resolve() const {
    ScenarioConfig c = config.empty() ? ScenarioConfig{} : load_config(config);
    if (seed) c.seed = *seed;
    if (!setup.empty()) c.setup = parse_setup(setup);
    if (!duplex.empty()) c.duplex = parse_duplex(duplex);
    if (cells) c.num_sbs = *cells;
    if (ues) c.dl_ues_per_cell = c.ul_ues_per_cell = *ues;
    c.validate();
    return c;
  }
};

template <typename F>
void write_to(const fs::path& path, F&& body) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  body(out);
}

// Invariants every finished run must satisfy; returns the failures.
std::vector<std::string> check_run(const RunResult& r, const Scenario& sc, const ChannelSet& ch) {
  std::vector<std::string> bad;
  for (const auto& v : r.feasibility.violations) bad.push_back("infeasible: " + v);
  const double tol = 1e-6 * std::max(1.0, std::abs(r.log.objective));
  if (r.log.extraction_gap < -tol) bad.push_back("negative extraction gap " + std::to_string(r.log.extraction_gap));
  for (std::size_t k = 1; k < r.log.spca.size(); ++k) {
    if (r.log.spca[k].objective > r.log.spca[k - 1].objective + 1e-6) {
      bad.push_back("SPCA objective increased at iteration " + std::to_string(r.log.spca[k].iteration));
    }
  }
  if (sc.config.energy_causality()) {
    for (int b = 0; b < sc.num_sbs(); ++b) {
      if (r.log.power_total[b] > r.log.available_power[b] + 1e-6) {
        bad.push_back("energy causality at SBS " + std::to_string(b));
      }
    }
  }
  RateReport fresh = evaluate_rates(r.U, r.p, sc, ch, &r.ul_rate_cap);
  if (std::abs(fresh.sum_rate_dl() - r.log.sum_rate_dl) > 1e-9 * std::max(1.0, fresh.sum_rate_dl()) ||
      std::abs(fresh.sum_rate_ul() - r.log.sum_rate_ul) > 1e-9 * std::max(1.0, fresh.sum_rate_ul())) {
    bad.push_back("reported rates differ from a fresh evaluation");
  }
  return bad;
}

int cmd_run(const ScenarioFlags& sf, const std::string& mode, const fs::path& out, bool dump_channels, bool check,
            int trials) {
  ScenarioConfig cfg = sf.resolve();
  Scenario sc = make_scenario(cfg);
  for (const auto& w : sc.warnings) std::cerr << "warning: " << w << '\n';
  ChannelSet ch = draw_channels(sc.topology, cfg);
  RunOptions opt;
  opt.mode = parse_mode(mode);
  opt.trials = trials;
  opt.extraction_seed = cfg.seed;
  RunResult r = run_algorithm1(sc, ch, opt);

  fs::create_directories(out);
  RunRecord rec;
  rec.sweep = "run";
  rec.setup = cfg.setup;
  rec.duplex = cfg.duplex;
  rec.eh_rate = cfg.harvest_power / (cfg.circuit_power + 5.0 * cfg.sbs_max_power);
  rec.alpha = cfg.effective_decode_eff();
  rec.seed = cfg.seed;
  rec.ok = true;
  rec.feasible = r.feasibility.feasible();
  rec.log = r.log;
  write_to(out / "summary.csv", [&](std::ostream& os) { write_summary_csv(os, {rec}); });
  std::ostringstream id;
  id << "trace_" << to_string(cfg.setup) << '_' << to_string(cfg.duplex) << "_s" << cfg.seed << ".csv";
  write_to(out / id.str(), [&](std::ostream& os) { write_spca_trace_csv(os, r.log.spca); });
  if (opt.mode == SolveMode::kAdmm) {
    write_to(out / "admm_trace.csv", [&](std::ostream& os) { write_admm_trace_csv(os, r.log.admm); });
  }
  write_to(out / "rates.csv", [&](std::ostream& os) { write_rate_csv(os, r.rates, sc.topology); });
  if (dump_channels) write_to(out / "channels.txt", [&](std::ostream& os) { write_channels(os, ch); });

  std::printf("%s setup %s %s seed %llu: %d SPCA iterations%s, residual backlog %.6g bits, DL %.6g UL %.6g "
              "bits/s/Hz, %s, %.2f s\n",
              to_string(opt.mode), to_string(cfg.setup), to_string(cfg.duplex),
              static_cast<unsigned long long>(cfg.seed), r.log.spca_iterations, r.log.converged ? "" : " (cap)",
              r.log.residual_backlog, r.log.sum_rate_dl, r.log.sum_rate_ul,
              r.feasibility.feasible() ? "feasible" : "INFEASIBLE", r.log.seconds);
  if (!check) return 0;
  auto bad = check_run(r, sc, ch);
  for (const auto& b : bad) std::cerr << "check failed: " << b << '\n';
  return bad.empty() ? 0 : 2;
}

int cmd_sweep(const std::string& plan_path, const std::string& mode, const std::string& out, bool check) {
  ExperimentPlan plan = load_plan(plan_path);
  if (!mode.empty()) plan.mode = plan.run.mode = parse_mode(mode);
  if (!out.empty()) plan.output_dir = out;
  PlanResult res = run_plan(plan);
  int failed = 0, infeasible = 0;
  for (const auto& r : res.runs) {
    if (!r.ok) {
      ++failed;
      std::cerr << "run failed (" << r.sweep << ", seed " << r.seed << "): " << r.error << '\n';
    } else if (!r.feasible) {
      ++infeasible;
    }
  }
  std::printf("%zu runs, %d failed, %d infeasible; outputs in %s\n", res.runs.size(), failed, infeasible,
              plan.output_dir.string().c_str());
  return check && (failed > 0 || infeasible > 0) ? 2 : 0;
}

int cmd_solve_dump(const ScenarioFlags& sf, const fs::path& out, bool solve) {
  ScenarioConfig cfg = sf.resolve();
  Scenario sc = make_scenario(cfg);
  ChannelSet ch = draw_channels(sc.topology, cfg);
  SpcaIterate it = initial_iterate(sc, ch);
  SurrogateProblem sp = build_surrogate(it, sc, ch);
  if (out.empty() || out == "-") {
    conic::write_program(std::cout, sp.program);
  } else {
    write_to(out, [&](std::ostream& os) { conic::write_program(os, sp.program); });
  }
  if (!solve) return 0;
  conic::SolverOptions o;
  o.initial_point = sp.start;
  conic::Solution s = conic::solve(sp.program, o);
  std::fprintf(stderr, "%s: %s, objective %.10g, %d Newton steps\n", conic::to_string(s.status), s.message.c_str(),
               s.objective, s.newton_steps);
  return s.ok() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Full-duplex small-cell scheduler: SPCA with centralized or consensus-ADMM solves"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "solve one scenario");
  ScenarioFlags run_flags;
  run_flags.attach(run);
  std::string mode = "centralized";
  std::string out_dir = "out";
  bool dump_channels = false, check = false;
  int trials = 200;
  run->add_option("--mode", mode, "centralized or admm")->check(CLI::IsMember({"centralized", "central", "admm"}));
  run->add_option("-o,--out", out_dir, "output directory");
  run->add_flag("--dump-channels", dump_channels, "write channels.txt");
  run->add_flag("--check", check, "exit 2 if an acceptance invariant fails");
  run->add_option("--trials", trials, "randomization draws")->check(CLI::PositiveNumber);

  auto* sweep = app.add_subcommand("sweep", "run an experiment plan");
  std::string plan_path, sweep_mode, sweep_out;
  bool sweep_check = false;
  sweep->add_option("plan", plan_path, "plan JSON")->required()->check(CLI::ExistingFile);
  sweep->add_option("--mode", sweep_mode, "override the plan's mode")
      ->check(CLI::IsMember({"centralized", "central", "admm"}));
  sweep->add_option("-o,--out", sweep_out, "override the plan's output directory");
  sweep->add_flag("--check", sweep_check, "exit 2 if any run fails or is infeasible");

  auto* dump = app.add_subcommand("solve-dump", "write the first surrogate program as text");
  ScenarioFlags dump_flags;
  dump_flags.attach(dump);
  std::string dump_out = "-";
  bool dump_solve = false;
  dump->add_option("-o,--out", dump_out, "file, '-' for stdout");
  dump->add_flag("--solve", dump_solve, "also solve it and report the status on stderr");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(run_flags, mode, out_dir, dump_channels, check, trials);
    if (*sweep) return cmd_sweep(plan_path, sweep_mode, sweep_out, sweep_check);
    if (*dump) return cmd_solve_dump(dump_flags, dump_out, dump_solve);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
