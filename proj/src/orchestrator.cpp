#include "fdsc/orchestrator.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

namespace fdsc {

const char* to_string(SolveMode m) { return m == SolveMode::kAdmm ? "admm" : "centralized"; }

SolveMode parse_mode(const std::string& s) {
  if (s == "centralized" || s == "central") return SolveMode::kCentralized;
  if (s == "admm") return SolveMode::kAdmm;
  throw std::invalid_argument("unknown solve mode: " + s);
}

double queue_objective(const RateReport& r, const Scenario& sc) {
  const auto& topo = sc.topology;
  double f = 0.0;
  for (int b = 0; b < sc.num_sbs(); ++b) {
    double d = 0.0, u = 0.0;
    for (int i : topo.dl_sets[b]) d += r.q_dev_dl.at(i) * r.q_dev_dl.at(i);
    for (int j : topo.ul_sets[b]) u += r.q_dev_ul.at(j) * r.q_dev_ul.at(j);
    f += std::sqrt(d) + std::sqrt(u);
  }
  return f;
}

namespace {

struct Factor {
  CMatrix root;  // V sqrt(Lambda), columns by decreasing eigenvalue
  CVector principal;
  bool rank_one = true;
};

Factor factorize(const CMatrix& u) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(u));
  RVector ev = es.eigenvalues();
  const int m = static_cast<int>(ev.size());
  const double top = ev(m - 1);
  if (ev(0) < -1e-8 * std::max(1.0, std::abs(top))) throw std::invalid_argument("beamforming matrix is not PSD");
  Factor f;
  f.root = CMatrix::Zero(m, m);
  for (int k = 0; k < m; ++k) f.root.col(k) = es.eigenvectors().col(m - 1 - k) * std::sqrt(std::max(0.0, ev(m - 1 - k)));
  f.principal = f.root.col(0);
  f.rank_one = top <= 0.0 || (m < 2 ? true : ev(m - 2) < 1e-8 * top);
  return f;
}

BeamformerSet outer_products(const std::vector<CVector>& beams, int kd, int N, int mt) {
  BeamformerSet U(kd, N, mt);
  for (std::size_t k = 0; k < beams.size(); ++k) U.U[k] = beams[k] * beams[k].adjoint();
  return U;
}

}  // namespace

ExtractionResult extract_rank_one(const BeamformerSet& U, const PowerSet& p, const Scenario& sc,
                                  const ChannelSet& ch, int trials, std::uint64_t seed,
                                  const std::vector<std::vector<double>>* ul_rate_cap) {
  if (trials < 1) throw std::invalid_argument("randomization needs at least one trial");
  const int N = sc.num_subcarriers();
  const int kd = sc.num_dl();
  const int mt = U.dim;
  if (U.num_dl != kd || U.num_subcarriers != N) throw std::invalid_argument("beamformer dimensions do not match");
  std::vector<Factor> fac;
  bool all_rank_one = true;
  for (const auto& u : U.U) {
    fac.push_back(factorize(u));
    all_rank_one = all_rank_one && fac.back().rank_one;
  }
  std::vector<std::vector<double>> caps =
      ul_rate_cap ? *ul_rate_cap : evaluate_rates(U, p, sc, ch).rate_ul;

  ExtractionResult res;
  res.relaxed_objective = queue_objective(evaluate_rates(U, p, sc, ch, &caps), sc);
  auto score = [&](const std::vector<CVector>& beams) {
    return queue_objective(evaluate_rates(outer_products(beams, kd, N, mt), p, sc, ch, &caps), sc);
  };

  std::vector<CVector> principal;
  for (const auto& f : fac) principal.push_back(f.principal);
  if (all_rank_one) {
    res.beams = principal;
    res.rank_one_input = true;
    res.candidates = 1;
    res.objective = score(principal);
    res.U = outer_products(res.beams, kd, N, mt);
    res.gap = res.objective - res.relaxed_objective;
    return res;
  }

  // Per-cell scale: largest factor within the DL power and energy budgets.
  const auto& cfg = sc.config;
  auto scale_to_budget = [&](std::vector<CVector>& beams) {
    for (int b = 0; b < sc.num_sbs(); ++b) {
      double tr = 0.0;
      for (int i : sc.topology.dl_sets[b]) for (int n = 0; n < N; ++n) tr += beams[i * N + n].squaredNorm();
      if (!(tr > 0.0)) continue;
      double limit = cfg.sbs_max_power;
      if (cfg.energy_causality()) {
        double dec = 0.0;
        for (int j : sc.topology.ul_sets[b]) for (double r : caps.at(j)) dec += std::max(0.0, r);
        limit = std::min(limit, sc.power_budget[b] - cfg.circuit_power - cfg.effective_decode_eff() * dec);
      }
      double s = std::sqrt(std::max(0.0, limit) / tr);
      for (int i : sc.topology.dl_sets[b]) for (int n = 0; n < N; ++n) beams[i * N + n] *= s;
    }
  };

  std::mt19937_64 rng = make_rng(seed, 4);
  std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
  double best = std::numeric_limits<double>::infinity();
  for (int t = 0; t <= trials; ++t) {
    std::vector<CVector> cand;
    if (t == 0) {
      cand = principal;
    } else {
      for (const auto& f : fac) {
        CVector w(mt);
        for (int k = 0; k < mt; ++k) w(k) = cdouble(nd(rng), nd(rng));
        cand.push_back(f.root * w);
      }
    }
    scale_to_budget(cand);
    double v = score(cand);
    ++res.candidates;
    if (v < best) {
      best = v;
      res.beams = std::move(cand);
    }
  }
  res.objective = best;
  res.U = outer_products(res.beams, kd, N, mt);
  res.gap = res.objective - res.relaxed_objective;
  return res;
}

namespace {

SpcaIterate zero_iterate(const Scenario& sc) {
  const int N = sc.num_subcarriers();
  SpcaIterate it;
  it.U = BeamformerSet(sc.num_dl(), N, sc.config.tx_antennas);
  it.p = PowerSet(sc.num_ul(), N);
  it.beta.assign(sc.num_dl() * N, 1.0);
  it.z_dl = it.t_dl = std::vector<double>(sc.num_dl() * N, 0.0);
  it.xi = it.z_dl;
  it.x = it.z_ul = it.t_ul = std::vector<double>(sc.num_ul() * N, 0.0);
  return it;
}

bool all_queues_empty(const Scenario& sc) {
  for (double q : sc.traffic.q_dl) if (q != 0.0) return false;
  for (double q : sc.traffic.q_ul) if (q != 0.0) return false;
  return true;
}

std::string run_context(const Scenario& sc, SolveMode mode, int r) {
  std::ostringstream s;
  s << "SPCA iteration " << r << " (" << to_string(mode) << ", setup " << to_string(sc.config.setup) << ", "
    << to_string(sc.config.duplex) << ", seed " << sc.config.seed << "): ";
  return s.str();
}

}  // namespace

RunResult run_algorithm1(const Scenario& sc, const ChannelSet& ch, const RunOptions& opt) {
  if (opt.max_spca_iterations < 1) throw std::invalid_argument("SPCA needs at least one iteration");
  const auto t0 = std::chrono::steady_clock::now();
  RunResult res;
  MetricsLog& log = res.log;
  log.mode = opt.mode;

  if (all_queues_empty(sc)) {
    res.relaxed = zero_iterate(sc);
    log.spca.push_back({1, 0.0, 0.0, 0.0, 0, "empty-queues"});
    log.spca_iterations = 1;
    log.converged = true;
    res.beams.assign(sc.num_dl() * sc.num_subcarriers(), CVector::Zero(sc.config.tx_antennas));
    res.U = res.relaxed.U;
  } else {
    SpcaIterate it = initial_iterate(sc, ch);
    double prev = surrogate_objective(it, sc, opt.surrogate);
    AdmmState state;
    for (int r = 1; r <= opt.max_spca_iterations; ++r) {
      SpcaIterate next;
      SpcaTraceRow row;
      row.iteration = r;
      try {
        if (opt.mode == SolveMode::kCentralized) {
          SurrogateProblem sp = build_surrogate(it, sc, ch, opt.surrogate);
          conic::SolverOptions so = opt.solver;
          so.initial_point = sp.start;
          conic::Solution sol = conic::solve(sp.program, so);
          if (!sol.ok()) {
            auto viol = conic::violated_constraints(sp.program, sol.x, 1e-7);
            if (sol.status == conic::SolveStatus::kInfeasible || !viol.empty()) {
              std::string msg = std::string("surrogate solve failed (") + conic::to_string(sol.status) + ": " + sol.message + ")";
              for (const auto& v : viol) msg += " " + v;
              throw std::runtime_error(msg);
            }
          }
          next = extract_iterate(sp, sol.x, it);
          row.inner_iterations = sol.newton_steps;
          row.status = conic::to_string(sol.status);
        } else {
          AdmmResult ar = admm_loop(it, sc, ch, state, opt.admm, r);
          next = std::move(ar.iterate);
          row.inner_iterations = ar.iterations;
          row.status = ar.converged ? "converged" : "max-iter";
          log.admm.insert(log.admm.end(), ar.trace.begin(), ar.trace.end());
        }
      } catch (const std::exception& e) {
        throw std::runtime_error(run_context(sc, opt.mode, r) + e.what());
      }
      row.objective = surrogate_objective(next, sc, opt.surrogate);
      row.relative_change = std::abs(prev - row.objective) / std::max(std::abs(prev), 1e-12);
      auto caps = next.scheduled_ul_rates();
      row.residual_backlog = evaluate_rates(next.U, next.p, sc, ch, &caps).residual_backlog();
      log.spca.push_back(row);
      log.spca_iterations = r;
      it = std::move(next);
      prev = row.objective;
      if (row.relative_change < opt.spca_tol) {
        log.converged = true;
        break;
      }
    }
    for (double& v : it.p.p) v = std::max(0.0, v);
    res.relaxed = std::move(it);
    res.ul_rate_cap = res.relaxed.scheduled_ul_rates();
    ExtractionResult ex =
        extract_rank_one(res.relaxed.U, res.relaxed.p, sc, ch, opt.trials, opt.extraction_seed, &res.ul_rate_cap);
    res.beams = std::move(ex.beams);
    res.U = std::move(ex.U);
    log.relaxed_objective = ex.relaxed_objective;
    log.extraction_gap = ex.gap;
  }
  res.p = res.relaxed.p;
  if (res.ul_rate_cap.empty()) res.ul_rate_cap = res.relaxed.scheduled_ul_rates();
  res.rates = evaluate_rates(res.U, res.p, sc, ch, &res.ul_rate_cap);
  res.feasibility = validate_solution(res.U, res.p, sc, ch, 1e-6, &res.ul_rate_cap);

  log.residual_backlog = res.rates.residual_backlog();
  log.q_dev_dl = res.rates.q_dev_dl;
  log.q_dev_ul = res.rates.q_dev_ul;
  log.sum_rate_dl = res.rates.sum_rate_dl();
  log.sum_rate_ul = res.rates.sum_rate_ul();
  log.tx_power = res.rates.tx_power;
  log.decode_power = res.rates.decode_power;
  log.power_total = res.rates.power_total;
  log.available_power = sc.power_budget;
  log.objective = queue_objective(res.rates, sc);
  log.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

void ExperimentPlan::validate() const {
  if (seeds.empty()) throw std::invalid_argument("plan has no seeds");
  std::set<std::uint64_t> distinct(seeds.begin(), seeds.end());
  if (distinct.size() != seeds.size()) throw std::invalid_argument("plan seeds must be distinct");
  if (eh_rates.empty() && alphas.empty()) throw std::invalid_argument("plan has neither an EH-rate nor an alpha axis");
  if (!eh_rates.empty() && (setups.empty() || duplexes.empty())) {
    throw std::invalid_argument("EH sweep needs at least one setup and one duplex mode");
  }
  for (double r : eh_rates) {
    if (!(r > 0.0)) throw std::invalid_argument("EH rates must be positive");
  }
  for (double a : alphas) {
    if (!(a >= 0.0)) throw std::invalid_argument("alphas must be nonnegative");
  }
  if (workers < 1) throw std::invalid_argument("plan needs at least one worker");
  base.validate();
}

ExperimentPlan plan_from_json(const nlohmann::json& j) {
  static const std::set<std::string> known = {
      "base", "mode", "seeds", "setups", "duplex", "eh_rates", "alphas", "alpha_sweep_eh_rate", "output_dir",
      "max_spca_iterations", "spca_tol", "trials", "admm_max_iterations", "rho", "residual_balancing",
      "workers"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) throw std::invalid_argument("unknown plan field: " + it.key());
  }
  ExperimentPlan p;
  if (j.contains("base")) p.base = config_from_json(j.at("base"));
  if (j.contains("mode")) p.mode = parse_mode(j.at("mode").get<std::string>());
  if (j.contains("seeds")) p.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  if (j.contains("setups")) {
    for (const auto& s : j.at("setups")) p.setups.push_back(parse_setup(s.get<std::string>()));
  }
  if (j.contains("duplex")) {
    for (const auto& s : j.at("duplex")) p.duplexes.push_back(parse_duplex(s.get<std::string>()));
  }
  if (j.contains("eh_rates")) p.eh_rates = j.at("eh_rates").get<std::vector<double>>();
  if (j.contains("alphas")) p.alphas = j.at("alphas").get<std::vector<double>>();
  if (j.contains("alpha_sweep_eh_rate")) p.alpha_sweep_eh_rate = j.at("alpha_sweep_eh_rate").get<double>();
  if (j.contains("output_dir")) p.output_dir = j.at("output_dir").get<std::string>();
  if (j.contains("max_spca_iterations")) p.run.max_spca_iterations = j.at("max_spca_iterations").get<int>();
  if (j.contains("spca_tol")) p.run.spca_tol = j.at("spca_tol").get<double>();
  if (j.contains("trials")) p.run.trials = j.at("trials").get<int>();
  if (j.contains("admm_max_iterations")) p.run.admm.max_iterations = j.at("admm_max_iterations").get<int>();
  if (j.contains("rho")) {
    double r = j.at("rho").get<double>();
    p.run.admm.rho.rho1 = p.run.admm.rho.rho2 = p.run.admm.rho.rho3 = p.run.admm.rho.rho4 = r;
  }
  if (j.contains("workers")) p.workers = j.at("workers").get<int>();
  if (j.contains("residual_balancing")) p.run.admm.rho.residual_balancing = j.at("residual_balancing").get<bool>();
  p.run.mode = p.mode;
  p.validate();
  return p;
}

ExperimentPlan load_plan(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open plan file " + path);
  auto plan = plan_from_json(nlohmann::json::parse(in, nullptr, true, true));
  // Relative output directories are taken relative to the plan file.
  if (!plan.output_dir.empty() && plan.output_dir.is_relative()) plan.output_dir = std::filesystem::path(path).parent_path() / plan.output_dir;
  return plan;
}

namespace {

RunRecord execute(const ScenarioConfig& cfg, const RunOptions& base_opt, RunRecord rec) {
  try {
    Scenario sc = make_scenario(cfg);
    ChannelSet ch = draw_channels(sc.topology, cfg);
    RunOptions opt = base_opt;
    opt.extraction_seed = cfg.seed;
    RunResult r = run_algorithm1(sc, ch, opt);
    rec.log = std::move(r.log);
    rec.feasible = r.feasibility.feasible();
    rec.ok = true;
  } catch (const std::exception& e) {
    rec.ok = false;
    rec.error = e.what();
  }
  return rec;
}

std::string run_id(const RunRecord& r) {
  std::ostringstream s;
  s << r.sweep << '_' << to_string(r.setup) << '_' << to_string(r.duplex) << '_'
    << (r.sweep == "alpha" ? r.alpha : r.eh_rate) << "_s" << r.seed;
  return s.str();
}

template <typename F>
void write_file(const std::filesystem::path& path, F&& body) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  body(out);
}

}  // namespace

PlanResult run_plan(const ExperimentPlan& plan) {
  plan.validate();
  PlanResult out;
  RunOptions opt = plan.run;
  opt.mode = plan.mode;
  std::vector<ScenarioConfig> configs;
  for (Setup s : plan.setups) {
    for (Duplex d : plan.duplexes) {
      for (double eh : plan.eh_rates) {
        for (std::uint64_t seed : plan.seeds) {
          ScenarioConfig cfg = plan.base;
          cfg.setup = s;
          cfg.duplex = d;
          cfg.seed = seed;
          cfg.harvest_power = harvest_from_normalized_rate(eh, cfg);
          RunRecord rec;
          rec.sweep = "eh";
          rec.setup = s;
          rec.duplex = d;
          rec.eh_rate = eh;
          rec.alpha = cfg.effective_decode_eff();
          rec.seed = seed;
          configs.push_back(cfg);
          out.runs.push_back(rec);
        }
      }
    }
  }
  for (double a : plan.alphas) {
    for (std::uint64_t seed : plan.seeds) {
      ScenarioConfig cfg = plan.base;
      cfg.setup = Setup::C;
      cfg.duplex = Duplex::FD;
      cfg.seed = seed;
      cfg.decode_eff = a;
      if (plan.alpha_sweep_eh_rate > 0.0) cfg.harvest_power = harvest_from_normalized_rate(plan.alpha_sweep_eh_rate, cfg);
      RunRecord rec;
      rec.sweep = "alpha";
      rec.setup = Setup::C;
      rec.duplex = Duplex::FD;
      rec.eh_rate = cfg.harvest_power / (cfg.circuit_power + 5.0 * cfg.sbs_max_power);
      rec.alpha = a;
      rec.seed = seed;
      configs.push_back(cfg);
      out.runs.push_back(rec);
    }
  }
  // Runs share nothing; each worker takes the next unclaimed index.
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k = next++; k < configs.size(); k = next++) out.runs[k] = execute(configs[k], opt, out.runs[k]);
  };
  const int nw = std::min<int>(plan.workers, static_cast<int>(configs.size()));
  if (nw <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < nw; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  out.eh_rows = aggregate(out.runs, "eh");
  out.alpha_rows = aggregate(out.runs, "alpha");

  if (!plan.output_dir.empty()) {
    std::filesystem::create_directories(plan.output_dir);
    const auto& dir = plan.output_dir;
    write_file(dir / "summary.csv", [&](std::ostream& os) { write_summary_csv(os, out.runs); });
    write_file(dir / "eh_sweep.csv", [&](std::ostream& os) { write_sweep_csv(os, out.eh_rows); });
    write_file(dir / "alpha_sweep.csv", [&](std::ostream& os) { write_sweep_csv(os, out.alpha_rows); });
    write_file(dir / "convergence.csv", [&](std::ostream& os) { write_convergence_csv(os, out.runs); });
    write_file(dir / "plots.gp", [&](std::ostream& os) { write_gnuplot_script(os); });
    for (const auto& r : out.runs) {
      if (!r.ok) continue;
      write_file(dir / ("trace_" + run_id(r) + ".csv"), [&](std::ostream& os) { write_spca_trace_csv(os, r.log.spca); });
    }
  }
  return out;
}

std::vector<SweepRow> aggregate(const std::vector<RunRecord>& runs, const std::string& sweep) {
  using Key = std::tuple<int, int, double>;
  std::map<Key, std::vector<const RunRecord*>> groups;
  for (const auto& r : runs) {
    if (!r.ok || r.sweep != sweep) continue;
    double x = sweep == "alpha" ? r.alpha : r.eh_rate;
    groups[{static_cast<int>(r.setup), static_cast<int>(r.duplex), x}].push_back(&r);
  }
  auto stats = [](const std::vector<double>& v, double& mean, double& se) {
    mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    se = 0.0;
    if (v.size() < 2) return;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  };
  std::vector<SweepRow> rows;
  for (const auto& [key, members] : groups) {
    SweepRow row;
    row.sweep = sweep;
    row.setup = static_cast<Setup>(std::get<0>(key));
    row.duplex = static_cast<Duplex>(std::get<1>(key));
    row.x = std::get<2>(key);
    row.runs = static_cast<int>(members.size());
    std::vector<double> dl, ul, bl;
    for (const auto* m : members) {
      dl.push_back(m->log.sum_rate_dl);
      ul.push_back(m->log.sum_rate_ul);
      bl.push_back(m->log.residual_backlog);
    }
    stats(dl, row.dl_mean, row.dl_se);
    stats(ul, row.ul_mean, row.ul_se);
    stats(bl, row.backlog_mean, row.backlog_se);
    rows.push_back(row);
  }
  return rows;
}

namespace {

double total(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

}  // namespace

void write_summary_csv(std::ostream& os, const std::vector<RunRecord>& runs) {
  os << "sweep,setup,duplex,eh_rate,alpha,seed,status,feasible,spca_iterations,spca_converged,sum_rate_dl,sum_rate_ul,"
        "residual_backlog,objective,relaxed_objective,extraction_gap,tx_power,decode_power,power_total,"
        "available_power,seconds,error\n";
  for (const auto& r : runs) {
    const auto& l = r.log;
    os << r.sweep << ',' << to_string(r.setup) << ',' << to_string(r.duplex) << ',' << r.eh_rate << ',' << r.alpha
       << ',' << r.seed << ',' << (r.ok ? "ok" : "failed") << ',' << r.feasible << ',' << l.spca_iterations << ','
       << l.converged << ',' << l.sum_rate_dl << ',' << l.sum_rate_ul << ',' << l.residual_backlog << ','
       << l.objective << ',' << l.relaxed_objective << ',' << l.extraction_gap << ',' << total(l.tx_power) << ','
       << total(l.decode_power) << ',' << total(l.power_total) << ',' << total(l.available_power) << ','
       << l.seconds << ',';
    std::string e = r.error;
    std::replace(e.begin(), e.end(), ',', ';');
    std::replace(e.begin(), e.end(), '\n', ' ');
    os << e << '\n';
  }
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "sweep,setup,duplex,x,runs,sum_rate_dl,sum_rate_dl_se,sum_rate_ul,sum_rate_ul_se,residual_backlog,"
        "residual_backlog_se\n";
  for (const auto& r : rows) {
    os << r.sweep << ',' << to_string(r.setup) << ',' << to_string(r.duplex) << ',' << r.x << ',' << r.runs << ','
       << r.dl_mean << ',' << r.dl_se << ',' << r.ul_mean << ',' << r.ul_se << ',' << r.backlog_mean << ','
       << r.backlog_se << '\n';
  }
}

void write_convergence_csv(std::ostream& os, const std::vector<RunRecord>& runs) {
  os << "sweep,setup,duplex,eh_rate,alpha,seed,iteration,objective,residual_backlog\n";
  for (const auto& r : runs) {
    if (!r.ok) continue;
    for (const auto& row : r.log.spca) {
      os << r.sweep << ',' << to_string(r.setup) << ',' << to_string(r.duplex) << ',' << r.eh_rate << ',' << r.alpha
         << ',' << r.seed << ',' << row.iteration << ',' << row.objective << ',' << row.residual_backlog << '\n';
    }
  }
}

void write_spca_trace_csv(std::ostream& os, const std::vector<SpcaTraceRow>& rows) {
  os << "iteration,objective,residual_backlog,relative_change,inner_iterations,status\n";
  for (const auto& r : rows) {
    os << r.iteration << ',' << r.objective << ',' << r.residual_backlog << ',' << r.relative_change << ','
       << r.inner_iterations << ',' << r.status << '\n';
  }
}

void write_gnuplot_script(std::ostream& os) {
  os << "set datafile separator ','\n"
        "set terminal pngcairo size 900,600\n"
        "set key outside\n"
        "set output 'eh_sweep.png'\n"
        "set xlabel 'normalized EH rate'\n"
        "set ylabel 'sum rate (bits/s/Hz)'\n"
        "plot for [s in 'A B C'] 'eh_sweep.csv' using (strcol(2) eq s && strcol(3) eq 'FD' ? $4 : 1/0):6 "
        "with linespoints title 'DL '.s, \\\n"
        "     for [s in 'A B C'] 'eh_sweep.csv' using (strcol(2) eq s && strcol(3) eq 'FD' ? $4 : 1/0):8 "
        "with linespoints title 'UL '.s\n"
        "set output 'alpha_sweep.png'\n"
        "set xlabel 'decoding coefficient'\n"
        "plot 'alpha_sweep.csv' using 4:6:7 with yerrorlines title 'DL', "
        "'alpha_sweep.csv' using 4:8:9 with yerrorlines title 'UL'\n"
        "set output 'convergence.png'\n"
        "set xlabel 'SPCA iteration'\n"
        "set ylabel 'residual backlog (bits)'\n"
        "plot for [d in 'FD HD'] 'convergence.csv' using (strcol(1) eq 'eh' && strcol(3) eq d ? $7 : 1/0):9 "
        "with points title d\n";
}

}  // namespace fdsc
