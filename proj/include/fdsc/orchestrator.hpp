#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "fdsc/admm.hpp"
#include "fdsc/convexify.hpp"
#include "fdsc/phy_model.hpp"
#include "json.hpp"

namespace fdsc {

enum class SolveMode { kCentralized, kAdmm };

const char* to_string(SolveMode m);
SolveMode parse_mode(const std::string& s);

/// sum_b (||q_D,b||_2 + ||q_U,b||_2) from delivered rates.
double queue_objective(const RateReport& r, const Scenario& sc);

struct ExtractionResult {
  std::vector<CVector> beams;  // [i * N + n]
  BeamformerSet U;             // u u^H
  double relaxed_objective = 0.0;
  double objective = 0.0;
  double gap = 0.0;  // objective - relaxed_objective
  bool rank_one_input = false;
  int candidates = 0;
};

/// Gaussian randomization. Candidates are drawn with covariance U (plus the
/// principal components), each cell's beams are scaled by the largest factor
/// that keeps its DL power and energy budgets, and the candidate with the
/// smallest queue objective wins. UL powers are kept; UL rates are capped at
/// ul_rate_cap (the relaxed solution's rates when null). Inputs whose
/// matrices are all rank one (second/first eigenvalue < 1e-8) return their
/// principal components unscaled.
ExtractionResult extract_rank_one(const BeamformerSet& U, const PowerSet& p, const Scenario& sc,
                                  const ChannelSet& ch, int trials = 200, std::uint64_t seed = 1,
                                  const std::vector<std::vector<double>>* ul_rate_cap = nullptr);

struct RunOptions {
  SolveMode mode = SolveMode::kCentralized;
  int max_spca_iterations = 50;
  double spca_tol = 1e-4;  // relative change of the queue objective
  int trials = 200;
  std::uint64_t extraction_seed = 1;
  conic::SolverOptions solver;
  AdmmOptions admm;
  SurrogateOptions surrogate;
};

struct SpcaTraceRow {
  int iteration = 0;
  double objective = 0.0;         // surrogate queue objective at the new iterate
  double residual_backlog = 0.0;  // phy_model on the relaxed iterate
  double relative_change = 0.0;
  int inner_iterations = 0;  // Newton steps or ADMM iterations
  std::string status;
};

struct MetricsLog {
  SolveMode mode = SolveMode::kCentralized;
  std::vector<SpcaTraceRow> spca;
  std::vector<AdmmTraceRow> admm;
  int spca_iterations = 0;
  bool converged = false;
  double residual_backlog = 0.0;
  std::vector<double> q_dev_dl, q_dev_ul;
  double sum_rate_dl = 0.0;
  double sum_rate_ul = 0.0;
  std::vector<double> tx_power, decode_power, power_total, available_power;
  double relaxed_objective = 0.0;
  double objective = 0.0;
  double extraction_gap = 0.0;
  double seconds = 0.0;
};

struct RunResult {
  SpcaIterate relaxed;  // last SPCA iterate
  std::vector<CVector> beams;
  BeamformerSet U;  // rank-one covariances of the beams
  PowerSet p;
  std::vector<std::vector<double>> ul_rate_cap;  // scheduled UL rates, bits/s/Hz
  RateReport rates;
  FeasibilityReport feasibility;
  MetricsLog log;
};

/// SPCA outer loop with a centralized or ADMM inner solve, then rank-one
/// extraction. All reported metrics are recomputed by phy_model.
RunResult run_algorithm1(const Scenario& sc, const ChannelSet& ch, const RunOptions& opt = {});

struct ExperimentPlan {
  ScenarioConfig base;
  SolveMode mode = SolveMode::kCentralized;
  std::vector<std::uint64_t> seeds;
  std::vector<Setup> setups;
  std::vector<Duplex> duplexes;
  std::vector<double> eh_rates;  // P_H / (P_cir + 5 P_max)
  std::vector<double> alphas;    // decoding coefficients, Setup C, FD
  double alpha_sweep_eh_rate = 0.0;  // 0: use the base config's harvest power
  std::filesystem::path output_dir = "out";
  RunOptions run;
  int workers = 1;  // concurrent runs

  /// Throws std::invalid_argument on empty axes or repeated seeds.
  void validate() const;
};

ExperimentPlan plan_from_json(const nlohmann::json& j);
ExperimentPlan load_plan(const std::string& path);

struct RunRecord {
  std::string sweep;  // "eh" or "alpha"
  Setup setup = Setup::C;
  Duplex duplex = Duplex::FD;
  double eh_rate = 0.0;
  double alpha = 0.0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  MetricsLog log;
  bool feasible = false;
};

struct SweepRow {
  std::string sweep;
  Setup setup = Setup::C;
  Duplex duplex = Duplex::FD;
  double x = 0.0;  // EH rate or alpha
  int runs = 0;
  double dl_mean = 0.0, dl_se = 0.0;
  double ul_mean = 0.0, ul_se = 0.0;
  double backlog_mean = 0.0, backlog_se = 0.0;
};

struct PlanResult {
  std::vector<RunRecord> runs;
  std::vector<SweepRow> eh_rows;
  std::vector<SweepRow> alpha_rows;
};

/// Runs every (axis point, seed); failures are recorded and the plan goes on.
/// Writes summary.csv, eh_sweep.csv, alpha_sweep.csv, convergence.csv and
/// plots.gp into output_dir when it is non-empty.
PlanResult run_plan(const ExperimentPlan& plan);

/// Seed averages with standard errors, grouped by (setup, duplex, x).
std::vector<SweepRow> aggregate(const std::vector<RunRecord>& runs, const std::string& sweep);

void write_summary_csv(std::ostream& os, const std::vector<RunRecord>& runs);
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);
void write_convergence_csv(std::ostream& os, const std::vector<RunRecord>& runs);
void write_spca_trace_csv(std::ostream& os, const std::vector<SpcaTraceRow>& rows);
void write_gnuplot_script(std::ostream& os);

}  // namespace fdsc
