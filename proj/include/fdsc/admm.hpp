#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "fdsc/conic.hpp"
#include "fdsc/convexify.hpp"

namespace fdsc {

/// Interference a producing cell causes at a UE of another cell.
enum class CouplingKind {
  kDlFromDl,  // scalar: producer's DL beams at a DL UE
  kDlFromUl,  // scalar: producer's UL UEs at a DL UE
  kUlFromDl,  // matrix: producer's DL beams at a UL UE's receiver
  kUlFromUl,  // matrix: producer's UL UEs at a UL UE's receiver
};

const char* to_string(CouplingKind k);

/// One consensus triple (producer, victim UE, carrier). Values are in units of
/// the victim receiver's noise power.
struct Coupling {
  CouplingKind kind;
  int producer = 0;
  int victim = 0;  // DL or UL UE index, by kind
  int victim_cell = 0;
  int n = 0;
  int dim = 1;  // 1 for scalars, M_R for matrices
  double scale = 1.0;      // coupling magnitude at full power
  double objective = 1.0;  // objective magnitude the penalty is measured against
  double weight = 1.0;     // per-coupling balancing factor

  double penalty(double rho) const { return rho * weight * objective / (scale * scale); }
};

/// Couplings present in the scenario: producer cell differs from the victim's
/// cell and the producer has transmitters of the relevant kind on the carrier.
std::vector<Coupling> enumerate_couplings(const Scenario& sc);

struct PenaltyParams {
  double rho1 = 1.0;  // DL-from-DL scalars
  double rho2 = 1.0;  // DL-from-UL scalars
  double rho3 = 1.0;  // UL-from-DL matrices
  double rho4 = 1.0;  // UL-from-UL matrices
  bool residual_balancing = false;

  double rho(CouplingKind k) const;
  void validate() const;
};

struct GlobalState {
  std::vector<CMatrix> value;  // per coupling, 1x1 for scalars
};

/// Two multipliers per coupling, one for each copy; matrices are paired with
/// the transposed residual.
struct Multipliers {
  std::vector<CMatrix> producer;
  std::vector<CMatrix> victim;
};

/// A BS's local program layout together with its last solution.
struct LocalState {
  int cell = 0;
  SurrogateProblem problem;
  std::vector<int> copy_offset;  // per coupling, first coordinate; -1 when the BS holds no copy
  std::vector<int> copy_dim;
  std::vector<double> x;         // last solution, empty before the first solve
  int solve_status = -1;
  std::vector<CMatrix> copies() const;
};

struct Message {
  int coupling = 0;
  int from = 0;
  int to = 0;
  CMatrix producer_copy;
  CMatrix victim_copy;
  std::size_t bytes = 0;
};

using LatencyHook = std::function<double(const Message&)>;

struct AdmmOptions {
  PenaltyParams rho;
  int max_iterations = 300;
  double tol = 1e-4;
  /// Scale every coupling by max(1, its value with all transmitters at full
  /// power) and the penalties by the queue objective at zero rate.
  bool scaled_couplings = true;
  /// Per-coupling balancing: a coupling's weight doubles while its primal
  /// residual exceeds ten times its dual residual and the tolerance, and
  /// halves in the opposite case. Weights persist across calls.
  bool balance_couplings = true;
  /// Order of the per-SBS solves within an iteration; empty means 0..B-1.
  std::vector<int> solve_order;
  conic::SolverOptions solver;
  LatencyHook latency;
};

/// Everything carried from one ADMM call to the next (multipliers are kept
/// across SPCA iterations).
struct AdmmState {
  std::vector<Coupling> couplings;
  std::vector<LocalState> locals;
  GlobalState globals;
  Multipliers mult;
  PenaltyParams rho;
  bool initialized = false;
};

struct AdmmTraceRow {
  int spca_iteration = 0;
  int iteration = 0;
  double objective = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  std::size_t messages = 0;
  std::size_t bytes = 0;
  double latency = 0.0;  // sum over messages of the latency hook, logs only
  double rho = 1.0;
};

struct AdmmResult {
  SpcaIterate iterate;
  std::vector<AdmmTraceRow> trace;
  bool converged = false;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
};

/// Interference value of a coupling at the iterate, normalized by the victim's noise.
CMatrix coupling_value(const Coupling& c, const SpcaIterate& it, const Scenario& sc, const ChannelSet& ch);

/// Constraint part of a BS's program; the objective holds only the queue norms.
LocalState build_local_constraints(int b, const SpcaIterate& it, const Scenario& sc, const ChannelSet& ch,
                                   const std::vector<Coupling>& couplings, const LocalState* warm = nullptr);

/// Adds the consensus terms: for every copy, <multiplier, copy - global> + rho/2 ||copy - global||^2.
conic::ConicProgram with_penalties(const LocalState& local, const std::vector<Coupling>& couplings,
                                   const GlobalState& globals, const Multipliers& mult, const PenaltyParams& rho);

/// Per-BS program: own variables, copies of interference caused to and
/// received from other cells, surrogate constraints restricted to the cell,
/// and linear plus quadratic consensus penalties. Expands around warm->x when
/// given (same layout), else around the iterate.
LocalState build_local_subproblem(int b, const SpcaIterate& it, const Scenario& sc, const ChannelSet& ch,
                                  const std::vector<Coupling>& couplings, const GlobalState& globals,
                                  const Multipliers& mult, const PenaltyParams& rho, const LocalState* warm = nullptr);

/// One message per coupling carrying both copies. Throws if a local has not been solved.
std::vector<Message> exchange(const std::vector<LocalState>& locals, const std::vector<Coupling>& couplings);

/// Average of the two copies per coupling.
GlobalState update_globals(const std::vector<Message>& messages, const std::vector<Coupling>& couplings);

/// multiplier += rho (copy - global), transposed for matrices.
Multipliers update_multipliers(const std::vector<Message>& messages, const GlobalState& globals,
                               const Multipliers& mult, const PenaltyParams& rho,
                               const std::vector<Coupling>& couplings);

/// Solves the surrogate at `it` by consensus ADMM, carrying `state` across calls.
AdmmResult admm_loop(const SpcaIterate& it, const Scenario& sc, const ChannelSet& ch, AdmmState& state,
                     const AdmmOptions& opt = {}, int spca_iteration = 0);

void write_admm_trace_csv(std::ostream& os, const std::vector<AdmmTraceRow>& rows);

}  // namespace fdsc
