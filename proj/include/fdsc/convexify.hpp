#pragma once

#include <string>
#include <vector>

#include "fdsc/channel.hpp"
#include "fdsc/conic.hpp"
#include "fdsc/phy_model.hpp"
#include "fdsc/scenario.hpp"

namespace fdsc {

/// Current point of the successive approximation. Entries for carriers a
/// UE cannot use (half duplex) stay zero. beta and xi are expressed in units
/// of the DL receiver noise power; rates t are in nats.
/// Natural-log rates to bits.
inline constexpr double kBitsPerNat = 1.4426950408889634;

struct SpcaIterate {
  BeamformerSet U;
  PowerSet p;
  std::vector<double> beta;  // [i * N + n]
  std::vector<double> z_dl;
  std::vector<double> t_dl;
  std::vector<double> xi;
  std::vector<double> x;  // [j * N + n], sqrt-watts
  std::vector<double> z_ul;
  std::vector<double> t_ul;

  int num_subcarriers() const { return U.num_subcarriers; }
  /// UL rates the iterate schedules, bits/s/Hz per [j][n].
  std::vector<std::vector<double>> scheduled_ul_rates() const;
};

/// beta^2 / (2 xi) + xi z^2 / 2, an upper bound on z * beta.
double amgm_bound(double z, double beta, double xi);

/// xi = beta / max(z, eps) for every DL UE and carrier.
std::vector<double> update_xi(const SpcaIterate& it, double eps = 1e-9);

/// x^2 h^H X^{-1} h; X must be positive definite.
double matrix_fractional(double x, const CMatrix& X, const CVector& h);

/// First-order expansion of the matrix-fractional function at (x0, X0):
/// f(x0, X0) + 2 x0 c (x - x0) - x0^2 tr(G (X - X0)), c = h^H X0^{-1} h,
/// G = X0^{-1} h h^H X0^{-1}. Since the function is jointly convex this is a
/// global affine minorant.
struct MatrixFractionalMinorant {
  double x0 = 0.0;
  CMatrix X0;
  double value0 = 0.0;
  double slope_x = 0.0;  // 2 x0 c
  CMatrix slope_X;       // -x0^2 G

  double evaluate(double x, const CMatrix& X) const;
};

MatrixFractionalMinorant linearize_matrix_fractional(double x0, const CMatrix& X0, const CVector& h);

struct SurrogateOptions {
  /// One norm over all DL and one over all UL queues instead of per-cell norms.
  bool network_norm = false;
};

/// Program indices of the iterate variables, -1 where absent.
struct VarMap {
  std::vector<int> U_offset;  // first coordinate of the Hermitian block
  std::vector<int> p, x, beta, z_dl, t_dl, z_ul, t_ul;
};

struct SurrogateProblem {
  conic::ConicProgram program;
  VarMap vars;
  std::vector<double> start;  // strictly feasible point built from the iterate
  std::vector<int> cells;     // cells whose variables the program owns
};

/// Assembles surrogate programs piece by piece. All interference terms are
/// normalized by the receiving side's noise power.
class SurrogateBuilder {
 public:
  SurrogateBuilder(const Scenario& sc, const ChannelSet& ch, const SpcaIterate& it, SurrogateOptions opt = {});

  int add_scalar(const std::string& name, double lower, double upper, double start);
  /// Returns the offset of the new block's first coordinate.
  int add_matrix(const std::string& name, int dim, bool psd, const CMatrix& start);
  conic::HermitianExpr matrix_expr(int offset, int dim) const;

  void add_cell_variables(int b);

  /// Interference at DL UE i from cell c's DL beams (UE i's own beam excluded).
  conic::AffineExpr dl_from_dl(int c, int i, int n) const;
  /// Interference at DL UE i from cell c's UL UEs.
  conic::AffineExpr dl_from_ul(int c, int i, int n) const;
  /// Residual covariance at UL UE j's receiver from cell c's UL UEs (SIC applied in j's own cell).
  conic::HermitianExpr ul_from_ul(int c, int j, int n) const;
  /// Covariance at UL UE j's receiver from cell c's DL beams (self interference when c is j's cell).
  conic::HermitianExpr ul_from_dl(int c, int j, int n) const;

  /// Cell-local constraints: signal bound, rate epigraphs, x^2 <= p, power and energy budgets.
  void add_cell_constraints(int b);
  /// 1 + interference <= beta.
  void add_dl_interference(int i, int n, const conic::AffineExpr& interference);
  /// z_ul <= affine minorant of x^2 h^H X^{-1} h, X = I + residual (expanded at the start point).
  void add_ul_sinr(int j, int n, const conic::HermitianExpr& residual);
  /// Queue-deviation norms of the given cells.
  void add_queue_objective(const std::vector<int>& cells);

  conic::AffineExpr queue_deviation_expr(bool downlink, int ue) const;
  conic::ConicProgram& program() { return problem_.program; }
  const VarMap& vars() const { return problem_.vars; }
  const std::vector<double>& start() const { return problem_.start; }
  /// Replaces the start point; call before adding constraints that expand around it.
  void set_start(std::vector<double> x);
  SurrogateProblem finish() { return std::move(problem_); }

  const Scenario& scenario() const { return sc_; }
  const ChannelSet& channels() const { return ch_; }

 private:
  conic::AffineExpr dl_gain(int tx_cell, int k, int i, int n) const;

  const Scenario& sc_;
  const ChannelSet& ch_;
  const SpcaIterate& it_;
  SurrogateOptions opt_;
  SurrogateProblem problem_;
};

/// Whole-network surrogate of the relaxed problem around the iterate.
SurrogateProblem build_surrogate(const SpcaIterate& it, const Scenario& sc, const ChannelSet& ch,
                                 const SurrogateOptions& opt = {});

/// Copies the owned variables of a solved surrogate into a new iterate; xi is
/// refreshed from the new beta and z.
SpcaIterate extract_iterate(const SurrogateProblem& sp, std::span<const double> x, const SpcaIterate& previous);

/// Inverse of extract_iterate: the iterate's values at the program's variables.
std::vector<double> pack_iterate(const SurrogateProblem& sp, const SpcaIterate& it);

/// Feasible starting point: scaled identity beams and equal UL power split,
/// shrunk until the energy budget holds strictly; auxiliaries strictly inside
/// their constraints by a relative margin.
SpcaIterate initial_iterate(const Scenario& sc, const ChannelSet& ch, double margin = 1e-3);

/// Surrogate objective evaluated from the rate variables of an iterate.
double surrogate_objective(const SpcaIterate& it, const Scenario& sc, const SurrogateOptions& opt = {});


}  // namespace fdsc
