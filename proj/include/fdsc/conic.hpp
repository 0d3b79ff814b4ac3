#pragma once

// Small dense barrier solver for mixed conic programs over real scalars and
// Hermitian blocks. Supported constraint kinds:
//
//   affine           a'x + b <= 0
//   second-order     || A x + b ||_2 <= c'x + d
//   PSD-dominance    F0 + sum_k x_k F_k  is positive semidefinite (Hermitian F)
//   exp-epigraph     exp(a'x + b) <= c'x + d
//
// Objective: affine + sum_k w_k ||G_k x + h_k||_2 + sum_k w_k (g_k'x + h_k)^2.

#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fdsc/linalg.hpp"

namespace fdsc::conic {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Sparse affine expression sum_k coef_k x_{var_k} + constant.
struct AffineExpr {
  std::vector<std::pair<int, double>> terms;
  double constant = 0.0;

  AffineExpr() = default;
  explicit AffineExpr(double c) : constant(c) {}

  static AffineExpr variable(int var, double coef = 1.0) {
    AffineExpr e;
    e.terms.emplace_back(var, coef);
    return e;
  }

  AffineExpr& add(int var, double coef) {
    if (coef != 0.0) terms.emplace_back(var, coef);
    return *this;
  }
  AffineExpr& operator+=(const AffineExpr& o);
  AffineExpr& operator-=(const AffineExpr& o);
  AffineExpr& operator*=(double s);

  double evaluate(std::span<const double> x) const;
  /// Merges duplicate indices and drops exact zeros.
  void compact();
};

AffineExpr operator+(AffineExpr a, const AffineExpr& b);
AffineExpr operator-(AffineExpr a, const AffineExpr& b);
AffineExpr operator*(double s, AffineExpr a);

/// Affine Hermitian-matrix-valued expression F0 + sum_k x_{var_k} F_k.
struct HermitianExpr {
  CMatrix constant;
  std::vector<std::pair<int, CMatrix>> terms;

  HermitianExpr() = default;
  explicit HermitianExpr(CMatrix c) : constant(std::move(c)) {}
  static HermitianExpr zero(int dim) { return HermitianExpr(CMatrix::Zero(dim, dim)); }

  int dim() const { return static_cast<int>(constant.rows()); }
  HermitianExpr& add(int var, const CMatrix& coef) {
    terms.emplace_back(var, coef);
    return *this;
  }
  HermitianExpr& operator+=(const HermitianExpr& o);
  HermitianExpr& operator-=(const HermitianExpr& o);
  HermitianExpr& operator*=(double s);

  CMatrix evaluate(std::span<const double> x) const;
  /// Re tr(G X) as a scalar affine expression, G Hermitian.
  AffineExpr trace_with(const CMatrix& g) const;
};

struct Variable {
  std::string name;
  double lower = -kInf;
  double upper = kInf;
};

struct HermitianBlock {
  std::string name;
  int dim = 0;
  int offset = 0;  ///< first of dim*dim consecutive variables
  bool psd = false;
};

struct AffineConstraint {
  AffineExpr expr;  ///< expr <= 0
  std::string tag;
};

struct SecondOrderConstraint {
  std::vector<AffineExpr> rows;
  AffineExpr bound;
  std::string tag;
};

struct PsdConstraint {
  HermitianExpr matrix;
  std::string tag;
};

struct ExpConstraint {
  AffineExpr exponent;
  AffineExpr bound;
  std::string tag;
};

struct NormTerm {
  double weight = 1.0;
  std::vector<AffineExpr> rows;
  std::string tag;
};

struct SquareTerm {
  double weight = 1.0;
  AffineExpr expr;
};

/// Language-neutral description of a convex program.
class ConicProgram {
 public:
  int add_variable(std::string name, double lower = -kInf, double upper = kInf);
  /// Appends dim*dim coordinates for a Hermitian matrix; returns the block index.
  int add_hermitian(std::string name, int dim, bool psd);
  HermitianExpr block_expr(int block) const;

  void add_affine_le(AffineExpr expr, std::string tag);
  void add_affine_ge(AffineExpr expr, std::string tag);  ///< expr >= 0
  void add_second_order(std::vector<AffineExpr> rows, AffineExpr bound, std::string tag);
  /// a^2 + b^2 + ... <= s, emitted as a rotated second-order constraint.
  void add_sum_squares_le(std::vector<AffineExpr> squares, AffineExpr s, std::string tag);
  void add_psd(HermitianExpr matrix, std::string tag);
  void add_exp(AffineExpr exponent, AffineExpr bound, std::string tag);

  void add_objective(const AffineExpr& e);
  void add_norm_objective(double weight, std::vector<AffineExpr> rows, std::string tag);
  void add_square_objective(double weight, AffineExpr expr);

  int num_variables() const { return static_cast<int>(variables_.size()); }
  const std::vector<Variable>& variables() const { return variables_; }
  std::vector<Variable>& variables() { return variables_; }
  const std::vector<HermitianBlock>& blocks() const { return blocks_; }
  const std::vector<AffineConstraint>& affine() const { return affine_; }
  const std::vector<SecondOrderConstraint>& second_order() const { return soc_; }
  const std::vector<PsdConstraint>& psd() const { return psd_; }
  const std::vector<ExpConstraint>& exp() const { return exp_; }
  const AffineExpr& linear_objective() const { return linear_; }
  const std::vector<NormTerm>& norm_terms() const { return norms_; }
  const std::vector<SquareTerm>& square_terms() const { return squares_; }

  std::size_t num_constraints() const {
    return affine_.size() + soc_.size() + psd_.size() + exp_.size();
  }

  /// Throws std::invalid_argument on out-of-range indices or inconsistent dims.
  void validate() const;

  double objective(std::span<const double> x) const;

 private:
  std::vector<Variable> variables_;
  std::vector<HermitianBlock> blocks_;
  std::vector<AffineConstraint> affine_;
  std::vector<SecondOrderConstraint> soc_;
  std::vector<PsdConstraint> psd_;
  std::vector<ExpConstraint> exp_;
  AffineExpr linear_;
  std::vector<NormTerm> norms_;
  std::vector<SquareTerm> squares_;
};

enum class SolveStatus { kOptimal, kMaxIterations, kInfeasible, kNumericalFailure };

const char* to_string(SolveStatus s);

struct KktResiduals {
  double stationarity = 0.0;     ///< || grad L ||_inf / (1 + largest per-coordinate sum of |term| in grad L)
  double primal = 0.0;           ///< largest constraint or bound violation
  double dual = 0.0;             ///< largest dual-cone violation
  double complementarity = 0.0;  ///< total duality-gap proxy sum <dual, slack>
  std::vector<std::string> violated;  ///< tags of violated primal constraints

  double max() const;
};

/// Dual estimates, one entry per program item in declaration order.
struct DualValues {
  std::vector<double> lower_bounds;  ///< per variable (0 when unbounded)
  std::vector<double> upper_bounds;
  std::vector<double> affine;
  std::vector<std::vector<double>> second_order;  ///< (z0, z1...) per constraint
  std::vector<CMatrix> psd;                       ///< implicit block constraints first, then explicit
  std::vector<double> exp;
  std::vector<std::vector<double>> norms;  ///< subgradient vectors y_k, ||y_k|| <= w_k
};

struct Solution {
  SolveStatus status = SolveStatus::kNumericalFailure;
  std::vector<double> x;
  double objective = 0.0;
  double gap = 0.0;  ///< barrier duality-gap bound at exit
  DualValues duals;
  KktResiduals kkt;
  int newton_steps = 0;
  std::string message;

  bool ok() const { return status == SolveStatus::kOptimal; }
};

struct SolverOptions {
  double tol = 1e-7;            ///< duality-gap target, relative to max(1, |objective|)
  double newton_tol = 1e-9;     ///< half squared Newton decrement per centering
  double stationarity_tol = 1e-6;
  int max_newton_per_center = 200;
  int max_newton_total = 4000;
  double armijo = 0.25;
  double backtrack = 0.5;
  double mu_factor = 10.0;
  std::optional<std::vector<double>> initial_point;
};

/// Barrier path-following solve. Deterministic for a given program and options.
Solution solve(const ConicProgram& program, const SolverOptions& options = {});

/// Recomputes KKT residuals for (x, duals) directly from the program data.
KktResiduals check_kkt(const ConicProgram& program, std::span<const double> x, const DualValues& duals);
inline KktResiduals check_kkt(const ConicProgram& program, const Solution& s) {
  return check_kkt(program, s.x, s.duals);
}

/// Primal violations only; empty list means feasible within tol.
std::vector<std::string> violated_constraints(const ConicProgram& program, std::span<const double> x,
                                              double tol);

/// Plain-text problem dump; see README for the grammar.
void write_program(std::ostream& os, const ConicProgram& program);
ConicProgram read_program(std::istream& is);

}  // namespace fdsc::conic
