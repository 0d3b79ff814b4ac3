#include "fdsc/conic.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace fdsc::conic {

// ---------------------------------------------------------------------------
// Expressions

AffineExpr& AffineExpr::operator+=(const AffineExpr& o) {
  terms.insert(terms.end(), o.terms.begin(), o.terms.end());
  constant += o.constant;
  return *this;
}

AffineExpr& AffineExpr::operator-=(const AffineExpr& o) {
  for (const auto& [v, c] : o.terms) terms.emplace_back(v, -c);
  constant -= o.constant;
  return *this;
}

AffineExpr& AffineExpr::operator*=(double s) {
  for (auto& t : terms) t.second *= s;
  constant *= s;
  return *this;
}

double AffineExpr::evaluate(std::span<const double> x) const {
  double v = constant;
  for (const auto& [i, c] : terms) v += c * x[i];
  return v;
}

void AffineExpr::compact() {
  std::sort(terms.begin(), terms.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::pair<int, double>> out;
  out.reserve(terms.size());
  for (const auto& t : terms) {
    if (!out.empty() && out.back().first == t.first) {
      out.back().second += t.second;
    } else {
      out.push_back(t);
    }
  }
  std::erase_if(out, [](const auto& t) { return t.second == 0.0; });
  terms = std::move(out);
}

AffineExpr operator+(AffineExpr a, const AffineExpr& b) { return a += b; }
AffineExpr operator-(AffineExpr a, const AffineExpr& b) { return a -= b; }
AffineExpr operator*(double s, AffineExpr a) { return a *= s; }

HermitianExpr& HermitianExpr::operator+=(const HermitianExpr& o) {
  if (constant.size() == 0) {
    constant = o.constant;
  } else {
    constant += o.constant;
  }
  terms.insert(terms.end(), o.terms.begin(), o.terms.end());
  return *this;
}

HermitianExpr& HermitianExpr::operator-=(const HermitianExpr& o) {
  if (constant.size() == 0) {
    constant = -o.constant;
  } else {
    constant -= o.constant;
  }
  for (const auto& [v, m] : o.terms) terms.emplace_back(v, -m);
  return *this;
}

HermitianExpr& HermitianExpr::operator*=(double s) {
  constant *= s;
  for (auto& t : terms) t.second *= s;
  return *this;
}

CMatrix HermitianExpr::evaluate(std::span<const double> x) const {
  CMatrix m = constant;
  for (const auto& [v, f] : terms) m += x[v] * f;
  return m;
}

AffineExpr HermitianExpr::trace_with(const CMatrix& g) const {
  AffineExpr e(real_trace_product(g, constant));
  for (const auto& [v, f] : terms) e.add(v, real_trace_product(g, f));
  return e;
}

// ---------------------------------------------------------------------------
// Program

int ConicProgram::add_variable(std::string name, double lower, double upper) {
  variables_.push_back({std::move(name), lower, upper});
  return static_cast<int>(variables_.size()) - 1;
}

int ConicProgram::add_hermitian(std::string name, int dim, bool psd) {
  if (dim < 1) throw std::invalid_argument("hermitian block dimension must be positive");
  HermitianBlock b{name, dim, num_variables(), psd};
  for (int c = 0; c < dim * dim; ++c) variables_.push_back({name + "[" + std::to_string(c) + "]", -kInf, kInf});
  blocks_.push_back(std::move(b));
  return static_cast<int>(blocks_.size()) - 1;
}

HermitianExpr ConicProgram::block_expr(int block) const {
  const auto& b = blocks_.at(block);
  HermitianExpr e = HermitianExpr::zero(b.dim);
  for (int c = 0; c < b.dim * b.dim; ++c) e.add(b.offset + c, hermitian_basis(b.dim, c));
  return e;
}

void ConicProgram::add_affine_le(AffineExpr expr, std::string tag) {
  affine_.push_back({std::move(expr), std::move(tag)});
}

void ConicProgram::add_affine_ge(AffineExpr expr, std::string tag) {
  expr *= -1.0;
  affine_.push_back({std::move(expr), std::move(tag)});
}

void ConicProgram::add_second_order(std::vector<AffineExpr> rows, AffineExpr bound, std::string tag) {
  soc_.push_back({std::move(rows), std::move(bound), std::move(tag)});
}

void ConicProgram::add_sum_squares_le(std::vector<AffineExpr> squares, AffineExpr s, std::string tag) {
  // sum a_k^2 <= s  <=>  || (2 a_1, ..., 2 a_K, s - 1) || <= s + 1
  std::vector<AffineExpr> rows;
  rows.reserve(squares.size() + 1);
  for (auto& a : squares) rows.push_back(2.0 * std::move(a));
  rows.push_back(s - AffineExpr(1.0));
  soc_.push_back({std::move(rows), s + AffineExpr(1.0), std::move(tag)});
}

void ConicProgram::add_psd(HermitianExpr matrix, std::string tag) {
  psd_.push_back({std::move(matrix), std::move(tag)});
}

void ConicProgram::add_exp(AffineExpr exponent, AffineExpr bound, std::string tag) {
  exp_.push_back({std::move(exponent), std::move(bound), std::move(tag)});
}

void ConicProgram::add_objective(const AffineExpr& e) { linear_ += e; }

void ConicProgram::add_norm_objective(double weight, std::vector<AffineExpr> rows, std::string tag) {
  norms_.push_back({weight, std::move(rows), std::move(tag)});
}

void ConicProgram::add_square_objective(double weight, AffineExpr expr) {
  squares_.push_back({weight, std::move(expr)});
}

void ConicProgram::validate() const {
  const int n = num_variables();
  auto check = [n](const AffineExpr& e, const std::string& what) {
    for (const auto& [i, c] : e.terms) {
      if (i < 0 || i >= n) throw std::invalid_argument(what + ": variable index out of range");
      if (!std::isfinite(c)) throw std::invalid_argument(what + ": non-finite coefficient");
    }
    if (!std::isfinite(e.constant)) throw std::invalid_argument(what + ": non-finite constant");
  };
  for (const auto& v : variables_) {
    if (v.lower > v.upper) throw std::invalid_argument("variable " + v.name + ": lower bound above upper bound");
  }
  for (const auto& b : blocks_) {
    if (b.offset < 0 || b.offset + b.dim * b.dim > n) throw std::invalid_argument("block " + b.name + " out of range");
  }
  for (const auto& c : affine_) check(c.expr, "affine " + c.tag);
  for (const auto& c : soc_) {
    check(c.bound, "second-order " + c.tag);
    for (const auto& r : c.rows) check(r, "second-order " + c.tag);
  }
  for (const auto& c : psd_) {
    const int d = c.matrix.dim();
    if (d < 1) throw std::invalid_argument("psd " + c.tag + ": empty matrix");
    for (const auto& [i, f] : c.matrix.terms) {
      if (i < 0 || i >= n) throw std::invalid_argument("psd " + c.tag + ": variable index out of range");
      if (f.rows() != d || f.cols() != d) throw std::invalid_argument("psd " + c.tag + ": dimension mismatch");
      if ((f - f.adjoint()).norm() > 1e-12 * (1.0 + f.norm())) {
        throw std::invalid_argument("psd " + c.tag + ": coefficient not Hermitian");
      }
    }
  }
  for (const auto& c : exp_) {
    check(c.exponent, "exp " + c.tag);
    check(c.bound, "exp " + c.tag);
  }
  check(linear_, "objective");
  for (const auto& t : norms_) {
    if (!(t.weight >= 0.0)) throw std::invalid_argument("norm term weight must be non-negative");
    for (const auto& r : t.rows) check(r, "norm " + t.tag);
  }
  for (const auto& t : squares_) {
    if (!(t.weight >= 0.0)) throw std::invalid_argument("square term weight must be non-negative");
    check(t.expr, "square term");
  }
}

double ConicProgram::objective(std::span<const double> x) const {
  double v = linear_.evaluate(x);
  for (const auto& t : norms_) {
    double s = 0.0;
    for (const auto& r : t.rows) {
      double e = r.evaluate(x);
      s += e * e;
    }
    v += t.weight * std::sqrt(s);
  }
  for (const auto& t : squares_) {
    double e = t.expr.evaluate(x);
    v += t.weight * e * e;
  }
  return v;
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kMaxIterations: return "max-iter";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kNumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

double KktResiduals::max() const { return std::max({stationarity, primal, dual, complementarity}); }

// ---------------------------------------------------------------------------
// Internal barrier representation

namespace {

struct Sparse {
  std::vector<int> idx;
  std::vector<double> val;
  double c = 0.0;

  static Sparse from(AffineExpr e) {
    e.compact();
    Sparse s;
    s.c = e.constant;
    for (const auto& [i, v] : e.terms) {
      s.idx.push_back(i);
      s.val.push_back(v);
    }
    return s;
  }
  double dot(const RVector& x) const {
    double v = c;
    for (std::size_t k = 0; k < idx.size(); ++k) v += val[k] * x[idx[k]];
    return v;
  }
};

enum class Origin { kLower, kUpper, kAffine, kSoc, kNormEpigraph, kBlock, kPsd, kExp, kAuxiliary };

struct IAff {
  Sparse a;  // a x + c <= 0
  Origin origin;
  int source;
};

struct ISoc {
  std::vector<Sparse> rows;
  Sparse bound;
  Origin origin;
  int source;
};

struct ILmi {
  CMatrix f0;
  std::vector<int> vars;
  std::vector<CMatrix> f;
  Origin origin;
  int source;
};

struct IExp {
  Sparse u;
  Sparse w;
  int source;
};

struct Compiled {
  int n = 0;
  std::vector<IAff> aff;
  std::vector<ISoc> soc;
  std::vector<ILmi> lmi;
  std::vector<IExp> ex;
  RVector lin;
  std::vector<std::pair<double, Sparse>> squares;

  double nu() const {
    double v = static_cast<double>(aff.size()) + 2.0 * static_cast<double>(soc.size()) +
               static_cast<double>(ex.size());
    for (const auto& l : lmi) v += static_cast<double>(l.f0.rows());
    return v;
  }
};

Compiled compile(const ConicProgram& p) {
  Compiled c;
  const int np = p.num_variables();
  const int ne = static_cast<int>(p.norm_terms().size());
  c.n = np + ne;
  c.lin = RVector::Zero(c.n);
  for (int i = 0; i < np; ++i) {
    const auto& v = p.variables()[i];
    if (std::isfinite(v.lower)) {
      Sparse s;
      s.idx = {i};
      s.val = {-1.0};
      s.c = v.lower;
      c.aff.push_back({s, Origin::kLower, i});
    }
    if (std::isfinite(v.upper)) {
      Sparse s;
      s.idx = {i};
      s.val = {1.0};
      s.c = -v.upper;
      c.aff.push_back({s, Origin::kUpper, i});
    }
  }
  for (std::size_t k = 0; k < p.affine().size(); ++k) {
    c.aff.push_back({Sparse::from(p.affine()[k].expr), Origin::kAffine, static_cast<int>(k)});
  }
  for (std::size_t k = 0; k < p.second_order().size(); ++k) {
    ISoc s;
    for (const auto& r : p.second_order()[k].rows) s.rows.push_back(Sparse::from(r));
    s.bound = Sparse::from(p.second_order()[k].bound);
    s.origin = Origin::kSoc;
    s.source = static_cast<int>(k);
    c.soc.push_back(std::move(s));
  }
  for (int k = 0; k < ne; ++k) {
    const auto& t = p.norm_terms()[k];
    ISoc s;
    for (const auto& r : t.rows) s.rows.push_back(Sparse::from(r));
    s.bound.idx = {np + k};
    s.bound.val = {1.0};
    s.origin = Origin::kNormEpigraph;
    s.source = k;
    c.soc.push_back(std::move(s));
    c.lin[np + k] += t.weight;
  }
  for (std::size_t k = 0; k < p.blocks().size(); ++k) {
    const auto& b = p.blocks()[k];
    if (!b.psd) continue;
    ILmi l;
    l.f0 = CMatrix::Zero(b.dim, b.dim);
    for (int q = 0; q < b.dim * b.dim; ++q) {
      l.vars.push_back(b.offset + q);
      l.f.push_back(hermitian_basis(b.dim, q));
    }
    l.origin = Origin::kBlock;
    l.source = static_cast<int>(k);
    c.lmi.push_back(std::move(l));
  }
  for (std::size_t k = 0; k < p.psd().size(); ++k) {
    const auto& m = p.psd()[k].matrix;
    ILmi l;
    l.f0 = m.constant;
    std::map<int, CMatrix> merged;
    for (const auto& [v, f] : m.terms) {
      auto it = merged.find(v);
      if (it == merged.end()) {
        merged.emplace(v, f);
      } else {
        it->second += f;
      }
    }
    for (auto& [v, f] : merged) {
      l.vars.push_back(v);
      l.f.push_back(hermitian_part(f));
    }
    l.origin = Origin::kPsd;
    l.source = static_cast<int>(k);
    c.lmi.push_back(std::move(l));
  }
  for (std::size_t k = 0; k < p.exp().size(); ++k) {
    c.ex.push_back({Sparse::from(p.exp()[k].exponent), Sparse::from(p.exp()[k].bound), static_cast<int>(k)});
  }
  {
    Sparse lin = Sparse::from(p.linear_objective());
    for (std::size_t k = 0; k < lin.idx.size(); ++k) c.lin[lin.idx[k]] += lin.val[k];
  }
  for (const auto& t : p.square_terms()) c.squares.emplace_back(t.weight, Sparse::from(t.expr));
  return c;
}

// Dense scratch accumulator for sparse gradient pieces.
class Accum {
 public:
  explicit Accum(int n) : dense_(n, 0.0), seen_(n, 0) {}
  void add(int i, double v) {
    if (!seen_[i]) {
      seen_[i] = 1;
      touched_.push_back(i);
    }
    dense_[i] += v;
  }
  void add(const Sparse& s, double scale) {
    for (std::size_t k = 0; k < s.idx.size(); ++k) add(s.idx[k], scale * s.val[k]);
  }
  const std::vector<int>& touched() const { return touched_; }
  double operator[](int i) const { return dense_[i]; }
  void clear() {
    for (int i : touched_) {
      dense_[i] = 0.0;
      seen_[i] = 0;
    }
    touched_.clear();
  }

 private:
  std::vector<double> dense_;
  std::vector<char> seen_;
  std::vector<int> touched_;
};

void add_outer(RMatrix& h, const Sparse& a, const Sparse& b, double scale) {
  for (std::size_t p = 0; p < a.idx.size(); ++p) {
    for (std::size_t q = 0; q < b.idx.size(); ++q) h(a.idx[p], b.idx[q]) += scale * a.val[p] * b.val[q];
  }
}

// Margins of each constraint class; negative or zero means outside the domain.
double soc_margin(const ISoc& s, const RVector& x, std::vector<double>* r = nullptr) {
  double w = s.bound.dot(x);
  double rr = 0.0;
  if (r) r->resize(s.rows.size());
  for (std::size_t k = 0; k < s.rows.size(); ++k) {
    double v = s.rows[k].dot(x);
    if (r) (*r)[k] = v;
    rr += v * v;
  }
  return w - std::sqrt(rr);
}

CMatrix lmi_value(const ILmi& l, const RVector& x) {
  CMatrix s = l.f0;
  for (std::size_t k = 0; k < l.vars.size(); ++k) s += x[l.vars[k]] * l.f[k];
  return s;
}

class Barrier {
 public:
  explicit Barrier(const Compiled& c) : c_(c), acc_(c.n) {}

  double objective(const RVector& x) const {
    double v = c_.lin.dot(x);
    for (const auto& [w, s] : c_.squares) {
      double e = s.dot(x);
      v += w * e * e;
    }
    return v;
  }

  // Returns false when x is outside the barrier domain.
  bool value(const RVector& x, double t, double& out) const {
    double phi = 0.0;
    for (const auto& a : c_.aff) {
      double g = a.a.dot(x);
      if (!(g < 0.0)) return false;
      phi -= std::log(-g);
    }
    for (const auto& s : c_.soc) {
      double w = s.bound.dot(x);
      if (!(w > 0.0)) return false;
      double rr = 0.0;
      for (const auto& r : s.rows) {
        double v = r.dot(x);
        rr += v * v;
      }
      double rn = std::sqrt(rr);
      if (!(w > rn)) return false;
      phi -= std::log((w - rn) * (w + rn));
    }
    for (const auto& l : c_.lmi) {
      Eigen::LLT<CMatrix> llt(lmi_value(l, x));
      if (llt.info() != Eigen::Success) return false;
      const auto& lm = llt.matrixLLT();
      for (int k = 0; k < lm.rows(); ++k) {
        double d = lm(k, k).real();
        if (!(d > 0.0)) return false;
        phi -= 2.0 * std::log(d);
      }
    }
    for (const auto& e : c_.ex) {
      double psi = e.w.dot(x) - std::exp(e.u.dot(x));
      if (!(psi > 0.0)) return false;
      phi -= std::log(psi);
    }
    out = t * objective(x) + phi;
    return std::isfinite(out);
  }

  // Gradient and Hessian; x must be in the domain.
  void derivatives(const RVector& x, double t, RVector& g, RMatrix& h) {
    const int n = c_.n;
    g = t * c_.lin;
    h = RMatrix::Zero(n, n);
    for (const auto& [w, s] : c_.squares) {
      double e = s.dot(x);
      for (std::size_t k = 0; k < s.idx.size(); ++k) g[s.idx[k]] += t * 2.0 * w * e * s.val[k];
      add_outer(h, s, s, t * 2.0 * w);
    }
    for (const auto& a : c_.aff) {
      double ng = -a.a.dot(x);
      for (std::size_t k = 0; k < a.a.idx.size(); ++k) g[a.a.idx[k]] += a.a.val[k] / ng;
      add_outer(h, a.a, a.a, 1.0 / (ng * ng));
    }
    std::vector<double> r;
    for (const auto& s : c_.soc) {
      double w = s.bound.dot(x);
      double rr = 0.0;
      r.resize(s.rows.size());
      for (std::size_t k = 0; k < s.rows.size(); ++k) {
        r[k] = s.rows[k].dot(x);
        rr += r[k] * r[k];
      }
      double psi = w * w - rr;
      // grad psi = 2 w c - 2 sum r_k a_k
      acc_.clear();
      acc_.add(s.bound, 2.0 * w);
      for (std::size_t k = 0; k < s.rows.size(); ++k) acc_.add(s.rows[k], -2.0 * r[k]);
      const auto& idx = acc_.touched();
      for (int i : idx) g[i] -= acc_[i] / psi;
      for (int i : idx) {
        double gi = acc_[i];
        for (int j : idx) h(i, j) += gi * acc_[j] / (psi * psi);
      }
      add_outer(h, s.bound, s.bound, -2.0 / psi);
      for (const auto& row : s.rows) add_outer(h, row, row, 2.0 / psi);
    }
    for (const auto& l : c_.lmi) {
      CMatrix sinv = lmi_value(l, x).llt().solve(CMatrix::Identity(l.f0.rows(), l.f0.rows()));
      const std::size_t m = l.vars.size();
      std::vector<CMatrix> prod(m);
      for (std::size_t k = 0; k < m; ++k) {
        prod[k] = sinv * l.f[k];
        g[l.vars[k]] -= prod[k].trace().real();
      }
      for (std::size_t p = 0; p < m; ++p) {
        for (std::size_t q = p; q < m; ++q) {
          double v = real_trace_product(prod[p], prod[q]);
          h(l.vars[p], l.vars[q]) += v;
          if (p != q) h(l.vars[q], l.vars[p]) += v;
        }
      }
    }
    for (const auto& e : c_.ex) {
      double eu = std::exp(e.u.dot(x));
      double psi = e.w.dot(x) - eu;
      acc_.clear();
      acc_.add(e.w, 1.0);
      acc_.add(e.u, -eu);
      const auto& idx = acc_.touched();
      for (int i : idx) g[i] -= acc_[i] / psi;
      for (int i : idx) {
        double gi = acc_[i];
        for (int j : idx) h(i, j) += gi * acc_[j] / (psi * psi);
      }
      add_outer(h, e.u, e.u, eu / psi);
    }
  }

  bool strictly_feasible(const RVector& x) const {
    double v = 0.0;
    return value(x, 0.0, v);
  }

 private:
  const Compiled& c_;
  Accum acc_;
};

struct PathResult {
  bool ok = false;
  bool stalled = false;
  bool exhausted = false;
  double t = 1.0;
  int steps = 0;
  std::string message;
};

// Regularized, Jacobi-scaled Newton direction. Returns false on breakdown.
bool newton_direction(const RMatrix& h, const RVector& g, RVector& dx) {
  const int n = static_cast<int>(g.size());
  RVector d(n);
  for (int i = 0; i < n; ++i) {
    double hi = h(i, i);
    d[i] = hi > 0.0 && std::isfinite(hi) ? 1.0 / std::sqrt(hi) : 1.0;
  }
  RMatrix hs = d.asDiagonal() * h * d.asDiagonal();
  RVector gs = d.cwiseProduct(g);
  {
    Eigen::LLT<RMatrix> llt(hs);
    if (llt.info() == Eigen::Success) {
      RVector y = llt.solve(-gs);
      if (y.allFinite() && gs.dot(y) < 0.0) {
        dx = d.cwiseProduct(y);
        return true;
      }
    }
  }
  double reg = 0.0;
  for (int attempt = 0; attempt < 8; ++attempt) {
    RMatrix hr = hs;
    if (reg > 0.0) hr.diagonal().array() += reg;
    Eigen::LDLT<RMatrix> ldlt(hr);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
      RVector y = ldlt.solve(-gs);
      if (y.allFinite() && gs.dot(y) < 0.0) {
        dx = d.cwiseProduct(y);
        return true;
      }
      if (y.allFinite() && gs.norm() == 0.0) {
        dx = RVector::Zero(n);
        return true;
      }
    }
    reg = reg == 0.0 ? 1e-12 : reg * 100.0;
  }
  return false;
}

// Follows the central path. stop(x, t) may end the path early (phase I).
template <typename Stop>
PathResult follow_path(Barrier& barrier, double nu, RVector& x, const SolverOptions& opt, Stop stop,
                       double t0 = 1.0) {
  PathResult res;
  double t = t0;
  RVector g;
  RMatrix h;
  RVector dx;
  while (true) {
    double f = 0.0;
    if (!barrier.value(x, t, f)) {
      res.message = "iterate left the barrier domain";
      return res;
    }
    int inner = 0;
    double prev_lambda2 = std::numeric_limits<double>::infinity();
    while (true) {
      if (res.steps >= opt.max_newton_total || inner >= opt.max_newton_per_center) {
        res.exhausted = true;
        res.t = t;
        res.message = "Newton iteration limit reached";
        return res;
      }
      barrier.derivatives(x, t, g, h);
      if (!newton_direction(h, g, dx)) {
        res.message = "singular Newton system";
        res.t = t;
        return res;
      }
      double slope = g.dot(dx);
      double lambda2 = -slope;
      if (lambda2 / 2.0 <= opt.newton_tol) break;
      // Newton stopped contracting: the decrement sits at its round-off floor.
      if (lambda2 / 2.0 <= 1e-5 && lambda2 >= 0.5 * prev_lambda2) break;
      prev_lambda2 = lambda2;
      double step = 1.0;
      double fn = 0.0;
      int halvings = 0;
      while (!barrier.value(x + step * dx, t, fn)) {
        step *= opt.backtrack;
        if (++halvings > 80) break;
      }
      bool accepted = halvings <= 80;
      if (accepted && !(lambda2 < 0.0625 && step == 1.0)) {
        while (fn > f + opt.armijo * step * slope) {
          step *= opt.backtrack;
          if (++halvings > 80 || !barrier.value(x + step * dx, t, fn)) {
            accepted = false;
            break;
          }
        }
      }
      if (!accepted || step * dx.lpNorm<Eigen::Infinity>() <= 1e-15 * (1.0 + x.lpNorm<Eigen::Infinity>())) {
        // Round-off floor: accept the center when the decrement is already small.
        if (lambda2 / 2.0 <= 1e-5) break;
        res.stalled = true;
        res.t = t;
        res.message = "line search stalled";
        return res;
      }
      x += step * dx;
      f = fn;
      ++res.steps;
      ++inner;
    }
    if (stop(x, t)) {
      res.ok = true;
      res.t = t;
      return res;
    }
    if (nu / t <= opt.tol * std::max(1.0, std::abs(barrier.objective(x)))) {
      // A small decrement bounds the barrier gradient only in the Hessian
      // norm; a few extra pure Newton steps tighten Lagrangian stationarity.
      for (int k = 0; k < 8; ++k) {
        barrier.derivatives(x, t, g, h);
        if (!newton_direction(h, g, dx) || -g.dot(dx) <= 1e-20) break;
        RVector xn = x + dx;
        double fn = 0.0;
        if (!barrier.value(xn, t, fn) || fn > f + 1e-12 * (1.0 + std::abs(f))) break;
        x = xn;
        f = fn;
        ++res.steps;
      }
      res.ok = true;
      res.t = t;
      return res;
    }
    t *= opt.mu_factor;
  }
}

// Starting weight from a decade grid: the t with the smallest Newton
// decrement at x, norm epigraphs re-seated at their central offset 1/(t w).
// A warm start from a previous solution then resumes near its old weight.
double choose_start_weight(Barrier& barrier, const ConicProgram& program, RVector& x, double t_max) {
  const int np = program.num_variables();
  const auto& norms = program.norm_terms();
  std::vector<double> len(norms.size(), 0.0);
  for (std::size_t k = 0; k < norms.size(); ++k) {
    double s = 0.0;
    for (const auto& r : norms[k].rows) {
      double v = r.evaluate(std::span<const double>(x.data(), np));
      s += v * v;
    }
    len[k] = std::sqrt(s);
  }
  double best_t = 1.0;
  double best = std::numeric_limits<double>::infinity();
  RVector best_x = x;
  RVector g, dx;
  RMatrix h;
  for (double t = 1.0; t <= t_max; t *= 10.0) {
    RVector y = x;
    for (std::size_t k = 0; k < norms.size(); ++k) {
      y[np + static_cast<int>(k)] = len[k] + 1.0 / (t * std::max(norms[k].weight, 1e-12));
    }
    double f = 0.0;
    if (!barrier.value(y, t, f)) continue;
    barrier.derivatives(y, t, g, h);
    if (!newton_direction(h, g, dx)) continue;
    double l2 = -g.dot(dx);
    if (l2 <= best) {
      best = l2;
      best_t = t;
      best_x = y;
    }
  }
  x = best_x;
  return best_t;
}

Compiled with_slack(const Compiled& c, const RVector& x0, double radius) {
  Compiled p = c;
  const int s = c.n;
  p.n = c.n + 1;
  p.lin = RVector::Zero(p.n);
  p.lin[s] = 1.0;
  p.squares.clear();
  for (auto& a : p.aff) {
    a.a.idx.push_back(s);
    a.a.val.push_back(-1.0);
  }
  for (auto& q : p.soc) {
    q.bound.idx.push_back(s);
    q.bound.val.push_back(1.0);
  }
  for (auto& l : p.lmi) {
    l.vars.push_back(s);
    l.f.push_back(CMatrix::Identity(l.f0.rows(), l.f0.rows()));
  }
  for (auto& e : p.ex) {
    e.w.idx.push_back(s);
    e.w.val.push_back(1.0);
  }
  // s >= -1 keeps phase I bounded below.
  Sparse lo;
  lo.idx = {s};
  lo.val = {-1.0};
  lo.c = -1.0;
  p.aff.push_back({lo, Origin::kAuxiliary, -1});
  // ||x - x0|| <= radius keeps unbounded directions in check.
  ISoc ball;
  for (int i = 0; i < c.n; ++i) {
    Sparse r;
    r.idx = {i};
    r.val = {1.0};
    r.c = -x0[i];
    ball.rows.push_back(r);
  }
  ball.bound.c = radius;
  ball.origin = Origin::kAuxiliary;
  ball.source = -1;
  p.soc.push_back(std::move(ball));
  return p;
}

// Largest violation with the phase-I slack convention (constraint holds when <= 0).
double max_violation(const Compiled& c, const RVector& x) {
  double v = -kInf;
  for (const auto& a : c.aff) v = std::max(v, a.a.dot(x));
  for (const auto& s : c.soc) v = std::max(v, -soc_margin(s, x));
  for (const auto& l : c.lmi) v = std::max(v, -min_eigenvalue(lmi_value(l, x)));
  for (const auto& e : c.ex) v = std::max(v, std::exp(e.u.dot(x)) - e.w.dot(x));
  return v;
}

DualValues extract_duals(const ConicProgram& p, const Compiled& c, const RVector& x, double t) {
  DualValues d;
  const int np = p.num_variables();
  d.lower_bounds.assign(np, 0.0);
  d.upper_bounds.assign(np, 0.0);
  d.affine.assign(p.affine().size(), 0.0);
  d.second_order.resize(p.second_order().size());
  d.norms.resize(p.norm_terms().size());
  d.exp.assign(p.exp().size(), 0.0);
  std::size_t nblocks = 0;
  for (const auto& b : p.blocks()) nblocks += b.psd ? 1 : 0;
  d.psd.resize(nblocks + p.psd().size());
  for (const auto& a : c.aff) {
    double lam = 1.0 / (t * -a.a.dot(x));
    switch (a.origin) {
      case Origin::kLower: d.lower_bounds[a.source] = lam; break;
      case Origin::kUpper: d.upper_bounds[a.source] = lam; break;
      case Origin::kAffine: d.affine[a.source] = lam; break;
      default: break;
    }
  }
  std::vector<double> r;
  for (const auto& s : c.soc) {
    double w = s.bound.dot(x);
    soc_margin(s, x, &r);
    double rr = 0.0;
    for (double v : r) rr += v * v;
    double scale = 2.0 / (t * (w * w - rr));
    if (s.origin == Origin::kSoc) {
      auto& z = d.second_order[s.source];
      z.push_back(scale * w);
      for (double v : r) z.push_back(-scale * v);
    } else if (s.origin == Origin::kNormEpigraph) {
      // Where the epigraph is tight the exact subgradient w r / ||r|| is
      // available; otherwise use the barrier estimate, clipped to the ball.
      auto& y = d.norms[s.source];
      const double weight = p.norm_terms()[s.source].weight;
      const double rn = std::sqrt(rr);
      double f = scale;
      if (rn > 0.0 && w - rn <= 1e-3 * rn) f = weight / rn;
      else if (f * rn > weight) f = weight / rn;
      for (double v : r) y.push_back(f * v);
    }
  }
  std::size_t block_slot = 0;
  for (const auto& l : c.lmi) {
    const int m = static_cast<int>(l.f0.rows());
    CMatrix z = lmi_value(l, x).llt().solve(CMatrix::Identity(m, m)) / t;
    if (l.origin == Origin::kBlock) {
      d.psd[block_slot++] = hermitian_part(z);
    } else if (l.origin == Origin::kPsd) {
      d.psd[nblocks + l.source] = hermitian_part(z);
    }
  }
  for (const auto& e : c.ex) {
    double psi = e.w.dot(x) - std::exp(e.u.dot(x));
    d.exp[e.source] = 1.0 / (t * psi);
  }
  return d;
}

}  // namespace

// ---------------------------------------------------------------------------
// Solve

Solution solve(const ConicProgram& program, const SolverOptions& options) {
  program.validate();
  Solution sol;
  const int np = program.num_variables();
  Compiled c = compile(program);
  RVector x = RVector::Zero(c.n);
  if (options.initial_point) {
    if (static_cast<int>(options.initial_point->size()) != np) {
      throw std::invalid_argument("initial point has the wrong dimension");
    }
    for (int i = 0; i < np; ++i) x[i] = (*options.initial_point)[i];
  }
  // Epigraph variables start strictly above their norms.
  for (std::size_t k = 0; k < program.norm_terms().size(); ++k) {
    double s = 0.0;
    for (const auto& r : program.norm_terms()[k].rows) {
      double v = r.evaluate(std::span<const double>(x.data(), np));
      s += v * v;
    }
    x[np + static_cast<int>(k)] = std::sqrt(s) + 1.0;
  }

  Barrier barrier(c);
  if (!barrier.strictly_feasible(x)) {
    double viol = max_violation(c, x);
    const double radius = 1e6 * (1.0 + x.lpNorm<Eigen::Infinity>());
    Compiled p1 = with_slack(c, x, radius);
    RVector y(p1.n);
    y.head(c.n) = x;
    y[c.n] = std::max(viol, 0.0) + 1.0;
    Barrier b1(p1);
    SolverOptions o1 = options;
    auto stop = [&](const RVector& z, double) { return z[c.n] < 0.0; };
    PathResult r1 = follow_path(b1, p1.nu(), y, o1, stop);
    sol.newton_steps += r1.steps;
    if (!r1.ok) {
      sol.status = r1.exhausted ? SolveStatus::kMaxIterations : SolveStatus::kNumericalFailure;
      sol.message = "phase I: " + r1.message;
      sol.x.assign(y.data(), y.data() + np);
      sol.objective = program.objective(sol.x);
      sol.kkt = check_kkt(program, sol.x, extract_duals(program, c, y.head(c.n), 1.0));
      return sol;
    }
    if (!(y[c.n] < 0.0)) {
      sol.status = y[c.n] > options.tol ? SolveStatus::kInfeasible : SolveStatus::kNumericalFailure;
      std::ostringstream msg;
      msg << "phase I: minimal slack " << y[c.n] << " > 0";
      sol.message = msg.str();
      sol.x.assign(y.data(), y.data() + np);
      sol.objective = program.objective(sol.x);
      sol.kkt.violated = violated_constraints(program, sol.x, options.tol);
      sol.kkt.primal = std::max(0.0, y[c.n]);
      return sol;
    }
    x = y.head(c.n);
    for (std::size_t k = 0; k < program.norm_terms().size(); ++k) {
      // Re-seat epigraph variables comfortably above their norms.
      double s = 0.0;
      for (const auto& r : program.norm_terms()[k].rows) {
        double v = r.evaluate(std::span<const double>(x.data(), np));
        s += v * v;
      }
      x[np + static_cast<int>(k)] = std::max(x[np + static_cast<int>(k)], std::sqrt(s) + 1.0);
    }
  }

  const double t_max = 0.1 * c.nu() / options.tol * std::max(1.0, std::abs(program.objective(std::span<const double>(x.data(), np))));
  const double t0 = choose_start_weight(barrier, program, x, t_max);
  PathResult r = follow_path(barrier, c.nu(), x, options, [](const RVector&, double) { return false; }, t0);
  sol.newton_steps += r.steps;
  sol.x.assign(x.data(), x.data() + np);
  sol.objective = program.objective(sol.x);
  sol.gap = c.nu() / r.t;
  sol.duals = extract_duals(program, c, x, r.t);
  sol.kkt = check_kkt(program, sol.x, sol.duals);
  if (!r.ok) {
    sol.status = r.exhausted ? SolveStatus::kMaxIterations : SolveStatus::kNumericalFailure;
    sol.message = r.message;
    return sol;
  }
  const bool kkt_ok = sol.kkt.primal <= options.tol && sol.kkt.dual <= options.tol &&
                      sol.kkt.complementarity <= 10.0 * options.tol * std::max(1.0, std::abs(sol.objective)) &&
                      sol.kkt.stationarity <= options.stationarity_tol;
  sol.status = kkt_ok ? SolveStatus::kOptimal : SolveStatus::kNumericalFailure;
  if (!kkt_ok) {
    std::ostringstream msg;
    msg << "KKT residuals above tolerance (stationarity " << sol.kkt.stationarity << ", primal "
        << sol.kkt.primal << ", dual " << sol.kkt.dual << ", gap " << sol.kkt.complementarity << ")";
    sol.message = msg.str();
  }
  return sol;
}

// ---------------------------------------------------------------------------
// KKT check

std::vector<std::string> violated_constraints(const ConicProgram& p, std::span<const double> x, double tol) {
  std::vector<std::string> out;
  for (int i = 0; i < p.num_variables(); ++i) {
    const auto& v = p.variables()[i];
    if (x[i] < v.lower - tol || x[i] > v.upper + tol) out.push_back("bound " + v.name);
  }
  for (const auto& c : p.affine()) {
    if (c.expr.evaluate(x) > tol) out.push_back(c.tag);
  }
  for (const auto& c : p.second_order()) {
    double rr = 0.0;
    for (const auto& r : c.rows) {
      double v = r.evaluate(x);
      rr += v * v;
    }
    if (std::sqrt(rr) - c.bound.evaluate(x) > tol) out.push_back(c.tag);
  }
  for (const auto& b : p.blocks()) {
    if (!b.psd) continue;
    CMatrix m = hermitian_from_coords(b.dim, x.subspan(b.offset, b.dim * b.dim));
    if (min_eigenvalue(m) < -tol) out.push_back("psd block " + b.name);
  }
  for (const auto& c : p.psd()) {
    if (min_eigenvalue(c.matrix.evaluate(x)) < -tol) out.push_back(c.tag);
  }
  for (const auto& c : p.exp()) {
    if (std::exp(c.exponent.evaluate(x)) - c.bound.evaluate(x) > tol) out.push_back(c.tag);
  }
  return out;
}

KktResiduals check_kkt(const ConicProgram& p, std::span<const double> x, const DualValues& d) {
  const int n = p.num_variables();
  if (static_cast<int>(x.size()) != n) throw std::invalid_argument("solution dimension mismatch");
  KktResiduals res;
  std::vector<double> grad_f(n, 0.0);
  for (const auto& [i, c] : p.linear_objective().terms) grad_f[i] += c;
  for (const auto& t : p.square_terms()) {
    double e = t.expr.evaluate(x);
    for (const auto& [i, c] : t.expr.terms) grad_f[i] += 2.0 * t.weight * e * c;
  }
  std::vector<double> grad_c(n, 0.0);
  std::vector<double> scale(n, 0.0);  // sum of term magnitudes per coordinate
  for (int i = 0; i < n; ++i) scale[i] = std::abs(grad_f[i]);
  auto add_expr = [&](const AffineExpr& e, double s) {
    for (const auto& [i, c] : e.terms) {
      grad_c[i] += s * c;
      scale[i] += std::abs(s * c);
    }
  };
  double gap = 0.0;
  double dual_viol = 0.0;
  double primal_viol = 0.0;

  auto lam_at = [](const std::vector<double>& v, std::size_t k) { return k < v.size() ? v[k] : 0.0; };
  for (int i = 0; i < n; ++i) {
    const auto& v = p.variables()[i];
    if (std::isfinite(v.lower)) {
      double lam = lam_at(d.lower_bounds, i);
      grad_c[i] -= lam;
      scale[i] += std::abs(lam);
      gap += std::abs(lam * (x[i] - v.lower));
      dual_viol = std::max(dual_viol, -lam);
      primal_viol = std::max(primal_viol, v.lower - x[i]);
    }
    if (std::isfinite(v.upper)) {
      double lam = lam_at(d.upper_bounds, i);
      grad_c[i] += lam;
      scale[i] += std::abs(lam);
      gap += std::abs(lam * (v.upper - x[i]));
      dual_viol = std::max(dual_viol, -lam);
      primal_viol = std::max(primal_viol, x[i] - v.upper);
    }
  }
  for (std::size_t k = 0; k < p.affine().size(); ++k) {
    const auto& c = p.affine()[k];
    double lam = lam_at(d.affine, k);
    double g = c.expr.evaluate(x);
    add_expr(c.expr, lam);
    gap += std::abs(lam * g);
    dual_viol = std::max(dual_viol, -lam);
    primal_viol = std::max(primal_viol, g);
  }
  for (std::size_t k = 0; k < p.second_order().size(); ++k) {
    const auto& c = p.second_order()[k];
    double w = c.bound.evaluate(x);
    double rr = 0.0;
    std::vector<double> z = k < d.second_order.size() ? d.second_order[k] : std::vector<double>{};
    z.resize(c.rows.size() + 1, 0.0);
    double zn = 0.0;
    double dot = z[0] * w;
    add_expr(c.bound, -z[0]);
    for (std::size_t q = 0; q < c.rows.size(); ++q) {
      double v = c.rows[q].evaluate(x);
      rr += v * v;
      zn += z[q + 1] * z[q + 1];
      dot += z[q + 1] * v;
      add_expr(c.rows[q], -z[q + 1]);
    }
    gap += std::abs(dot);
    dual_viol = std::max(dual_viol, std::sqrt(zn) - z[0]);
    primal_viol = std::max(primal_viol, std::sqrt(rr) - w);
  }
  std::size_t slot = 0;
  for (const auto& b : p.blocks()) {
    if (!b.psd) continue;
    CMatrix z = slot < d.psd.size() ? d.psd[slot] : CMatrix::Zero(b.dim, b.dim);
    ++slot;
    CMatrix m = hermitian_from_coords(b.dim, x.subspan(b.offset, b.dim * b.dim));
    auto coeffs = trace_functional(z);
    for (int q = 0; q < b.dim * b.dim; ++q) {
      grad_c[b.offset + q] -= coeffs[q];
      scale[b.offset + q] += std::abs(coeffs[q]);
    }
    gap += std::abs(real_trace_product(z, m));
    dual_viol = std::max(dual_viol, -min_eigenvalue(z));
    primal_viol = std::max(primal_viol, -min_eigenvalue(m));
  }
  for (std::size_t k = 0; k < p.psd().size(); ++k) {
    const auto& c = p.psd()[k];
    const int dim = c.matrix.dim();
    CMatrix z = slot + k < d.psd.size() ? d.psd[slot + k] : CMatrix::Zero(dim, dim);
    CMatrix s = c.matrix.evaluate(x);
    for (const auto& [i, f] : c.matrix.terms) {
      double v = real_trace_product(z, f);
      grad_c[i] -= v;
      scale[i] += std::abs(v);
    }
    gap += std::abs(real_trace_product(z, s));
    dual_viol = std::max(dual_viol, -min_eigenvalue(z));
    primal_viol = std::max(primal_viol, -min_eigenvalue(s));
  }
  for (std::size_t k = 0; k < p.exp().size(); ++k) {
    const auto& c = p.exp()[k];
    double lam = lam_at(d.exp, k);
    double eu = std::exp(c.exponent.evaluate(x));
    double g = eu - c.bound.evaluate(x);
    add_expr(c.exponent, lam * eu);
    add_expr(c.bound, -lam);
    gap += std::abs(lam * g);
    dual_viol = std::max(dual_viol, -lam);
    primal_viol = std::max(primal_viol, g);
  }
  for (std::size_t k = 0; k < p.norm_terms().size(); ++k) {
    const auto& t = p.norm_terms()[k];
    std::vector<double> y = k < d.norms.size() ? d.norms[k] : std::vector<double>{};
    y.resize(t.rows.size(), 0.0);
    double yn = 0.0;
    double rn = 0.0;
    double dot = 0.0;
    for (std::size_t q = 0; q < t.rows.size(); ++q) {
      double v = t.rows[q].evaluate(x);
      add_expr(t.rows[q], y[q]);
      yn += y[q] * y[q];
      rn += v * v;
      dot += y[q] * v;
    }
    gap += std::abs(t.weight * std::sqrt(rn) - dot);
    dual_viol = std::max(dual_viol, std::sqrt(yn) - t.weight);
  }
  double gl = 0.0;
  double gs = 0.0;
  for (int i = 0; i < n; ++i) {
    gl = std::max(gl, std::abs(grad_f[i] + grad_c[i]));
    gs = std::max(gs, scale[i]);
  }
  res.stationarity = gl / (1.0 + gs);
  res.primal = std::max(0.0, primal_viol);
  res.dual = std::max(0.0, dual_viol);
  res.complementarity = gap;
  res.violated = violated_constraints(p, x, 1e-9);
  return res;
}

// ---------------------------------------------------------------------------
// Plain-text dump

namespace {

std::string token(const std::string& s) {
  if (s.empty()) return "-";
  std::string out = s;
  for (char& ch : out) {
    if (std::isspace(static_cast<unsigned char>(ch))) ch = '_';
  }
  return out;
}

std::string untoken(const std::string& s) { return s == "-" ? std::string() : s; }

void write_num(std::ostream& os, double v) {
  if (std::isinf(v)) {
    os << (v > 0 ? "inf" : "-inf");
    return;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  os << buf;
}

void write_expr(std::ostream& os, const AffineExpr& e) {
  os << e.terms.size() << ' ';
  write_num(os, e.constant);
  for (const auto& [i, c] : e.terms) {
    os << ' ' << i << ' ';
    write_num(os, c);
  }
  os << '\n';
}

void write_matrix(std::ostream& os, const CMatrix& m) {
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) {
      if (c) os << ' ';
      write_num(os, m(r, c).real());
      os << ' ';
      write_num(os, m(r, c).imag());
    }
    os << '\n';
  }
}

class Reader {
 public:
  explicit Reader(std::istream& is) : is_(is) {}

  std::string word() {
    std::string w;
    if (!(is_ >> w)) throw std::runtime_error("problem dump: unexpected end of input");
    return w;
  }
  void expect(const std::string& w) {
    std::string got = word();
    if (got != w) throw std::runtime_error("problem dump: expected '" + w + "', got '" + got + "'");
  }
  double number() {
    std::string w = word();
    char* end = nullptr;
    double v = std::strtod(w.c_str(), &end);
    if (end == w.c_str() || *end != '\0') throw std::runtime_error("problem dump: bad number '" + w + "'");
    return v;
  }
  long integer() {
    std::string w = word();
    char* end = nullptr;
    long v = std::strtol(w.c_str(), &end, 10);
    if (end == w.c_str() || *end != '\0') throw std::runtime_error("problem dump: bad integer '" + w + "'");
    return v;
  }
  AffineExpr expr() {
    AffineExpr e;
    long k = integer();
    e.constant = number();
    for (long q = 0; q < k; ++q) {
      int i = static_cast<int>(integer());
      e.terms.emplace_back(i, number());
    }
    return e;
  }
  CMatrix matrix(int dim) {
    CMatrix m(dim, dim);
    for (int r = 0; r < dim; ++r) {
      for (int c = 0; c < dim; ++c) {
        double re = number();
        double im = number();
        m(r, c) = cdouble(re, im);
      }
    }
    return m;
  }

 private:
  std::istream& is_;
};

}  // namespace

void write_program(std::ostream& os, const ConicProgram& p) {
  os << "fdsc-conic 1\n";
  os << "variables " << p.num_variables() << '\n';
  for (int i = 0; i < p.num_variables(); ++i) {
    const auto& v = p.variables()[i];
    os << "var " << i << ' ';
    write_num(os, v.lower);
    os << ' ';
    write_num(os, v.upper);
    os << ' ' << token(v.name) << '\n';
  }
  for (const auto& b : p.blocks()) {
    os << "hermitian " << token(b.name) << ' ' << b.dim << ' ' << b.offset << ' ' << (b.psd ? 1 : 0) << '\n';
  }
  os << "objective ";
  write_expr(os, p.linear_objective());
  for (const auto& t : p.square_terms()) {
    os << "square ";
    write_num(os, t.weight);
    os << ' ';
    write_expr(os, t.expr);
  }
  for (const auto& t : p.norm_terms()) {
    os << "norm ";
    write_num(os, t.weight);
    os << ' ' << t.rows.size() << ' ' << token(t.tag) << '\n';
    for (const auto& r : t.rows) {
      os << "  row ";
      write_expr(os, r);
    }
  }
  for (const auto& c : p.affine()) {
    os << "affine " << token(c.tag) << ' ';
    write_expr(os, c.expr);
  }
  for (const auto& c : p.second_order()) {
    os << "soc " << token(c.tag) << ' ' << c.rows.size() << '\n';
    os << "  bound ";
    write_expr(os, c.bound);
    for (const auto& r : c.rows) {
      os << "  row ";
      write_expr(os, r);
    }
  }
  for (const auto& c : p.psd()) {
    os << "psd " << token(c.tag) << ' ' << c.matrix.dim() << ' ' << c.matrix.terms.size() << '\n';
    os << "  const\n";
    write_matrix(os, c.matrix.constant);
    for (const auto& [i, f] : c.matrix.terms) {
      os << "  term " << i << '\n';
      write_matrix(os, f);
    }
  }
  for (const auto& c : p.exp()) {
    os << "exp " << token(c.tag) << '\n';
    os << "  exponent ";
    write_expr(os, c.exponent);
    os << "  bound ";
    write_expr(os, c.bound);
  }
  os << "end\n";
}

ConicProgram read_program(std::istream& is) {
  Reader rd(is);
  rd.expect("fdsc-conic");
  if (rd.integer() != 1) throw std::runtime_error("problem dump: unsupported version");
  rd.expect("variables");
  const long n = rd.integer();
  ConicProgram p;
  std::vector<Variable> vars(n);
  std::vector<HermitianBlock> blocks;
  ConicProgram out;
  // Variables are created first; blocks are then re-attached by offset.
  for (long i = 0; i < n; ++i) {
    rd.expect("var");
    if (rd.integer() != i) throw std::runtime_error("problem dump: variables out of order");
    vars[i].lower = rd.number();
    vars[i].upper = rd.number();
    vars[i].name = untoken(rd.word());
  }
  std::string w = rd.word();
  while (w == "hermitian") {
    HermitianBlock b;
    b.name = untoken(rd.word());
    b.dim = static_cast<int>(rd.integer());
    b.offset = static_cast<int>(rd.integer());
    b.psd = rd.integer() != 0;
    blocks.push_back(b);
    w = rd.word();
  }
  std::sort(blocks.begin(), blocks.end(), [](const auto& a, const auto& b) { return a.offset < b.offset; });
  {
    long next = 0;
    std::size_t bi = 0;
    while (next < n) {
      if (bi < blocks.size() && blocks[bi].offset == next) {
        const auto& b = blocks[bi];
        out.add_hermitian(b.name, b.dim, b.psd);
        for (int c = 0; c < b.dim * b.dim; ++c) out.variables()[next + c] = vars[next + c];
        next += b.dim * b.dim;
        ++bi;
      } else {
        out.add_variable(vars[next].name, vars[next].lower, vars[next].upper);
        ++next;
      }
    }
    if (bi != blocks.size()) throw std::runtime_error("problem dump: overlapping hermitian blocks");
  }
  if (w != "objective") throw std::runtime_error("problem dump: expected objective");
  out.add_objective(rd.expr());
  while (true) {
    w = rd.word();
    if (w == "end") break;
    if (w == "square") {
      double weight = rd.number();
      out.add_square_objective(weight, rd.expr());
    } else if (w == "norm") {
      double weight = rd.number();
      long rows = rd.integer();
      std::string tag = untoken(rd.word());
      std::vector<AffineExpr> rs;
      for (long q = 0; q < rows; ++q) {
        rd.expect("row");
        rs.push_back(rd.expr());
      }
      out.add_norm_objective(weight, std::move(rs), tag);
    } else if (w == "affine") {
      std::string tag = untoken(rd.word());
      out.add_affine_le(rd.expr(), tag);
    } else if (w == "soc") {
      std::string tag = untoken(rd.word());
      long rows = rd.integer();
      rd.expect("bound");
      AffineExpr bound = rd.expr();
      std::vector<AffineExpr> rs;
      for (long q = 0; q < rows; ++q) {
        rd.expect("row");
        rs.push_back(rd.expr());
      }
      out.add_second_order(std::move(rs), std::move(bound), tag);
    } else if (w == "psd") {
      std::string tag = untoken(rd.word());
      int dim = static_cast<int>(rd.integer());
      long terms = rd.integer();
      rd.expect("const");
      HermitianExpr m(rd.matrix(dim));
      for (long q = 0; q < terms; ++q) {
        rd.expect("term");
        int i = static_cast<int>(rd.integer());
        m.add(i, rd.matrix(dim));
      }
      out.add_psd(std::move(m), tag);
    } else if (w == "exp") {
      std::string tag = untoken(rd.word());
      rd.expect("exponent");
      AffineExpr e = rd.expr();
      rd.expect("bound");
      AffineExpr b = rd.expr();
      out.add_exp(std::move(e), std::move(b), tag);
    } else {
      throw std::runtime_error("problem dump: unknown section '" + w + "'");
    }
  }
  out.validate();
  return out;
}

}  // namespace fdsc::conic
