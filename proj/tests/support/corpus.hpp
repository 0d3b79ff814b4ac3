#pragma once

// Hand-solvable conic programs with known optima.

#include <cmath>
#include <string>
#include <vector>

#include "fdsc/conic.hpp"

namespace corpus {

using fdsc::conic::AffineExpr;
using fdsc::conic::ConicProgram;

struct Case {
  std::string name;
  ConicProgram program;
  double optimum;
};

inline AffineExpr var(int i, double c = 1.0) { return AffineExpr::variable(i, c); }

inline std::vector<Case> cases() {
  std::vector<Case> out;
  {
    // min x^2  s.t. x >= 1
    ConicProgram p;
    int x = p.add_variable("x");
    p.add_square_objective(1.0, var(x));
    p.add_affine_ge(var(x) - AffineExpr(1.0), "x>=1");
    out.push_back({"square-with-affine", p, 1.0});
  }
  {
    // min tr(U)  s.t. h^H U h >= 1, U psd, h = (1, 0)
    ConicProgram p;
    int blk = p.add_hermitian("U", 2, true);
    auto u = p.block_expr(blk);
    fdsc::CMatrix eye = fdsc::CMatrix::Identity(2, 2);
    fdsc::CVector h(2);
    h << 1.0, 0.0;
    fdsc::CMatrix hh = h * h.adjoint();
    p.add_objective(u.trace_with(eye));
    p.add_affine_ge(u.trace_with(hh) - AffineExpr(1.0), "gain");
    out.push_back({"trace-with-psd-block", p, 1.0});
  }
  {
    // max t  s.t. e^t <= 2
    ConicProgram p;
    int t = p.add_variable("t");
    p.add_objective(var(t, -1.0));
    p.add_exp(var(t), AffineExpr(2.0), "epi");
    out.push_back({"exp-epigraph", p, -std::log(2.0)});
  }
  {
    // min x + y  s.t. ||(x, y)|| <= 1
    ConicProgram p;
    int x = p.add_variable("x");
    int y = p.add_variable("y");
    p.add_objective(var(x) + var(y));
    p.add_second_order({var(x), var(y)}, AffineExpr(1.0), "disc");
    out.push_back({"linear-over-disc", p, -std::sqrt(2.0)});
  }
  {
    // min ||x - (1, 2)||  s.t. x1 + x2 >= 10  -> distance 7 / sqrt(2)
    ConicProgram p;
    int a = p.add_variable("a");
    int b = p.add_variable("b");
    p.add_norm_objective(1.0, {var(a) - AffineExpr(1.0), var(b) - AffineExpr(2.0)}, "dist");
    p.add_affine_ge(var(a) + var(b) - AffineExpr(10.0), "halfplane");
    out.push_back({"norm-distance-to-halfplane", p, 7.0 / std::sqrt(2.0)});
  }
  {
    // min x  s.t. [[x, 1+i], [1-i, 2]] psd  -> x = |1+i|^2 / 2 = 1
    ConicProgram p;
    int x = p.add_variable("x");
    fdsc::CMatrix f0(2, 2);
    f0 << 0.0, fdsc::cdouble(1.0, 1.0), fdsc::cdouble(1.0, -1.0), 2.0;
    fdsc::CMatrix f1 = fdsc::CMatrix::Zero(2, 2);
    f1(0, 0) = 1.0;
    fdsc::conic::HermitianExpr m(f0);
    m.add(x, f1);
    p.add_objective(var(x));
    p.add_psd(m, "lmi");
    out.push_back({"complex-lmi", p, 1.0});
  }
  {
    // min (x - 3)^2  s.t. e^x <= 1 + y, y <= 4  -> x = ln 5
    ConicProgram p;
    int x = p.add_variable("x");
    int y = p.add_variable("y", -fdsc::conic::kInf, 4.0);
    p.add_square_objective(1.0, var(x) - AffineExpr(3.0));
    p.add_exp(var(x), var(y) + AffineExpr(1.0), "rate");
    double d = 3.0 - std::log(5.0);
    out.push_back({"exp-with-bound", p, d * d});
  }
  {
    // min a + b  s.t. a^2 + b^2 <= s, s <= 2 ... via rotated cone; optimum -2
    ConicProgram p;
    int a = p.add_variable("a");
    int b = p.add_variable("b");
    int s = p.add_variable("s", -fdsc::conic::kInf, 2.0);
    p.add_objective(var(a) + var(b));
    p.add_sum_squares_le({var(a), var(b)}, var(s), "rotated");
    out.push_back({"rotated-cone", p, -2.0});
  }
  return out;
}

}  // namespace corpus
