#include <cmath>
#include <random>

#include "doctest.h"
#include "fdsc/convexify.hpp"
#include "support/small.hpp"
#include "support/tiny.hpp"

using namespace fdsc;

namespace {

CMatrix random_pd(int dim, std::mt19937_64& rng) {
  CMatrix a(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) a(r, c) = tiny::cn(rng);
  return a * a.adjoint() + 0.1 * CMatrix::Identity(dim, dim);
}

CVector random_vec(int dim, std::mt19937_64& rng) {
  CVector v(dim);
  for (int k = 0; k < dim; ++k) v(k) = tiny::cn(rng);
  return v;
}

int count_tag(const conic::ConicProgram& p, const std::string& prefix) {
  int n = 0;
  auto hit = [&](const std::string& t) { return t.rfind(prefix, 0) == 0; };
  for (const auto& c : p.affine()) n += hit(c.tag);
  for (const auto& c : p.second_order()) n += hit(c.tag);
  for (const auto& c : p.psd()) n += hit(c.tag);
  for (const auto& c : p.exp()) n += hit(c.tag);
  return n;
}

}  // namespace

TEST_CASE("AM-GM bound dominates the product and is tight at the ratio") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> lu(-6.0, 6.0);
  for (int k = 0; k < 100000; ++k) {
    double z = std::exp(lu(rng)), beta = std::exp(lu(rng)), xi = std::exp(lu(rng));
    double prod = z * beta;
    CHECK(amgm_bound(z, beta, xi) >= prod * (1.0 - 1e-12));
    CHECK(amgm_bound(z, beta, beta / z) == doctest::Approx(prod).epsilon(1e-12));
  }
  CHECK_THROWS_AS(amgm_bound(1.0, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(amgm_bound(1.0, 1.0, -2.0), std::invalid_argument);
}

TEST_CASE("matrix-fractional linearization is a tight global minorant") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ux(0.0, 3.0);
  int checks = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const int dim = 1 + trial % 3;
    CMatrix X0 = random_pd(dim, rng);
    CVector h = random_vec(dim, rng);
    double x0 = ux(rng) + 0.1;
    auto m = linearize_matrix_fractional(x0, X0, h);
    CHECK(m.evaluate(x0, X0) == doctest::Approx(matrix_fractional(x0, X0, h)).epsilon(1e-12));

    // gradient against central differences
    const double eps = 1e-6;
    double fx = (matrix_fractional(x0 + eps, X0, h) - matrix_fractional(x0 - eps, X0, h)) / (2 * eps);
    CHECK(m.slope_x == doctest::Approx(fx).epsilon(1e-6));
    for (int c = 0; c < dim * dim; ++c) {
      CMatrix E = hermitian_basis(dim, c);
      double fd = (matrix_fractional(x0, X0 + eps * E, h) - matrix_fractional(x0, X0 - eps * E, h)) / (2 * eps);
      CHECK(real_trace_product(m.slope_X, E) == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
    }

    for (int k = 0; k < 500; ++k) {
      double x = x0 + nd(rng);
      CMatrix X = random_pd(dim, rng) * std::exp(nd(rng));
      if (k % 2) X = X0 + 0.05 * (X - X0);  // near the expansion point too
      if (min_eigenvalue(X) <= 1e-9) continue;
      double f = matrix_fractional(x, X, h);
      CHECK(f >= m.evaluate(x, X) - 1e-9 * (1.0 + std::abs(f)));
      ++checks;
    }
  }
  CHECK(checks >= 9000);
}

TEST_CASE("update_xi is the beta-to-z ratio with a floor") {
  SpcaIterate it;
  it.beta = {2.0, 3.0, 0.0};
  it.z_dl = {4.0, 0.0, 1.0};
  auto xi = update_xi(it);
  CHECK(xi[0] == doctest::Approx(0.5));
  CHECK(xi[1] == doctest::Approx(3e9));
  CHECK(xi[2] == 0.0);
}

TEST_CASE("one cell, one UE each way, one carrier: constraint inventory") {
  for (Setup setup : {Setup::A, Setup::B, Setup::C}) {
    auto cs = small::make(1, 1, 1, setup);
    auto it = initial_iterate(cs.sc, cs.ch);
    auto sp = build_surrogate(it, cs.sc, cs.ch);
    const auto& p = sp.program;
    CHECK(p.num_variables() == 4 + 3 + 4);
    CHECK(p.blocks().size() == 1);
    CHECK(count_tag(p, "dl_signal") == 1);
    CHECK(count_tag(p, "dl_rate") == 1);
    CHECK(count_tag(p, "dl_interference") == 1);
    CHECK(count_tag(p, "ul_amplitude") == 1);
    CHECK(count_tag(p, "ul_rate") == 1);
    CHECK(count_tag(p, "ul_sinr") == 1);
    CHECK(count_tag(p, "ue_power") == 1);
    CHECK(count_tag(p, "sbs_power") == 1);
    CHECK(count_tag(p, "energy") == (setup == Setup::A ? 0 : 1));
    CHECK(p.num_constraints() == (setup == Setup::A ? 8u : 9u));
    CHECK(p.norm_terms().size() == 2);

    if (setup != Setup::A) {
      const conic::AffineConstraint* energy = nullptr;
      for (const auto& c : p.affine())
        if (c.tag == "energy[0]") energy = &c;
      REQUIRE(energy);
      bool has_rate = false;
      for (auto [var, coef] : energy->expr.terms) has_rate |= var == sp.vars.t_ul[0];
      CHECK(has_rate == (setup == Setup::C));
    }
  }
}

TEST_CASE("half duplex omits variables on disallowed carriers") {
  auto cs = small::make(2, 2, 2, Setup::C, Duplex::HD);
  auto it = initial_iterate(cs.sc, cs.ch);
  auto sp = build_surrogate(it, cs.sc, cs.ch);
  const int N = 2;
  for (int i = 0; i < cs.sc.num_dl(); ++i) {
    CHECK(sp.vars.U_offset[i * N + 0] >= 0);
    CHECK(sp.vars.U_offset[i * N + 1] < 0);
  }
  for (int j = 0; j < cs.sc.num_ul(); ++j) {
    CHECK(sp.vars.p[j * N + 0] < 0);
    CHECK(sp.vars.p[j * N + 1] >= 0);
    CHECK(it.p.at(j, 0) == 0.0);
  }
  for (int i = 0; i < cs.sc.num_dl(); ++i) CHECK(it.U.at(i, 1).norm() == 0.0);
}

TEST_CASE("initial iterate is strictly feasible for its surrogate") {
  for (Setup setup : {Setup::A, Setup::B, Setup::C}) {
    for (Duplex d : {Duplex::FD, Duplex::HD}) {
      auto cs = small::make(3, 2, 2, setup, d, 21);
      auto it = initial_iterate(cs.sc, cs.ch);
      auto sp = build_surrogate(it, cs.sc, cs.ch);
      CHECK(conic::violated_constraints(sp.program, sp.start, 0.0).empty());
      auto sched = it.scheduled_ul_rates();
      auto fr = validate_solution(it.U, it.p, cs.sc, cs.ch, 1e-6, &sched);
      CHECK(fr.feasible());
      CHECK(surrogate_objective(it, cs.sc) == doctest::Approx(sp.program.objective(sp.start)).epsilon(1e-10));
    }
  }
}

TEST_CASE("initial iterate rejects a budget below circuit power") {
  auto cfg = small::config(1, 1, 1);
  cfg.harvest_power = 0.5;
  auto cs = small::make(cfg);
  CHECK_THROWS_AS(initial_iterate(cs.sc, cs.ch), std::runtime_error);
  cfg.setup = Setup::A;
  auto ca = small::make(cfg);
  CHECK_NOTHROW(initial_iterate(ca.sc, ca.ch));
}

TEST_CASE("every surrogate-feasible point meets the relaxed SINR targets") {
  auto cs = small::make(2, 2, 2, Setup::C, Duplex::FD, 5);
  auto it = initial_iterate(cs.sc, cs.ch);
  auto sp = build_surrogate(it, cs.sc, cs.ch);
  auto sol = conic::solve(sp.program);
  REQUIRE(sol.ok());
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int N = cs.sc.num_subcarriers();
  for (int trial = 0; trial < 50; ++trial) {
    double lam = trial == 0 ? 1.0 : u(rng);
    std::vector<double> x(sol.x.size());
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = lam * sol.x[k] + (1 - lam) * sp.start[k];
    REQUIRE(conic::violated_constraints(sp.program, x, 1e-9).empty());
    auto pt = extract_iterate(sp, x, it);
    for (int i = 0; i < cs.sc.num_dl(); ++i)
      for (int n = 0; n < N; ++n) {
        double g = sinr_dl(i, n, pt.U, pt.p, cs.ch, cs.sc.topology);
        CHECK(g >= pt.z_dl[i * N + n] * (1 - 1e-7) - 1e-9);
      }
    for (int j = 0; j < cs.sc.num_ul(); ++j)
      for (int n = 0; n < N; ++n) {
        double g = sinr_ul_mmse_sic(j, n, pt.U, pt.p, cs.ch, cs.sc.topology);
        CHECK(g >= pt.z_ul[j * N + n] * (1 - 1e-7) - 1e-9);
      }
    auto sched = pt.scheduled_ul_rates();
    CHECK(validate_solution(pt.U, pt.p, cs.sc, cs.ch, 1e-7, &sched).feasible());
  }
}

TEST_CASE("re-expanding at a surrogate solution keeps it feasible and the objective non-increasing") {
  auto cs = small::make(2, 2, 2, Setup::C, Duplex::FD, 9);
  auto it = initial_iterate(cs.sc, cs.ch);
  double prev = surrogate_objective(it, cs.sc);
  for (int r = 0; r < 4; ++r) {
    auto sp = build_surrogate(it, cs.sc, cs.ch);
    CHECK(conic::violated_constraints(sp.program, sp.start, 0.0).empty());
    conic::SolverOptions opt;
    opt.initial_point = sp.start;
    auto sol = conic::solve(sp.program, opt);
    REQUIRE(sol.ok());
    it = extract_iterate(sp, sol.x, it);
    double obj = surrogate_objective(it, cs.sc);
    CHECK(obj <= prev + 1e-6 * (1 + prev));
    prev = obj;
  }
}
