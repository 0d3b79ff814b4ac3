#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "fdsc/admm.hpp"
#include "support/small.hpp"

using namespace fdsc;

namespace {

int count(const std::vector<Coupling>& cs, CouplingKind k) {
  return static_cast<int>(std::count_if(cs.begin(), cs.end(), [k](const Coupling& c) { return c.kind == k; }));
}

CMatrix scalar(double v) { return CMatrix::Constant(1, 1, v); }

CMatrix random_hermitian(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> nd;
  CMatrix a(dim, dim);
  for (int r = 0; r < dim; ++r) for (int c = 0; c < dim; ++c) a(r, c) = cdouble(nd(rng), nd(rng));
  return a + a.adjoint();
}

double centralized_objective(const SpcaIterate& it, const Scenario& sc, const ChannelSet& ch) {
  SurrogateProblem sp = build_surrogate(it, sc, ch);
  conic::SolverOptions o;
  o.initial_point = sp.start;
  return conic::solve(sp.program, o).objective;
}

}  // namespace

TEST_CASE("coupling enumeration") {
  auto cs = small::make(2, 1, 1);
  auto K = enumerate_couplings(cs.sc);
  CHECK(count(K, CouplingKind::kDlFromDl) == 2);
  CHECK(count(K, CouplingKind::kDlFromUl) == 2);
  CHECK(count(K, CouplingKind::kUlFromDl) == 2);
  CHECK(count(K, CouplingKind::kUlFromUl) == 2);
  for (const auto& c : K) {
    CHECK(c.producer != c.victim_cell);
    bool matrix = c.kind == CouplingKind::kUlFromDl || c.kind == CouplingKind::kUlFromUl;
    CHECK(c.dim == (matrix ? cs.sc.config.rx_antennas : 1));
  }
  CHECK(enumerate_couplings(small::make(1, 2, 2).sc).empty());

  // Three cells with one DL UE each: cell 0 produces copies toward the DL UEs of cells 1 and 2.
  auto three = small::make(3, 1, 1);
  std::vector<int> victims;
  for (const auto& c : enumerate_couplings(three.sc)) {
    if (c.kind == CouplingKind::kDlFromDl && c.producer == 0) victims.push_back(three.sc.topology.dl_cell[c.victim]);
  }
  std::sort(victims.begin(), victims.end());
  CHECK(victims == std::vector<int>{1, 2});

  // Half duplex: DL and UL carriers are disjoint, so cross-direction couplings vanish.
  auto hd = small::make(2, 1, 2, Setup::C, Duplex::HD);
  auto Kh = enumerate_couplings(hd.sc);
  CHECK(count(Kh, CouplingKind::kDlFromUl) == 0);
  CHECK(count(Kh, CouplingKind::kUlFromDl) == 0);
  CHECK(count(Kh, CouplingKind::kDlFromDl) == 2);
  CHECK(count(Kh, CouplingKind::kUlFromUl) == 2);
}

TEST_CASE("global averaging") {
  std::vector<Coupling> K = {{CouplingKind::kDlFromDl, 0, 0, 1, 0, 1}, {CouplingKind::kUlFromUl, 1, 0, 0, 0, 2}};
  std::mt19937_64 rng(4);
  CMatrix A = random_hermitian(rng, 2), B = random_hermitian(rng, 2);
  std::vector<Message> msgs(2);
  msgs[0].coupling = 0;
  msgs[0].producer_copy = scalar(3.0);
  msgs[0].victim_copy = scalar(5.0);
  msgs[1].coupling = 1;
  msgs[1].producer_copy = A;
  msgs[1].victim_copy = B;
  GlobalState g = update_globals(msgs, K);
  CHECK(g.value[0](0, 0).real() == doctest::Approx(4.0));
  CHECK((g.value[1] - 0.5 * (A + B)).norm() < 1e-15);
  CHECK((g.value[1] - g.value[1].adjoint()).norm() == 0.0);
  msgs[0].producer_copy = msgs[0].victim_copy = scalar(2.0);
  CHECK(update_globals(msgs, K).value[0](0, 0).real() == 2.0);
}

TEST_CASE("multiplier updates") {
  std::vector<Coupling> K = {{CouplingKind::kDlFromDl, 0, 0, 1, 0, 1}};
  GlobalState g;
  g.value = {scalar(1.0)};
  Multipliers m;
  m.producer = {scalar(0.0)};
  m.victim = {scalar(1.0)};
  std::vector<Message> msgs(1);
  msgs[0].producer_copy = scalar(1.5);   // residual 0.5
  msgs[0].victim_copy = scalar(0.75);    // residual -0.25
  PenaltyParams rho;
  rho.rho1 = 1.0;
  Multipliers a = update_multipliers(msgs, g, m, rho, K);
  CHECK(a.producer[0](0, 0).real() == doctest::Approx(0.5));
  CHECK(a.victim[0](0, 0).real() == doctest::Approx(0.75));
  rho.rho1 = 2.0;
  Multipliers b = update_multipliers(msgs, g, m, rho, K);
  CHECK(b.victim[0](0, 0).real() == doctest::Approx(0.5));
  msgs[0].producer_copy = msgs[0].victim_copy = scalar(1.0);
  Multipliers c = update_multipliers(msgs, g, m, rho, K);
  CHECK(c.producer[0](0, 0) == m.producer[0](0, 0));
  CHECK(c.victim[0](0, 0) == m.victim[0](0, 0));

  // Matrices use the transposed residual.
  std::vector<Coupling> KM = {{CouplingKind::kUlFromDl, 0, 0, 1, 0, 2}};
  std::mt19937_64 rng(8);
  CMatrix G = random_hermitian(rng, 2), X = random_hermitian(rng, 2);
  GlobalState gm;
  gm.value = {G};
  Multipliers mm;
  mm.producer = mm.victim = {CMatrix::Zero(2, 2)};
  std::vector<Message> mx(1);
  mx[0].producer_copy = X;
  mx[0].victim_copy = G;
  rho.rho3 = 0.5;
  Multipliers r = update_multipliers(mx, gm, mm, rho, KM);
  CHECK((r.producer[0] - 0.5 * (X - G).transpose()).norm() < 1e-15);
  CHECK(r.victim[0].norm() == 0.0);

  PenaltyParams bad;
  bad.rho2 = 0.0;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("consensus fixed point") {
  std::mt19937_64 rng(12);
  std::vector<Coupling> K = {{CouplingKind::kDlFromDl, 0, 0, 1, 0, 1}, {CouplingKind::kUlFromUl, 1, 0, 0, 0, 2}};
  GlobalState g;
  g.value = {scalar(0.3), random_hermitian(rng, 2)};
  Multipliers m;
  m.producer = {scalar(0.2), random_hermitian(rng, 2)};
  m.victim = {scalar(-0.2), -m.producer[1]};
  std::vector<Message> msgs(2);
  for (int k = 0; k < 2; ++k) {
    msgs[k].coupling = k;
    msgs[k].producer_copy = msgs[k].victim_copy = g.value[k];
  }
  PenaltyParams rho;
  GlobalState g2 = update_globals(msgs, K);
  Multipliers m2 = update_multipliers(msgs, g2, m, rho, K);
  for (int k = 0; k < 2; ++k) {
    CHECK((g2.value[k] - g.value[k]).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((m2.producer[k] - m.producer[k]).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((m2.victim[k] - m.victim[k]).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("local subproblem structure") {
  auto cs = small::make(2, 1, 1);
  SpcaIterate it = initial_iterate(cs.sc, cs.ch);
  auto K = enumerate_couplings(cs.sc);
  GlobalState g;
  Multipliers m;
  for (const auto& c : K) {
    g.value.push_back(coupling_value(c, it, cs.sc, cs.ch));
    m.producer.push_back(CMatrix::Zero(c.dim, c.dim));
    m.victim.push_back(CMatrix::Zero(c.dim, c.dim));
  }
  PenaltyParams rho;
  for (int b = 0; b < 2; ++b) {
    LocalState L = build_local_subproblem(b, it, cs.sc, cs.ch, K, g, m, rho);
    for (std::size_t k = 0; k < K.size(); ++k) {
      bool holds = K[k].producer == b || K[k].victim_cell == b;
      CHECK((L.copy_offset[k] >= 0) == holds);
    }
    // The start point is strictly feasible.
    CHECK(conic::violated_constraints(L.problem.program, L.problem.start, 0.0).empty());

    // Zero multipliers and globals equal to the copies: the consensus terms vanish.
    LocalState base = build_local_constraints(b, it, cs.sc, cs.ch, K);
    base.x = base.problem.start;
    GlobalState at;
    auto copies = base.copies();
    for (std::size_t k = 0; k < K.size(); ++k) at.value.push_back(copies[k].size() ? copies[k] : g.value[k]);
    auto prog = with_penalties(base, K, at, m, rho);
    CHECK(prog.objective(base.x) == doctest::Approx(base.problem.program.objective(base.x)).epsilon(1e-14));
  }
  GlobalState wrong = g;
  wrong.value.pop_back();
  CHECK_THROWS(build_local_subproblem(0, it, cs.sc, cs.ch, K, wrong, m, rho));
  CHECK_THROWS(build_local_subproblem(2, it, cs.sc, cs.ch, K, g, m, rho));
}

TEST_CASE("exchange") {
  auto cs = small::make(2, 1, 1);
  SpcaIterate it = initial_iterate(cs.sc, cs.ch);
  auto K = enumerate_couplings(cs.sc);
  std::vector<LocalState> locals;
  for (int b = 0; b < 2; ++b) locals.push_back(build_local_constraints(b, it, cs.sc, cs.ch, K));
  CHECK_THROWS_AS(fdsc::exchange(locals, K), std::logic_error);
  for (auto& L : locals) L.x = L.problem.start;
  auto msgs = fdsc::exchange(locals, K);
  CHECK(msgs.size() == K.size());
  std::size_t bytes = 0;
  for (const auto& m : msgs) {
    const Coupling& c = K[m.coupling];
    CHECK(m.from == c.producer);
    CHECK(m.to == c.victim_cell);
    bytes += m.bytes;
  }
  // Two scalars per DL coupling, two 2x2 Hermitian blocks (4 reals each) per UL coupling.
  CHECK(bytes == 4 * 2 * 8 + 4 * 2 * 4 * 8);
}

TEST_CASE("single cell needs no consensus") {
  auto cs = small::make(1, 2, 2);
  SpcaIterate it = initial_iterate(cs.sc, cs.ch);
  AdmmState st;
  AdmmResult r = admm_loop(it, cs.sc, cs.ch, st);
  CHECK(r.converged);
  CHECK(r.iterations == 1);
  CHECK(r.trace.at(0).messages == 0);
  double central = centralized_objective(it, cs.sc, cs.ch);
  CHECK(r.trace.back().objective == doctest::Approx(central).epsilon(1e-6));
}

TEST_CASE("ADMM matches the centralized surrogate solve") {
  for (std::uint64_t seed : {2u, 3u}) {
    auto cs = small::make(2, 1, 2, Setup::C, Duplex::FD, seed);
    SpcaIterate it = initial_iterate(cs.sc, cs.ch);
    AdmmState st;
    AdmmOptions o;
    o.rho.residual_balancing = true;
    AdmmResult r = admm_loop(it, cs.sc, cs.ch, st, o);
    CHECK(r.converged);
    CHECK(r.primal_residual < 1e-4);
    CHECK(r.dual_residual < 1e-4);
    double central = centralized_objective(it, cs.sc, cs.ch);
    CHECK(std::abs(r.trace.back().objective - central) <= 0.01 * central);

    // Assembled solution is feasible for the whole-network surrogate.
    SurrogateProblem sp = build_surrogate(it, cs.sc, cs.ch);
    auto viol = conic::violated_constraints(sp.program, pack_iterate(sp, r.iterate), 1e-3);
    CHECK(viol.empty());

    // Static coupling graph: same traffic every iteration.
    for (const auto& row : r.trace) {
      CHECK(row.messages == r.trace.front().messages);
      CHECK(row.bytes == r.trace.front().bytes);
    }
  }
}

TEST_CASE("solve order does not matter") {
  auto cs = small::make(3, 1, 1, Setup::C, Duplex::FD, 4);
  SpcaIterate it = initial_iterate(cs.sc, cs.ch);
  AdmmOptions a, b;
  a.max_iterations = b.max_iterations = 15;
  b.solve_order = {2, 0, 1};
  AdmmState sa, sb;
  AdmmResult ra = admm_loop(it, cs.sc, cs.ch, sa, a);
  AdmmResult rb = admm_loop(it, cs.sc, cs.ch, sb, b);
  REQUIRE(ra.trace.size() == rb.trace.size());
  for (std::size_t k = 0; k < ra.trace.size(); ++k) {
    CHECK(std::abs(ra.trace[k].objective - rb.trace[k].objective) <= 1e-6);
  }
  for (std::size_t k = 0; k < sa.globals.value.size(); ++k) {
    CHECK((sa.globals.value[k] - sb.globals.value[k]).cwiseAbs().maxCoeff() <= 1e-6);
  }
  b.solve_order = {0, 0, 1};
  AdmmState sc;
  CHECK_THROWS(admm_loop(it, cs.sc, cs.ch, sc, b));
}

TEST_CASE("trace CSV and latency hook") {
  auto cs = small::make(2, 1, 1);
  SpcaIterate it = initial_iterate(cs.sc, cs.ch);
  AdmmOptions o;
  o.max_iterations = 3;
  o.tol = 0.0;
  o.latency = [](const Message& m) { return 1e-3 * static_cast<double>(m.bytes); };
  AdmmState st;
  AdmmResult r = admm_loop(it, cs.sc, cs.ch, st, o, 4);
  CHECK(r.iterations == 3);
  CHECK(!r.converged);
  CHECK(r.trace[0].latency == doctest::Approx(1e-3 * static_cast<double>(r.trace[0].bytes)));
  CHECK(r.trace[2].spca_iteration == 4);
  std::stringstream ss;
  write_admm_trace_csv(ss, r.trace);
  std::string header;
  std::getline(ss, header);
  CHECK(header.rfind("iteration,objective,primal_residual,dual_residual,messages,bytes", 0) == 0);
  int rows = 0;
  for (std::string line; std::getline(ss, line);) ++rows;
  CHECK(rows == 3);
  o.max_iterations = 0;
  CHECK_THROWS(admm_loop(it, cs.sc, cs.ch, st, o));
}
