#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "fdsc/phy_model.hpp"
#include "support/tiny.hpp"

using namespace fdsc;

namespace {

CMatrix random_psd(std::mt19937_64& rng, int dim, double scale) {
  CMatrix a(dim, dim);
  for (int r = 0; r < dim; ++r) for (int c = 0; c < dim; ++c) a(r, c) = tiny::cn(rng);
  return scale * a * a.adjoint();
}

// Builds the UL interference covariance from scratch for the oracle.
CMatrix oracle_covariance(int j, int n, const BeamformerSet& U, const PowerSet& p, const ChannelSet& ch,
                          const Topology& t) {
  int bj = t.ul_cell[j];
  CMatrix X = ch.noise_sbs * CMatrix::Identity(ch.rx_antennas, ch.rx_antennas);
  for (int l = 0; l < t.num_ul(); ++l) {
    bool residual = t.ul_cell[l] != bj || l > j;
    if (!residual) continue;
    CVector h = ch.h_ul(bj, l, n);
    X += p.at(l, n) * h * h.adjoint();
  }
  for (int i = 0; i < t.num_dl(); ++i) {
    CMatrix H = ch.H(bj, t.dl_cell[i], n);
    X += H * U.at(i, n) * H.adjoint();
  }
  return X;
}

}  // namespace

TEST_CASE("DL SINR by direct substitution") {
  Topology t = tiny::topology(1, 1, 1);
  ChannelSet ch = tiny::zero_channels(t, 1, 2, 2);
  ch.h_dl(0, 0, 0) << 1.0, 0.0;
  BeamformerSet U(1, 1, 2);
  PowerSet p(1, 1);
  U.at(0, 0) = CMatrix::Identity(2, 2);
  CHECK(sinr_dl(0, 0, U, p, ch, t) == doctest::Approx(1.0));
  p.at(0, 0) = 1.0;
  ch.g(0, 0, 0) = 1.0;
  CHECK(sinr_dl(0, 0, U, p, ch, t) == doctest::Approx(0.5));
  U.at(0, 0).setZero();
  CHECK(sinr_dl(0, 0, U, p, ch, t) == 0.0);
}

TEST_CASE("UL SINR hand cases") {
  Topology t = tiny::topology(1, 1, 1);
  ChannelSet ch = tiny::zero_channels(t, 1, 2, 2);
  ch.h_ul(0, 0, 0) << 1.0, 0.0;
  BeamformerSet U(1, 1, 2);
  PowerSet p(1, 1);
  p.at(0, 0) = 4.0;
  CHECK(sinr_ul_mmse_sic(0, 0, U, p, ch, t) == doctest::Approx(4.0));
  ch.H(0, 0, 0) = CMatrix::Identity(2, 2);
  U.at(0, 0) = CMatrix::Identity(2, 2);
  CHECK(sinr_ul_mmse_sic(0, 0, U, p, ch, t) == doctest::Approx(2.0));
}

TEST_CASE("MMSE-SIC matches a determinant oracle") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    Topology t = tiny::topology(2, 1, 2);
    ChannelSet ch = tiny::random_channels(t, 1, 2, 2, rng);
    BeamformerSet U(t.num_dl(), 1, 2);
    PowerSet p(t.num_ul(), 1);
    for (auto& u : U.U) u = random_psd(rng, 2, 0.5);
    std::uniform_real_distribution<double> pu(0.0, 2.0);
    for (double& v : p.p) v = pu(rng);
    for (int j = 0; j < t.num_ul(); ++j) {
      CMatrix X = oracle_covariance(j, 0, U, p, ch, t);
      CVector h = ch.h_ul(t.ul_cell[j], j, 0);
      // 1 + SINR = det(X + p h h^H) / det(X)
      cdouble ratio = (X + p.at(j, 0) * h * h.adjoint()).determinant() / X.determinant();
      double got = sinr_ul_mmse_sic(j, 0, U, p, ch, t);
      CHECK(std::abs(got - (ratio.real() - 1.0)) <= 1e-10 * (1.0 + got));
    }
  }
}

TEST_CASE("SIC order parameter changes residual interference") {
  std::mt19937_64 rng(3);
  Topology t = tiny::topology(1, 1, 2);
  ChannelSet ch = tiny::random_channels(t, 1, 2, 2, rng);
  BeamformerSet U(1, 1, 2);
  PowerSet p(2, 1);
  p.at(0, 0) = 1.0;
  p.at(1, 0) = 1.0;
  double first = sinr_ul_mmse_sic(0, 0, U, p, ch, t, {0, 1});
  double last = sinr_ul_mmse_sic(0, 0, U, p, ch, t, {1, 0});
  CHECK(last > first);
  CHECK_THROWS(sinr_ul_mmse_sic(0, 0, U, p, ch, t, {0}));
}

TEST_CASE("SINRs do not increase with interferer power") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    Topology t = tiny::topology(2, 1, 1);
    ChannelSet ch = tiny::random_channels(t, 1, 2, 2, rng);
    BeamformerSet U(2, 1, 2);
    PowerSet p(2, 1);
    for (auto& u : U.U) u = random_psd(rng, 2, 0.5);
    p.at(0, 0) = 0.7;
    p.at(1, 0) = 0.4;
    double dl0 = sinr_dl(0, 0, U, p, ch, t);
    double ul0 = sinr_ul_mmse_sic(0, 0, U, p, ch, t);
    PowerSet p2 = p;
    p2.at(1, 0) *= 3.0;
    BeamformerSet U2 = U;
    U2.at(1, 0) *= 3.0;
    CHECK(sinr_dl(0, 0, U, p2, ch, t) <= dl0 + 1e-12);
    CHECK(sinr_dl(0, 0, U2, p, ch, t) <= dl0 + 1e-12);
    CHECK(sinr_ul_mmse_sic(0, 0, U, p2, ch, t) <= ul0 + 1e-12);
    CHECK(sinr_ul_mmse_sic(0, 0, U2, p, ch, t) <= ul0 + 1e-12);
  }
}

TEST_CASE("queue deviation") {
  CHECK(queue_deviation(6.0, {1.0, 1.0}) == 4.0);
  CHECK(queue_deviation(6.0, {0.0, 0.0}) == 6.0);
  CHECK(queue_deviation(2.0, {3.0}) == -1.0);
  for (double q : {0.0, 1.0, 7.5}) CHECK(queue_deviation(q, {}) == q);
}

namespace {

Scenario one_cell(Setup setup) {
  ScenarioConfig c;
  c.num_sbs = 1;
  c.dl_ues_per_cell = 1;
  c.ul_ues_per_cell = 1;
  c.num_subcarriers = 1;
  c.setup = setup;
  c.circuit_power = 1.0;
  c.decode_eff = 0.1;
  return make_scenario(c);
}

}  // namespace

TEST_CASE("power consumption") {
  Scenario s = one_cell(Setup::C);
  BeamformerSet U(1, 1, 2);
  U.at(0, 0) = CMatrix::Identity(2, 2);  // trace 2 W
  std::vector<std::vector<double>> rates = {{10.0}};
  CHECK(power_consumption(0, U, rates, s) == doctest::Approx(4.0));
  Scenario b = one_cell(Setup::B);
  CHECK(power_consumption(0, U, rates, b) == doctest::Approx(3.0));
}

TEST_CASE("rate report consistency and CSV") {
  ScenarioConfig c;
  c.num_sbs = 2;
  c.dl_ues_per_cell = 1;
  c.ul_ues_per_cell = 1;
  Scenario s = make_scenario(c);
  ChannelSet ch = draw_channels(s.topology, c);
  BeamformerSet U(2, 2, 2);
  PowerSet p(2, 2);
  for (auto& u : U.U) u = 0.05 * CMatrix::Identity(2, 2);
  for (double& v : p.p) v = 0.05;
  RateReport r = evaluate_rates(U, p, s, ch);
  for (int i = 0; i < 2; ++i) {
    for (int n = 0; n < 2; ++n) CHECK(std::abs(r.rate_dl[i][n] - std::log2(1.0 + r.sinr_dl[i][n])) <= 1e-12);
  }
  std::stringstream ss;
  write_rate_csv(ss, r, s.topology);
  std::string line;
  int rows = 0;
  while (std::getline(ss, line)) ++rows;
  CHECK(rows == 1 + 2 * 2 + 2 * 2);
}

TEST_CASE("feasibility report") {
  Scenario s = one_cell(Setup::C);
  s.power_budget = {1.5};
  ChannelSet ch = tiny::zero_channels(s.topology, 1, 2, 2);
  ch.h_ul(0, 0, 0) << 1.0, 0.0;
  BeamformerSet U(1, 1, 2);
  PowerSet p(1, 1);
  FeasibilityReport zero = validate_solution(U, p, s, ch);
  CHECK(zero.feasible());
  CHECK(zero.dl_power_slack[0] == doctest::Approx(s.config.sbs_max_power));
  CHECK(zero.ul_power_slack[0] == doctest::Approx(s.config.ue_max_power));

  U.at(0, 0) = CMatrix::Zero(2, 2);
  U.at(0, 0)(0, 0) = s.config.sbs_max_power;
  FeasibilityReport edge = validate_solution(U, p, s, ch);
  CHECK(edge.dl_power_slack[0] == doctest::Approx(0.0));
  CHECK(edge.feasible());
  CHECK(edge.rank[0] == 1);

  // Decoding energy of a strong uplink pushes consumption past the budget.
  Scenario big = s;
  big.config.decode_eff = 50.0;
  p.at(0, 0) = 0.1;
  FeasibilityReport over = validate_solution(U, p, big, ch);
  CHECK(!over.feasible());
  CHECK(over.energy_slack[0] < 0.0);
  // Transmitting below capacity lowers the decoding load.
  std::vector<std::vector<double>> cap = {{0.001}};
  FeasibilityReport capped = validate_solution(U, p, big, ch, 1e-6, &cap);
  CHECK(capped.energy_slack[0] > over.energy_slack[0]);
  RateReport rr = evaluate_rates(U, p, big, ch, &cap);
  CHECK(rr.rate_ul[0][0] == doctest::Approx(0.001));
  CHECK(rr.q_dev_ul[0] == doctest::Approx(big.traffic.q_ul[0] - 0.001));
  std::vector<std::vector<double>> loose = {{1e9}};
  CHECK(evaluate_rates(U, p, big, ch, &loose).rate_ul[0][0] == doctest::Approx(std::log2(1.0 + rr.sinr_ul[0][0])));

  U.at(0, 0)(1, 1) = -0.1;
  CHECK(!validate_solution(U, p, s, ch).feasible());
}
