#include "fdsc/phy_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace fdsc {

double sinr_dl(int i, int n, const BeamformerSet& U, const PowerSet& p, const ChannelSet& ch, const Topology& topo) {
  const int bi = topo.dl_cell.at(i);
  const CVector& h = ch.h_dl(bi, i, n);
  double signal = (h.adjoint() * U.at(i, n) * h)(0, 0).real();
  double denom = ch.noise_ue;
  for (int k = 0; k < U.num_dl; ++k) {
    if (k == i) continue;
    const CVector& hk = ch.h_dl(topo.dl_cell[k], i, n);
    denom += (hk.adjoint() * U.at(k, n) * hk)(0, 0).real();
  }
  for (int j = 0; j < p.num_ul; ++j) denom += p.at(j, n) * std::norm(ch.g(j, i, n));
  return std::max(0.0, signal) / denom;
}

std::vector<int> default_sic_order(const Topology& topo, int cell) { return topo.ul_sets.at(cell); }

CMatrix ul_interference_covariance(int j, int n, const BeamformerSet& U, const PowerSet& p, const ChannelSet& ch,
                                   const Topology& topo, const std::vector<int>& order) {
  const int bj = topo.ul_cell.at(j);
  auto pos = std::find(order.begin(), order.end(), j);
  if (pos == order.end()) throw std::invalid_argument("SIC order does not contain the UE");
  const int mr = ch.rx_antennas;
  CMatrix X = ch.noise_sbs * CMatrix::Identity(mr, mr);
  for (auto it = pos + 1; it != order.end(); ++it) {
    const CVector& hl = ch.h_ul(bj, *it, n);
    X += p.at(*it, n) * hl * hl.adjoint();
  }
  for (int l = 0; l < p.num_ul; ++l) {
    if (topo.ul_cell[l] == bj) continue;
    const CVector& hl = ch.h_ul(bj, l, n);
    X += p.at(l, n) * hl * hl.adjoint();
  }
  for (int i = 0; i < U.num_dl; ++i) {
    const CMatrix& H = ch.H(bj, topo.dl_cell[i], n);
    X += H * U.at(i, n) * H.adjoint();
  }
  return hermitian_part(X);
}

double sinr_ul_mmse_sic(int j, int n, const BeamformerSet& U, const PowerSet& p, const ChannelSet& ch,
                        const Topology& topo, const std::vector<int>& order) {
  const int bj = topo.ul_cell.at(j);
  for (int l : order) {
    if (l < 0 || l >= topo.num_ul() || topo.ul_cell[l] != bj) throw std::invalid_argument("SIC order mixes cells");
  }
  if (order.size() != topo.ul_sets[bj].size()) throw std::invalid_argument("SIC order is not a permutation of the cell");
  CMatrix X = ul_interference_covariance(j, n, U, p, ch, topo, order);
  Eigen::LLT<CMatrix> llt(X);
  if (llt.info() != Eigen::Success) throw std::runtime_error("UL interference covariance is not positive definite");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(X, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  if (ev(0) <= 0.0 || ev(ev.size() - 1) / ev(0) > 1e15) throw std::runtime_error("UL interference covariance is ill-conditioned");
  const CVector& h = ch.h_ul(bj, j, n);
  CVector y = llt.solve(h);
  return std::max(0.0, p.at(j, n) * h.dot(y).real());
}

double sinr_ul_mmse_sic(int j, int n, const BeamformerSet& U, const PowerSet& p, const ChannelSet& ch,
                        const Topology& topo) {
  return sinr_ul_mmse_sic(j, n, U, p, ch, topo, default_sic_order(topo, topo.ul_cell.at(j)));
}

double queue_deviation(double queue_bits, const std::vector<double>& rates_bits) {
  double q = queue_bits;
  for (double r : rates_bits) q -= r;
  return q;
}

double power_consumption(int b, const BeamformerSet& U, const std::vector<std::vector<double>>& rates_ul,
                         const Scenario& sc) {
  double tx = 0.0;
  for (int i : sc.topology.dl_sets.at(b)) {
    for (int n = 0; n < U.num_subcarriers; ++n) tx += U.at(i, n).trace().real();
  }
  double dec = 0.0;
  for (int j : sc.topology.ul_sets.at(b)) {
    for (double r : rates_ul.at(j)) dec += r;
  }
  return tx + sc.config.circuit_power + sc.config.effective_decode_eff() * dec;
}

namespace {

double sum_all(const std::vector<std::vector<double>>& v) {
  double s = 0.0;
  for (const auto& row : v) for (double x : row) s += x;
  return s;
}

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

double RateReport::sum_rate_dl() const { return sum_all(rate_dl); }
double RateReport::sum_rate_ul() const { return sum_all(rate_ul); }

double RateReport::residual_backlog() const {
  double s = 0.0;
  for (double q : q_dev_dl) s += std::max(0.0, q);
  for (double q : q_dev_ul) s += std::max(0.0, q);
  return s;
}

double RateReport::queue_norm() const { return norm2(q_dev_dl) + norm2(q_dev_ul); }

RateReport evaluate_rates(const BeamformerSet& U, const PowerSet& p, const Scenario& sc, const ChannelSet& ch,
                          const std::vector<std::vector<double>>* ul_rate_cap) {
  const auto& topo = sc.topology;
  const int N = sc.num_subcarriers();
  RateReport r;
  r.sinr_dl.assign(topo.num_dl(), std::vector<double>(N, 0.0));
  r.rate_dl = r.sinr_dl;
  r.sinr_ul.assign(topo.num_ul(), std::vector<double>(N, 0.0));
  r.rate_ul = r.sinr_ul;
  for (int i = 0; i < topo.num_dl(); ++i) {
    for (int n = 0; n < N; ++n) {
      r.sinr_dl[i][n] = sinr_dl(i, n, U, p, ch, topo);
      r.rate_dl[i][n] = std::log2(1.0 + r.sinr_dl[i][n]);
    }
    r.q_dev_dl.push_back(queue_deviation(sc.traffic.q_dl.at(i), r.rate_dl[i]));
  }
  for (int j = 0; j < topo.num_ul(); ++j) {
    for (int n = 0; n < N; ++n) {
      r.sinr_ul[j][n] = sinr_ul_mmse_sic(j, n, U, p, ch, topo);
      r.rate_ul[j][n] = std::log2(1.0 + r.sinr_ul[j][n]);
      if (ul_rate_cap) r.rate_ul[j][n] = std::min(r.rate_ul[j][n], std::max(0.0, ul_rate_cap->at(j).at(n)));
    }
    r.q_dev_ul.push_back(queue_deviation(sc.traffic.q_ul.at(j), r.rate_ul[j]));
  }
  for (int b = 0; b < topo.num_sbs(); ++b) {
    double tx = 0.0;
    for (int i : topo.dl_sets[b]) for (int n = 0; n < N; ++n) tx += U.at(i, n).trace().real();
    double dec = 0.0;
    for (int j : topo.ul_sets[b]) for (int n = 0; n < N; ++n) dec += r.rate_ul[j][n];
    dec *= sc.config.effective_decode_eff();
    r.tx_power.push_back(tx);
    r.decode_power.push_back(dec);
    r.power_total.push_back(power_consumption(b, U, r.rate_ul, sc));
  }
  return r;
}

void write_rate_csv(std::ostream& os, const RateReport& r, const Topology& topo) {
  os << "direction,ue,cell,subcarrier,sinr,rate_bits,queue_deviation\n";
  for (std::size_t i = 0; i < r.sinr_dl.size(); ++i) {
    for (std::size_t n = 0; n < r.sinr_dl[i].size(); ++n) {
      os << "DL," << i << ',' << topo.dl_cell[i] << ',' << n << ',' << r.sinr_dl[i][n] << ',' << r.rate_dl[i][n]
         << ',' << r.q_dev_dl[i] << '\n';
    }
  }
  for (std::size_t j = 0; j < r.sinr_ul.size(); ++j) {
    for (std::size_t n = 0; n < r.sinr_ul[j].size(); ++n) {
      os << "UL," << j << ',' << topo.ul_cell[j] << ',' << n << ',' << r.sinr_ul[j][n] << ',' << r.rate_ul[j][n]
         << ',' << r.q_dev_ul[j] << '\n';
    }
  }
}

FeasibilityReport validate_solution(const BeamformerSet& U, const PowerSet& p, const Scenario& sc,
                                    const ChannelSet& ch, double tol,
                                    const std::vector<std::vector<double>>* ul_rate_cap) {
  const auto& topo = sc.topology;
  const auto& cfg = sc.config;
  const int N = sc.num_subcarriers();
  FeasibilityReport f;
  auto flag = [&f](const std::string& s) { f.violations.push_back(s); };
  RateReport rates = evaluate_rates(U, p, sc, ch, ul_rate_cap);
  for (int b = 0; b < topo.num_sbs(); ++b) {
    f.dl_power_slack.push_back(cfg.sbs_max_power - rates.tx_power[b]);
    if (f.dl_power_slack.back() < -tol) flag("DL power budget exceeded at SBS " + std::to_string(b));
    if (cfg.energy_causality()) {
      f.energy_slack.push_back(sc.power_budget[b] - rates.power_total[b]);
      if (f.energy_slack.back() < -tol) flag("energy causality violated at SBS " + std::to_string(b));
    }
  }
  f.min_power = p.p.empty() ? 0.0 : *std::min_element(p.p.begin(), p.p.end());
  if (f.min_power < -tol) flag("negative UL power");
  for (int j = 0; j < topo.num_ul(); ++j) {
    double s = 0.0;
    for (int n = 0; n < N; ++n) s += p.at(j, n);
    f.ul_power_slack.push_back(cfg.ue_max_power - s);
    if (f.ul_power_slack.back() < -tol) flag("UL power budget exceeded for UE " + std::to_string(j));
  }
  f.min_eigenvalue = std::numeric_limits<double>::infinity();
  for (int i = 0; i < topo.num_dl(); ++i) {
    for (int n = 0; n < N; ++n) {
      const CMatrix& u = U.at(i, n);
      if ((u - u.adjoint()).norm() > tol) flag("U not Hermitian for UE " + std::to_string(i));
      Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(u), Eigen::EigenvaluesOnly);
      const auto& ev = es.eigenvalues();
      f.min_eigenvalue = std::min(f.min_eigenvalue, ev(0));
      double top = std::max(ev(ev.size() - 1), 0.0);
      int rank = 0;
      for (int k = 0; k < ev.size(); ++k) rank += ev(k) > 1e-6 * top && ev(k) > 0.0 ? 1 : 0;
      f.rank.push_back(rank);
      if (!sc.dl_active(n)) f.inactive_power = std::max(f.inactive_power, u.trace().real());
    }
  }
  if (topo.num_dl() == 0) f.min_eigenvalue = 0.0;
  if (f.min_eigenvalue < -tol) flag("U not positive semidefinite");
  for (int j = 0; j < topo.num_ul(); ++j) {
    for (int n = 0; n < N; ++n) {
      if (!sc.ul_active(n)) f.inactive_power = std::max(f.inactive_power, p.at(j, n));
    }
  }
  if (f.inactive_power > tol) flag("power on a carrier the duplex mode does not allow");
  return f;
}

}  // namespace fdsc
