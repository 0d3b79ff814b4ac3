#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "fdsc/channel.hpp"
#include "fdsc/linalg.hpp"
#include "fdsc/scenario.hpp"

namespace fdsc {

/// Transmit covariance U[i][n] per DL UE and sub-carrier, in watts.
struct BeamformerSet {
  int num_dl = 0;
  int num_subcarriers = 0;
  int dim = 0;
  std::vector<CMatrix> U;

  BeamformerSet() = default;
  BeamformerSet(int kd, int n, int mt) : num_dl(kd), num_subcarriers(n), dim(mt), U(kd * n, CMatrix::Zero(mt, mt)) {}
  CMatrix& at(int i, int n) { return U[i * num_subcarriers + n]; }
  const CMatrix& at(int i, int n) const { return U[i * num_subcarriers + n]; }
};

/// UL transmit power p[j][n] in watts.
struct PowerSet {
  int num_ul = 0;
  int num_subcarriers = 0;
  std::vector<double> p;

  PowerSet() = default;
  PowerSet(int ku, int n) : num_ul(ku), num_subcarriers(n), p(ku * n, 0.0) {}
  double& at(int j, int n) { return p[j * num_subcarriers + n]; }
  double at(int j, int n) const { return p[j * num_subcarriers + n]; }
};

/// Received SINR of DL UE i on sub-carrier n.
double sinr_dl(int i, int n, const BeamformerSet& U, const PowerSet& p, const ChannelSet& ch, const Topology& topo);

/// SIC order within each cell: ascending UE index.
std::vector<int> default_sic_order(const Topology& topo, int cell);

/// MMSE-SIC SINR of UL UE j on sub-carrier n. order lists the serving cell's
/// UL UEs in decoding order; UEs decoded after j remain as interference, UEs
/// of other cells always do.
double sinr_ul_mmse_sic(int j, int n, const BeamformerSet& U, const PowerSet& p, const ChannelSet& ch,
                        const Topology& topo, const std::vector<int>& order);
double sinr_ul_mmse_sic(int j, int n, const BeamformerSet& U, const PowerSet& p, const ChannelSet& ch,
                        const Topology& topo);

/// Interference-plus-noise covariance seen by UL UE j (the matrix inverted above).
CMatrix ul_interference_covariance(int j, int n, const BeamformerSet& U, const PowerSet& p, const ChannelSet& ch,
                                   const Topology& topo, const std::vector<int>& order);

/// Q minus delivered bits; negative when over-served.
double queue_deviation(double queue_bits, const std::vector<double>& rates_bits);

/// Total power drawn by SBS b; rates_ul[j][n] in bits/s/Hz, decoding term only in Setup C.
double power_consumption(int b, const BeamformerSet& U, const std::vector<std::vector<double>>& rates_ul,
                         const Scenario& sc);

struct RateReport {
  std::vector<std::vector<double>> sinr_dl;  // [i][n]
  std::vector<std::vector<double>> sinr_ul;  // [j][n]
  std::vector<std::vector<double>> rate_dl;  // bits/s/Hz
  std::vector<std::vector<double>> rate_ul;
  std::vector<double> q_dev_dl;  // bits
  std::vector<double> q_dev_ul;
  std::vector<double> tx_power;      // W per SBS (sum of traces)
  std::vector<double> decode_power;  // W per SBS
  std::vector<double> power_total;   // W per SBS

  double sum_rate_dl() const;
  double sum_rate_ul() const;
  /// Bits left in the buffers, sum of max(q, 0).
  double residual_backlog() const;
  /// ||q_D||_2 + ||q_U||_2.
  double queue_norm() const;
};

/// UL UEs transmit at min(capacity, ul_rate_cap[j][n]) when caps are given;
/// decoding power and queue deviations follow the transmitted rate.
RateReport evaluate_rates(const BeamformerSet& U, const PowerSet& p, const Scenario& sc, const ChannelSet& ch,
                          const std::vector<std::vector<double>>* ul_rate_cap = nullptr);

/// One CSV row per UE per sub-carrier.
void write_rate_csv(std::ostream& os, const RateReport& r, const Topology& topo);

struct FeasibilityReport {
  std::vector<double> dl_power_slack;  // P_max - sum tr(U) per SBS
  std::vector<double> energy_slack;    // P_b - P_tot per SBS (empty in Setup A)
  std::vector<double> ul_power_slack;  // P_u,max - sum_n p per UE
  double min_eigenvalue = 0.0;         // over all U
  double min_power = 0.0;              // over all p
  double inactive_power = 0.0;         // largest power on carriers the duplex mode disallows
  std::vector<int> rank;               // numerical rank per U[i][n]
  std::vector<std::string> violations;

  bool feasible() const { return violations.empty(); }
};

FeasibilityReport validate_solution(const BeamformerSet& U, const PowerSet& p, const Scenario& sc,
                                    const ChannelSet& ch, double tol = 1e-6,
                                    const std::vector<std::vector<double>>* ul_rate_cap = nullptr);

}  // namespace fdsc
