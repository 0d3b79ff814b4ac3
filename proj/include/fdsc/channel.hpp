#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "fdsc/linalg.hpp"
#include "fdsc/scenario.hpp"

namespace fdsc {

enum class LinkClass { kSbsSbs, kUeSbs, kUeUe };

/// Path loss in dB; d in kilometres, d > 0.
double pathloss_db(LinkClass link, double d_km, bool los);

/// Thermal noise over the given bandwidth plus receiver noise figure, in watts.
double noise_power(double bandwidth_hz, double noise_figure_db, double density_dbm_hz = -174.0);

/// All complex gains of one scheduling period, indexed per sub-carrier.
struct ChannelSet {
  int num_sbs = 0;
  int num_dl = 0;
  int num_ul = 0;
  int num_subcarriers = 0;
  int tx_antennas = 0;
  int rx_antennas = 0;
  double noise_sbs = 0.0;  // W per sub-carrier at an SBS receiver
  double noise_ue = 0.0;   // W per sub-carrier at a UE receiver

  std::vector<CVector> h_dl_;  // [b][i][n], M_T
  std::vector<CVector> h_ul_;  // [b][j][n], M_R
  std::vector<cdouble> g_;     // [j][i][n]
  std::vector<CMatrix> H_;     // [rx b'][tx b][n], M_R x M_T

  void resize(int b, int kd, int ku, int n, int mt, int mr);

  /// SBS b -> DL UE i.
  const CVector& h_dl(int b, int i, int n) const { return h_dl_[(b * num_dl + i) * num_subcarriers + n]; }
  CVector& h_dl(int b, int i, int n) { return h_dl_[(b * num_dl + i) * num_subcarriers + n]; }
  /// UL UE j -> SBS b.
  const CVector& h_ul(int b, int j, int n) const { return h_ul_[(b * num_ul + j) * num_subcarriers + n]; }
  CVector& h_ul(int b, int j, int n) { return h_ul_[(b * num_ul + j) * num_subcarriers + n]; }
  /// UL UE j -> DL UE i.
  cdouble g(int j, int i, int n) const { return g_[(j * num_dl + i) * num_subcarriers + n]; }
  cdouble& g(int j, int i, int n) { return g_[(j * num_dl + i) * num_subcarriers + n]; }
  /// SBS tx -> SBS rx; rx == tx is the self-interference channel.
  const CMatrix& H(int rx, int tx, int n) const { return H_[(rx * num_sbs + tx) * num_subcarriers + n]; }
  CMatrix& H(int rx, int tx, int n) { return H_[(rx * num_sbs + tx) * num_subcarriers + n]; }

  bool all_finite() const;
};

/// Rayleigh links scaled by path gain, Rician self-interference. The SI mean
/// matrix defaults to all ones.
ChannelSet draw_channels(const Topology& topology, const ScenarioConfig& config,
                         const std::optional<CMatrix>& si_mean = std::nullopt);

/// Plain-text dump: header with dimensions, then one line per coefficient
/// block with real/imag pairs in row-major order.
void write_channels(std::ostream& os, const ChannelSet& ch);
ChannelSet read_channels(std::istream& is);

}  // namespace fdsc
