#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

namespace fdsc {

enum class Setup { A, B, C };
enum class Duplex { FD, HD };

const char* to_string(Setup s);
const char* to_string(Duplex d);
Setup parse_setup(const std::string& s);
Duplex parse_duplex(const std::string& s);

/// Defaults are the reference system parameters where one exists.
struct ScenarioConfig {
  int num_sbs = 10;
  int dl_ues_per_cell = 2;
  int ul_ues_per_cell = 2;
  int num_subcarriers = 2;
  int tx_antennas = 2;
  int rx_antennas = 2;

  double macro_radius = 500.0;    // m
  double cell_radius = 50.0;      // m
  double min_ue_distance = 10.0;  // m, keeps UEs out of the near field of the SBS

  double sbs_max_power = 0.25118864315095796;  // W (24 dBm)
  double ue_max_power = 0.19952623149688797;   // W (23 dBm)
  double circuit_power = 1.0;                  // W (30 dBm)
  double bandwidth = 10e6;                     // Hz
  double noise_density_dbm_hz = -174.0;
  double noise_figure_sbs_db = 13.0;
  double noise_figure_ue_db = 9.0;
  double si_variance_db = -110.0;
  double rician_k = 1.0;
  double los_distance = 50.0;  // m, p_LOS(d) = exp(-d / los_distance)
  double decode_eff = 0.1;     // W per bit/s/Hz

  Setup setup = Setup::C;
  Duplex duplex = Duplex::FD;

  double period = 1.0;       // s
  double battery_max = 10.0;  // J
  double harvest_power = 1.35;  // W
  double leftover_power = 0.0;  // W

  // Intensities are metadata only once the counts are fixed.
  double sbs_intensity = 10.0;
  double ue_intensity = 20.0;

  int queue_min = 1;  // range for randomly drawn buffers, bits
  int queue_max = 7;
  std::optional<std::vector<double>> queues_dl;
  std::optional<std::vector<double>> queues_ul;

  std::uint64_t seed = 1;

  int total_dl_ues() const { return num_sbs * dl_ues_per_cell; }
  int total_ul_ues() const { return num_sbs * ul_ues_per_cell; }
  double subcarrier_bandwidth() const { return bandwidth / num_subcarriers; }
  /// Decoding coefficient after the setup rule (forced to zero outside Setup C).
  double effective_decode_eff() const { return setup == Setup::C ? decode_eff : 0.0; }
  bool energy_causality() const { return setup != Setup::A; }

  /// Throws std::invalid_argument with the offending field.
  void validate() const;
};

ScenarioConfig config_from_json(const nlohmann::json& j, ScenarioConfig base = {});
nlohmann::json config_to_json(const ScenarioConfig& c);
ScenarioConfig load_config(const std::string& path);

struct Point {
  double x = 0.0;
  double y = 0.0;
};

double distance(const Point& a, const Point& b);

struct Topology {
  std::vector<Point> sbs;
  std::vector<Point> dl_ues;
  std::vector<Point> ul_ues;
  std::vector<int> dl_cell;  // serving SBS per DL UE
  std::vector<int> ul_cell;
  std::vector<std::vector<int>> dl_sets;  // D_b
  std::vector<std::vector<int>> ul_sets;  // U_b

  int num_sbs() const { return static_cast<int>(sbs.size()); }
  int num_dl() const { return static_cast<int>(dl_ues.size()); }
  int num_ul() const { return static_cast<int>(ul_ues.size()); }
};

/// Fixed-count point process: B SBSs uniform in the macro disc, UEs uniform
/// in an annulus around their serving SBS. UEs are numbered cell by cell.
Topology generate_topology(const ScenarioConfig& config);

struct TrafficState {
  std::vector<double> q_dl;  // bits
  std::vector<double> q_ul;
};

/// Buffers from the given vectors (lengths must match exactly) or drawn
/// uniformly from [queue_min, queue_max] integers.
TrafficState init_queues(const ScenarioConfig& config, const std::optional<std::vector<double>>& dl = std::nullopt,
                         const std::optional<std::vector<double>>& ul = std::nullopt);

/// First k entries of values; appends a warning when entries are dropped.
std::vector<double> truncate_queue_vector(const std::vector<double>& values, std::size_t k,
                                          std::vector<std::string>* warnings);

/// Reference buffer vectors for a 10-cell network (the UL list has 22 entries).
const std::vector<double>& reference_queues_dl();
const std::vector<double>& reference_queues_ul();

struct EnergyProfile {
  std::vector<double> harvest;   // W per SBS
  std::vector<double> leftover;  // W per SBS
  double battery_max = 0.0;      // J
  double period = 1.0;           // s
};

EnergyProfile make_energy_profile(const ScenarioConfig& config);

/// min{B_max, T P_H + T P_B} / T.
double available_power(double harvest, double leftover, double battery_max, double period);
std::vector<double> available_power(const EnergyProfile& profile);

/// Harvest power for a normalized arrival rate P_H / (P_cir + 5 P_max).
double harvest_from_normalized_rate(double ratio, const ScenarioConfig& config);

struct Scenario {
  ScenarioConfig config;
  Topology topology;
  TrafficState traffic;
  EnergyProfile energy;
  std::vector<double> power_budget;  // available power per SBS, W
  std::vector<std::string> warnings;

  int num_sbs() const { return topology.num_sbs(); }
  int num_dl() const { return topology.num_dl(); }
  int num_ul() const { return topology.num_ul(); }
  int num_subcarriers() const { return config.num_subcarriers; }
  /// Half duplex splits carriers: the first ceil(N/2) carry DL only, the rest UL only.
  bool dl_active(int n) const;
  bool ul_active(int n) const;
};

Scenario make_scenario(const ScenarioConfig& config);

/// Independent, reproducible RNG stream derived from the seed and a stream label.
std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream);

}  // namespace fdsc
