#include "fdsc/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <stdexcept>

namespace fdsc {

const char* to_string(Setup s) {
  switch (s) {
    case Setup::A: return "A";
    case Setup::B: return "B";
    case Setup::C: return "C";
  }
  return "?";
}

const char* to_string(Duplex d) { return d == Duplex::FD ? "FD" : "HD"; }

Setup parse_setup(const std::string& s) {
  if (s == "A" || s == "a") return Setup::A;
  if (s == "B" || s == "b") return Setup::B;
  if (s == "C" || s == "c") return Setup::C;
  throw std::invalid_argument("unknown setup '" + s + "' (expected A, B or C)");
}

Duplex parse_duplex(const std::string& s) {
  if (s == "FD" || s == "fd") return Duplex::FD;
  if (s == "HD" || s == "hd") return Duplex::HD;
  throw std::invalid_argument("unknown duplex mode '" + s + "' (expected FD or HD)");
}

void ScenarioConfig::validate() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument("config: " + m); };
  if (num_sbs < 1) fail("num_sbs must be >= 1");
  if (dl_ues_per_cell < 1 || ul_ues_per_cell < 1) fail("UE counts per cell must be >= 1");
  if (num_subcarriers < 1) fail("num_subcarriers must be >= 1");
  if (tx_antennas < 1 || rx_antennas < 1) fail("antenna counts must be >= 1");
  if (!(macro_radius > 0.0) || !(cell_radius > 0.0)) fail("radii must be positive");
  if (cell_radius > macro_radius) fail("cell_radius exceeds macro_radius");
  if (!(min_ue_distance >= 0.0) || min_ue_distance >= cell_radius) fail("min_ue_distance must lie in [0, cell_radius)");
  if (!(sbs_max_power > 0.0) || !(ue_max_power > 0.0) || !(circuit_power > 0.0)) fail("powers must be positive");
  if (!(bandwidth > 0.0)) fail("bandwidth must be positive");
  if (!(rician_k >= 0.0)) fail("rician_k must be non-negative");
  if (!(los_distance > 0.0)) fail("los_distance must be positive");
  if (!(decode_eff >= 0.0)) fail("decode_eff must be non-negative");
  if (!(period > 0.0)) fail("period must be positive");
  if (!(battery_max >= 0.0) || !(harvest_power >= 0.0) || !(leftover_power >= 0.0)) {
    fail("energy quantities must be non-negative");
  }
  if (queue_min < 0 || queue_max < queue_min) fail("queue range must satisfy 0 <= queue_min <= queue_max");
}

namespace {

// Applies j[key] to field when present.
template <typename T>
void take(const nlohmann::json& j, const char* key, T& field, std::set<std::string>& used) {
  used.insert(key);
  if (j.contains(key)) field = j.at(key).get<T>();
}

}  // namespace

ScenarioConfig config_from_json(const nlohmann::json& j, ScenarioConfig c) {
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
  std::set<std::string> used;
  take(j, "num_sbs", c.num_sbs, used);
  take(j, "dl_ues_per_cell", c.dl_ues_per_cell, used);
  take(j, "ul_ues_per_cell", c.ul_ues_per_cell, used);
  take(j, "num_subcarriers", c.num_subcarriers, used);
  take(j, "tx_antennas", c.tx_antennas, used);
  take(j, "rx_antennas", c.rx_antennas, used);
  take(j, "macro_radius", c.macro_radius, used);
  take(j, "cell_radius", c.cell_radius, used);
  take(j, "min_ue_distance", c.min_ue_distance, used);
  take(j, "sbs_max_power", c.sbs_max_power, used);
  take(j, "ue_max_power", c.ue_max_power, used);
  take(j, "circuit_power", c.circuit_power, used);
  take(j, "bandwidth", c.bandwidth, used);
  take(j, "noise_density_dbm_hz", c.noise_density_dbm_hz, used);
  take(j, "noise_figure_sbs_db", c.noise_figure_sbs_db, used);
  take(j, "noise_figure_ue_db", c.noise_figure_ue_db, used);
  take(j, "si_variance_db", c.si_variance_db, used);
  take(j, "rician_k", c.rician_k, used);
  take(j, "los_distance", c.los_distance, used);
  take(j, "decode_eff", c.decode_eff, used);
  take(j, "period", c.period, used);
  take(j, "battery_max", c.battery_max, used);
  take(j, "harvest_power", c.harvest_power, used);
  take(j, "leftover_power", c.leftover_power, used);
  take(j, "sbs_intensity", c.sbs_intensity, used);
  take(j, "ue_intensity", c.ue_intensity, used);
  take(j, "queue_min", c.queue_min, used);
  take(j, "queue_max", c.queue_max, used);
  take(j, "seed", c.seed, used);
  used.insert("setup");
  if (j.contains("setup")) c.setup = parse_setup(j.at("setup").get<std::string>());
  used.insert("duplex");
  if (j.contains("duplex")) c.duplex = parse_duplex(j.at("duplex").get<std::string>());
  used.insert("queues_dl");
  if (j.contains("queues_dl") && !j.at("queues_dl").is_null()) c.queues_dl = j.at("queues_dl").get<std::vector<double>>();
  used.insert("queues_ul");
  if (j.contains("queues_ul") && !j.at("queues_ul").is_null()) c.queues_ul = j.at("queues_ul").get<std::vector<double>>();
  for (const auto& [k, v] : j.items()) {
    if (!used.count(k)) throw std::invalid_argument("config: unknown key '" + k + "'");
  }
  c.validate();
  return c;
}

nlohmann::json config_to_json(const ScenarioConfig& c) {
  nlohmann::json j = {
      {"num_sbs", c.num_sbs},
      {"dl_ues_per_cell", c.dl_ues_per_cell},
      {"ul_ues_per_cell", c.ul_ues_per_cell},
      {"num_subcarriers", c.num_subcarriers},
      {"tx_antennas", c.tx_antennas},
      {"rx_antennas", c.rx_antennas},
      {"macro_radius", c.macro_radius},
      {"cell_radius", c.cell_radius},
      {"min_ue_distance", c.min_ue_distance},
      {"sbs_max_power", c.sbs_max_power},
      {"ue_max_power", c.ue_max_power},
      {"circuit_power", c.circuit_power},
      {"bandwidth", c.bandwidth},
      {"noise_density_dbm_hz", c.noise_density_dbm_hz},
      {"noise_figure_sbs_db", c.noise_figure_sbs_db},
      {"noise_figure_ue_db", c.noise_figure_ue_db},
      {"si_variance_db", c.si_variance_db},
      {"rician_k", c.rician_k},
      {"los_distance", c.los_distance},
      {"decode_eff", c.decode_eff},
      {"setup", to_string(c.setup)},
      {"duplex", to_string(c.duplex)},
      {"period", c.period},
      {"battery_max", c.battery_max},
      {"harvest_power", c.harvest_power},
      {"leftover_power", c.leftover_power},
      {"sbs_intensity", c.sbs_intensity},
      {"ue_intensity", c.ue_intensity},
      {"queue_min", c.queue_min},
      {"queue_max", c.queue_max},
      {"seed", c.seed},
  };
  if (c.queues_dl) j["queues_dl"] = *c.queues_dl;
  if (c.queues_ul) j["queues_ul"] = *c.queues_ul;
  return j;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  nlohmann::json j = nlohmann::json::parse(in, nullptr, true, true);
  return config_from_json(j);
}

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

namespace {

// Uniform point in the annulus r_in <= |p - c| <= r_out.
Point uniform_in_annulus(std::mt19937_64& rng, const Point& c, double r_in, double r_out) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double r = std::sqrt(r_in * r_in + u(rng) * (r_out * r_out - r_in * r_in));
  double a = 2.0 * std::numbers::pi * u(rng);
  return {c.x + r * std::cos(a), c.y + r * std::sin(a)};
}

}  // namespace

Topology generate_topology(const ScenarioConfig& config) {
  config.validate();
  auto rng = make_rng(config.seed, 1);
  Topology t;
  for (int b = 0; b < config.num_sbs; ++b) t.sbs.push_back(uniform_in_annulus(rng, {0.0, 0.0}, 0.0, config.macro_radius));
  t.dl_sets.resize(config.num_sbs);
  t.ul_sets.resize(config.num_sbs);
  for (int b = 0; b < config.num_sbs; ++b) {
    for (int k = 0; k < config.dl_ues_per_cell; ++k) {
      t.dl_sets[b].push_back(t.num_dl());
      t.dl_ues.push_back(uniform_in_annulus(rng, t.sbs[b], config.min_ue_distance, config.cell_radius));
      t.dl_cell.push_back(b);
    }
    for (int k = 0; k < config.ul_ues_per_cell; ++k) {
      t.ul_sets[b].push_back(t.num_ul());
      t.ul_ues.push_back(uniform_in_annulus(rng, t.sbs[b], config.min_ue_distance, config.cell_radius));
      t.ul_cell.push_back(b);
    }
  }
  return t;
}

std::vector<double> truncate_queue_vector(const std::vector<double>& values, std::size_t k,
                                          std::vector<std::string>* warnings) {
  if (values.size() < k) {
    throw std::invalid_argument("queue vector has " + std::to_string(values.size()) + " entries, need " +
                                std::to_string(k));
  }
  if (values.size() > k && warnings) {
    warnings->push_back("queue vector has " + std::to_string(values.size()) + " entries; using the first " +
                        std::to_string(k));
  }
  return {values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k)};
}

TrafficState init_queues(const ScenarioConfig& config, const std::optional<std::vector<double>>& dl,
                         const std::optional<std::vector<double>>& ul) {
  const auto kd = static_cast<std::size_t>(config.total_dl_ues());
  const auto ku = static_cast<std::size_t>(config.total_ul_ues());
  auto check = [](const std::vector<double>& v, std::size_t k, const char* which) {
    if (v.size() != k) {
      throw std::invalid_argument(std::string(which) + " queue vector has " + std::to_string(v.size()) +
                                  " entries but the scenario has " + std::to_string(k) + " UEs");
    }
    for (double q : v) {
      if (!(q >= 0.0) || !std::isfinite(q)) throw std::invalid_argument(std::string(which) + " queue entries must be finite and >= 0");
    }
  };
  TrafficState s;
  auto rng = make_rng(config.seed, 3);
  std::uniform_int_distribution<int> draw(config.queue_min, config.queue_max);
  if (dl) {
    check(*dl, kd, "DL");
    s.q_dl = *dl;
  } else {
    for (std::size_t i = 0; i < kd; ++i) s.q_dl.push_back(draw(rng));
  }
  if (ul) {
    check(*ul, ku, "UL");
    s.q_ul = *ul;
  } else {
    for (std::size_t j = 0; j < ku; ++j) s.q_ul.push_back(draw(rng));
  }
  return s;
}

const std::vector<double>& reference_queues_dl() {
  static const std::vector<double> v = {6, 7, 4, 5, 3, 2, 2, 2, 2, 3, 1, 1, 2, 2, 2, 3, 2, 2, 3, 7};
  return v;
}

const std::vector<double>& reference_queues_ul() {
  static const std::vector<double> v = {3, 7, 3, 5, 7, 3, 2, 3, 1, 3, 3, 3, 3, 1, 2, 2, 2, 2, 3, 2, 1, 1};
  return v;
}

EnergyProfile make_energy_profile(const ScenarioConfig& config) {
  EnergyProfile e;
  e.harvest.assign(config.num_sbs, config.harvest_power);
  e.leftover.assign(config.num_sbs, config.leftover_power);
  e.battery_max = config.battery_max;
  e.period = config.period;
  return e;
}

double available_power(double harvest, double leftover, double battery_max, double period) {
  return std::min(battery_max, period * harvest + period * leftover) / period;
}

std::vector<double> available_power(const EnergyProfile& p) {
  std::vector<double> out;
  for (std::size_t b = 0; b < p.harvest.size(); ++b) {
    out.push_back(available_power(p.harvest[b], p.leftover[b], p.battery_max, p.period));
  }
  return out;
}

double harvest_from_normalized_rate(double ratio, const ScenarioConfig& config) {
  return ratio * (config.circuit_power + 5.0 * config.sbs_max_power);
}

bool Scenario::dl_active(int n) const {
  if (config.duplex == Duplex::FD) return true;
  return n < (config.num_subcarriers + 1) / 2;
}

bool Scenario::ul_active(int n) const {
  if (config.duplex == Duplex::FD) return true;
  return n >= (config.num_subcarriers + 1) / 2;
}

Scenario make_scenario(const ScenarioConfig& config) {
  config.validate();
  Scenario s;
  s.config = config;
  s.topology = generate_topology(config);
  std::optional<std::vector<double>> dl = config.queues_dl;
  std::optional<std::vector<double>> ul = config.queues_ul;
  s.traffic = init_queues(config, dl, ul);
  s.energy = make_energy_profile(config);
  s.power_budget = available_power(s.energy);
  if (config.duplex == Duplex::HD && config.num_subcarriers < 2) {
    s.warnings.push_back("half duplex with one sub-carrier leaves the uplink without a carrier");
  }
  return s;
}

}  // namespace fdsc
