#include <cmath>
#include <set>

#include "doctest.h"
#include "fdsc/scenario.hpp"

using namespace fdsc;

TEST_CASE("topology sizes and containment") {
  ScenarioConfig c;
  Topology t = generate_topology(c);
  CHECK(t.num_sbs() == 10);
  CHECK(t.num_dl() == 20);
  CHECK(t.num_ul() == 20);
  for (const auto& s : t.sbs) CHECK(std::hypot(s.x, s.y) <= c.macro_radius + 1e-9);
  for (int i = 0; i < t.num_dl(); ++i) {
    double d = distance(t.dl_ues[i], t.sbs[t.dl_cell[i]]);
    CHECK(d <= c.cell_radius + 1e-9);
    CHECK(d >= c.min_ue_distance - 1e-9);
  }
  for (int j = 0; j < t.num_ul(); ++j) CHECK(distance(t.ul_ues[j], t.sbs[t.ul_cell[j]]) <= c.cell_radius + 1e-9);
}

TEST_CASE("single cell keeps its UE inside the cell") {
  ScenarioConfig c;
  c.num_sbs = 1;
  c.dl_ues_per_cell = 1;
  c.ul_ues_per_cell = 1;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    c.seed = seed;
    Topology t = generate_topology(c);
    CHECK(distance(t.dl_ues[0], t.sbs[0]) <= 50.0);
  }
}

TEST_CASE("topology is deterministic in the seed") {
  ScenarioConfig c;
  c.seed = 42;
  Topology a = generate_topology(c);
  Topology b = generate_topology(c);
  for (int i = 0; i < a.num_dl(); ++i) {
    CHECK(a.dl_ues[i].x == b.dl_ues[i].x);
    CHECK(a.dl_ues[i].y == b.dl_ues[i].y);
  }
  c.seed = 43;
  Topology d = generate_topology(c);
  CHECK(d.sbs[0].x != a.sbs[0].x);
}

TEST_CASE("association sets partition the UEs") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    ScenarioConfig c;
    c.seed = seed;
    c.num_sbs = 3;
    c.dl_ues_per_cell = 2;
    c.ul_ues_per_cell = 1;
    Topology t = generate_topology(c);
    std::multiset<int> seen_dl, seen_ul;
    for (int b = 0; b < t.num_sbs(); ++b) {
      for (int i : t.dl_sets[b]) {
        seen_dl.insert(i);
        CHECK(t.dl_cell[i] == b);
      }
      for (int j : t.ul_sets[b]) {
        seen_ul.insert(j);
        CHECK(t.ul_cell[j] == b);
      }
    }
    CHECK(seen_dl.size() == static_cast<std::size_t>(t.num_dl()));
    CHECK(std::set<int>(seen_dl.begin(), seen_dl.end()).size() == seen_dl.size());
    CHECK(std::set<int>(seen_ul.begin(), seen_ul.end()).size() == seen_ul.size());
  }
}

TEST_CASE("invalid configurations are rejected") {
  ScenarioConfig c;
  c.cell_radius = 600.0;
  CHECK_THROWS(generate_topology(c));
  c = ScenarioConfig{};
  c.dl_ues_per_cell = 0;
  CHECK_THROWS(generate_topology(c));
  c = ScenarioConfig{};
  c.num_sbs = 0;
  CHECK_THROWS(c.validate());
  c = ScenarioConfig{};
  c.decode_eff = -1.0;
  CHECK_THROWS(c.validate());
}

TEST_CASE("reference queue vectors") {
  ScenarioConfig c;
  TrafficState s = init_queues(c, reference_queues_dl(), std::nullopt);
  CHECK(s.q_dl.size() == 20);
  CHECK(s.q_dl[0] == 6);
  CHECK(s.q_dl[19] == 7);
  CHECK(reference_queues_ul().size() == 22);
  CHECK_THROWS_AS(init_queues(c, std::nullopt, reference_queues_ul()), std::invalid_argument);
  std::vector<std::string> warnings;
  auto first = truncate_queue_vector(reference_queues_ul(), 20, &warnings);
  CHECK(first.size() == 20);
  CHECK(warnings.size() == 1);
  TrafficState u = init_queues(c, std::nullopt, first);
  CHECK(u.q_ul[0] == 3);
}

TEST_CASE("queue validation and random draws") {
  ScenarioConfig c;
  c.num_sbs = 1;
  c.dl_ues_per_cell = 2;
  c.ul_ues_per_cell = 2;
  CHECK_THROWS(init_queues(c, std::vector<double>{1.0, -1.0}, std::nullopt));
  TrafficState z = init_queues(c, std::vector<double>{0.0, 0.0}, std::vector<double>{0.0, 0.0});
  CHECK(z.q_dl[0] == 0.0);
  TrafficState r = init_queues(c);
  for (double q : r.q_dl) {
    CHECK(q >= c.queue_min);
    CHECK(q <= c.queue_max);
    CHECK(q == std::floor(q));
  }
}

TEST_CASE("available power") {
  CHECK(available_power(6.0, 7.0, 10.0, 1.0) == doctest::Approx(10.0));
  CHECK(available_power(6.0, 7.0, 20.0, 1.0) == doctest::Approx(13.0));
  CHECK(available_power(6.0, 7.0, 20.0, 2.0) == doctest::Approx(10.0));
}

TEST_CASE("available power is monotone and capped") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int k = 0; k < 1000; ++k) {
    double h = u(rng), l = u(rng), bmax = u(rng), t = 0.1 + u(rng);
    double base = available_power(h, l, bmax, t);
    CHECK(base <= bmax / t + 1e-12);
    CHECK(available_power(h + 0.5, l, bmax, t) >= base);
    CHECK(available_power(h, l + 0.5, bmax, t) >= base);
    CHECK(available_power(h, l, bmax + 0.5, t) >= base);
  }
}

TEST_CASE("config json round trip and unknown keys") {
  ScenarioConfig c;
  c.num_sbs = 3;
  c.setup = Setup::B;
  c.duplex = Duplex::HD;
  c.queues_dl = std::vector<double>(6, 2.0);
  ScenarioConfig d = config_from_json(config_to_json(c));
  CHECK(d.num_sbs == 3);
  CHECK(d.setup == Setup::B);
  CHECK(d.duplex == Duplex::HD);
  CHECK(d.queues_dl->size() == 6);
  nlohmann::json j = {{"num_sbz", 3}};
  CHECK_THROWS(config_from_json(j));
}

TEST_CASE("setup rules and half-duplex carrier split") {
  ScenarioConfig c;
  c.setup = Setup::B;
  CHECK(c.effective_decode_eff() == 0.0);
  CHECK(c.energy_causality());
  c.setup = Setup::A;
  CHECK(!c.energy_causality());
  c.setup = Setup::C;
  CHECK(c.effective_decode_eff() == doctest::Approx(0.1));
  c.num_sbs = 1;
  c.num_subcarriers = 3;
  c.duplex = Duplex::HD;
  Scenario s = make_scenario(c);
  CHECK(s.dl_active(0));
  CHECK(s.dl_active(1));
  CHECK(!s.dl_active(2));
  CHECK(s.ul_active(2));
  CHECK(!s.ul_active(0));
}

TEST_CASE("normalized harvest rate mapping") {
  ScenarioConfig c;
  CHECK(harvest_from_normalized_rate(1.0, c) == doctest::Approx(1.0 + 5.0 * c.sbs_max_power));
}
