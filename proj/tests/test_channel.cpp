#include <cmath>
#include <sstream>

#include "doctest.h"
#include "fdsc/channel.hpp"

using namespace fdsc;

TEST_CASE("path loss table values") {
  CHECK(pathloss_db(LinkClass::kSbsSbs, 0.1, true) == doctest::Approx(77.5));
  CHECK(pathloss_db(LinkClass::kUeSbs, 0.01, false) == doctest::Approx(70.4));
  CHECK(pathloss_db(LinkClass::kUeUe, 1.0, true) == doctest::Approx(98.5));
  CHECK_THROWS(pathloss_db(LinkClass::kUeUe, 0.0, true));
  CHECK_THROWS(pathloss_db(LinkClass::kUeUe, -1.0, false));
}

TEST_CASE("path loss is monotone in distance") {
  for (auto link : {LinkClass::kSbsSbs, LinkClass::kUeSbs, LinkClass::kUeUe}) {
    for (bool los : {true, false}) {
      double prev = pathloss_db(link, 1e-4, los);
      for (double d = 2e-4; d < 2.0; d *= 1.3) {
        double v = pathloss_db(link, d, los);
        CHECK(v > prev);
        prev = v;
      }
    }
  }
}

TEST_CASE("noise power") {
  // -174 + 10 log10(5e6) + 13 dBm, recomputed in dB.
  double expected_dbm = -174.0 + 10.0 * std::log10(5e6) + 13.0;
  CHECK(watts_to_dbm(noise_power(5e6, 13.0)) == doctest::Approx(expected_dbm));
  CHECK(watts_to_dbm(noise_power(5e6, 13.0)) == doctest::Approx(-94.01).epsilon(1e-4));
  CHECK(watts_to_dbm(noise_power(1.0, 0.0)) == doctest::Approx(-174.0));
  CHECK(watts_to_dbm(noise_power(2e6, 0.0)) - watts_to_dbm(noise_power(1e6, 0.0)) == doctest::Approx(3.0103).epsilon(1e-4));
}

namespace {

ScenarioConfig small() {
  ScenarioConfig c;
  c.num_sbs = 2;
  c.dl_ues_per_cell = 1;
  c.ul_ues_per_cell = 1;
  c.seed = 5;
  return c;
}

}  // namespace

TEST_CASE("draw is deterministic and finite") {
  ScenarioConfig c = small();
  Topology t = generate_topology(c);
  ChannelSet a = draw_channels(t, c);
  ChannelSet b = draw_channels(t, c);
  CHECK(a.all_finite());
  CHECK(a.h_dl(0, 1, 1) == b.h_dl(0, 1, 1));
  CHECK(a.H(1, 0, 0) == b.H(1, 0, 0));
  CHECK(a.noise_sbs == doctest::Approx(noise_power(5e6, 13.0)));
  CHECK(a.noise_ue == doctest::Approx(noise_power(5e6, 9.0)));
}

TEST_CASE("Rayleigh coefficient variance matches the path gain") {
  // One link, many sub-carriers: empirical E|h|^2 over fading draws.
  ScenarioConfig c;
  c.num_sbs = 1;
  c.dl_ues_per_cell = 1;
  c.ul_ues_per_cell = 1;
  c.num_subcarriers = 50000;
  c.tx_antennas = 1;
  c.rx_antennas = 1;
  c.los_distance = 1e-9;  // always NLOS so the gain is deterministic
  Topology t = generate_topology(c);
  ChannelSet ch = draw_channels(t, c);
  double gain = db_to_linear(-pathloss_db(LinkClass::kUeSbs, distance(t.sbs[0], t.dl_ues[0]) / 1000.0, false));
  double s = 0.0;
  for (int n = 0; n < c.num_subcarriers; ++n) s += std::norm(ch.h_dl(0, 0, n)(0));
  CHECK(s / c.num_subcarriers / gain == doctest::Approx(1.0).epsilon(0.02));
  double sg = 0.0;
  double gg = db_to_linear(-pathloss_db(LinkClass::kUeUe, distance(t.ul_ues[0], t.dl_ues[0]) / 1000.0, false));
  for (int n = 0; n < c.num_subcarriers; ++n) sg += std::norm(ch.g(0, 0, n));
  CHECK(sg / c.num_subcarriers / gg == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("self-interference statistics") {
  ScenarioConfig c;
  c.num_sbs = 1;
  c.dl_ues_per_cell = 1;
  c.ul_ues_per_cell = 1;
  c.num_subcarriers = 40000;
  Topology t = generate_topology(c);
  ChannelSet ch = draw_channels(t, c);
  double var = db_to_linear(-110.0);
  double k = 1.0;
  cdouble mean = 0.0;
  double second = 0.0;
  for (int n = 0; n < c.num_subcarriers; ++n) {
    mean += ch.H(0, 0, n)(0, 1);
    second += std::norm(ch.H(0, 0, n)(0, 1));
  }
  mean /= static_cast<double>(c.num_subcarriers);
  second /= c.num_subcarriers;
  CHECK(mean.real() / std::sqrt(var * k / (1 + k)) == doctest::Approx(1.0).epsilon(0.03));
  CHECK(second / var == doctest::Approx(1.0).epsilon(0.03));

  // Large Rician factor: the SI block collapses onto its deterministic mean.
  c.rician_k = 1e16;
  c.num_subcarriers = 2;
  ChannelSet det = draw_channels(t, c);
  CMatrix expected = std::sqrt(var) * CMatrix::Ones(2, 2);
  CHECK((det.H(0, 0, 0) - expected).norm() < 1e-6 * std::sqrt(var));
}

TEST_CASE("channel dump round trip") {
  ScenarioConfig c = small();
  Topology t = generate_topology(c);
  ChannelSet a = draw_channels(t, c);
  std::stringstream ss;
  write_channels(ss, a);
  ChannelSet b = read_channels(ss);
  CHECK(b.num_sbs == 2);
  CHECK(b.h_ul(1, 0, 1) == a.h_ul(1, 0, 1));
  CHECK(b.H(0, 1, 0) == a.H(0, 1, 0));
  CHECK(b.g(1, 0, 0) == a.g(1, 0, 0));
  CHECK(b.noise_ue == a.noise_ue);
  std::stringstream bad("fdsc-channels 1\ndims 1 1 1 1 1 1\nnoise 1 1\nh_dl 2 1 1\n");
  CHECK_THROWS(read_channels(bad));
}
