#include "fdsc/channel.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>

namespace fdsc {

double pathloss_db(LinkClass link, double d_km, bool los) {
  if (!(d_km > 0.0)) throw std::invalid_argument("pathloss_db: distance must be positive");
  const double l = std::log10(d_km);
  switch (link) {
    case LinkClass::kSbsSbs: return los ? 98.4 + 20.9 * l : 169.36 + 40.0 * l;
    case LinkClass::kUeSbs: return los ? 103.8 + 20.9 * l : 145.4 + 37.5 * l;
    case LinkClass::kUeUe: return los ? 98.5 + 20.0 * l : 175.78 + 40.0 * l;
  }
  throw std::invalid_argument("pathloss_db: unknown link class");
}

double noise_power(double bandwidth_hz, double noise_figure_db, double density_dbm_hz) {
  return dbm_to_watts(density_dbm_hz + 10.0 * std::log10(bandwidth_hz) + noise_figure_db);
}

void ChannelSet::resize(int b, int kd, int ku, int n, int mt, int mr) {
  num_sbs = b;
  num_dl = kd;
  num_ul = ku;
  num_subcarriers = n;
  tx_antennas = mt;
  rx_antennas = mr;
  h_dl_.assign(static_cast<std::size_t>(b) * kd * n, CVector::Zero(mt));
  h_ul_.assign(static_cast<std::size_t>(b) * ku * n, CVector::Zero(mr));
  g_.assign(static_cast<std::size_t>(ku) * kd * n, cdouble(0.0));
  H_.assign(static_cast<std::size_t>(b) * b * n, CMatrix::Zero(mr, mt));
}

bool ChannelSet::all_finite() const {
  for (const auto& v : h_dl_) if (!v.allFinite()) return false;
  for (const auto& v : h_ul_) if (!v.allFinite()) return false;
  for (const auto& v : g_) if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  for (const auto& m : H_) if (!m.allFinite()) return false;
  return std::isfinite(noise_sbs) && std::isfinite(noise_ue) && noise_sbs > 0.0 && noise_ue > 0.0;
}

namespace {

// Distances below one metre are clamped; the path-loss laws are far-field fits.
constexpr double kMinDistanceM = 1.0;

class Drawer {
 public:
  Drawer(std::uint64_t seed, double los_distance) : rng_(make_rng(seed, 2)), los_distance_(los_distance) {}

  double path_gain(LinkClass link, double d_m) {
    d_m = std::max(d_m, kMinDistanceM);
    bool los = uniform_(rng_) < std::exp(-d_m / los_distance_);
    return db_to_linear(-pathloss_db(link, d_m / 1000.0, los));
  }
  // Unit-variance circularly-symmetric complex Gaussian.
  cdouble cn() { return cdouble(normal_(rng_), normal_(rng_)) * std::sqrt(0.5); }

 private:
  std::mt19937_64 rng_;
  double los_distance_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace

ChannelSet draw_channels(const Topology& t, const ScenarioConfig& c, const std::optional<CMatrix>& si_mean) {
  c.validate();
  if (t.num_sbs() != c.num_sbs || t.num_dl() != c.total_dl_ues() || t.num_ul() != c.total_ul_ues()) {
    throw std::invalid_argument("draw_channels: topology does not match the configuration");
  }
  const int mt = c.tx_antennas;
  const int mr = c.rx_antennas;
  CMatrix hsi = si_mean.value_or(CMatrix::Ones(mr, mt));
  if (hsi.rows() != mr || hsi.cols() != mt) throw std::invalid_argument("draw_channels: SI mean matrix has wrong size");

  ChannelSet ch;
  ch.resize(c.num_sbs, t.num_dl(), t.num_ul(), c.num_subcarriers, mt, mr);
  const double bw = c.subcarrier_bandwidth();
  ch.noise_sbs = noise_power(bw, c.noise_figure_sbs_db, c.noise_density_dbm_hz);
  ch.noise_ue = noise_power(bw, c.noise_figure_ue_db, c.noise_density_dbm_hz);

  Drawer d(c.seed, c.los_distance);
  const int N = c.num_subcarriers;
  // Large-scale gains are drawn once per link, fading per sub-carrier.
  for (int b = 0; b < c.num_sbs; ++b) {
    for (int i = 0; i < t.num_dl(); ++i) {
      double s = std::sqrt(d.path_gain(LinkClass::kUeSbs, distance(t.sbs[b], t.dl_ues[i])));
      for (int n = 0; n < N; ++n) {
        for (int a = 0; a < mt; ++a) ch.h_dl(b, i, n)(a) = s * d.cn();
      }
    }
    for (int j = 0; j < t.num_ul(); ++j) {
      double s = std::sqrt(d.path_gain(LinkClass::kUeSbs, distance(t.sbs[b], t.ul_ues[j])));
      for (int n = 0; n < N; ++n) {
        for (int a = 0; a < mr; ++a) ch.h_ul(b, j, n)(a) = s * d.cn();
      }
    }
  }
  for (int j = 0; j < t.num_ul(); ++j) {
    for (int i = 0; i < t.num_dl(); ++i) {
      double s = std::sqrt(d.path_gain(LinkClass::kUeUe, distance(t.ul_ues[j], t.dl_ues[i])));
      for (int n = 0; n < N; ++n) ch.g(j, i, n) = s * d.cn();
    }
  }
  const double si_var = db_to_linear(c.si_variance_db);
  const double k = c.rician_k;
  const double mean_scale = std::sqrt(si_var * k / (1.0 + k));
  const double scatter = std::sqrt(si_var / (1.0 + k));
  for (int rx = 0; rx < c.num_sbs; ++rx) {
    for (int tx = 0; tx < c.num_sbs; ++tx) {
      if (rx == tx) {
        for (int n = 0; n < N; ++n) {
          CMatrix& m = ch.H(rx, tx, n);
          for (int r = 0; r < mr; ++r) {
            for (int q = 0; q < mt; ++q) m(r, q) = mean_scale * hsi(r, q) + scatter * d.cn();
          }
        }
      } else {
        double s = std::sqrt(d.path_gain(LinkClass::kSbsSbs, distance(t.sbs[rx], t.sbs[tx])));
        for (int n = 0; n < N; ++n) {
          CMatrix& m = ch.H(rx, tx, n);
          for (int r = 0; r < mr; ++r) {
            for (int q = 0; q < mt; ++q) m(r, q) = s * d.cn();
          }
        }
      }
    }
  }
  return ch;
}

namespace {

void put(std::ostream& os, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  os << buf;
}

void put_row(std::ostream& os, const cdouble* data, int count) {
  for (int k = 0; k < count; ++k) {
    if (k) os << ' ';
    put(os, data[k].real());
    os << ' ';
    put(os, data[k].imag());
  }
  os << '\n';
}

void expect(std::istream& is, const std::string& w) {
  std::string got;
  if (!(is >> got) || got != w) throw std::runtime_error("channel dump: expected '" + w + "'");
}

cdouble get(std::istream& is) {
  double re = 0.0, im = 0.0;
  if (!(is >> re >> im)) throw std::runtime_error("channel dump: truncated data");
  return {re, im};
}

}  // namespace

void write_channels(std::ostream& os, const ChannelSet& ch) {
  os << "fdsc-channels 1\n";
  os << "dims " << ch.num_sbs << ' ' << ch.num_dl << ' ' << ch.num_ul << ' ' << ch.num_subcarriers << ' '
     << ch.tx_antennas << ' ' << ch.rx_antennas << '\n';
  os << "noise ";
  put(os, ch.noise_sbs);
  os << ' ';
  put(os, ch.noise_ue);
  os << '\n';
  os << "h_dl " << ch.h_dl_.size() << " 1 " << ch.tx_antennas << '\n';
  for (const auto& v : ch.h_dl_) put_row(os, v.data(), static_cast<int>(v.size()));
  os << "h_ul " << ch.h_ul_.size() << " 1 " << ch.rx_antennas << '\n';
  for (const auto& v : ch.h_ul_) put_row(os, v.data(), static_cast<int>(v.size()));
  os << "g " << ch.g_.size() << " 1 1\n";
  for (const auto& v : ch.g_) put_row(os, &v, 1);
  os << "H " << ch.H_.size() << ' ' << ch.rx_antennas << ' ' << ch.tx_antennas << '\n';
  for (const auto& m : ch.H_) {
    // Row-major regardless of Eigen's storage order.
    Eigen::Matrix<cdouble, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> r = m;
    put_row(os, r.data(), static_cast<int>(r.size()));
  }
  os << "end\n";
}

ChannelSet read_channels(std::istream& is) {
  expect(is, "fdsc-channels");
  int version = 0;
  if (!(is >> version) || version != 1) throw std::runtime_error("channel dump: unsupported version");
  expect(is, "dims");
  int b, kd, ku, n, mt, mr;
  if (!(is >> b >> kd >> ku >> n >> mt >> mr) || b < 1 || kd < 0 || ku < 0 || n < 1 || mt < 1 || mr < 1) {
    throw std::runtime_error("channel dump: bad dimensions");
  }
  ChannelSet ch;
  ch.resize(b, kd, ku, n, mt, mr);
  expect(is, "noise");
  if (!(is >> ch.noise_sbs >> ch.noise_ue)) throw std::runtime_error("channel dump: bad noise line");
  auto section = [&](const char* name, std::size_t count, int rows, int cols) {
    expect(is, name);
    std::size_t c = 0;
    int r = 0, q = 0;
    if (!(is >> c >> r >> q) || c != count || r != rows || q != cols) {
      throw std::runtime_error(std::string("channel dump: section ") + name + " has wrong shape");
    }
  };
  section("h_dl", ch.h_dl_.size(), 1, mt);
  for (auto& v : ch.h_dl_) for (int a = 0; a < mt; ++a) v(a) = get(is);
  section("h_ul", ch.h_ul_.size(), 1, mr);
  for (auto& v : ch.h_ul_) for (int a = 0; a < mr; ++a) v(a) = get(is);
  section("g", ch.g_.size(), 1, 1);
  for (auto& v : ch.g_) v = get(is);
  section("H", ch.H_.size(), mr, mt);
  for (auto& m : ch.H_) {
    for (int r = 0; r < mr; ++r) for (int q = 0; q < mt; ++q) m(r, q) = get(is);
  }
  expect(is, "end");
  if (!ch.all_finite()) throw std::runtime_error("channel dump: non-finite values");
  return ch;
}

}  // namespace fdsc
