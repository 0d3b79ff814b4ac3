#pragma once

// Hand-built single- and multi-cell fixtures with explicit channels.

#include <random>

#include "fdsc/channel.hpp"
#include "fdsc/scenario.hpp"

namespace tiny {

/// Topology with the given per-cell UE counts; positions are irrelevant.
inline fdsc::Topology topology(int cells, int dl_per_cell, int ul_per_cell) {
  fdsc::Topology t;
  t.sbs.assign(cells, {});
  t.dl_sets.resize(cells);
  t.ul_sets.resize(cells);
  for (int b = 0; b < cells; ++b) {
    for (int k = 0; k < dl_per_cell; ++k) {
      t.dl_sets[b].push_back(t.num_dl());
      t.dl_ues.push_back({});
      t.dl_cell.push_back(b);
    }
    for (int k = 0; k < ul_per_cell; ++k) {
      t.ul_sets[b].push_back(t.num_ul());
      t.ul_ues.push_back({});
      t.ul_cell.push_back(b);
    }
  }
  return t;
}

inline fdsc::ChannelSet zero_channels(const fdsc::Topology& t, int n, int mt, int mr) {
  fdsc::ChannelSet ch;
  ch.resize(t.num_sbs(), t.num_dl(), t.num_ul(), n, mt, mr);
  ch.noise_sbs = 1.0;
  ch.noise_ue = 1.0;
  return ch;
}

inline fdsc::cdouble cn(std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  return {nd(rng), nd(rng)};
}

/// Random O(1) channels on every link.
inline fdsc::ChannelSet random_channels(const fdsc::Topology& t, int n, int mt, int mr, std::mt19937_64& rng) {
  fdsc::ChannelSet ch = zero_channels(t, n, mt, mr);
  for (auto& v : ch.h_dl_) for (int a = 0; a < v.size(); ++a) v(a) = cn(rng);
  for (auto& v : ch.h_ul_) for (int a = 0; a < v.size(); ++a) v(a) = cn(rng);
  for (auto& v : ch.g_) v = 0.3 * cn(rng);
  for (auto& m : ch.H_) for (int r = 0; r < m.rows(); ++r) for (int c = 0; c < m.cols(); ++c) m(r, c) = 0.2 * cn(rng);
  std::uniform_real_distribution<double> u(0.2, 2.0);
  ch.noise_sbs = u(rng);
  ch.noise_ue = u(rng);
  return ch;
}

}  // namespace tiny
