#include "fdsc/convexify.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fdsc {

using conic::AffineExpr;
using conic::HermitianExpr;

std::vector<std::vector<double>> SpcaIterate::scheduled_ul_rates() const {
  const int N = num_subcarriers();
  std::vector<std::vector<double>> r(p.num_ul, std::vector<double>(N, 0.0));
  for (int j = 0; j < p.num_ul; ++j)
    for (int n = 0; n < N; ++n) r[j][n] = t_ul[j * N + n] * kBitsPerNat;
  return r;
}

double amgm_bound(double z, double beta, double xi) {
  if (!(xi > 0.0)) throw std::invalid_argument("AM-GM weight must be positive");
  return beta * beta / (2.0 * xi) + xi * z * z / 2.0;
}

std::vector<double> update_xi(const SpcaIterate& it, double eps) {
  std::vector<double> out(it.beta.size(), 0.0);
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (it.beta[k] > 0.0) out[k] = it.beta[k] / std::max(it.z_dl[k], eps);
  }
  return out;
}

double matrix_fractional(double x, const CMatrix& X, const CVector& h) {
  Eigen::LLT<CMatrix> llt(X);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("matrix is not positive definite");
  return x * x * h.dot(llt.solve(h)).real();
}

double MatrixFractionalMinorant::evaluate(double x, const CMatrix& X) const {
  return value0 + slope_x * (x - x0) + real_trace_product(slope_X, X - X0);
}

MatrixFractionalMinorant linearize_matrix_fractional(double x0, const CMatrix& X0, const CVector& h) {
  Eigen::LLT<CMatrix> llt(X0);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("matrix is not positive definite");
  CVector y = llt.solve(h);
  double c = h.dot(y).real();
  MatrixFractionalMinorant m;
  m.x0 = x0;
  m.X0 = X0;
  m.value0 = x0 * x0 * c;
  m.slope_x = 2.0 * x0 * c;
  m.slope_X = -x0 * x0 * (y * y.adjoint());
  return m;
}

namespace {

std::string tag(const char* kind, int a, int n) {
  return std::string(kind) + "[" + std::to_string(a) + "," + std::to_string(n) + "]";
}

std::string tag(const char* kind, int b) { return std::string(kind) + "[" + std::to_string(b) + "]"; }

// Position of j in its cell's decoding order.
std::size_t sic_position(const Topology& topo, int j) {
  const auto& order = topo.ul_sets[topo.ul_cell[j]];
  return static_cast<std::size_t>(std::find(order.begin(), order.end(), j) - order.begin());
}

}  // namespace

SurrogateBuilder::SurrogateBuilder(const Scenario& sc, const ChannelSet& ch, const SpcaIterate& it,
                                   SurrogateOptions opt)
    : sc_(sc), ch_(ch), it_(it), opt_(opt) {
  const int N = sc.num_subcarriers();
  VarMap& v = problem_.vars;
  v.U_offset.assign(sc.num_dl() * N, -1);
  v.beta = v.z_dl = v.t_dl = std::vector<int>(sc.num_dl() * N, -1);
  v.p = v.x = v.z_ul = v.t_ul = std::vector<int>(sc.num_ul() * N, -1);
}

int SurrogateBuilder::add_scalar(const std::string& name, double lower, double upper, double start) {
  int k = problem_.program.add_variable(name, lower, upper);
  problem_.start.push_back(start);
  return k;
}

int SurrogateBuilder::add_matrix(const std::string& name, int dim, bool psd, const CMatrix& start) {
  int block = problem_.program.add_hermitian(name, dim, psd);
  auto coords = hermitian_to_coords(start);
  problem_.start.insert(problem_.start.end(), coords.begin(), coords.end());
  return problem_.program.blocks()[block].offset;
}

void SurrogateBuilder::set_start(std::vector<double> x) {
  if (static_cast<int>(x.size()) != problem_.program.num_variables()) {
    throw std::invalid_argument("start point has the wrong dimension");
  }
  problem_.start = std::move(x);
}

HermitianExpr SurrogateBuilder::matrix_expr(int offset, int dim) const {
  HermitianExpr e = HermitianExpr::zero(dim);
  for (int c = 0; c < dim * dim; ++c) e.add(offset + c, hermitian_basis(dim, c));
  return e;
}

void SurrogateBuilder::add_cell_variables(int b) {
  const int N = sc_.num_subcarriers();
  const int mt = sc_.config.tx_antennas;
  VarMap& v = problem_.vars;
  for (int i : sc_.topology.dl_sets[b]) {
    for (int n = 0; n < N; ++n) {
      if (!sc_.dl_active(n)) continue;
      const int k = i * N + n;
      v.U_offset[k] = add_matrix(tag("U", i, n), mt, true, it_.U.at(i, n));
      v.beta[k] = add_scalar(tag("beta", i, n), -conic::kInf, conic::kInf, it_.beta[k]);
      v.z_dl[k] = add_scalar(tag("z_dl", i, n), 0.0, conic::kInf, it_.z_dl[k]);
      v.t_dl[k] = add_scalar(tag("t_dl", i, n), 0.0, conic::kInf, it_.t_dl[k]);
    }
  }
  for (int j : sc_.topology.ul_sets[b]) {
    for (int n = 0; n < N; ++n) {
      if (!sc_.ul_active(n)) continue;
      const int k = j * N + n;
      v.p[k] = add_scalar(tag("p", j, n), 0.0, conic::kInf, it_.p.at(j, n));
      v.x[k] = add_scalar(tag("x", j, n), 0.0, conic::kInf, it_.x[k]);
      v.z_ul[k] = add_scalar(tag("z_ul", j, n), 0.0, conic::kInf, it_.z_ul[k]);
      v.t_ul[k] = add_scalar(tag("t_ul", j, n), 0.0, conic::kInf, it_.t_ul[k]);
    }
  }
  problem_.cells.push_back(b);
}

AffineExpr SurrogateBuilder::dl_gain(int tx_cell, int k, int i, int n) const {
  AffineExpr e;
  const int off = problem_.vars.U_offset[k * sc_.num_subcarriers() + n];
  if (off < 0) return e;
  const CVector& h = ch_.h_dl(tx_cell, i, n);
  auto coef = trace_functional(h * h.adjoint() / ch_.noise_ue);
  for (std::size_t c = 0; c < coef.size(); ++c) e.add(off + static_cast<int>(c), coef[c]);
  return e;
}

AffineExpr SurrogateBuilder::dl_from_dl(int c, int i, int n) const {
  AffineExpr e;
  for (int k : sc_.topology.dl_sets[c]) {
    if (k != i) e += dl_gain(c, k, i, n);
  }
  return e;
}

AffineExpr SurrogateBuilder::dl_from_ul(int c, int i, int n) const {
  AffineExpr e;
  for (int l : sc_.topology.ul_sets[c]) {
    int var = problem_.vars.p[l * sc_.num_subcarriers() + n];
    if (var >= 0) e.add(var, std::norm(ch_.g(l, i, n)) / ch_.noise_ue);
  }
  return e;
}

HermitianExpr SurrogateBuilder::ul_from_ul(int c, int j, int n) const {
  const int mr = sc_.config.rx_antennas;
  const int bj = sc_.topology.ul_cell[j];
  HermitianExpr e = HermitianExpr::zero(mr);
  const auto& members = sc_.topology.ul_sets[c];
  std::size_t first = c == bj ? sic_position(sc_.topology, j) + 1 : 0;
  for (std::size_t q = first; q < members.size(); ++q) {
    int l = members[q];
    int var = problem_.vars.p[l * sc_.num_subcarriers() + n];
    if (var < 0) continue;
    const CVector& h = ch_.h_ul(bj, l, n);
    e.add(var, h * h.adjoint() / ch_.noise_sbs);
  }
  return e;
}

HermitianExpr SurrogateBuilder::ul_from_dl(int c, int j, int n) const {
  const int mr = sc_.config.rx_antennas;
  const int mt = sc_.config.tx_antennas;
  const int bj = sc_.topology.ul_cell[j];
  HermitianExpr e = HermitianExpr::zero(mr);
  const CMatrix& H = ch_.H(bj, c, n);
  for (int i : sc_.topology.dl_sets[c]) {
    int off = problem_.vars.U_offset[i * sc_.num_subcarriers() + n];
    if (off < 0) continue;
    for (int q = 0; q < mt * mt; ++q) e.add(off + q, H * hermitian_basis(mt, q) * H.adjoint() / ch_.noise_sbs);
  }
  return e;
}

void SurrogateBuilder::add_cell_constraints(int b) {
  const int N = sc_.num_subcarriers();
  const int mt = sc_.config.tx_antennas;
  const VarMap& v = problem_.vars;
  auto& prog = problem_.program;
  AffineExpr tx_total;
  for (int i : sc_.topology.dl_sets[b]) {
    for (int n = 0; n < N; ++n) {
      const int k = i * N + n;
      if (v.U_offset[k] < 0) continue;
      const double xi = it_.xi[k];
      if (!(xi > 0.0)) throw std::invalid_argument("AM-GM weight must be positive");
      // beta^2/(2 xi) + xi z^2/2 <= signal
      prog.add_sum_squares_le({AffineExpr::variable(v.beta[k], 1.0 / std::sqrt(2.0 * xi)),
                               AffineExpr::variable(v.z_dl[k], std::sqrt(xi / 2.0))},
                              dl_gain(b, i, i, n), tag("dl_signal", i, n));
      prog.add_exp(AffineExpr::variable(v.t_dl[k]), AffineExpr(1.0).add(v.z_dl[k], 1.0), tag("dl_rate", i, n));
      for (int q = 0; q < mt; ++q) tx_total.add(v.U_offset[k] + q, 1.0);
    }
  }
  AffineExpr decode;
  const double alpha = sc_.config.effective_decode_eff() * kBitsPerNat;
  for (int j : sc_.topology.ul_sets[b]) {
    AffineExpr ue_power(-sc_.config.ue_max_power);
    bool any = false;
    for (int n = 0; n < N; ++n) {
      const int k = j * N + n;
      if (v.p[k] < 0) continue;
      any = true;
      prog.add_sum_squares_le({AffineExpr::variable(v.x[k])}, AffineExpr::variable(v.p[k]), tag("ul_amplitude", j, n));
      prog.add_exp(AffineExpr::variable(v.t_ul[k]), AffineExpr(1.0).add(v.z_ul[k], 1.0), tag("ul_rate", j, n));
      ue_power.add(v.p[k], 1.0);
      if (alpha > 0.0) decode.add(v.t_ul[k], alpha);
    }
    if (any) prog.add_affine_le(ue_power, tag("ue_power", j));
  }
  if (!tx_total.terms.empty()) {
    AffineExpr e = tx_total;
    e.constant = -sc_.config.sbs_max_power;
    prog.add_affine_le(e, tag("sbs_power", b));
  }
  if (sc_.config.energy_causality()) {
    AffineExpr e = tx_total + decode;
    e.constant = sc_.config.circuit_power - sc_.power_budget[b];
    prog.add_affine_le(e, tag("energy", b));
  }
}

void SurrogateBuilder::add_dl_interference(int i, int n, const AffineExpr& interference) {
  const int k = i * sc_.num_subcarriers() + n;
  AffineExpr e = interference;
  e.constant += 1.0;
  e.add(problem_.vars.beta[k], -1.0);
  problem_.program.add_affine_le(e, tag("dl_interference", i, n));
}

void SurrogateBuilder::add_ul_sinr(int j, int n, const HermitianExpr& residual) {
  const int k = j * sc_.num_subcarriers() + n;
  const int mr = sc_.config.rx_antennas;
  const VarMap& v = problem_.vars;
  HermitianExpr X = residual;
  X.constant += CMatrix::Identity(mr, mr);
  CMatrix X0 = X.evaluate(problem_.start);
  const double x0 = problem_.start[v.x[k]];
  CVector h = ch_.h_ul(sc_.topology.ul_cell[j], j, n) / std::sqrt(ch_.noise_sbs);
  auto m = linearize_matrix_fractional(x0, X0, h);
  // z <= value0 + slope_x (x - x0) + tr(slope_X (X - X0))
  AffineExpr e = AffineExpr::variable(v.z_ul[k]);
  e.add(v.x[k], -m.slope_x);
  e -= X.trace_with(m.slope_X);
  e.constant += -m.value0 + m.slope_x * x0 + real_trace_product(m.slope_X, X0);
  problem_.program.add_affine_le(e, tag("ul_sinr", j, n));
}

AffineExpr SurrogateBuilder::queue_deviation_expr(bool downlink, int ue) const {
  const int N = sc_.num_subcarriers();
  const auto& t = downlink ? problem_.vars.t_dl : problem_.vars.t_ul;
  AffineExpr e(downlink ? sc_.traffic.q_dl[ue] : sc_.traffic.q_ul[ue]);
  for (int n = 0; n < N; ++n) {
    int var = t[ue * N + n];
    if (var >= 0) e.add(var, -kBitsPerNat);
  }
  return e;
}

void SurrogateBuilder::add_queue_objective(const std::vector<int>& cells) {
  auto& prog = problem_.program;
  if (opt_.network_norm) {
    std::vector<AffineExpr> dl, ul;
    for (int b : cells) {
      for (int i : sc_.topology.dl_sets[b]) dl.push_back(queue_deviation_expr(true, i));
      for (int j : sc_.topology.ul_sets[b]) ul.push_back(queue_deviation_expr(false, j));
    }
    if (!dl.empty()) prog.add_norm_objective(1.0, std::move(dl), "queue_dl");
    if (!ul.empty()) prog.add_norm_objective(1.0, std::move(ul), "queue_ul");
    return;
  }
  for (int b : cells) {
    std::vector<AffineExpr> dl, ul;
    for (int i : sc_.topology.dl_sets[b]) dl.push_back(queue_deviation_expr(true, i));
    for (int j : sc_.topology.ul_sets[b]) ul.push_back(queue_deviation_expr(false, j));
    if (!dl.empty()) prog.add_norm_objective(1.0, std::move(dl), tag("queue_dl", b));
    if (!ul.empty()) prog.add_norm_objective(1.0, std::move(ul), tag("queue_ul", b));
  }
}

SurrogateProblem build_surrogate(const SpcaIterate& it, const Scenario& sc, const ChannelSet& ch,
                                 const SurrogateOptions& opt) {
  SurrogateBuilder sb(sc, ch, it, opt);
  const int B = sc.num_sbs();
  const int N = sc.num_subcarriers();
  std::vector<int> cells(B);
  for (int b = 0; b < B; ++b) {
    cells[b] = b;
    sb.add_cell_variables(b);
  }
  for (int b = 0; b < B; ++b) sb.add_cell_constraints(b);
  for (int i = 0; i < sc.num_dl(); ++i) {
    for (int n = 0; n < N; ++n) {
      if (sb.vars().beta[i * N + n] < 0) continue;
      AffineExpr interf;
      for (int c = 0; c < B; ++c) {
        interf += sb.dl_from_dl(c, i, n);
        interf += sb.dl_from_ul(c, i, n);
      }
      sb.add_dl_interference(i, n, interf);
    }
  }
  for (int j = 0; j < sc.num_ul(); ++j) {
    for (int n = 0; n < N; ++n) {
      if (sb.vars().z_ul[j * N + n] < 0) continue;
      HermitianExpr X = HermitianExpr::zero(sc.config.rx_antennas);
      for (int c = 0; c < B; ++c) {
        X += sb.ul_from_ul(c, j, n);
        X += sb.ul_from_dl(c, j, n);
      }
      sb.add_ul_sinr(j, n, X);
    }
  }
  sb.add_queue_objective(cells);
  return sb.finish();
}

SpcaIterate extract_iterate(const SurrogateProblem& sp, std::span<const double> x, const SpcaIterate& previous) {
  SpcaIterate it = previous;
  const VarMap& v = sp.vars;
  const int mt = it.U.dim;
  for (std::size_t k = 0; k < v.U_offset.size(); ++k) {
    if (v.U_offset[k] < 0) continue;
    it.U.U[k] = hermitian_from_coords(mt, x.subspan(v.U_offset[k], mt * mt));
    it.beta[k] = x[v.beta[k]];
    it.z_dl[k] = x[v.z_dl[k]];
    it.t_dl[k] = x[v.t_dl[k]];
  }
  for (std::size_t k = 0; k < v.p.size(); ++k) {
    if (v.p[k] < 0) continue;
    it.p.p[k] = x[v.p[k]];
    it.x[k] = x[v.x[k]];
    it.z_ul[k] = x[v.z_ul[k]];
    it.t_ul[k] = x[v.t_ul[k]];
  }
  it.xi = update_xi(it);
  return it;
}

std::vector<double> pack_iterate(const SurrogateProblem& sp, const SpcaIterate& it) {
  std::vector<double> x = sp.start;
  const VarMap& v = sp.vars;
  for (std::size_t k = 0; k < v.U_offset.size(); ++k) {
    if (v.U_offset[k] < 0) continue;
    auto c = hermitian_to_coords(it.U.U[k]);
    std::copy(c.begin(), c.end(), x.begin() + v.U_offset[k]);
    x[v.beta[k]] = it.beta[k];
    x[v.z_dl[k]] = it.z_dl[k];
    x[v.t_dl[k]] = it.t_dl[k];
  }
  for (std::size_t k = 0; k < v.p.size(); ++k) {
    if (v.p[k] < 0) continue;
    x[v.p[k]] = it.p.p[k];
    x[v.x[k]] = it.x[k];
    x[v.z_ul[k]] = it.z_ul[k];
    x[v.t_ul[k]] = it.t_ul[k];
  }
  return x;
}

namespace {

void fill_auxiliaries(SpcaIterate& it, const Scenario& sc, const ChannelSet& ch, double d) {
  const int N = sc.num_subcarriers();
  const auto& topo = sc.topology;
  for (int i = 0; i < sc.num_dl(); ++i) {
    for (int n = 0; n < N; ++n) {
      const int k = i * N + n;
      if (!sc.dl_active(n)) continue;
      const CVector& h = ch.h_dl(topo.dl_cell[i], i, n);
      double signal = (h.adjoint() * it.U.at(i, n) * h)(0, 0).real() / ch.noise_ue;
      double interf = 1.0;
      for (int q = 0; q < sc.num_dl(); ++q) {
        if (q == i) continue;
        const CVector& hq = ch.h_dl(topo.dl_cell[q], i, n);
        interf += (hq.adjoint() * it.U.at(q, n) * hq)(0, 0).real() / ch.noise_ue;
      }
      for (int j = 0; j < sc.num_ul(); ++j) interf += it.p.at(j, n) * std::norm(ch.g(j, i, n)) / ch.noise_ue;
      it.beta[k] = interf * (1.0 + d);
      it.z_dl[k] = signal / interf * (1.0 - d);
      it.t_dl[k] = std::log1p(it.z_dl[k]) * (1.0 - d);
    }
  }
  for (int j = 0; j < sc.num_ul(); ++j) {
    for (int n = 0; n < N; ++n) {
      const int k = j * N + n;
      if (!sc.ul_active(n)) continue;
      double gamma = sinr_ul_mmse_sic(j, n, it.U, it.p, ch, topo);
      it.x[k] = std::sqrt(it.p.at(j, n)) * (1.0 - d);
      it.z_ul[k] = gamma * std::pow(1.0 - d, 3);
      it.t_ul[k] = std::log1p(it.z_ul[k]) * (1.0 - d);
    }
  }
  // xi = beta / z makes the AM-GM bound tight at the point; a zero signal keeps it finite.
  for (std::size_t k = 0; k < it.beta.size(); ++k) {
    if (it.beta[k] > 0.0) it.xi[k] = it.beta[k] / std::max(it.z_dl[k], 1e-9);
  }
}

}  // namespace

SpcaIterate initial_iterate(const Scenario& sc, const ChannelSet& ch, double margin) {
  if (!(margin > 0.0 && margin < 0.5)) throw std::invalid_argument("margin must lie in (0, 0.5)");
  const int N = sc.num_subcarriers();
  const int B = sc.num_sbs();
  const auto& cfg = sc.config;
  const auto& topo = sc.topology;
  int n_dl = 0, n_ul = 0;
  for (int n = 0; n < N; ++n) {
    n_dl += sc.dl_active(n);
    n_ul += sc.ul_active(n);
  }
  SpcaIterate base;
  base.U = BeamformerSet(sc.num_dl(), N, cfg.tx_antennas);
  base.p = PowerSet(sc.num_ul(), N);
  base.beta = base.z_dl = base.t_dl = base.xi = std::vector<double>(sc.num_dl() * N, 0.0);
  base.x = base.z_ul = base.t_ul = std::vector<double>(sc.num_ul() * N, 0.0);

  std::vector<double> scale(B, 1.0);
  for (int b = 0; b < B; ++b) {
    if (cfg.energy_causality() && sc.power_budget[b] <= cfg.circuit_power) {
      throw std::runtime_error("available power at SBS " + std::to_string(b) + " does not cover the circuit power");
    }
  }
  auto build = [&]() {
    SpcaIterate it = base;
    for (int b = 0; b < B; ++b) {
      const auto& D = topo.dl_sets[b];
      if (D.empty() || n_dl == 0) continue;
      double per = scale[b] * cfg.sbs_max_power / (2.0 * n_dl * static_cast<double>(D.size()) * cfg.tx_antennas);
      for (int i : D) {
        for (int n = 0; n < N; ++n) {
          if (sc.dl_active(n)) it.U.at(i, n) = per * CMatrix::Identity(cfg.tx_antennas, cfg.tx_antennas);
        }
      }
    }
    for (int j = 0; j < sc.num_ul(); ++j) {
      for (int n = 0; n < N; ++n) {
        if (sc.ul_active(n)) it.p.at(j, n) = scale[topo.ul_cell[j]] * cfg.ue_max_power / (2.0 * n_ul);
      }
    }
    fill_auxiliaries(it, sc, ch, margin);
    return it;
  };

  SpcaIterate it = build();
  if (!cfg.energy_causality()) return it;
  const double alpha = cfg.effective_decode_eff() * kBitsPerNat;
  for (int round = 0; round < 200; ++round) {
    bool ok = true;
    for (int b = 0; b < B; ++b) {
      double used = cfg.circuit_power;
      for (int i : topo.dl_sets[b]) {
        for (int n = 0; n < N; ++n) used += it.U.at(i, n).trace().real();
      }
      for (int j : topo.ul_sets[b]) {
        for (int n = 0; n < N; ++n) used += alpha * it.t_ul[j * N + n];
      }
      // keep a relative gap so the point is interior for the barrier
      if (used >= sc.power_budget[b] - margin * (sc.power_budget[b] - cfg.circuit_power)) {
        scale[b] *= 0.5;
        ok = false;
      }
    }
    if (ok) return it;
    it = build();
  }
  throw std::runtime_error("could not find a strictly feasible starting point");
}

double surrogate_objective(const SpcaIterate& it, const Scenario& sc, const SurrogateOptions& opt) {
  const int N = sc.num_subcarriers();
  auto dev = [&](bool dl, int ue) {
    double q = dl ? sc.traffic.q_dl[ue] : sc.traffic.q_ul[ue];
    const auto& t = dl ? it.t_dl : it.t_ul;
    for (int n = 0; n < N; ++n) q -= t[ue * N + n] * kBitsPerNat;
    return q;
  };
  double total = 0.0;
  if (opt.network_norm) {
    double sd = 0.0, su = 0.0;
    for (int i = 0; i < sc.num_dl(); ++i) sd += std::pow(dev(true, i), 2);
    for (int j = 0; j < sc.num_ul(); ++j) su += std::pow(dev(false, j), 2);
    return std::sqrt(sd) + std::sqrt(su);
  }
  for (int b = 0; b < sc.num_sbs(); ++b) {
    double sd = 0.0, su = 0.0;
    for (int i : sc.topology.dl_sets[b]) sd += std::pow(dev(true, i), 2);
    for (int j : sc.topology.ul_sets[b]) su += std::pow(dev(false, j), 2);
    total += std::sqrt(sd) + std::sqrt(su);
  }
  return total;
}

}  // namespace fdsc
