#include "fdsc/admm.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace fdsc {

using conic::AffineExpr;
using conic::HermitianExpr;

const char* to_string(CouplingKind k) {
  switch (k) {
    case CouplingKind::kDlFromDl: return "dl_from_dl";
    case CouplingKind::kDlFromUl: return "dl_from_ul";
    case CouplingKind::kUlFromDl: return "ul_from_dl";
    case CouplingKind::kUlFromUl: return "ul_from_ul";
  }
  return "?";
}

double PenaltyParams::rho(CouplingKind k) const {
  switch (k) {
    case CouplingKind::kDlFromDl: return rho1;
    case CouplingKind::kDlFromUl: return rho2;
    case CouplingKind::kUlFromDl: return rho3;
    case CouplingKind::kUlFromUl: return rho4;
  }
  return rho1;
}

void PenaltyParams::validate() const {
  for (double r : {rho1, rho2, rho3, rho4}) {
    if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("penalty parameters must be positive");
  }
}

std::vector<Coupling> enumerate_couplings(const Scenario& sc) {
  const auto& topo = sc.topology;
  const int B = sc.num_sbs();
  const int N = sc.num_subcarriers();
  const int mr = sc.config.rx_antennas;
  std::vector<Coupling> out;
  for (int i = 0; i < topo.num_dl(); ++i) {
    const int v = topo.dl_cell[i];
    for (int n = 0; n < N; ++n) {
      if (!sc.dl_active(n)) continue;
      for (int c = 0; c < B; ++c) {
        if (c == v) continue;
        if (!topo.dl_sets[c].empty()) out.push_back({CouplingKind::kDlFromDl, c, i, v, n, 1});
        if (!topo.ul_sets[c].empty() && sc.ul_active(n)) out.push_back({CouplingKind::kDlFromUl, c, i, v, n, 1});
      }
    }
  }
  for (int j = 0; j < topo.num_ul(); ++j) {
    const int v = topo.ul_cell[j];
    for (int n = 0; n < N; ++n) {
      if (!sc.ul_active(n)) continue;
      for (int c = 0; c < B; ++c) {
        if (c == v) continue;
        if (!topo.dl_sets[c].empty() && sc.dl_active(n)) out.push_back({CouplingKind::kUlFromDl, c, j, v, n, mr});
        if (!topo.ul_sets[c].empty()) out.push_back({CouplingKind::kUlFromUl, c, j, v, n, mr});
      }
    }
  }
  return out;
}

CMatrix coupling_value(const Coupling& k, const SpcaIterate& it, const Scenario& sc, const ChannelSet& ch) {
  const auto& topo = sc.topology;
  switch (k.kind) {
    case CouplingKind::kDlFromDl: {
      double s = 0.0;
      const CVector& h = ch.h_dl(k.producer, k.victim, k.n);
      for (int q : topo.dl_sets[k.producer]) s += (h.adjoint() * it.U.at(q, k.n) * h)(0, 0).real();
      return CMatrix::Constant(1, 1, s / ch.noise_ue);
    }
    case CouplingKind::kDlFromUl: {
      double s = 0.0;
      for (int l : topo.ul_sets[k.producer]) s += it.p.at(l, k.n) * std::norm(ch.g(l, k.victim, k.n));
      return CMatrix::Constant(1, 1, s / ch.noise_ue);
    }
    case CouplingKind::kUlFromDl: {
      const CMatrix& H = ch.H(k.victim_cell, k.producer, k.n);
      CMatrix s = CMatrix::Zero(k.dim, k.dim);
      for (int q : topo.dl_sets[k.producer]) s += H * it.U.at(q, k.n) * H.adjoint();
      return hermitian_part(s / ch.noise_sbs);
    }
    case CouplingKind::kUlFromUl: {
      CMatrix s = CMatrix::Zero(k.dim, k.dim);
      for (int l : topo.ul_sets[k.producer]) {
        const CVector& h = ch.h_ul(k.victim_cell, l, k.n);
        s += it.p.at(l, k.n) * h * h.adjoint();
      }
      return hermitian_part(s / ch.noise_sbs);
    }
  }
  return {};
}

std::vector<CMatrix> LocalState::copies() const {
  std::vector<CMatrix> out(copy_offset.size());
  for (std::size_t k = 0; k < copy_offset.size(); ++k) {
    if (copy_offset[k] < 0 || x.empty()) continue;
    const int d = copy_dim[k];
    if (d == 1) {
      out[k] = CMatrix::Constant(1, 1, x[copy_offset[k]]);
    } else {
      out[k] = hermitian_from_coords(d, std::span<const double>(x).subspan(copy_offset[k], d * d));
    }
  }
  return out;
}

namespace {

std::string copy_name(const Coupling& k, bool out) {
  std::ostringstream s;
  s << (out ? "out_" : "in_") << to_string(k.kind) << '[' << k.producer << ',' << k.victim << ',' << k.n << ']';
  return s.str();
}

double max_abs(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace

LocalState build_local_constraints(int b, const SpcaIterate& it, const Scenario& sc, const ChannelSet& ch,
                                   const std::vector<Coupling>& couplings, const LocalState* warm) {
  if (b < 0 || b >= sc.num_sbs()) throw std::invalid_argument("cell index out of range");
  if (it.U.num_dl != sc.num_dl() || it.p.num_ul != sc.num_ul() || it.num_subcarriers() != sc.num_subcarriers()) {
    throw std::invalid_argument("iterate dimensions do not match the scenario");
  }
  const int N = sc.num_subcarriers();
  const auto& topo = sc.topology;
  SurrogateBuilder sb(sc, ch, it);
  sb.add_cell_variables(b);

  LocalState L;
  L.cell = b;
  const std::size_t K = couplings.size();
  L.copy_offset.assign(K, -1);
  L.copy_dim.assign(K, 0);
  for (std::size_t k = 0; k < K; ++k) {
    const Coupling& c = couplings[k];
    const bool out = c.producer == b;
    if (!out && c.victim_cell != b) continue;
    // Copies start just above the value at the iterate so the start is interior.
    CMatrix v = coupling_value(c, it, sc, ch);
    const double eps = out ? 1e-6 : 1e-9;
    L.copy_dim[k] = c.dim;
    if (c.dim == 1) {
      double s = v(0, 0).real();
      L.copy_offset[k] = sb.add_scalar(copy_name(c, out), out ? -conic::kInf : 0.0, conic::kInf, s + eps * (1.0 + s));
    } else {
      CMatrix s = v + eps * (1.0 + v.trace().real()) * CMatrix::Identity(c.dim, c.dim);
      L.copy_offset[k] = sb.add_matrix(copy_name(c, out), c.dim, !out, s);
    }
  }
  if (warm && !warm->x.empty()) {
    if (static_cast<int>(warm->x.size()) != sb.program().num_variables()) {
      throw std::invalid_argument("warm start layout does not match the local program");
    }
    sb.set_start(warm->x);
  }

  sb.add_cell_constraints(b);
  auto& prog = sb.program();
  for (std::size_t k = 0; k < K; ++k) {
    const Coupling& c = couplings[k];
    if (c.producer != b) continue;
    const int off = L.copy_offset[k];
    std::string tag = std::string("bound_") + copy_name(c, true).substr(4);
    switch (c.kind) {
      case CouplingKind::kDlFromDl:
        prog.add_affine_le(sb.dl_from_dl(b, c.victim, c.n) - AffineExpr::variable(off), tag);
        break;
      case CouplingKind::kDlFromUl:
        prog.add_affine_le(sb.dl_from_ul(b, c.victim, c.n) - AffineExpr::variable(off), tag);
        break;
      case CouplingKind::kUlFromDl: {
        HermitianExpr m = sb.matrix_expr(off, c.dim);
        m -= sb.ul_from_dl(b, c.victim, c.n);
        prog.add_psd(std::move(m), tag);
        break;
      }
      case CouplingKind::kUlFromUl: {
        HermitianExpr m = sb.matrix_expr(off, c.dim);
        m -= sb.ul_from_ul(b, c.victim, c.n);
        prog.add_psd(std::move(m), tag);
        break;
      }
    }
  }
  for (int i : topo.dl_sets[b]) {
    for (int n = 0; n < N; ++n) {
      if (sb.vars().beta[i * N + n] < 0) continue;
      AffineExpr interf = sb.dl_from_dl(b, i, n) + sb.dl_from_ul(b, i, n);
      for (std::size_t k = 0; k < K; ++k) {
        const Coupling& c = couplings[k];
        bool dl_kind = c.kind == CouplingKind::kDlFromDl || c.kind == CouplingKind::kDlFromUl;
        if (dl_kind && c.victim_cell == b && c.victim == i && c.n == n) interf.add(L.copy_offset[k], 1.0);
      }
      sb.add_dl_interference(i, n, interf);
    }
  }
  for (int j : topo.ul_sets[b]) {
    for (int n = 0; n < N; ++n) {
      if (sb.vars().z_ul[j * N + n] < 0) continue;
      HermitianExpr X = sb.ul_from_ul(b, j, n);
      X += sb.ul_from_dl(b, j, n);
      for (std::size_t k = 0; k < K; ++k) {
        const Coupling& c = couplings[k];
        bool ul_kind = c.kind == CouplingKind::kUlFromDl || c.kind == CouplingKind::kUlFromUl;
        if (ul_kind && c.victim_cell == b && c.victim == j && c.n == n) X += sb.matrix_expr(L.copy_offset[k], c.dim);
      }
      sb.add_ul_sinr(j, n, X);
    }
  }
  sb.add_queue_objective({b});
  L.problem = sb.finish();
  if (warm && !warm->x.empty()) L.x = warm->x;
  return L;
}

conic::ConicProgram with_penalties(const LocalState& L, const std::vector<Coupling>& couplings,
                                   const GlobalState& globals, const Multipliers& mult, const PenaltyParams& rho) {
  const std::size_t K = couplings.size();
  if (globals.value.size() != K || mult.producer.size() != K || mult.victim.size() != K ||
      L.copy_offset.size() != K) {
    throw std::invalid_argument("consensus state does not match the coupling set");
  }
  conic::ConicProgram prog = L.problem.program;
  for (std::size_t k = 0; k < K; ++k) {
    const int off = L.copy_offset[k];
    if (off < 0) continue;
    const Coupling& c = couplings[k];
    const CMatrix& g = globals.value[k];
    const CMatrix& m = c.producer == L.cell ? mult.producer[k] : mult.victim[k];
    if (g.rows() != c.dim || m.rows() != c.dim) throw std::invalid_argument("consensus dimension mismatch");
    const double r = c.penalty(rho.rho(c.kind));
    if (c.dim == 1) {
      const double gv = g(0, 0).real();
      AffineExpr lin = AffineExpr::variable(off, m(0, 0).real());
      lin.constant = -m(0, 0).real() * gv;
      prog.add_objective(lin);
      AffineExpr d = AffineExpr::variable(off);
      d.constant = -gv;
      prog.add_square_objective(0.5 * r, d);
      continue;
    }
    // Re tr(M^T (X - G)) and rho/2 ||X - G||_F^2 in Hermitian coordinates.
    auto coef = trace_functional(m.transpose());
    auto gc = hermitian_to_coords(g);
    AffineExpr lin;
    for (int q = 0; q < c.dim * c.dim; ++q) {
      lin.add(off + q, coef[q]);
      lin.constant -= coef[q] * gc[q];
      AffineExpr d = AffineExpr::variable(off + q);
      d.constant = -gc[q];
      prog.add_square_objective(q < c.dim ? 0.5 * r : r, d);
    }
    prog.add_objective(lin);
  }
  return prog;
}

LocalState build_local_subproblem(int b, const SpcaIterate& it, const Scenario& sc, const ChannelSet& ch,
                                  const std::vector<Coupling>& couplings, const GlobalState& globals,
                                  const Multipliers& mult, const PenaltyParams& rho, const LocalState* warm) {
  rho.validate();
  LocalState L = build_local_constraints(b, it, sc, ch, couplings, warm);
  L.problem.program = with_penalties(L, couplings, globals, mult, rho);
  return L;
}

std::vector<Message> exchange(const std::vector<LocalState>& locals, const std::vector<Coupling>& couplings) {
  std::vector<std::vector<CMatrix>> copies(locals.size());
  for (std::size_t b = 0; b < locals.size(); ++b) {
    if (locals[b].x.empty()) {
      throw std::logic_error("stale state: SBS " + std::to_string(b) + " has not solved its subproblem");
    }
    copies[b] = locals[b].copies();
  }
  std::vector<Message> out;
  out.reserve(couplings.size());
  for (std::size_t k = 0; k < couplings.size(); ++k) {
    const Coupling& c = couplings[k];
    Message m;
    m.coupling = static_cast<int>(k);
    m.from = c.producer;
    m.to = c.victim_cell;
    m.producer_copy = copies.at(c.producer).at(k);
    m.victim_copy = copies.at(c.victim_cell).at(k);
    if (m.producer_copy.size() == 0 || m.victim_copy.size() == 0) {
      throw std::logic_error("stale state: missing copy for coupling " + std::to_string(k));
    }
    m.bytes = 2 * static_cast<std::size_t>(c.dim * c.dim) * sizeof(double);
    out.push_back(std::move(m));
  }
  return out;
}

GlobalState update_globals(const std::vector<Message>& messages, const std::vector<Coupling>& couplings) {
  GlobalState g;
  g.value.resize(couplings.size());
  for (const auto& m : messages) {
    CMatrix avg = 0.5 * (m.producer_copy + m.victim_copy);
    g.value.at(m.coupling) = couplings.at(m.coupling).dim == 1 ? avg : hermitian_part(avg);
  }
  return g;
}

Multipliers update_multipliers(const std::vector<Message>& messages, const GlobalState& globals,
                               const Multipliers& mult, const PenaltyParams& rho,
                               const std::vector<Coupling>& couplings) {
  Multipliers out = mult;
  for (const auto& m : messages) {
    const Coupling& c = couplings.at(m.coupling);
    const double r = c.penalty(rho.rho(c.kind));
    const CMatrix& g = globals.value.at(m.coupling);
    out.producer.at(m.coupling) += r * (m.producer_copy - g).transpose();
    out.victim.at(m.coupling) += r * (m.victim_copy - g).transpose();
  }
  return out;
}

namespace {

void initialize(AdmmState& state, const SpcaIterate& it, const Scenario& sc, const ChannelSet& ch,
                const AdmmOptions& opt) {
  opt.rho.validate();
  state.couplings = enumerate_couplings(sc);
  const std::size_t K = state.couplings.size();
  if (opt.scaled_couplings) {
    // Every transmitter at full power, spread evenly over its antennas.
    const int N = sc.num_subcarriers();
    SpcaIterate full;
    full.U = BeamformerSet(sc.num_dl(), N, sc.config.tx_antennas);
    for (auto& u : full.U.U) u = (sc.config.sbs_max_power / sc.config.tx_antennas) * CMatrix::Identity(u.rows(), u.cols());
    full.p = PowerSet(sc.num_ul(), N);
    for (double& v : full.p.p) v = sc.config.ue_max_power;
    double f0 = 0.0;
    for (int b = 0; b < sc.num_sbs(); ++b) {
      double d = 0.0, u = 0.0;
      for (int i : sc.topology.dl_sets[b]) d += sc.traffic.q_dl[i] * sc.traffic.q_dl[i];
      for (int j : sc.topology.ul_sets[b]) u += sc.traffic.q_ul[j] * sc.traffic.q_ul[j];
      f0 += std::sqrt(d) + std::sqrt(u);
    }
    for (auto& c : state.couplings) {
      c.scale = std::max(1.0, max_abs(coupling_value(c, full, sc, ch)));
      c.objective = std::max(1.0, f0);
    }
  }
  state.globals.value.resize(K);
  state.mult.producer.resize(K);
  state.mult.victim.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    const Coupling& c = state.couplings[k];
    state.globals.value[k] = coupling_value(c, it, sc, ch);
    state.mult.producer[k] = CMatrix::Zero(c.dim, c.dim);
    state.mult.victim[k] = CMatrix::Zero(c.dim, c.dim);
  }
  state.locals.assign(sc.num_sbs(), LocalState{});
  state.rho = opt.rho;
  state.initialized = true;
}

}  // namespace

AdmmResult admm_loop(const SpcaIterate& it, const Scenario& sc, const ChannelSet& ch, AdmmState& state,
                     const AdmmOptions& opt, int spca_iteration) {
  if (opt.max_iterations < 1) throw std::invalid_argument("ADMM needs at least one iteration");
  if (!state.initialized) initialize(state, it, sc, ch, opt);
  const int B = sc.num_sbs();
  const auto& K = state.couplings;

  // The surrogate is fixed for the whole loop: constraints are expanded once.
  std::vector<LocalState> base(B);
  for (int b = 0; b < B; ++b) {
    const LocalState* warm = state.locals[b].x.empty() ? nullptr : &state.locals[b];
    base[b] = build_local_constraints(b, it, sc, ch, K, warm);
    if (base[b].x.empty()) base[b].x = base[b].problem.start;
  }

  std::vector<int> order = opt.solve_order;
  if (order.empty()) {
    for (int b = 0; b < B; ++b) order.push_back(b);
  }
  std::vector<int> sorted = order;
  std::sort(sorted.begin(), sorted.end());
  for (int b = 0; b < B; ++b) {
    if (static_cast<int>(sorted.size()) != B || sorted[b] != b) throw std::invalid_argument("solve order is not a permutation");
  }

  AdmmResult res;
  res.iterate = it;
  for (int v = 1; v <= opt.max_iterations; ++v) {
    // Jacobi sweep: every BS reads the same globals and multipliers.
    for (int b : order) {
      conic::ConicProgram prog = with_penalties(base[b], K, state.globals, state.mult, state.rho);
      conic::SolverOptions so = opt.solver;
      so.initial_point = base[b].x;
      conic::Solution sol = conic::solve(prog, so);
      if (!sol.ok()) {
        // Round-off on the largest coordinates sets the attainable accuracy.
        double mag = 1.0;
        for (double xv : sol.x) mag = std::max(mag, std::abs(xv));
        auto viol = conic::violated_constraints(prog, sol.x, 1e-7 * mag);
        if (sol.status == conic::SolveStatus::kInfeasible || !viol.empty()) {
          std::ostringstream msg;
          msg << "ADMM iteration " << v << ": subproblem of SBS " << b << " failed (" << conic::to_string(sol.status)
              << ": " << sol.message << ")";
          for (const auto& t : viol) msg << ' ' << t;
          throw std::runtime_error(msg.str());
        }
      }
      base[b].x = sol.x;
      base[b].solve_status = static_cast<int>(sol.status);
    }
    auto messages = fdsc::exchange(base, K);
    GlobalState next = update_globals(messages, K);
    double primal = 0.0, dual = 0.0;
    std::vector<double> pk(K.size(), 0.0), dk(K.size(), 0.0);
    for (const auto& m : messages) {
      // Relative to interference plus noise (noise-normalized values), which
      // bounds the relative SINR error a disagreement causes.
      const CMatrix& g = next.value[m.coupling];
      const Coupling& c = K[m.coupling];
      const double ref = 1.0 + max_abs(g);
      pk[m.coupling] = std::max(max_abs(m.producer_copy - g), max_abs(m.victim_copy - g)) / ref;
      // Change of the penalty gradient over the same reference, in units of the objective.
      dk[m.coupling] = c.penalty(state.rho.rho(c.kind)) / c.objective * ref * max_abs(g - state.globals.value[m.coupling]);
      primal = std::max(primal, pk[m.coupling]);
      dual = std::max(dual, dk[m.coupling]);
    }
    state.mult = update_multipliers(messages, next, state.mult, state.rho, K);
    if (opt.balance_couplings) {
      for (std::size_t k = 0; k < K.size(); ++k) {
        double& w = state.couplings[k].weight;
        if (pk[k] > opt.tol && pk[k] > 10.0 * dk[k]) {
          w = std::min(2.0 * w, 1e12);
        } else if (dk[k] > opt.tol && dk[k] > 10.0 * pk[k]) {
          w = std::max(0.5 * w, 1e-4);
        }
      }
    }
    state.globals = std::move(next);

    SpcaIterate cur = it;
    for (int b = 0; b < B; ++b) cur = extract_iterate(base[b].problem, base[b].x, cur);
    res.iterate = std::move(cur);

    AdmmTraceRow row;
    row.spca_iteration = spca_iteration;
    row.iteration = v;
    row.objective = surrogate_objective(res.iterate, sc);
    row.primal_residual = primal;
    row.dual_residual = dual;
    row.messages = messages.size();
    for (const auto& m : messages) {
      row.bytes += m.bytes;
      if (opt.latency) row.latency += opt.latency(m);
    }
    row.rho = state.rho.rho1;
    res.trace.push_back(row);
    res.iterations = v;
    res.primal_residual = primal;
    res.dual_residual = dual;
    if (primal < opt.tol && dual < opt.tol) {
      res.converged = true;
      break;
    }
    if (state.rho.residual_balancing) {
      double f = primal > 10.0 * dual ? 2.0 : (dual > 10.0 * primal ? 0.5 : 1.0);
      state.rho.rho1 *= f;
      state.rho.rho2 *= f;
      state.rho.rho3 *= f;
      state.rho.rho4 *= f;
    }
  }
  for (int b = 0; b < B; ++b) state.locals[b] = std::move(base[b]);
  return res;
}

void write_admm_trace_csv(std::ostream& os, const std::vector<AdmmTraceRow>& rows) {
  os << "iteration,objective,primal_residual,dual_residual,messages,bytes,spca_iteration,rho,latency\n";
  for (const auto& r : rows) {
    os << r.iteration << ',' << r.objective << ',' << r.primal_residual << ',' << r.dual_residual << ','
       << r.messages << ',' << r.bytes << ',' << r.spca_iteration << ',' << r.rho << ',' << r.latency << '\n';
  }
}

}  // namespace fdsc
