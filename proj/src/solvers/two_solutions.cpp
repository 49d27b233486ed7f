#include <algorithm>
#include <cmath>

#include "fracsys/solvers.hpp"

namespace fracsys {

namespace {

double pair_norm(const FieldPair& p) { return std::sqrt(hs_norm2(p)); }

}  // namespace

Solution find_first_solution(const ForcingPair& forcing, const SystemParams& params, const SolverOpts& opts) {
  opts.validate();
  const auto& g = forcing.f.grid();
  params.validate(g);
  forcing.validate();
  Solution sol;
  sol.pair = FieldPair(g);
  if (forcing.is_zero()) {
    sol.converged = true;
    sol.energy = energy_report(sol.pair, forcing, params);
    sol.history.push_back({0, 0.0, 0.0, Region::Omega1});
    return sol;
  }

  double J = energy_J(sol.pair, forcing, params);
  double tau = opts.step_size;
  int it = 0;
  for (; it < opts.max_iters; ++it) {
    FieldPair gr = grad_J(sol.pair, forcing, params);
    double gn = pair_norm(gr);
    sol.history.push_back({it, J, gn, psi_region(sol.pair, params).tag});
    if (gn < opts.grad_tol) {
      sol.converged = true;
      break;
    }
    while (true) {
      FieldPair cand = sol.pair;
      cand.axpy(-tau, gr);
      double Jc = energy_J(cand, forcing, params);
      if (psi_region(cand, params).tag == Region::Omega1 && Jc <= J + 1e-12 * std::max(1.0, std::abs(J))) {
        sol.pair = std::move(cand);
        J = Jc;
        break;
      }
      tau *= 0.5;
      if (tau < opts.min_step)
        throw RegionEscapeError("find_first_solution: iterate leaves Omega1 at the minimum step; "
                                "the forcing is too large for the discrete problem");
    }
  }
  sol.iterations = it;
  sol.energy = energy_report(sol.pair, forcing, params);
  return sol;
}

FieldPair dilated_ground_state(const GroundStatePair& gs, double t, const GridSpec& g) {
  if (!(t > 0.0)) throw ParameterError("dilated_ground_state: t must be positive");
  GroundStatePair d = gs;
  d.bubble.scale = gs.bubble.scale * t;
  d.bubble.amplitude = gs.bubble.amplitude * std::pow(t, 0.5 * (g.dim - 2.0 * g.s));
  Field w = talenti_bubble(d.bubble, g);
  return FieldPair(gs.B * w, gs.C * w);
}

T0Result choose_t0(const FieldPair& u0v0, const GroundStatePair& gs, const ForcingPair& forcing,
                   const SystemParams& params) {
  const auto& g = u0v0.grid();
  const double c0 = energy_J(u0v0, forcing, params);
  T0Result res;
  for (double t = 1.0;; t *= 2.0) {
    const bool recording_extra = res.t0 > 0.0;
    FieldPair d;
    try {
      if (gs.bubble.scale * t > g.L / 4.0) throw BoundaryDecayError("scale beyond L/4");
      d = dilated_ground_state(gs, t, g);
    } catch (const BoundaryDecayError& e) {
      if (recording_extra) break;
      throw BoxTooSmallError("choose_t0: t = " + std::to_string(t) +
                             " exceeds the box before both conditions hold (" + e.what() + ")");
    }
    FieldPair cand = u0v0 + d;
    T0Flags f;
    f.t = t;
    f.psi = psi(cand, params);
    f.J = energy_J(cand, forcing, params);
    f.psi_negative = f.psi < 0.0;
    f.below_c0 = f.J < c0;
    res.sweep.push_back(f);
    if (recording_extra) break;
    if (f.psi_negative && f.below_c0) res.t0 = t;
  }
  return res;
}

namespace {

// Linear reparametrization of nodes[lo..hi] to equal A-arclength, keeping both ends.
void reparametrize(std::vector<FieldPair>& nodes, std::size_t lo, std::size_t hi) {
  if (hi <= lo + 1) return;
  std::vector<double> d{0.0};
  for (std::size_t i = lo + 1; i <= hi; ++i) d.push_back(d.back() + pair_norm(nodes[i] - nodes[i - 1]));
  if (!(d.back() > 0.0)) return;
  for (auto& x : d) x /= d.back();
  std::vector<FieldPair> out;
  const std::size_t cnt = hi - lo;
  for (std::size_t k = 1; k < cnt; ++k) {
    double tt = static_cast<double>(k) / cnt;
    std::size_t j = std::upper_bound(d.begin(), d.end(), tt) - d.begin() - 1;
    j = std::min(j, cnt - 1);
    double a = (tt - d[j]) / (d[j + 1] - d[j]);
    FieldPair p = (1.0 - a) * nodes[lo + j];
    p.axpy(a, nodes[lo + j + 1]);
    out.push_back(std::move(p));
  }
  for (std::size_t k = 1; k < cnt; ++k) nodes[lo + k] = std::move(out[k - 1]);
}

void evaluate_all(const std::vector<FieldPair>& nodes, const ForcingPair& forcing, const SystemParams& params,
                  std::vector<double>& J) {
  J.resize(nodes.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < static_cast<long>(nodes.size()); ++i) J[i] = energy_J(nodes[i], forcing, params);
}

std::size_t argmax_interior(const std::vector<double>& J) {
  std::size_t m = 1;
  for (std::size_t i = 2; i + 1 < J.size(); ++i)
    if (J[i] > J[m]) m = i;
  return m;
}

// Minimum of the linearly interpolated J at sign changes of Psi between adjacent nodes.
bool omega_crossings(const std::vector<FieldPair>& nodes, const std::vector<double>& J, const SystemParams& params,
                     double& min_J) {
  std::vector<RegionTag> tags(nodes.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < static_cast<long>(nodes.size()); ++i) tags[i] = psi_region(nodes[i], params);
  bool any = false;
  min_J = 0.0;
  auto take = [&](double v) {
    if (!any || v < min_J) min_J = v;
    any = true;
  };
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (tags[i].tag == Region::Omega) take(J[i]);
    if (i + 1 < nodes.size()) {
      double a = tags[i].psi_value, b = tags[i + 1].psi_value;
      if ((a > 0.0 && b < 0.0) || (a < 0.0 && b > 0.0)) take(J[i] + (J[i + 1] - J[i]) * a / (a - b));
    }
  }
  return any;
}

}  // namespace

MountainPassResult mountain_pass(const Solution& first, const GroundStatePair& gs, double t0,
                                 const ForcingPair& forcing, const SystemParams& params, double sab_estimate,
                                 const SolverOpts& opts) {
  opts.validate();
  const auto& g = first.pair.grid();
  const double c0 = energy_J(first.pair, forcing, params);
  const double upper = c0 + (g.s / g.dim) * std::pow(sab_estimate, g.dim / (2.0 * g.s));

  int P = opts.path_nodes;
  for (int restart = 0;; ++restart) {
    MountainPassResult res;
    res.t0 = t0;
    res.c0 = c0;
    res.upper_bound = upper;
    res.restarts = restart;

    std::vector<FieldPair> nodes(P);
    nodes[0] = first.pair;
    for (int i = 1; i < P; ++i) {
      double r = static_cast<double>(i) / (P - 1);
      nodes[i] = first.pair + dilated_ground_state(gs, r * t0, g);
    }
    std::vector<double> J;
    evaluate_all(nodes, forcing, params, J);
    if (!(J.back() < c0)) throw ParameterError("mountain_pass: endpoint energy is not below J(u0, v0)");
    double dummy;
    res.initial_path_crosses_omega = omega_crossings(nodes, J, params, dummy);
    const double span = pair_norm(nodes.back() - nodes.front());

    Solution& cp = res.critical_pair;
    bool collapsed = false;
    std::size_t m = argmax_interior(J);
    int it = 0;
    const double tau = opts.step_size;
    for (; it < opts.max_iters; ++it) {
      m = argmax_interior(J);
      FieldPair gm = grad_J(nodes[m], forcing, params);
      double gnm = pair_norm(gm);
      cp.history.push_back({it, J[m], gnm, psi_region(nodes[m], params).tag});
      if (gnm < opts.grad_tol) {
        cp.converged = true;
        break;
      }
      FieldPair tan = nodes[m + 1] - nodes[m - 1];
      tan *= 1.0 / pair_norm(tan);
      double q = hs_inner(gm, tan);
      nodes[m].axpy(-tau, gm);
      nodes[m].axpy(2.0 * tau * q, tan);
      for (std::size_t i : {m - 1, m + 1}) {
        if (i == 0 || i + 1 == nodes.size()) continue;
        FieldPair gi = grad_J(nodes[i], forcing, params);
        double qi = hs_inner(gi, tan);
        nodes[i].axpy(-tau, gi);
        nodes[i].axpy(tau * qi, tan);
      }
      if ((it + 1) % opts.reparam_every == 0) {
        reparametrize(nodes, 0, m);
        reparametrize(nodes, m, nodes.size() - 1);
        evaluate_all(nodes, forcing, params, J);
        bool all_near = true;
        for (std::size_t i = 1; i + 1 < nodes.size() && all_near; ++i) {
          double d = std::min(pair_norm(nodes[i] - nodes.front()), pair_norm(nodes[i] - nodes.back()));
          if (d > 1e-10 * span) all_near = false;
        }
        if (all_near) {
          collapsed = true;
          break;
        }
      } else {
        for (std::size_t i : {m - 1, m, m + 1}) J[i] = energy_J(nodes[i], forcing, params);
      }
    }
    if (collapsed) {
      if (restart >= opts.max_restarts) throw ConvergenceError("mountain_pass: path collapsed onto an endpoint");
      P *= 2;
      continue;
    }

    evaluate_all(nodes, forcing, params, J);
    m = argmax_interior(J);
    cp.pair = nodes[m];
    cp.iterations = it;
    cp.energy = energy_report(cp.pair, forcing, params);
    res.eta = J[m];
    if (!omega_crossings(nodes, J, params, res.c1_surrogate)) res.c1_surrogate = res.eta;
    res.path = std::move(nodes);
    res.path_J = std::move(J);
    if (!(res.eta < upper))
      throw ConcentrationError("mountain_pass: eta = " + std::to_string(res.eta) +
                               " reaches c0 + (s/N) S^{N/2s} = " + std::to_string(upper) + "; run rejected");
    if (!(res.eta > c0)) throw ConvergenceError("mountain_pass: eta does not exceed c0");
    return res;
  }
}

}  // namespace fracsys
