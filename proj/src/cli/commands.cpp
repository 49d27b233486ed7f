#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>

#include "cli.hpp"
#include "fracsys/kernels.hpp"

namespace fracsys::cli {

using nlohmann::json;

namespace {

class Stopwatch {
 public:
  explicit Stopwatch(json& sink) : sink_(sink), t_(std::chrono::steady_clock::now()) {}
  void lap(const std::string& name) {
    auto now = std::chrono::steady_clock::now();
    sink_["timings_s"][name] = std::chrono::duration<double>(now - t_).count();
    t_ = now;
  }

 private:
  json& sink_;
  std::chrono::steady_clock::time_point t_;
};

json point_json(const std::array<double, 2>& c, int dim) {
  json j = json::array();
  for (int a = 0; a < dim; ++a) j.push_back(c[a]);
  return j;
}

double sq_dist(std::array<double, 2> a, std::array<double, 2> b, int dim) {
  double d = 0.0;
  for (int k = 0; k < dim; ++k) d += (a[k] - b[k]) * (a[k] - b[k]);
  return d;
}

Field gaussian(const GridSpec& g, std::array<double, 2> c, double var) {
  return sample(g, [&](double x, double y) {
    double dy = g.dim == 2 ? y - c[1] : 0.0;
    return std::exp(-((x - c[0]) * (x - c[0]) + dy * dy) / var);
  });
}

json quotient_json(const QuotientResult& q) {
  return {{"value", q.value}, {"iterations", q.iterations}, {"converged", q.converged}, {"grad_norm", q.grad_norm}};
}

}  // namespace

void Context::log(const std::string& msg) const {
  if (verbose) std::cerr << "[fracsys] " << msg << std::endl;
}

json to_json(const Check& c) {
  json j = {{"name", c.name}, {"value", c.value}, {"bound", c.bound}, {"relation", c.relation}, {"pass", c.pass}};
  if (!c.detail.empty()) j["detail"] = c.detail;
  return j;
}

void write_report(const Context& ctx, const Report& r) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = r.command;
  j["config"] = to_json(ctx.cfg);
  j["convention_dependent"] = r.convention_dependent;
  j["convention_free"] = r.convention_free;
  j["status"] = r.exit_code == kOk ? "ok" : "failed";
  j["exit_code"] = r.exit_code;
  std::ofstream os(ctx.path(r.command + ".json"));
  os << j.dump(2) << "\n";
  std::ofstream ms(ctx.path(r.command + ".meta.json"));
  ms << r.meta.dump(2) << "\n";
}

void write_trace(const std::filesystem::path& path, const std::vector<TraceRow>& rows) {
  std::ofstream os(path);
  os << "iter,J,grad_norm,region\n" << std::setprecision(17);
  for (const auto& t : rows) os << t.iter << "," << t.J << "," << t.grad_norm << "," << to_string(t.region) << "\n";
}

Field random_start(const GridSpec& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  int m = 2 + static_cast<int>(3.0 * U(rng));
  std::vector<std::pair<std::array<double, 2>, std::array<double, 2>>> bumps;
  for (int i = 0; i < m; ++i) {
    std::array<double, 2> c{U(rng) - 0.5, g.dim == 2 ? U(rng) - 0.5 : 0.0};
    double amp = 0.5 + U(rng), w = 0.3 + 1.2 * U(rng);
    bumps.push_back({c, {amp, 2.0 * w * w}});
  }
  Field out(g);
  for (const auto& [c, aw] : bumps) out.axpy(aw[0], gaussian(g, c, aw[1]));
  return out;
}

Field random_smooth(const GridSpec& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  int m = 1 + static_cast<int>(5.0 * U(rng));
  Field out(g);
  for (int i = 0; i < m; ++i) {
    double sign = U(rng) < 0.3 ? -1.0 : 1.0;
    double amp = sign * (0.2 + U(rng));
    std::array<double, 2> c{(U(rng) - 0.5) * 0.4 * g.L, g.dim == 2 ? (U(rng) - 0.5) * 0.4 * g.L : 0.0};
    double w = 0.2 + 3.0 * U(rng);
    out.axpy(amp, gaussian(g, c, 2.0 * w * w));
  }
  return out;
}

QuotientRuns ground_state_quotients(const RunConfig& cfg) {
  const auto& g = cfg.grid;
  Field u0 = gaussian(g, {0.0, 0.0}, 0.5) + 0.3 * gaussian(g, {0.3, 0.0}, 0.1);
  Field v0 = 1.3 * gaussian(g, {0.2, 0.0}, 1.0);
  QuotientRuns out;
  out.scalar = minimize_quotient(u0, cfg.quotient);
  out.system = minimize_quotient(FieldPair(u0, v0), cfg.params, cfg.quotient);
  std::mt19937_64 rng(cfg.seed);
  auto better = [](const QuotientResult& a, const QuotientResult& b) {
    if (a.converged != b.converged) return a.converged;
    return a.value < b.value;
  };
  for (int r = 1; r < cfg.ground_state.restarts; ++r) {
    auto qs = minimize_quotient(random_start(g, rng), cfg.quotient);
    if (better(qs, out.scalar)) out.scalar = std::move(qs);
    Field a = random_start(g, rng), b = random_start(g, rng);
    auto qp = minimize_quotient(FieldPair(std::move(a), std::move(b)), cfg.params, cfg.quotient);
    if (better(qp, out.system)) out.system = std::move(qp);
  }
  return out;
}

Alignment align_bubble(const Field& u) {
  const auto& g = u.grid();
  std::size_t im = 0;
  for (std::size_t i = 1; i < u.size(); ++i)
    if (u[i] > u[im]) im = i;
  const double uu = l2_inner(u, u);
  auto cosine = [&](std::array<double, 2> c, double lam) {
    BubbleParams b;
    b.center = c;
    b.scale = lam;
    try {
      Field w = talenti_bubble(b, g);
      return l2_inner(u, w) / std::sqrt(uu * l2_inner(w, w));
    } catch (const std::exception&) {
      return -1.0;
    }
  };
  auto best_scale = [&](std::array<double, 2> c, double* lam_out) {
    double ll = golden_section([&](double l) { return -cosine(c, std::exp(l)); }, std::log(g.h()),
                               std::log(0.25 * g.L), 1e-7);
    if (lam_out) *lam_out = std::exp(ll);
    return cosine(c, std::exp(ll));
  };
  std::array<double, 2> c = g.point(im);
  for (int sweep = 0; sweep < 2; ++sweep) {
    for (int a = 0; a < g.dim; ++a) {
      const double c0 = c[a];
      double x = golden_section(
          [&](double t) {
            auto cc = c;
            cc[a] = t;
            return -best_scale(cc, nullptr);
          },
          c0 - g.h(), c0 + g.h(), 1e-6 * g.h());
      c[a] = x;
    }
  }
  Alignment out;
  out.center = c;
  out.correlation = best_scale(c, &out.scale);
  return out;
}

RatioStats ratio_stats(const FieldPair& p, double tau, double rel) {
  const double peak = p.u.max();
  double lo = std::numeric_limits<double>::infinity(), hi = -lo, acc = 0.0, dev = 0.0;
  std::size_t cnt = 0;
  for (std::size_t i = 0; i < p.u.size(); ++i) {
    if (!(p.u[i] > rel * peak)) continue;
    double r = p.v[i] / p.u[i];
    lo = std::min(lo, r);
    hi = std::max(hi, r);
    dev = std::max(dev, std::abs(r - tau) / tau);
    acc += r;
    ++cnt;
  }
  RatioStats s;
  if (cnt == 0) return s;
  s.spread = (hi - lo) / tau;
  s.mean = acc / static_cast<double>(cnt);
  s.max_dev = dev;
  return s;
}

double weak_residual(const FieldPair& pair, const ForcingPair& forcing, const SystemParams& params, int count,
                     std::uint64_t seed) {
  const auto& g = pair.grid();
  const double p = params.two_star();
  Field du(g), dv(g);
  kernels::coupling_derivative(pair.u.values(), pair.v.values(), params.alpha, params.beta, params.alpha / p,
                               params.beta / p, true, du.data(), dv.data());
  const double pn = std::sqrt(hs_norm2(pair));
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int k = 0; k < count; ++k) {
    Field phi = random_smooth(g, rng), psi = random_smooth(g, rng);
    double lhs = hs_inner(pair.u, phi) + hs_inner(pair.v, psi);
    double rhs = l2_inner(du, phi) + l2_inner(dv, psi) + l2_inner(forcing.f, phi) + l2_inner(forcing.g, psi);
    double scale = pn * std::sqrt(hs_norm2(phi) + hs_norm2(psi));
    worst = std::max(worst, std::abs(lhs - rhs) / scale);
  }
  return worst;
}

SyntheticInput synthetic_input(const RunConfig& cfg, double sab_estimate) {
  const auto& g = cfg.grid;
  SyntheticInput in;
  in.limit = FieldPair(g);
  in.forcing = ForcingPair::zero(g);
  if (cfg.decompose.include_limit && !cfg.forcing.f.empty()) {
    in.forcing = build_forcing(cfg, sab_estimate);
    in.limit = find_first_solution(in.forcing, cfg.params, cfg.first_solution).pair;
  }
  in.pair = in.limit;
  const double tau = ground_state_ratio(cfg.params);
  const ForcingPair none = ForcingPair::zero(g);
  for (const auto& sb : cfg.decompose.bubbles) {
    BubbleParams bp;
    bp.center = sb.center;
    bp.scale = sb.scale;
    Field w = talenti_bubble(bp, g);
    BubbleFit t;
    t.center = sb.center;
    t.scale = sb.scale;
    t.B = sb.amplitude > 0.0 ? sb.amplitude : ground_state_amplitude(cfg.params);
    t.C = t.B * tau;
    t.fit_correlation = 1.0;
    FieldPair b(t.B * w, t.C * w);
    t.energy = energy_I(b, none, cfg.params);
    in.pair += b;
    in.truth.push_back(t);
  }
  return in;
}

json bubble_json(const BubbleFit& b, int dim) {
  return {{"center", point_json(b.center, dim)}, {"scale", b.scale}, {"B", b.B}, {"C", b.C},
          {"fit_correlation", b.fit_correlation}, {"energy", b.energy}};
}

Report cmd_constants(const Context& ctx) {
  const auto& c = ctx.cfg;
  Report r{"constants"};
  Stopwatch sw(r.meta);
  const auto& P = c.params;
  auto& cf = r.convention_free;
  cf["two_star"] = c.grid.two_star();
  cf["C0"] = c0_threshold(c.grid, P);
  cf["lemma_S_factor"] = {{"formula", lemma_S_factor(P.alpha, P.beta)},
                          {"oracle", lemma_S_factor_oracle(P.alpha, P.beta)},
                          {"shipped", lemma_S_factor_oracle(P.alpha, P.beta)}};
  cf["ground_state_ratio"] = ground_state_ratio(P);
  json table = json::array();
  for (double mu : c.constants.mu) {
    json row = {{"mu", mu}, {"h_at_1", h_tau(1.0, mu, P)}, {"h_at_1_identity", 2.0 * std::pow(1.0 + mu, -2.0 / P.two_star())}};
    try {
      double t = tau0_solve(mu, P);
      row["tau0"] = t;
      row["tau0_golden"] = tau0_golden(mu, P);
      row["h_min"] = h_tau(t, mu, P);
    } catch (const MuOutOfRangeError& e) {
      row["error"] = e.what();
    }
    table.push_back(row);
  }
  cf["tau0"] = table;
  cf["tau0_mu_to_0"] = tau0_solve(1e-8, P);
  ctx.log("tau0 table done");

  std::ofstream os(ctx.path("h_curve.csv"));
  os << "tau,h\n" << std::setprecision(17);
  const auto& k = c.constants;
  for (int i = 0; i < k.h_points; ++i) {
    double t = k.h_tau_min * std::pow(k.h_tau_max / k.h_tau_min, static_cast<double>(i) / (k.h_points - 1));
    os << t << "," << h_tau(t, k.h_mu, P) << "\n";
  }
  sw.lap("closed_form");

  auto kc = KappaCache::instance().get(c.grid);
  r.convention_dependent["kappa"] = {{"value", kc.kappa}, {"residual", kc.residual}, {"offset", kc.offset}};
  sw.lap("kappa");
  return r;
}

Report cmd_ground_state(const Context& ctx) {
  const auto& c = ctx.cfg;
  const auto& g = c.grid;
  const auto& P = c.params;
  Report r{"ground_state"};
  Stopwatch sw(r.meta);
  auto kc = KappaCache::instance().get(g);
  sw.lap("kappa");
  auto q = ground_state_quotients(c);
  sw.lap("quotients");
  ctx.log("quotients: S = " + std::to_string(q.scalar.value) + ", S_ab = " + std::to_string(q.system.value));
  write_trace(ctx.path("quotient_scalar.csv"), q.scalar.history);
  write_trace(ctx.path("quotient_system.csv"), q.system.history);
  write_field(ctx.path("gs_scalar_u.bin").string(), q.scalar.minimizer.u, "scalar minimizer");
  write_pair(ctx.path("gs_system").string(), q.system.minimizer);

  const double tau = ground_state_ratio(P);
  const double oracle = lemma_S_factor_oracle(P.alpha, P.beta);
  const double ratio = q.system.value / q.scalar.value;
  const auto rs = ratio_stats(q.system.minimizer, tau);
  const auto as = align_bubble(q.scalar.minimizer.u);
  const auto ap = align_bubble(q.system.minimizer.u);
  sw.lap("alignment");

  // Dilation path of the ground-state pair.
  GroundStatePair gs;
  gs.bubble.center = c.ground_state.center;
  gs.bubble.scale = c.ground_state.scale;
  gs.B = amplitude_for_t_prime(P, g.s, c.ground_state.t_prime);
  gs.C = gs.B * tau;
  const ForcingPair none = ForcingPair::zero(g);
  const double tp = t_prime(gs.B, gs.C, P, g.s);
  auto neg_j = [&](double lt) {
    try {
      return -energy_J(dilated_ground_state(gs, std::exp(lt), g), none, P);
    } catch (const BoundaryDecayError&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  const double t_hi = std::min(4.0 * tp, 0.25 * g.L / gs.bubble.scale);
  const double t_arg = std::exp(golden_section(neg_j, std::log(0.25 * tp), std::log(t_hi), 1e-8));
  const double sup_j = -neg_j(std::log(t_arg));
  const double level = g.s / g.dim * std::pow(q.system.value, g.dim / (2.0 * g.s));
  sw.lap("dilation_path");

  // Ground-state solution: the system minimizer scaled so that ||(u,v)||^2 equals the coupling integral.
  const FieldPair& m = q.system.minimizer;
  FieldPair sol = std::pow(hs_norm2(m) / coupling_integral(m, P), 1.0 / (P.two_star() - 2.0)) * m;
  const double i_sol = energy_I(sol, none, P);

  auto& cd = r.convention_dependent;
  cd["S_scalar"] = quotient_json(q.scalar);
  cd["S_system"] = quotient_json(q.system);
  cd["kappa"] = {{"value", kc.kappa}, {"residual", kc.residual}};
  cd["ground_state_energy"] = i_sol;
  cd["level_s_over_N_S_pow"] = level;
  cd["dilation_path"] = {{"B", gs.B}, {"C", gs.C}, {"sup_J", sup_j}};
  auto& cf = r.convention_free;
  cf["system_over_scalar"] = ratio;
  cf["lemma_S_factor_oracle"] = oracle;
  cf["lemma_S_factor_rel_error"] = std::abs(ratio / oracle - 1.0);
  cf["ratio_v_over_u"] = {{"mean", rs.mean}, {"spread", rs.spread}, {"max_dev_from_tau", rs.max_dev}, {"tau", tau}};
  cf["bubble_correlation"] = {{"scalar", as.correlation}, {"system_u", ap.correlation}};
  cf["ground_state_energy_over_level"] = i_sol / level;
  cf["dilation_path"] = {{"t_prime_formula", tp}, {"t_argmax", t_arg}, {"sup_J_over_level", sup_j / level}};
  cf["converged"] = q.scalar.converged && q.system.converged;
  if (!(q.scalar.converged && q.system.converged)) r.exit_code = kSolverError;
  return r;
}

Report cmd_two_solutions(const Context& ctx) {
  const auto& c = ctx.cfg;
  const auto& g = c.grid;
  const auto& P = c.params;
  Report r{"two_solutions"};
  Stopwatch sw(r.meta);
  auto q = minimize_quotient(FieldPair(gaussian(g, {0.0, 0.0}, 0.5) + 0.3 * gaussian(g, {0.3, 0.0}, 0.1),
                                       1.3 * gaussian(g, {0.2, 0.0}, 1.0)),
                             P, c.quotient);
  if (!q.converged) throw ConvergenceError("two-solutions: S_ab estimate did not converge");
  const double sab = q.value;
  sw.lap("sab_estimate");
  const ForcingPair F = build_forcing(c, sab);
  const double thr = admissibility_threshold(g, P, sab);
  const double dn = std::max(dual_norm(F.f), dual_norm(F.g));
  if (!forcing_admissible(F, P, sab)) {
    std::ostringstream os;
    os << "forcing not admissible: max dual norm " << dn << " >= threshold " << thr
       << " (C0 * S_ab^{N/4s} with discrete S_ab " << sab << ")";
    throw ConfigError(os.str());
  }
  auto& cd = r.convention_dependent;
  auto& cf = r.convention_free;
  cd["S_system"] = sab;
  cd["forcing"] = {{"dual_norm_f", dual_norm(F.f)}, {"dual_norm_g", dual_norm(F.g)}, {"threshold", thr}};
  cf["forcing_fraction_of_threshold"] = dn / thr;

  auto s1 = find_first_solution(F, P, c.first_solution);
  sw.lap("first_solution");
  write_trace(ctx.path("first_solution.csv"), s1.history);
  write_pair(ctx.path("first").string(), s1.pair);
  bool omega1 = true;
  for (const auto& t : s1.history) omega1 = omega1 && t.region == Region::Omega1;
  ctx.log("first solution: J = " + std::to_string(s1.energy.J_value));

  GroundStatePair gs;
  gs.bubble.center = c.ground_state.center;
  gs.bubble.scale = c.ground_state.scale;
  gs.B = amplitude_for_t_prime(P, g.s, c.ground_state.t_prime);
  gs.C = gs.B * ground_state_ratio(P);
  auto t0 = choose_t0(s1.pair, gs, F, P);
  sw.lap("choose_t0");
  json sweep = json::array();
  for (const auto& f : t0.sweep)
    sweep.push_back({{"t", f.t}, {"psi_negative", f.psi_negative}, {"below_c0", f.below_c0}});
  cf["t0"] = {{"t0", t0.t0}, {"sweep", sweep}};

  auto mp = mountain_pass(s1, gs, t0.t0, F, P, sab, c.mountain_pass);
  sw.lap("mountain_pass");
  write_trace(ctx.path("mountain_pass.csv"), mp.critical_pair.history);
  write_pair(ctx.path("second").string(), mp.critical_pair.pair);
  {
    std::ofstream os(ctx.path("mountain_pass_path.csv"));
    os << "node,J\n" << std::setprecision(17);
    for (std::size_t i = 0; i < mp.path_J.size(); ++i) os << i << "," << mp.path_J[i] << "\n";
  }
  ctx.log("mountain pass: eta = " + std::to_string(mp.eta));

  const auto& p1 = s1.pair;
  const auto& p2 = mp.critical_pair.pair;
  auto asym = [](const FieldPair& p) { return std::sqrt(hs_norm2(p.u - p.v) / hs_norm2(p)); };
  const int pairs = c.verify.test_pairs;
  cd["first"] = {{"J", s1.energy.J_value}, {"grad_norm", s1.energy.grad_norm}, {"psi", s1.energy.region.psi_value}};
  cd["second"] = {{"J", mp.critical_pair.energy.J_value}, {"grad_norm", mp.critical_pair.energy.grad_norm}};
  cd["c0"] = mp.c0;
  cd["eta"] = mp.eta;
  cd["upper_bound"] = mp.upper_bound;
  cd["c1_surrogate"] = mp.c1_surrogate;
  cf["first"] = {{"converged", s1.converged},
                 {"iterations", s1.iterations},
                 {"J_negative", s1.energy.J_value < 0.0},
                 {"omega1_throughout", omega1},
                 {"min_u_positive", p1.u.min() > 0.0},
                 {"min_v_positive", p1.v.min() > 0.0},
                 {"weak_residual", weak_residual(p1, F, P, pairs, c.seed)},
                 {"asymmetry", asym(p1)}};
  cf["second"] = {{"converged", mp.critical_pair.converged},
                  {"iterations", mp.critical_pair.iterations},
                  {"min_u_positive", p2.u.min() > 0.0},
                  {"min_v_positive", p2.v.min() > 0.0},
                  {"weak_residual", weak_residual(p2, F, P, pairs, c.seed + 1)},
                  {"asymmetry", asym(p2)},
                  {"relative_distance", std::sqrt(hs_norm2(p2 - p1) / hs_norm2(p1))}};
  cf["mountain_pass"] = {{"c0_lt_eta", mp.c0 < mp.eta},
                         {"eta_lt_upper", mp.eta < mp.upper_bound},
                         {"eta_ge_c1_surrogate", mp.eta >= mp.c1_surrogate - 1e-6},
                         {"initial_path_crosses_omega", mp.initial_path_crosses_omega},
                         {"restarts", mp.restarts},
                         {"path_nodes", mp.path.size()}};
  sw.lap("diagnostics");
  if (!s1.converged || !mp.critical_pair.converged) r.exit_code = kSolverError;
  return r;
}

Report cmd_decompose(const Context& ctx) {
  const auto& c = ctx.cfg;
  const auto& g = c.grid;
  const auto& P = c.params;
  const int dim = g.dim;
  Report r{"decompose"};
  Stopwatch sw(r.meta);
  DecomposeOpts opts = c.decompose.opts;
  opts.solver = c.first_solution;

  double sab = 0.0;
  const bool need_forcing = !c.forcing.f.empty() && (c.decompose.input == "fields" || c.decompose.include_limit);
  if (need_forcing && c.forcing.units == "threshold_fraction") {
    auto q = ground_state_quotients(c).system;
    if (!q.converged) throw ConvergenceError("decompose: S_ab estimate did not converge");
    sab = q.value;
    r.convention_dependent["S_system"] = sab;
  }
  sw.lap("sab_estimate");

  Decomposition d;
  std::vector<BubbleFit> truth;
  if (c.decompose.input == "synthetic") {
    auto in = synthetic_input(c, sab);
    truth = in.truth;
    write_pair(ctx.path("input").string(), in.pair);
    sw.lap("input");
    d = profile_decompose_with_limit(in.pair, in.limit, in.forcing, P, opts);
  } else {
    FieldPair in(read_field(c.decompose.input_stem + "_u.bin", g.zero_mode),
                 read_field(c.decompose.input_stem + "_v.bin", g.zero_mode));
    if (!(in.u.grid() == g) || !(in.v.grid() == g))
      throw ConfigError("decompose: input fields are not on the configured grid");
    ForcingPair F = need_forcing ? build_forcing(c, sab) : ForcingPair::zero(g);
    d = profile_decompose(in, F, P, opts);
  }
  sw.lap("decompose");
  write_pair(ctx.path("residual").string(), d.residual);
  write_pair(ctx.path("limit").string(), d.limit_pair);
  auto idem = profile_decompose(d.residual, ForcingPair::zero(g), P, opts);
  sw.lap("idempotence");

  auto& cd = r.convention_dependent;
  auto& cf = r.convention_free;
  json bubbles = json::array();
  json shape = json::array();
  for (const auto& b : d.bubbles) {
    bubbles.push_back(bubble_json(b, dim));
    shape.push_back({{"center", point_json(b.center, dim)},
                     {"scale", b.scale},
                     {"B_over_C", b.B / b.C},
                     {"fit_correlation", b.fit_correlation}});
  }
  cd["bubbles"] = bubbles;
  cd["ledger"] = {{"gamma_input", d.ledger.gamma_input},
                  {"I_limit", d.ledger.I_limit},
                  {"sum_I_bubbles", d.ledger.sum_I_bubbles},
                  {"defect", d.ledger.defect}};
  cd["residual_norm"] = d.residual_norm;
  cf["k"] = d.bubbles.size();
  cf["bubbles"] = shape;
  cf["expected_B_over_C"] = std::sqrt(P.alpha / P.beta);
  cf["residual_relative"] = d.residual_relative;
  cf["ledger_defect_relative"] = d.ledger.gamma_input != 0.0 ? d.ledger.defect / d.ledger.gamma_input : 0.0;
  cf["separation"] = d.separation;
  cf["warning"] = d.warning ? json(*d.warning) : json(nullptr);
  cf["idempotence_k"] = idem.bubbles.size();

  if (!truth.empty()) {
    json rec = json::array();
    for (const auto& t : truth) {
      json row = {{"center", point_json(t.center, dim)}, {"scale", t.scale}};
      const BubbleFit* best = nullptr;
      for (const auto& b : d.bubbles)
        if (!best || sq_dist(b.center, t.center, dim) < sq_dist(best->center, t.center, dim)) best = &b;
      if (best) {
        row["center_error_cells"] = std::sqrt(sq_dist(best->center, t.center, dim)) / g.h();
        row["scale_rel_error"] = std::abs(best->scale / t.scale - 1.0);
        row["amplitude_rel_error"] = std::max(std::abs(best->B / t.B - 1.0), std::abs(best->C / t.C - 1.0));
      }
      rec.push_back(row);
    }
    cf["recovery"] = rec;
    cf["expected_k"] = truth.size();
  }
  return r;
}

}  // namespace fracsys::cli
