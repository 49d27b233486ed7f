#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cli.hpp"
#include "fracsys/kernels.hpp"

namespace fracsys::cli {

using nlohmann::json;

namespace {

class Suite {
 public:
  explicit Suite(const Context& ctx) : ctx_(ctx) {}

  Check& below(const std::string& name, double value, double bound, json detail = json::object()) {
    return add(name, value, bound, "<", value < bound, std::move(detail));
  }
  Check& above(const std::string& name, double value, double bound, json detail = json::object()) {
    return add(name, value, bound, ">", value > bound, std::move(detail));
  }
  Check& flag(const std::string& name, bool ok, json detail = json::object()) {
    return add(name, ok ? 1.0 : 0.0, 0.5, ">", ok, std::move(detail));
  }

  const std::vector<Check>& checks() const { return checks_; }

 private:
  Check& add(const std::string& name, double value, double bound, const char* rel, bool pass, json detail) {
    Check c{name, value, bound, rel, pass, std::move(detail)};
    ctx_.log(std::string(pass ? "PASS " : "FAIL ") + name);
    checks_.push_back(std::move(c));
    return checks_.back();
  }
  const Context& ctx_;
  std::vector<Check> checks_;
};

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), std::numeric_limits<double>::min()); }

void core_checks(Suite& s, const RunConfig& c, std::mt19937_64& rng) {
  const auto& g = c.grid;
  Field u = random_smooth(g, rng), v = random_smooth(g, rng);
  Field au = frac_laplacian(u), av = frac_laplacian(v);
  s.below("core.self_adjoint", rel(l2_inner(au, v), l2_inner(u, av)), 1e-12);
  s.below("core.energy_identity", rel(hs_inner(u, u), l2_inner(au, u)), 1e-12);
  Field f = random_smooth(g, rng);
  Field back = frac_laplacian(riesz_representative(f));
  s.below("core.riesz_inversion", std::sqrt(l2_inner(back - f, back - f) / l2_inner(f, f)), 1e-10);

  GridSpec fine = g;
  fine.n *= 2;
  auto bump = [](double x, double y) { return std::exp(-(x * x + y * y) / 2.0); };
  Field a = sample(g, bump), b = sample(fine, bump);
  double p = g.two_star();
  s.below("core.refinement_integral_power", rel(integral_power(a, p), integral_power(b, p)), 1e-6);
}

void bubble_checks(Suite& s, const RunConfig& c) {
  const auto& g = c.grid;
  auto kc = KappaCache::instance().get(g);
  s.below("bubbles.kappa_residual", kc.residual, 1e-2, {{"kappa", kc.kappa}});
  BubbleParams bp;
  bp.scale = c.ground_state.scale;
  Field w = talenti_bubble(bp, g);
  s.above("bubbles.positivity", w.min() / w.max(), 0.0);
  Field gsn = sample(g, [](double x, double y) { return std::exp(-(x * x + y * y) / 2.0); });
  Field twice = rescale_translate(rescale_translate(gsn, 2.0, {0.0, 0.0}), 2.0, {0.0, 0.0});
  Field once = rescale_translate(gsn, 4.0, {0.0, 0.0});
  s.below("bubbles.group_action", std::sqrt(l2_inner(twice - once, twice - once) / l2_inner(once, once)), 1e-10);
}

void functional_checks(Suite& s, const RunConfig& c, std::mt19937_64& rng) {
  const auto& g = c.grid;
  const auto& P = c.params;
  double worst = 0.0;
  json taus = json::array();
  for (double mu : {1e-6, 1e-4, 1e-2}) {
    double a = tau0_solve(mu, P), b = tau0_golden(mu, P);
    worst = std::max(worst, std::abs(a - b));
    taus.push_back({{"mu", mu}, {"root", a}, {"golden", b}});
  }
  s.below("functionals.tau0_argmin", worst, 1e-8, {{"table", taus}});
  s.below("functionals.tau0_mu_to_zero", rel(tau0_solve(1e-8, P), ground_state_ratio(P)), 1e-4);
  double hid = 0.0;
  for (double mu : {1e-6, 1e-4, 1e-2})
    hid = std::max(hid, std::abs(h_tau(1.0, mu, P) - 2.0 * std::pow(1.0 + mu, -2.0 / P.two_star())));
  s.below("functionals.h_at_one_identity", hid, 1e-12);
  s.below("functionals.mu_zero_consistency",
          std::abs(h_tau(ground_state_ratio(P), 0.0, P) - lemma_S_factor_oracle(P.alpha, P.beta)), 1e-10);

  const ForcingPair none = ForcingPair::zero(g);
  double nd = 0.0;
  int region_bad = 0;
  for (int k = 0; k < 20; ++k) {
    Field a = random_start(g, rng), b = random_start(g, rng);
    FieldPair pr(a, b);
    double lam = nehari_scale(pr, P);
    double eps = 1e-5 * lam;
    double d = (energy_J((lam + eps) * pr, none, P) - energy_J((lam - eps) * pr, none, P)) / (2.0 * eps);
    nd = std::max(nd, std::abs(d) / (lam * hs_norm2(pr)));
    FieldPair scaled = (0.5 + 2.0 * std::uniform_real_distribution<double>(0.0, 1.0)(rng)) * pr;
    double ls = nehari_scale(scaled, P);
    auto tag = psi_region(scaled, P).tag;
    if ((ls > 1.0 && tag != Region::Omega1) || (ls < 1.0 && tag != Region::Omega2)) ++region_bad;
  }
  s.below("functionals.nehari_derivative", nd, 1e-8);
  s.below("functionals.region_consistency", region_bad, 0.5);

  std::uniform_real_distribution<double> Q(-10.0, 10.0);
  const double p = P.two_star();
  json bad = json::object();
  int total_bad = 0;
  for (double eps : {0.1, 0.01}) {
    const double C = splitting_C_eps(eps, P.alpha, P.beta);
    int nb = 0;
    for (int k = 0; k < c.verify.quadruples; ++k) {
      double x = Q(rng), y = Q(rng), a = Q(rng), b = Q(rng);
      double lhs = std::abs(std::pow(std::abs(x + a), P.alpha) * std::pow(std::abs(y + b), P.beta) -
                            std::pow(std::abs(x), P.alpha) * std::pow(std::abs(y), P.beta));
      double rhs = eps * (std::pow(std::abs(x), p) + std::pow(std::abs(y), p)) +
                   C * (std::pow(std::abs(a), p) + std::pow(std::abs(b), p));
      if (lhs > rhs) ++nb;
    }
    bad[std::to_string(eps)] = {{"C_eps", C}, {"violations", nb}};
    total_bad += nb;
  }
  s.below("functionals.splitting_inequality", total_bad, 0.5, bad);
}

struct Pipeline {
  double sab = 0.0;
  ForcingPair forcing;
  Solution first;
  MountainPassResult mp;
  std::vector<T0Flags> sweep;
};

Pipeline run_pipeline(const RunConfig& c, double sab) {
  Pipeline out;
  out.sab = sab;
  out.forcing = build_forcing(c, sab);
  out.first = find_first_solution(out.forcing, c.params, c.first_solution);
  GroundStatePair gs;
  gs.bubble.center = c.ground_state.center;
  gs.bubble.scale = c.ground_state.scale;
  gs.B = amplitude_for_t_prime(c.params, c.grid.s, c.ground_state.t_prime);
  gs.C = gs.B * ground_state_ratio(c.params);
  auto t0 = choose_t0(out.first.pair, gs, out.forcing, c.params);
  out.sweep = t0.sweep;
  out.mp = mountain_pass(out.first, gs, t0.t0, out.forcing, c.params, sab, c.mountain_pass);
  return out;
}

double asymmetry(const FieldPair& p) { return std::sqrt(hs_norm2(p.u - p.v) / hs_norm2(p)); }

Pipeline solver_checks(Suite& s, const RunConfig& c, json& dep) {
  const auto& g = c.grid;
  const auto& P = c.params;
  auto q = ground_state_quotients(c);
  const double tau = ground_state_ratio(P);
  const double oracle = lemma_S_factor_oracle(P.alpha, P.beta);
  dep["S_scalar"] = q.scalar.value;
  dep["S_system"] = q.system.value;
  s.below("solvers.lemma_S_factor_ratio", rel(q.system.value / q.scalar.value, oracle), 0.02,
          {{"ratio", q.system.value / q.scalar.value}, {"oracle", oracle}});
  s.above("solvers.scalar_bubble_correlation", align_bubble(q.scalar.minimizer.u).correlation, 0.999);

  std::mt19937_64 rng(c.seed + 17);
  double spread = 0.0, dev = 0.0, corr = 1.0, vmin = 1e300, vmax = -1e300;
  int conv = 0;
  for (int k = 0; k < c.verify.random_starts; ++k) {
    Field a = random_start(g, rng), b = random_start(g, rng);
    auto r = minimize_quotient(FieldPair(std::move(a), std::move(b)), P, c.quotient);
    conv += r.converged;
    auto st = ratio_stats(r.minimizer, tau);
    spread = std::max(spread, st.spread);
    dev = std::max(dev, st.max_dev);
    corr = std::min(corr, align_bubble(r.minimizer.u).correlation);
    vmin = std::min(vmin, r.value);
    vmax = std::max(vmax, r.value);
  }
  s.flag("solvers.random_starts_converged", conv == c.verify.random_starts, {{"converged", conv}});
  s.below("solvers.ratio_constant", spread, 1e-3);
  s.below("solvers.ratio_equals_tau", dev, 1e-3);
  s.above("solvers.min_bubble_correlation", corr, 0.999);
  dep["random_start_values"] = {vmin, vmax};

  Pipeline pl = run_pipeline(c, q.system.value);
  const auto& s1 = pl.first;
  const auto& mp = pl.mp;
  const auto& p1 = s1.pair;
  const auto& p2 = mp.critical_pair.pair;
  bool omega1 = true, mono = true;
  for (std::size_t i = 0; i < s1.history.size(); ++i) {
    omega1 = omega1 && s1.history[i].region == Region::Omega1;
    if (i > 0) mono = mono && s1.history[i].J <= s1.history[i - 1].J + 1e-12 * std::abs(s1.history[i - 1].J);
  }
  dep["c0"] = mp.c0;
  dep["eta"] = mp.eta;
  dep["upper_bound"] = mp.upper_bound;
  s.below("solvers.first_grad_norm", s1.energy.grad_norm, 1e-6, {{"converged", s1.converged}});
  s.below("solvers.first_J_negative", s1.energy.J_value, 0.0);
  s.flag("solvers.first_omega1_throughout", omega1);
  s.flag("solvers.first_descent_monotone", mono);
  s.above("solvers.first_min_positive", std::min(p1.u.min(), p1.v.min()), 0.0);
  s.below("solvers.first_weak_residual", weak_residual(p1, pl.forcing, P, c.verify.test_pairs, c.seed), 1e-5);

  bool seen_true = false, ordered = true;
  for (const auto& f : pl.sweep) {
    bool both = f.psi_negative && f.below_c0;
    if (seen_true && !both) ordered = false;
    seen_true = seen_true || both;
  }
  s.flag("solvers.t0_flags_eventually_true", ordered && seen_true);
  s.flag("solvers.initial_path_crosses_omega", mp.initial_path_crosses_omega);
  s.above("solvers.eta_minus_c0", mp.eta - mp.c0, 0.0);
  s.below("solvers.eta_minus_upper", mp.eta - mp.upper_bound, 0.0);
  s.above("solvers.eta_minus_c1_surrogate", mp.eta - mp.c1_surrogate, -1e-6);
  s.below("solvers.second_grad_norm", mp.critical_pair.energy.grad_norm, 1e-6);
  s.above("solvers.second_min_positive", std::min(p2.u.min(), p2.v.min()), 0.0);
  s.above("solvers.second_distance", std::sqrt(hs_norm2(p2 - p1) / hs_norm2(p1)), 1e-2);
  s.below("solvers.second_weak_residual", weak_residual(p2, pl.forcing, P, c.verify.test_pairs, c.seed + 1), 1e-5);
  s.above("solvers.asymmetry_first", asymmetry(p1), 1e-3);
  s.above("solvers.asymmetry_second", asymmetry(p2), 1e-3);

  // alpha = beta with f and g centered apart.
  RunConfig eq = c;
  eq.params.alpha = eq.params.beta = 0.5 * g.two_star();
  eq.forcing.units = "threshold_fraction";
  eq.forcing.f = {Bump{{-0.5, 0.0}, 1.0, 1.0}};
  eq.forcing.g = {Bump{{0.5, 0.0}, 1.0, 1.0}};
  auto qe = minimize_quotient(FieldPair(q.system.minimizer.u, q.system.minimizer.u), eq.params, c.quotient);
  Pipeline pe = run_pipeline(eq, qe.value);
  s.above("solvers.asymmetry_equal_exponents_first", asymmetry(pe.first.pair), 1e-3);
  s.above("solvers.asymmetry_equal_exponents_second", asymmetry(pe.mp.critical_pair.pair), 1e-3);
  return pl;
}

void decomposition_checks(Suite& s, const RunConfig& c, const Pipeline& pl, json& dep) {
  const auto& g = c.grid;
  const auto& P = c.params;
  const double B = ground_state_amplitude(P), C = B * ground_state_ratio(P);
  const ForcingPair none = ForcingPair::zero(g);
  auto bubble = [&](double lam, double x) {
    BubbleParams bp;
    bp.scale = lam;
    bp.center = {x, 0.0};
    Field w = talenti_bubble(bp, g);
    return FieldPair(B * w, C * w);
  };
  const double level = g.s / g.dim * std::pow(pl.sab, g.dim / (2.0 * g.s));
  DecomposeOpts opts = c.decompose.opts;
  opts.solver = c.first_solution;

  struct Case {
    const char* name;
    std::vector<std::pair<double, double>> bubbles;
  };
  const std::vector<Case> cases = {{"one_bubble", {{g.L / 50.0, -g.L / 4.0}}},
                                   {"two_bubbles", {{g.L / 50.0, -g.L / 4.0}, {g.L / 400.0, g.L / 4.0}}}};
  for (const auto& cs : cases) {
    const std::string pre = std::string("decomposition.") + cs.name + ".";
    FieldPair in = pl.first.pair;
    for (auto [lam, x] : cs.bubbles) in += bubble(lam, x);
    auto d = profile_decompose_with_limit(in, pl.first.pair, pl.forcing, P, opts);
    s.below(pre + "k_error", std::abs(static_cast<double>(d.bubbles.size()) - cs.bubbles.size()), 0.5);
    double ce = 0.0, se = 0.0, re = 0.0, floor_gap = -1e300;
    for (auto [lam, x] : cs.bubbles) {
      const BubbleFit* best = nullptr;
      for (const auto& b : d.bubbles)
        if (!best || std::abs(b.center[0] - x) < std::abs(best->center[0] - x)) best = &b;
      if (!best) {
        ce = se = re = 1e300;
        continue;
      }
      ce = std::max(ce, std::abs(best->center[0] - x) / g.h());
      se = std::max(se, std::abs(best->scale / lam - 1.0));
      re = std::max(re, rel(best->B / best->C, std::sqrt(P.alpha / P.beta)));
    }
    for (const auto& b : d.bubbles) floor_gap = std::max(floor_gap, (level - b.energy) / level);
    s.below(pre + "center_error_cells", ce, 1.0);
    s.below(pre + "scale_rel_error", se, 0.1);
    s.below(pre + "amplitude_ratio_error", re, 1e-2);
    s.below(pre + "energy_floor_gap", floor_gap, 0.05);
    const double defect = std::abs(d.ledger.defect / d.ledger.gamma_input);
    s.below(pre + "ledger_defect", defect, 0.01,
            {{"gamma_input", d.ledger.gamma_input}, {"I_limit", d.ledger.I_limit}, {"sum_I_bubbles", d.ledger.sum_I_bubbles}});
    auto idem = profile_decompose(d.residual, none, P, opts);
    s.below(pre + "idempotence_k", static_cast<double>(idem.bubbles.size()), 0.5);
  }

  // Concentration sweep of the coupling defect.
  FieldPair base = bubble(1.0, 0.0);
  const double ref = coupling_integral(base, P);
  std::vector<double> bl;
  for (double lam : {0.8, 0.1, 0.0125}) bl.push_back(brezis_lieb_defect(base, bubble(lam, 3.0), P) / ref);
  s.flag("decomposition.brezis_lieb_monotone", bl[0] > bl[1] && bl[1] > bl[2], {{"sweep", bl}});
  s.below("decomposition.brezis_lieb_final", bl[2], 1e-3);

  FieldPair w = bubble(0.5, 0.0);
  const double m0 = morrey_pair_norm(w);
  double mi = 0.0;
  for (double r : {0.5, 2.0}) mi = std::max(mi, rel(morrey_pair_norm(rescale_translate(w, r, {0.0, 0.0})), m0));
  s.below("decomposition.morrey_invariance", mi, 1e-6);

  std::mt19937_64 rng(c.seed + 29);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<double> ir, er;
  const double theta = 2.0 / g.two_star();
  for (int k = 0; k < c.verify.corpus_random; ++k) {
    Field a = random_smooth(g, rng), b = random_smooth(g, rng);
    FieldPair p(std::move(a), std::move(b));
    ir.push_back(interpolation_ratio(p, theta));
    er.push_back(morrey_embedding_ratio(p));
  }
  for (int k = 0; k < c.verify.corpus_bubbles; ++k) {
    FieldPair p = bubble(0.05 + 1.5 * U(rng), -5.0 + 10.0 * U(rng));
    ir.push_back(interpolation_ratio(p, theta));
    er.push_back(morrey_embedding_ratio(p));
  }
  auto max_over_median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v.back() / v[v.size() / 2];
  };
  s.below("decomposition.interpolation_corpus", max_over_median(ir), 2.0);
  s.below("decomposition.embedding_corpus", max_over_median(er), 2.0);
  dep["bubble_level"] = level;
}

}  // namespace

Report cmd_verify(const Context& ctx) {
  const auto& c = ctx.cfg;
  Report r{"verify"};
  auto t = std::chrono::steady_clock::now();
  Suite s(ctx);
  std::mt19937_64 rng(c.seed);
  core_checks(s, c, rng);
  bubble_checks(s, c);
  functional_checks(s, c, rng);
  json dep = json::object();
  Pipeline pl = solver_checks(s, c, dep);
  decomposition_checks(s, c, pl, dep);

  json checks = json::array();
  int failed = 0;
  for (const auto& ch : s.checks()) {
    checks.push_back(to_json(ch));
    failed += !ch.pass;
  }
  r.convention_free["checks"] = checks;
  r.convention_free["failed"] = failed;
  r.convention_free["total"] = s.checks().size();
  r.convention_dependent = dep;
  r.meta["timings_s"]["verify"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
  if (failed > 0) r.exit_code = kInvariantFailure;
  return r;
}

namespace {

std::string utc_now() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

void write_marker(const std::filesystem::path& out, const std::string& command, int code, const std::string& msg) {
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  std::ofstream os(out / "FAILED");
  os << json{{"command", command}, {"exit_code", code}, {"message", msg}}.dump(2) << "\n";
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Numerical experiments for a critical fractional elliptic system"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  bool verbose = false;
  app.add_option("--config", config_path, "Run configuration (JSON)");
  app.add_option("--out", out_dir, "Output directory (env FRACSYS_OUT)");
  app.add_option("--seed", seed, "Random seed");
  app.add_option("--threads", threads, "OpenMP threads (env FRACSYS_THREADS)");
  app.add_flag("-v,--verbose", verbose, "Progress on stderr");

  using Cmd = Report (*)(const Context&);
  const std::vector<std::tuple<std::string, std::string, Cmd>> cmds = {
      {"constants", "Closed-form constants, tau0 table and the h curve", cmd_constants},
      {"ground-state", "Best constants S and S_ab and ground-state structure", cmd_ground_state},
      {"two-solutions", "First solution and mountain-pass second solution", cmd_two_solutions},
      {"decompose", "Profile decomposition of a synthetic or stored pair", cmd_decompose},
      {"verify", "Full invariant suite; exit 4 on any failure", cmd_verify}};
  for (const auto& [name, help, fn] : cmds) app.add_subcommand(name, help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }
  std::string name;
  Cmd fn = nullptr;
  for (const auto& [n, h, f] : cmds)
    if (app.got_subcommand(n)) {
      name = n;
      fn = f;
    }

  Context ctx;
  ctx.verbose = verbose;
  try {
    ctx.cfg = config_path.empty() ? parse_config("{\"schema_version\": 1}", "<defaults>") : load_config(config_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }
  if (const char* env = std::getenv("FRACSYS_OUT"); env && *env) ctx.cfg.out_dir = env;
  if (!out_dir.empty()) ctx.cfg.out_dir = out_dir;
  if (const char* env = std::getenv("FRACSYS_THREADS"); env && *env) {
    try {
      ctx.cfg.threads = std::stoi(env);
    } catch (const std::exception&) {
      std::cerr << "config error: FRACSYS_THREADS is not an integer\n";
      return kConfigError;
    }
  }
  if (threads) ctx.cfg.threads = *threads;
  if (seed) ctx.cfg.seed = *seed;
  if (ctx.cfg.threads < 0) {
    std::cerr << "config error: threads must be nonnegative\n";
    return kConfigError;
  }
  ctx.out = ctx.cfg.out_dir;

  std::error_code ec;
  std::filesystem::create_directories(ctx.out, ec);
  if (ec) {
    std::cerr << "config error: cannot create " << ctx.out << ": " << ec.message() << "\n";
    return kConfigError;
  }
  std::filesystem::remove(ctx.out / "FAILED", ec);
  if (ctx.cfg.threads > 0) kernels::set_threads(ctx.cfg.threads);
  if (!ctx.cfg.kappa_cache.empty() && std::filesystem::exists(ctx.cfg.kappa_cache))
    KappaCache::instance().load(ctx.cfg.kappa_cache);

  const std::string started = utc_now();
  const auto t0 = std::chrono::steady_clock::now();
  int code = kOk;
  std::string msg;
  try {
    Report r = fn(ctx);
    r.meta["command"] = name;
    r.meta["started_at"] = started;
    r.meta["finished_at"] = utc_now();
    r.meta["wall_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.meta["threads"] = kernels::max_threads();
    r.meta["out_dir"] = ctx.out.string();
    r.meta["config_path"] = config_path;
    write_report(ctx, r);
    code = r.exit_code;
    if (code != kOk) msg = name + " finished with failures; see " + (ctx.out / (r.command + ".json")).string();
  } catch (const ConfigError& e) {
    code = kConfigError;
    msg = e.what();
  } catch (const ParameterError& e) {
    code = kConfigError;
    msg = e.what();
  } catch (const BoundaryDecayError& e) {
    code = kConfigError;
    msg = e.what();
  } catch (const MuOutOfRangeError& e) {
    code = kConfigError;
    msg = e.what();
  } catch (const ConvergenceError& e) {
    code = kSolverError;
    msg = e.what();
  } catch (const RegionEscapeError& e) {
    code = kSolverError;
    msg = e.what();
  } catch (const ConcentrationError& e) {
    code = kSolverError;
    msg = e.what();
  } catch (const DegenerateDirectionError& e) {
    code = kSolverError;
    msg = e.what();
  } catch (const BoxTooSmallError& e) {
    code = kSolverError;
    msg = e.what();
  } catch (const std::exception& e) {
    code = 1;
    msg = e.what();
  }
  if (!ctx.cfg.kappa_cache.empty()) KappaCache::instance().save(ctx.cfg.kappa_cache);
  if (code != kOk) {
    write_marker(ctx.out, name, code, msg);
    std::cerr << name << ": " << msg << "\n";
  }
  return code;
}

}  // namespace fracsys::cli
