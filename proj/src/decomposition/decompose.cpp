#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "fracsys/decomposition.hpp"

namespace fracsys {

namespace {

double periodic_distance(const GridSpec& g, std::array<double, 2> a, std::array<double, 2> b) {
  double r2 = 0.0;
  for (int k = 0; k < g.dim; ++k) {
    double d = std::abs(a[k] - b[k]);
    d = std::fmod(d, 2.0 * g.L);
    d = std::min(d, 2.0 * g.L - d);
    r2 += d * d;
  }
  return std::sqrt(r2);
}

double wrap(double x, double L) {
  double w = 2.0 * L;
  return x - w * std::floor((x + L) / w);
}

// Downhill simplex; returns the minimizer.
std::vector<double> nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
                                const std::vector<double>& step, int max_evals, double xtol) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> s(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) s[i + 1][i] += step[i];
  std::vector<double> fv(n + 1);
  for (std::size_t i = 0; i <= n; ++i) fv[i] = f(s[i]);
  int evals = static_cast<int>(n + 1);
  auto lerp = [&](const std::vector<double>& a, const std::vector<double>& b, double t) {
    std::vector<double> r(n);
    for (std::size_t k = 0; k < n; ++k) r[k] = a[k] + t * (b[k] - a[k]);
    return r;
  };
  while (evals < max_evals) {
    std::vector<std::size_t> ord(n + 1);
    for (std::size_t i = 0; i <= n; ++i) ord[i] = i;
    std::stable_sort(ord.begin(), ord.end(), [&](auto a, auto b) { return fv[a] < fv[b]; });
    std::vector<std::vector<double>> s2;
    std::vector<double> f2;
    for (auto i : ord) {
      s2.push_back(s[i]);
      f2.push_back(fv[i]);
    }
    s = std::move(s2);
    fv = std::move(f2);
    double size = 0.0;
    for (std::size_t i = 1; i <= n; ++i)
      for (std::size_t k = 0; k < n; ++k) size = std::max(size, std::abs(s[i][k] - s[0][k]));
    if (size < xtol) break;

    std::vector<double> c(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) c[k] += s[i][k] / n;
    auto xr = lerp(c, s[n], -1.0);
    double fr = f(xr);
    ++evals;
    if (fr < fv[0]) {
      auto xe = lerp(c, s[n], -2.0);
      double fe = f(xe);
      ++evals;
      if (fe < fr) {
        s[n] = xe;
        fv[n] = fe;
      } else {
        s[n] = xr;
        fv[n] = fr;
      }
    } else if (fr < fv[n - 1]) {
      s[n] = xr;
      fv[n] = fr;
    } else {
      auto xc = lerp(c, s[n], 0.5);
      double fc = f(xc);
      ++evals;
      if (fc < fv[n]) {
        s[n] = xc;
        fv[n] = fc;
      } else {
        for (std::size_t i = 1; i <= n; ++i) {
          s[i] = lerp(s[0], s[i], 0.5);
          fv[i] = f(s[i]);
          ++evals;
        }
      }
    }
  }
  std::size_t b = 0;
  for (std::size_t i = 1; i <= n; ++i)
    if (fv[i] < fv[b]) b = i;
  return s[b];
}

}  // namespace

namespace {

// Windowed cosine between (A ru, A rv) and the best multiple (a A w, c A w),
// A = (-Delta)^s. Also returns the windowed least-squares amplitudes.
struct LocalFit {
  double cosine = 0.0;
  double a = 0.0;
  double c = 0.0;
};

LocalFit local_fit(const Field& aru, const Field& arv, const Field& aw, std::array<double, 2> center, double radius) {
  const auto& g = aw.grid();
  double uw = 0.0, vw = 0.0, ww = 0.0, rr = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (periodic_distance(g, g.point(i), center) > radius) continue;
    uw += aru[i] * aw[i];
    vw += arv[i] * aw[i];
    ww += aw[i] * aw[i];
    rr += aru[i] * aru[i] + arv[i] * arv[i];
  }
  LocalFit f;
  if (!(ww > 0.0) || !(rr > 0.0)) return f;
  f.a = uw / ww;
  f.c = vw / ww;
  f.cosine = std::clamp(std::sqrt((uw * uw + vw * vw) / (ww * rr)), 0.0, 1.0);
  if (uw + vw < 0.0) f.cosine = 0.0;
  return f;
}

}  // namespace

Extraction extract_bubble(const FieldPair& pair, const MorreyScan& scan, const SystemParams& params,
                          const ExtractOpts& opts) {
  const auto& g = pair.grid();
  if (!(scan.value > 0.0)) throw NoBubbleError("extract_bubble: Morrey scan is zero");
  const Field aru = frac_laplacian(pair.u), arv = frac_laplacian(pair.v);

  const int dim = g.dim;
  auto params_at = [&](const std::vector<double>& q) {
    BubbleParams bp;
    for (int k = 0; k < dim; ++k) bp.center[k] = wrap(q[k], g.L);
    bp.scale = std::exp(q[dim]);
    return bp;
  };
  auto objective = [&](const std::vector<double>& q) {
    try {
      auto bp = params_at(q);
      Field aw = frac_laplacian(talenti_bubble(bp, g));
      return -local_fit(aru, arv, aw, bp.center, opts.window_scales * bp.scale).cosine;
    } catch (const std::exception&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  const double lam0 = scan.argmax_radius / rho_star(dim, g.s);
  std::vector<double> q0, step;
  for (int k = 0; k < dim; ++k) {
    q0.push_back(scan.argmax_center[k]);
    step.push_back(0.5 * lam0);
  }
  q0.push_back(std::log(lam0));
  step.push_back(0.4);
  auto q = nelder_mead(objective, q0, step, 400, 1e-7);
  q = nelder_mead(objective, q, step, 400, 1e-9);

  auto bp = params_at(q);
  Field w = talenti_bubble(bp, g);
  Field aw = frac_laplacian(w);
  LocalFit lf = local_fit(aru, arv, aw, bp.center, opts.window_scales * bp.scale);
  Extraction ex;
  ex.fit.center = bp.center;
  ex.fit.scale = bp.scale;
  ex.fit.B = lf.a;
  ex.fit.C = lf.c;
  ex.fit.fit_correlation = lf.cosine;
  if (ex.fit.fit_correlation < opts.fit_threshold)
    throw NoBubbleError("extract_bubble: fit correlation " + std::to_string(ex.fit.fit_correlation) +
                        " below threshold " + std::to_string(opts.fit_threshold));
  FieldPair bubble(ex.fit.B * w, ex.fit.C * w);
  ex.fit.energy = energy_I(bubble, ForcingPair::zero(g), params);
  ex.residual = pair - bubble;
  return ex;
}

void DecomposeOpts::validate() const {
  if (max_bubbles < 0) throw ParameterError("max_bubbles must be >= 0");
  if (!(residual_tol > 0.0)) throw ParameterError("residual_tol must be positive");
  if (!(defect_tol > 0.0)) throw ParameterError("defect_tol must be positive");
  if (!(extract.fit_threshold > 0.0 && extract.fit_threshold <= 1.0))
    throw ParameterError("fit_threshold must be in (0, 1]");
  if (!(extract.window_scales > 0.0)) throw ParameterError("window_scales must be positive");
  solver.validate();
}

namespace {

struct JointFit {
  std::vector<BubbleFit> bubbles;
  std::vector<Field> templates;
  FieldPair residual;
};

JointFit joint_refit(const FieldPair& target, std::vector<BubbleFit> seeds) {
  const auto& g = target.grid();
  const int dim = g.dim;
  const std::size_t k = seeds.size();
  FieldPair t = target;
  t.u.cache_spectrum();
  t.v.cache_spectrum();

  auto unpack = [&](const std::vector<double>& q) {
    std::vector<BubbleParams> bp(k);
    for (std::size_t i = 0; i < k; ++i) {
      for (int a = 0; a < dim; ++a) bp[i].center[a] = wrap(q[i * (dim + 1) + a], g.L);
      bp[i].scale = std::exp(q[i * (dim + 1) + dim]);
    }
    return bp;
  };
  // Amplitudes by least squares in H^s; returns the squared residual norm.
  auto solve = [&](const std::vector<BubbleParams>& bp, std::vector<Field>& ws, std::vector<double>& a,
                   std::vector<double>& c) {
    ws.clear();
    for (const auto& b : bp) {
      ws.push_back(talenti_bubble(b, g));
      ws.back().cache_spectrum();
    }
    std::vector<std::vector<double>> G(k, std::vector<double>(k));
    std::vector<double> ru(k), rv(k);
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j <= i; ++j) G[i][j] = G[j][i] = hs_inner(ws[i], ws[j]);
      ru[i] = hs_inner(t.u, ws[i]);
      rv[i] = hs_inner(t.v, ws[i]);
    }
    // Cholesky solve.
    std::vector<std::vector<double>> Lc(k, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j <= i; ++j) {
        double acc = G[i][j];
        for (std::size_t m = 0; m < j; ++m) acc -= Lc[i][m] * Lc[j][m];
        if (i == j) {
          if (!(acc > 0.0)) throw DegenerateDirectionError("joint bubble fit: templates are dependent");
          Lc[i][i] = std::sqrt(acc);
        } else {
          Lc[i][j] = acc / Lc[j][j];
        }
      }
    auto chol = [&](std::vector<double> b) {
      for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t m = 0; m < i; ++m) b[i] -= Lc[i][m] * b[m];
        b[i] /= Lc[i][i];
      }
      for (std::size_t i = k; i-- > 0;) {
        for (std::size_t m = i + 1; m < k; ++m) b[i] -= Lc[m][i] * b[m];
        b[i] /= Lc[i][i];
      }
      return b;
    };
    a = chol(ru);
    c = chol(rv);
    double proj = 0.0;
    for (std::size_t i = 0; i < k; ++i) proj += a[i] * ru[i] + c[i] * rv[i];
    return hs_norm2(t) - proj;
  };

  std::vector<double> q0, step;
  for (const auto& s : seeds) {
    for (int a = 0; a < dim; ++a) {
      q0.push_back(s.center[a]);
      step.push_back(0.25 * s.scale);
    }
    q0.push_back(std::log(s.scale));
    step.push_back(0.2);
  }
  auto objective = [&](const std::vector<double>& q) {
    try {
      std::vector<Field> ws;
      std::vector<double> a, c;
      return solve(unpack(q), ws, a, c);
    } catch (const std::exception&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  const int evals = 300 * static_cast<int>(q0.size());
  auto q = nelder_mead(objective, q0, step, evals, 1e-9);
  q = nelder_mead(objective, q, step, evals, 1e-10);

  JointFit out;
  auto bp = unpack(q);
  std::vector<double> a, c;
  solve(bp, out.templates, a, c);
  out.residual = target;
  for (std::size_t i = 0; i < k; ++i) {
    BubbleFit f = seeds[i];
    f.center = bp[i].center;
    f.scale = bp[i].scale;
    f.B = a[i];
    f.C = c[i];
    out.residual.u.axpy(-a[i], out.templates[i]);
    out.residual.v.axpy(-c[i], out.templates[i]);
    out.bubbles.push_back(f);
  }
  return out;
}

}  // namespace

Decomposition profile_decompose_with_limit(const FieldPair& pair, const FieldPair& limit,
                                           const ForcingPair& forcing, const SystemParams& params,
                                           const DecomposeOpts& opts) {
  opts.validate();
  const auto& g = pair.grid();
  Decomposition d;
  d.limit_pair = limit;
  const FieldPair target = pair - limit;
  d.residual = target;
  const double base = std::sqrt(hs_norm2(target));
  const double scale = std::max(std::sqrt(hs_norm2(pair)), std::numeric_limits<double>::min());
  double rn = base;
  const auto radii = dyadic_ladder(g);
  const ForcingPair none = ForcingPair::zero(g);
  if (base > 1e-14 * scale) {
    for (int b = 0; b < opts.max_bubbles; ++b) {
      if (rn <= opts.residual_tol * base) break;
      MorreyScan scan = morrey_scan(d.residual, radii);
      Extraction ex;
      try {
        ex = extract_bubble(d.residual, scan, params, opts.extract);
      } catch (const NoBubbleError&) {
        break;
      }
      const double rn_greedy = std::sqrt(hs_norm2(ex.residual));
      if (!(rn_greedy < rn)) break;
      d.bubbles.push_back(ex.fit);
      d.residual = std::move(ex.residual);
      rn = rn_greedy;
      if (d.bubbles.size() < 2) continue;

      JointFit jf;
      try {
        jf = joint_refit(target, d.bubbles);
      } catch (const DegenerateDirectionError&) {
        continue;
      }
      const double rn_joint = std::sqrt(hs_norm2(jf.residual));
      if (!(rn_joint < rn)) continue;
      const Field aru = frac_laplacian(jf.residual.u), arv = frac_laplacian(jf.residual.v);
      bool ok = true;
      for (std::size_t i = 0; i < jf.bubbles.size(); ++i) {
        auto& f = jf.bubbles[i];
        Field aw = frac_laplacian(jf.templates[i]);
        Field su = aru, sv = arv;
        su.axpy(f.B, aw);
        sv.axpy(f.C, aw);
        f.fit_correlation = local_fit(su, sv, aw, f.center, opts.extract.window_scales * f.scale).cosine;
        f.energy = energy_I(FieldPair(f.B * jf.templates[i], f.C * jf.templates[i]), none, params);
        if (f.fit_correlation < opts.extract.fit_threshold) ok = false;
      }
      if (!ok) continue;
      d.bubbles = std::move(jf.bubbles);
      d.residual = std::move(jf.residual);
      rn = rn_joint;
    }
  }
  d.residual_norm = rn;
  d.residual_relative = base > 0.0 ? rn / base : 0.0;

  d.ledger.gamma_input = energy_I(pair, forcing, params);
  d.ledger.I_limit = energy_I(limit, forcing, params);
  for (const auto& b : d.bubbles) d.ledger.sum_I_bubbles += b.energy;
  d.ledger.defect = d.ledger.gamma_input - d.ledger.I_limit - d.ledger.sum_I_bubbles;
  if (std::abs(d.ledger.defect) > opts.defect_tol * std::abs(d.ledger.gamma_input))
    d.warning = "decomposition incomplete: ledger defect " + std::to_string(d.ledger.defect) + " exceeds " +
                std::to_string(opts.defect_tol) + " of the input energy";

  const std::size_t k = d.bubbles.size();
  d.separation.assign(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      const auto& a = d.bubbles[i];
      const auto& b = d.bubbles[j];
      d.separation[i][j] = std::abs(std::log(a.scale / b.scale)) + periodic_distance(g, a.center, b.center) / a.scale;
    }
  return d;
}

Decomposition profile_decompose(const FieldPair& pair, const ForcingPair& forcing, const SystemParams& params,
                                const DecomposeOpts& opts) {
  FieldPair limit(pair.grid());
  if (!forcing.is_zero()) limit = find_first_solution(forcing, params, opts.solver).pair;
  return profile_decompose_with_limit(pair, limit, forcing, params, opts);
}

}  // namespace fracsys
