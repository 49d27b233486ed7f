#include "fracsys/bubbles.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "fracsys/kernels.hpp"

namespace fracsys {

namespace {

double periodic_delta(double x, double c, double L) {
  double d = x - c;
  double w = 2.0 * L;
  d -= w * std::floor((d + L) / w);
  return d;
}

bool in_inner_half(const GridSpec& g, std::size_t idx) {
  auto p = g.point(idx);
  for (int a = 0; a < g.dim; ++a)
    if (std::abs(p[a]) >= 0.5 * g.L) return false;
  return true;
}

// Least squares of lap ~ a * q + c over the inner half-box.
struct Fit {
  double a, c, residual;
};

Fit fit_power_and_offset(const Field& lap, const Field& q, bool fit_a) {
  const auto& g = lap.grid();
  double sqq = 0, sq = 0, s1 = 0, slq = 0, sl = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!in_inner_half(g, i)) continue;
    sqq += q[i] * q[i];
    sq += q[i];
    s1 += 1.0;
    slq += lap[i] * q[i];
    sl += lap[i];
  }
  double a = 1.0, c;
  if (fit_a) {
    double det = sqq * s1 - sq * sq;
    a = (slq * s1 - sl * sq) / det;
    c = (sqq * sl - sq * slq) / det;
  } else {
    c = (sl - sq) / s1;
  }
  double num = 0, den = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!in_inner_half(g, i)) continue;
    double r = lap[i] - a * q[i] - c;
    num += r * r;
    den += a * a * q[i] * q[i];
  }
  return {a, c, std::sqrt(num / den)};
}

Field unit_profile(const GridSpec& g) {
  const double e = 0.5 * (g.dim - 2.0 * g.s);
  return sample(g, [&](double x, double y) {
    double r2 = x * x + (g.dim == 2 ? y * y : 0.0);
    return std::pow(1.0 / (1.0 + r2), e);
  });
}

}  // namespace

void BubbleParams::validate(const GridSpec& g) const {
  if (!(scale > 0.0)) throw ParameterError("bubble scale must be positive");
  if (!(amplitude > 0.0)) throw ParameterError("bubble amplitude must be positive");
  if (scale > g.L / 4.0) throw BoundaryDecayError("bubble scale exceeds L/4");
  for (int a = 0; a < g.dim; ++a)
    if (center[a] < -g.L || center[a] >= g.L) throw ParameterError("bubble center outside the box");
}

void GroundStatePair::validate(const SystemParams& params) const {
  if (!(B > 0.0) || !(C > 0.0)) throw ParameterError("ground-state amplitudes must be positive");
  if (std::abs(B / C - std::sqrt(params.alpha / params.beta)) > 1e-12 * (B / C))
    throw ParameterError("ground-state pair needs B/C = sqrt(alpha/beta)");
}

KappaCalibration calibrate_kappa(const GridSpec& g) {
  g.validate();
  const double p = g.two_star();
  Field w1 = unit_profile(g);
  Field lap = frac_laplacian(w1);
  Field q(g);
  auto& qd = q.data();
  for (std::size_t i = 0; i < qd.size(); ++i) qd[i] = std::pow(w1[i], p - 1.0);
  Fit fit = fit_power_and_offset(lap, q, true);
  if (!(fit.a > 0.0)) throw DomainError("kappa calibration produced a nonpositive coefficient");
  KappaCalibration out;
  out.kappa = std::pow(fit.a, 1.0 / (p - 2.0));
  out.residual = fit.residual;
  out.offset = fit.c * out.kappa;
  out.grid_signature = g.signature();
  return out;
}

KappaCache& KappaCache::instance() {
  static KappaCache c;
  return c;
}

KappaCalibration KappaCache::get(const GridSpec& g) {
  auto key = g.signature();
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = entries_.find(key);
    if (it != entries_.end()) return it->second;
  }
  auto cal = calibrate_kappa(g);
  std::lock_guard<std::mutex> lock(mu_);
  return entries_.emplace(key, cal).first->second;
}

void KappaCache::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) return;
  auto j = nlohmann::json::parse(is);
  std::lock_guard<std::mutex> lock(mu_);
  for (const auto& e : j.at("entries")) {
    KappaCalibration c;
    c.grid_signature = e.at("grid").get<std::string>();
    c.kappa = e.at("kappa").get<double>();
    c.residual = e.at("residual").get<double>();
    c.offset = e.value("offset", 0.0);
    entries_[c.grid_signature] = c;
  }
}

void KappaCache::save(const std::string& path) const {
  nlohmann::json j;
  j["entries"] = nlohmann::json::array();
  {
    std::lock_guard<std::mutex> lock(mu_);
    for (const auto& [k, c] : entries_)
      j["entries"].push_back({{"grid", k}, {"kappa", c.kappa}, {"residual", c.residual}, {"offset", c.offset}});
  }
  std::ofstream os(path);
  os << j.dump(2) << "\n";
}

void KappaCache::clear() {
  std::lock_guard<std::mutex> lock(mu_);
  entries_.clear();
}

double kappa(const GridSpec& g) { return KappaCache::instance().get(g).kappa; }

double bubble_residual(const Field& w) {
  const auto& g = w.grid();
  const double p = g.two_star();
  Field lap = frac_laplacian(w);
  Field q(g);
  auto& qd = q.data();
  for (std::size_t i = 0; i < qd.size(); ++i) qd[i] = kernels::powr(std::abs(w[i]), p - 1.0);
  return fit_power_and_offset(lap, q, false).residual;
}

double tail_fraction(const Field& u, std::array<double, 2> center) {
  const auto& g = u.grid();
  const double p = g.two_star();
  double inside = 0.0, outside = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    auto x = g.point(i);
    bool far = false;
    for (int a = 0; a < g.dim; ++a)
      if (std::abs(periodic_delta(x[a], center[a], g.L)) > 0.5 * g.L) far = true;
    double m = kernels::powr(std::abs(u[i]), p);
    (far ? outside : inside) += m;
  }
  double tot = inside + outside;
  return tot > 0.0 ? outside / tot : 0.0;
}

void check_boundary_decay(const Field& u, std::array<double, 2> center, double tol, const char* what) {
  double t = tail_fraction(u, center);
  if (t > tol)
    throw BoundaryDecayError(std::string(what) + ": profile does not decay inside the box (tail fraction " +
                             std::to_string(t) + " > " + std::to_string(tol) + ")");
}

double talenti_peak(const BubbleParams& p, const GridSpec& g) {
  return p.amplitude * kappa(g) * std::pow(p.scale, -0.5 * (g.dim - 2.0 * g.s));
}

Field talenti_bubble(const BubbleParams& p, const GridSpec& g, double decay_tol) {
  p.validate(g);
  const double k = kappa(g);
  const double e = 0.5 * (g.dim - 2.0 * g.s);
  const double lam = p.scale;
  Field out = sample(g, [&](double x, double y) {
    double dx = periodic_delta(x, p.center[0], g.L);
    double r2 = dx * dx;
    if (g.dim == 2) {
      double dy = periodic_delta(y, p.center[1], g.L);
      r2 += dy * dy;
    }
    return p.amplitude * k * std::pow(lam / (lam * lam + r2), e);
  });
  check_boundary_decay(out, p.center, decay_tol, "talenti_bubble");
  return out;
}

namespace {

template <bool Par>
Field rescale_impl(const Field& u, double r, std::array<double, 2> y, double decay_tol) {
  if (!(r > 0.0)) throw ParameterError("rescale_translate: r must be positive");
  const auto& g = u.grid();
  const int n = g.n;
  GridSpec line = g;
  line.dim = 1;
  auto sp = Spectral::get(line);
  const double amp = std::pow(r, -0.5 * (g.dim - 2.0 * g.s));
  auto eval = [&](const double* samples, std::span<const double> t, double* out) {
    std::vector<cplx> half(sp->spectral_size());
    sp->forward(samples, half.data());
    if constexpr (Par)
      kernels::trig_eval(half, n, g.L, t, std::span<double>(out, t.size()));
    else
      kernels::serial::trig_eval(half, n, g.L, t, std::span<double>(out, t.size()));
  };

  // Zero extension outside the box, so r < 1 does not pull in periodic images.
  auto outside = [&](double t) { return t < -g.L || t >= g.L; };

  Field out(g);
  auto& od = out.data();
  if (g.dim == 1) {
    std::vector<double> t(n);
    for (int j = 0; j < n; ++j) t[j] = (g.coord(j) - y[0]) / r;
    eval(u.ptr(), t, od.data());
    for (int j = 0; j < n; ++j)
      if (outside(t[j])) od[j] = 0.0;
  } else {
    std::vector<double> t0(n), t1(n);
    for (int j = 0; j < n; ++j) {
      t0[j] = (g.coord(j) - y[0]) / r;
      t1[j] = (g.coord(j) - y[1]) / r;
    }
    std::vector<double> tmp(g.size());
    // Rows (last axis) first, then columns. The inner evaluation runs serially
    // inside the parallel row loop.
    auto rows = [&](long i) {
      std::vector<cplx> half(sp->spectral_size());
      sp->forward(u.ptr() + i * n, half.data());
      kernels::serial::trig_eval(half, n, g.L, t1, std::span<double>(tmp.data() + i * n, n));
      for (int j = 0; j < n; ++j)
        if (outside(t1[j])) tmp[i * n + j] = 0.0;
    };
    auto cols = [&](long j) {
      std::vector<double> col(n), res(n);
      for (int i = 0; i < n; ++i) col[i] = tmp[static_cast<std::size_t>(i) * n + j];
      std::vector<cplx> half(sp->spectral_size());
      sp->forward(col.data(), half.data());
      kernels::serial::trig_eval(half, n, g.L, t0, res);
      for (int i = 0; i < n; ++i) od[static_cast<std::size_t>(i) * n + j] = outside(t0[i]) ? 0.0 : res[i];
    };
    if constexpr (Par) {
#pragma omp parallel for schedule(static)
      for (long i = 0; i < n; ++i) rows(i);
#pragma omp parallel for schedule(static)
      for (long j = 0; j < n; ++j) cols(j);
    } else {
      for (long i = 0; i < n; ++i) rows(i);
      for (long j = 0; j < n; ++j) cols(j);
    }
  }
  for (auto& x : od) x *= amp;

  std::size_t imax = 0;
  for (std::size_t i = 1; i < od.size(); ++i)
    if (std::abs(od[i]) > std::abs(od[imax])) imax = i;
  check_boundary_decay(out, g.point(imax), decay_tol, "rescale_translate");
  return out;
}

}  // namespace

Field rescale_translate(const Field& u, double r, std::array<double, 2> y, double decay_tol) {
  return rescale_impl<true>(u, r, y, decay_tol);
}

FieldPair rescale_translate(const FieldPair& p, double r, std::array<double, 2> y, double decay_tol) {
  return FieldPair(rescale_translate(p.u, r, y, decay_tol), rescale_translate(p.v, r, y, decay_tol));
}

namespace serial {
Field rescale_translate(const Field& u, double r, std::array<double, 2> y, double decay_tol) {
  return rescale_impl<false>(u, r, y, decay_tol);
}
}  // namespace serial

double ground_state_ratio(const SystemParams& params) { return std::sqrt(params.beta / params.alpha); }

FieldPair ground_state_pair(double B, const BubbleParams& p, const SystemParams& params, const GridSpec& g,
                            double decay_tol) {
  if (!(B > 0.0)) throw ParameterError("ground_state_pair: B must be positive");
  Field w = talenti_bubble(p, g, decay_tol);
  double C = B * ground_state_ratio(params);
  return FieldPair(B * w, C * w);
}

FieldPair ground_state_pair(const GroundStatePair& gs, const SystemParams& params, const GridSpec& g,
                            double decay_tol) {
  gs.validate(params);
  Field w = talenti_bubble(gs.bubble, g, decay_tol);
  return FieldPair(gs.B * w, gs.C * w);
}

double ground_state_amplitude(const SystemParams& params) {
  const double p = params.two_star();
  const double tau = ground_state_ratio(params);
  return std::pow(p / (params.alpha * std::pow(tau, params.beta)), 1.0 / (p - 2.0));
}

double amplitude_for_t_prime(const SystemParams& params, double s, double tp) {
  const double p = params.two_star();
  const double tau = ground_state_ratio(params);
  return std::pow((1.0 + tau * tau) / (std::pow(tau, params.beta) * std::pow(tp, 2.0 * s)), 1.0 / (p - 2.0));
}

double t_prime(double B, double C, const SystemParams& params, double s) {
  return std::pow((B * B + C * C) / (std::pow(B, params.alpha) * std::pow(C, params.beta)), 1.0 / (2.0 * s));
}

}  // namespace fracsys
