#include <cmath>
#include <vector>

#include "fracsys/kernels.hpp"
#include "fracsys/solvers.hpp"

namespace fracsys {

void SolverOpts::validate() const {
  if (max_iters < 1) throw ParameterError("max_iters must be >= 1");
  if (!(step_size > 0.0)) throw ParameterError("step_size must be positive");
  if (!(grad_tol > 0.0)) throw ParameterError("grad_tol must be positive");
  if (recenter_every < 1) throw ParameterError("recenter_every must be >= 1");
  if (!(pin_target > 0.0 && pin_target < 1.0)) throw ParameterError("pin_target must be in (0, 1)");
  if (!(pin_width > 0.0)) throw ParameterError("pin_width must be positive");
  if (!(min_step > 0.0) || min_step > step_size) throw ParameterError("min_step must be in (0, step_size]");
  if (path_nodes < 5) throw ParameterError("path_nodes must be >= 5");
  if (reparam_every < 1) throw ParameterError("reparam_every must be >= 1");
  if (max_restarts < 0) throw ParameterError("max_restarts must be >= 0");
}

SolverOpts SolverOpts::quotient() {
  SolverOpts o;
  o.max_iters = 20000;
  o.step_size = 0.8;
  o.grad_tol = 1e-9;
  return o;
}

SolverOpts SolverOpts::first_solution() {
  SolverOpts o;
  o.max_iters = 2000;
  o.step_size = 1.0;
  o.grad_tol = 1e-10;
  return o;
}

SolverOpts SolverOpts::mountain_pass() {
  SolverOpts o;
  o.max_iters = 200000;
  o.step_size = 0.3;
  o.grad_tol = 1e-7;
  return o;
}

namespace {

using Comps = std::vector<Field>;

double a_inner(const Comps& a, const Comps& b) {
  double s = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) s += hs_inner(a[c], b[c]);
  return s;
}

double l2(const Comps& a, const Comps& b) {
  double s = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) s += l2_inner(a[c], b[c]);
  return s;
}

void axpy(Comps& y, double a, const Comps& x) {
  for (std::size_t c = 0; c < y.size(); ++c) y[c].axpy(a, x[c]);
}

void scale(Comps& y, double a) {
  for (auto& f : y) f *= a;
}

Comps riesz(const Comps& x) {
  Comps out;
  for (const auto& f : x) out.push_back(riesz_representative(f));
  return out;
}

// Solve the small dense system M d = r in place.
std::vector<double> solve_small(std::vector<std::vector<double>> M, std::vector<double> r) {
  const std::size_t n = r.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(M[i][k]) > std::abs(M[piv][k])) piv = i;
    if (!(std::abs(M[piv][k]) > 0.0)) throw DegenerateDirectionError("pinning constraints are degenerate");
    std::swap(M[k], M[piv]);
    std::swap(r[k], r[piv]);
    for (std::size_t i = k + 1; i < n; ++i) {
      double f = M[i][k] / M[k][k];
      for (std::size_t j = k; j < n; ++j) M[i][j] -= f * M[k][j];
      r[i] -= f * r[k];
    }
  }
  std::vector<double> d(n);
  for (std::size_t k = n; k-- > 0;) {
    double acc = r[k];
    for (std::size_t j = k + 1; j < n; ++j) acc -= M[k][j] * d[j];
    d[k] = acc / M[k][k];
  }
  return d;
}

class QuotientProblem {
 public:
  QuotientProblem(const GridSpec& g, QuotientMode mode, SystemParams params, const SolverOpts& opts)
      : g_(g), mode_(mode), params_(params), opts_(opts) {
    p_ = mode == QuotientMode::scalar ? g.two_star() : params.two_star();
    const double w2 = opts.pin_width * opts.pin_width;
    Field phi = sample(g, [&](double x, double y) {
      double r2 = x * x + (g.dim == 2 ? y * y : 0.0);
      return std::exp(-r2 / (2.0 * w2));
    });
    weights_.push_back(phi);
    for (int a = 0; a < g.dim; ++a) {
      Field xa = sample(g, [&](double x, double y) { return a == 0 ? x : y; });
      auto& d = xa.data();
      for (std::size_t i = 0; i < d.size(); ++i) d[i] *= phi[i];
      weights_.push_back(std::move(xa));
    }
    target_.assign(weights_.size(), 0.0);
    target_[0] = opts.pin_target;
  }

  Field density(const Comps& x) const {
    Field rho(g_);
    auto& d = rho.data();
    if (mode_ == QuotientMode::scalar) {
      for (std::size_t i = 0; i < d.size(); ++i) d[i] = kernels::powr(std::abs(x[0][i]), p_);
    } else {
      for (std::size_t i = 0; i < d.size(); ++i)
        d[i] = kernels::powr(std::abs(x[0][i]), params_.alpha) * kernels::powr(std::abs(x[1][i]), params_.beta);
    }
    return rho;
  }

  // Pointwise derivative of the density scaled by `c`.
  Comps density_grad(const Comps& x, double c) const {
    Comps out;
    if (mode_ == QuotientMode::scalar) {
      Field d(g_);
      auto& dd = d.data();
      for (std::size_t i = 0; i < dd.size(); ++i) {
        double u = x[0][i];
        dd[i] = c * p_ * std::copysign(kernels::powr(std::abs(u), p_ - 1.0), u);
      }
      out.push_back(std::move(d));
    } else {
      Field du(g_), dv(g_);
      kernels::coupling_derivative(x[0].values(), x[1].values(), params_.alpha, params_.beta, c * params_.alpha,
                                   c * params_.beta, false, du.data(), dv.data());
      out.push_back(std::move(du));
      out.push_back(std::move(dv));
    }
    return out;
  }

  std::vector<double> constraints(const Field& rho) const {
    double Z = integral(rho);
    std::vector<double> c;
    for (const auto& w : weights_) c.push_back(l2_inner(rho, w) / Z);
    return c;
  }

  // L^2 gradients of the constraints.
  std::vector<Comps> constraint_grads(const Comps& x, const Field& rho) const {
    double Z = integral(rho);
    auto sig = constraints(rho);
    Comps dr = density_grad(x, 1.0 / Z);
    std::vector<Comps> out;
    for (std::size_t j = 0; j < weights_.size(); ++j) {
      Comps gj = dr;
      for (auto& f : gj) {
        auto& d = f.data();
        for (std::size_t i = 0; i < d.size(); ++i) d[i] *= weights_[j][i] - sig[j];
      }
      out.push_back(std::move(gj));
    }
    return out;
  }

  void normalize(Comps& x) const { scale(x, 1.0 / std::sqrt(a_inner(x, x))); }

  void retract(Comps& x) const {
    for (int k = 0; k < 3; ++k) {
      Field rho = density(x);
      auto cg = constraint_grads(x, rho);
      std::vector<Comps> G;
      for (const auto& c : cg) G.push_back(riesz(c));
      auto sig = constraints(rho);
      const std::size_t n = cg.size();
      std::vector<std::vector<double>> M(n, std::vector<double>(n));
      std::vector<double> r(n);
      for (std::size_t i = 0; i < n; ++i) {
        r[i] = sig[i] - target_[i];
        for (std::size_t j = 0; j < n; ++j) M[i][j] = l2(cg[i], G[j]);
      }
      auto d = solve_small(M, r);
      for (std::size_t j = 0; j < n; ++j) axpy(x, -d[j], G[j]);
    }
    normalize(x);
  }

  double quotient(const Comps& x) const {
    return a_inner(x, x) / std::pow(integral(density(x)), 2.0 / p_);
  }

  QuotientResult run(Comps x) const {
    QuotientResult res;
    normalize(x);
    const double c_init = integral(density(x));
    if (!(c_init > 0.0)) throw DegenerateDirectionError("minimize_quotient: initial coupling vanishes");
    double gn = 0.0;
    int it = 0;
    for (; it < opts_.max_iters; ++it) {
      normalize(x);
      if (it % opts_.recenter_every == 0) retract(x);
      Field rho = density(x);
      double C = integral(rho);
      if (!(C > 1e-12 * c_init) || !std::isfinite(C))
        throw DegenerateDirectionError("minimize_quotient: coupling collapsed during descent (integral " +
                                       std::to_string(C) + ")");
      // Gradient direction of N / C^{2/p} at N = 1.
      Comps g = x;
      Comps dc = riesz(density_grad(x, 1.0 / (p_ * C)));
      axpy(g, -1.0, dc);

      std::vector<Comps> basis;
      basis.push_back(x);
      for (auto& c : constraint_grads(x, rho)) basis.push_back(riesz(c));
      std::vector<Comps> ortho;
      for (auto b : basis) {
        for (const auto& o : ortho) axpy(b, -a_inner(b, o), o);
        double nb = std::sqrt(a_inner(b, b));
        if (!(nb > 0.0)) throw DegenerateDirectionError("minimize_quotient: degenerate tangent directions");
        scale(b, 1.0 / nb);
        ortho.push_back(std::move(b));
      }
      for (const auto& o : ortho) axpy(g, -a_inner(g, o), o);
      gn = std::sqrt(a_inner(g, g));
      double q = 1.0 / std::pow(C, 2.0 / p_);
      res.history.push_back({it, q, gn, Region::Omega1});
      if (gn < opts_.grad_tol) {
        res.converged = true;
        break;
      }
      axpy(x, -opts_.step_size, g);
    }
    normalize(x);
    res.iterations = it;
    res.grad_norm = gn;
    res.value = quotient(x);
    if (mode_ == QuotientMode::scalar)
      res.minimizer = FieldPair(x[0], Field());
    else
      res.minimizer = FieldPair(x[0], x[1]);
    return res;
  }

 private:
  GridSpec g_;
  QuotientMode mode_;
  SystemParams params_;
  SolverOpts opts_;
  double p_ = 0.0;
  std::vector<Field> weights_;
  std::vector<double> target_;
};

}  // namespace

QuotientResult minimize_quotient(const Field& initial, const SolverOpts& opts) {
  opts.validate();
  if (!(integral_power(initial, 2.0) > 0.0)) throw DomainError("minimize_quotient: zero initial field");
  QuotientProblem qp(initial.grid(), QuotientMode::scalar, SystemParams{}, opts);
  return qp.run(Comps{initial});
}

QuotientResult minimize_quotient(const FieldPair& initial, const SystemParams& params, const SolverOpts& opts) {
  opts.validate();
  params.validate(initial.grid());
  require_same_grid(initial.u.grid(), initial.v.grid(), "minimize_quotient");
  QuotientProblem qp(initial.grid(), QuotientMode::system, params, opts);
  return qp.run(Comps{initial.u, initial.v});
}

}  // namespace fracsys
