#pragma once

// Quotient minimization for S and S_{alpha,beta}, the first (local minimum)
// solution, t0 selection and the mountain-pass search for the second solution.

#include <cstdint>
#include <vector>

#include "fracsys/bubbles.hpp"
#include "fracsys/functionals.hpp"

namespace fracsys {

struct SolverOpts {
  int max_iters = 20000;
  double step_size = 1.0;
  double grad_tol = 1e-8;
  int recenter_every = 1;
  std::uint64_t seed = 1;

  // Quotient minimization: the scale is pinned by requiring that a share
  // `pin_target` of the density lies under the Gaussian window of width
  // `pin_width` (weighted by the window), and that the window-weighted
  // centroid is at the origin.
  double pin_target = 0.8;
  double pin_width = 1.0;

  // Smallest step before a descent gives up.
  double min_step = 1e-6;

  // Mountain pass.
  int path_nodes = 33;
  int reparam_every = 20;
  int max_restarts = 2;

  void validate() const;

  static SolverOpts quotient();
  static SolverOpts first_solution();
  static SolverOpts mountain_pass();
};

struct TraceRow {
  int iter = 0;
  double J = 0.0;
  double grad_norm = 0.0;
  Region region = Region::Omega1;
};

struct Solution {
  FieldPair pair;
  EnergyReport energy;
  int iterations = 0;
  bool converged = false;
  std::vector<TraceRow> history;
};

enum class QuotientMode { scalar, system };

struct QuotientResult {
  // In scalar mode the minimizer is in `minimizer.u` and `minimizer.v` is empty.
  FieldPair minimizer;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  double grad_norm = 0.0;
  std::vector<TraceRow> history;  // J holds the quotient value
};

// Normalized Sobolev-gradient descent on the quotient. The dilation and
// translation directions are removed by a Newton retraction onto the pinning
// constraints (every recenter_every steps) and by projecting the gradient onto
// their complement. The start must be concentrated near the origin.
QuotientResult minimize_quotient(const Field& initial, const SolverOpts& opts);
QuotientResult minimize_quotient(const FieldPair& initial, const SystemParams& params, const SolverOpts& opts);

// Descent of J from (0,0) with step halving whenever the iterate would leave
// Omega1 or J would increase.
Solution find_first_solution(const ForcingPair& forcing, const SystemParams& params, const SolverOpts& opts);

// (B w(x/t), C w(x/t)) = t^{(N-2s)/2} (B w_{lambda t}, C w_{lambda t}), dilated about the bubble center.
FieldPair dilated_ground_state(const GroundStatePair& gs, double t, const GridSpec& g);

struct T0Flags {
  double t = 0.0;
  double psi = 0.0;
  double J = 0.0;
  bool psi_negative = false;
  bool below_c0 = false;
};

struct T0Result {
  double t0 = 0.0;
  std::vector<T0Flags> sweep;
};

// Doubles t from 1 until Psi(u0 + u_t, v0 + v_t) < 0 and J(u0 + u_t, v0 + v_t) < J(u0, v0).
// One extra doubling is recorded when the box allows it. Throws BoxTooSmallError
// once lambda t exceeds L/4 or the dilated profile no longer decays in the box.
T0Result choose_t0(const FieldPair& u0v0, const GroundStatePair& gs, const ForcingPair& forcing,
                   const SystemParams& params);

struct MountainPassResult {
  std::vector<FieldPair> path;
  std::vector<double> path_J;
  double eta = 0.0;
  Solution critical_pair;
  double t0 = 0.0;
  double c0 = 0.0;
  double upper_bound = 0.0;
  // Min of J over adjacent node pairs where Psi changes sign (or a node in Omega).
  double c1_surrogate = 0.0;
  bool initial_path_crosses_omega = false;
  int restarts = 0;
};

// Climbing-image string method on the path r -> (u0, v0) + dilated_ground_state(gs, r t0),
// r in [0, 1]. Throws ConcentrationError when eta >= c0 + (s/N) sab^{N/2s} and
// ConvergenceError when the path collapses after all restarts.
MountainPassResult mountain_pass(const Solution& first, const GroundStatePair& gs, double t0,
                                 const ForcingPair& forcing, const SystemParams& params, double sab_estimate,
                                 const SolverOpts& opts);

}  // namespace fracsys
