#pragma once

// Morrey-norm scanning, bubble extraction, the greedy profile decomposition
// with its energy ledger, and the Morrey/Sobolev inequalities as diagnostics.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "fracsys/solvers.hpp"

namespace fracsys {

struct MorreyScan {
  // sup over centers and radii of R^{N-2s} times the ball average of |u|^2 + |v|^2.
  double value = 0.0;
  std::array<double, 2> argmax_center{0.0, 0.0};
  std::size_t argmax_index = 0;
  double argmax_radius = 0.0;
};

// {2^j h : j = 1, 2, ...} up to L/2.
std::vector<double> dyadic_ladder(const GridSpec& g);

// Ball integrals come from the exact integral of the trigonometric interpolant
// over each ball (a Fourier multiplier per radius). Ties go to the smaller
// radius, then to the lower flat index.
MorreyScan morrey_scan(const Field& u, const std::vector<double>& radii);
MorreyScan morrey_scan(const FieldPair& pair, const std::vector<double>& radii);
MorreyScan morrey_scan(const FieldPair& pair);

namespace serial {
MorreyScan morrey_scan(const FieldPair& pair, const std::vector<double>& radii);
}

// sqrt of the scan value of u.
double morrey_norm(const Field& u);
// sqrt(scan(u) + scan(v)).
double morrey_pair_norm(const FieldPair& pair);
// (||u||_{2*}^2 + ||v||_{2*}^2)^{1/2}
double lp_pair_norm(const FieldPair& pair);

// Argmax radius of R^{N-2s} times the ball average of (1 + |x|^2)^{-(N-2s)}; the
// Morrey-argmax radius of a bubble of scale lambda is rho_star * lambda.
double rho_star(int dim, double s);

struct BubbleFit {
  std::array<double, 2> center{0.0, 0.0};
  double scale = 0.0;
  double B = 0.0;
  double C = 0.0;
  double fit_correlation = 0.0;
  double energy = 0.0;
};

struct ExtractOpts {
  double fit_threshold = 0.95;
  // Window radius, in units of the fitted scale, for fit_correlation.
  double window_scales = 16.0;
};

struct Extraction {
  BubbleFit fit;
  FieldPair residual;
};

// Seeds the fit from the scan (center, radius / rho_star) and polishes center
// and log-scale. The fit compares (-Delta)^s of the input with (-Delta)^s of the
// template on a window of window_scales * scale around the center:
// fit_correlation is the cosine there and (B, C) are the least-squares
// amplitudes. Throws NoBubbleError when the correlation is below the threshold.
Extraction extract_bubble(const FieldPair& pair, const MorreyScan& scan, const SystemParams& params,
                          const ExtractOpts& opts = {});

struct DecomposeOpts {
  int max_bubbles = 4;
  // Stop when ||residual|| <= residual_tol * ||input - limit||.
  double residual_tol = 0.05;
  double defect_tol = 0.01;
  ExtractOpts extract;
  SolverOpts solver = SolverOpts::first_solution();

  void validate() const;
};

struct EnergyLedger {
  double gamma_input = 0.0;
  double I_limit = 0.0;
  double sum_I_bubbles = 0.0;
  double defect = 0.0;
};

struct Decomposition {
  FieldPair limit_pair;
  std::vector<BubbleFit> bubbles;
  FieldPair residual;
  double residual_norm = 0.0;
  double residual_relative = 0.0;
  EnergyLedger ledger;
  // |log(r_i/r_j)| + |x_i - x_j| / r_i
  std::vector<std::vector<double>> separation;
  std::optional<std::string> warning;
};

// Greedy loop: scan the residual, extract a bubble, subtract it. Once two or
// more bubbles are found they are refit jointly against input - limit (centers
// and scales by simplex search, amplitudes by H^s least squares); the joint fit
// replaces the greedy one when it lowers the residual and every bubble still
// passes the correlation threshold against residual + itself.
Decomposition profile_decompose(const FieldPair& pair, const ForcingPair& forcing, const SystemParams& params,
                                const DecomposeOpts& opts = {});
// Same, with the limit pair supplied instead of solved for.
Decomposition profile_decompose_with_limit(const FieldPair& pair, const FieldPair& limit,
                                           const ForcingPair& forcing, const SystemParams& params,
                                           const DecomposeOpts& opts = {});

// |int |uA+uB|^alpha |vA+vB|^beta - |uA|^alpha |vA|^beta - |uB|^alpha |vB|^beta|
double brezis_lieb_defect(const FieldPair& a, const FieldPair& b, const SystemParams& params);

// ||(u,v)||_{2*} / (||(u,v)||_{H^s}^theta * morrey_pair_norm^{1-theta}), theta in [2/2*, 1).
double interpolation_ratio(const FieldPair& pair, double theta);
// morrey_pair_norm / lp_pair_norm
double morrey_embedding_ratio(const FieldPair& pair);

}  // namespace fracsys
