#pragma once

// Aubin-Talenti profiles, the dilation/translation action, and ground-state
// pairs (B w, C w).

#include <array>
#include <map>
#include <mutex>
#include <string>

#include "fracsys/core.hpp"

namespace fracsys {

// Largest allowed share of the L^{2*} mass of a profile lying farther than
// L/2 from its center (see check_boundary_decay).
inline constexpr double kDefaultDecayTol = 0.1;

struct BubbleParams {
  std::array<double, 2> center{0.0, 0.0};
  double scale = 1.0;
  double amplitude = 1.0;

  void validate(const GridSpec& g) const;
};

struct GroundStatePair {
  double B = 1.0;
  double C = 1.0;
  BubbleParams bubble;

  void validate(const SystemParams& params) const;
};

struct KappaCalibration {
  double kappa = 0.0;
  double residual = 0.0;
  double offset = 0.0;
  std::string grid_signature;
};

// Fit kappa so that kappa * (1/(1+|x|^2))^{(N-2s)/2} solves
// (-Delta)^s w = w^{2*-1} on the grid. The fit is least squares on the inner
// half-box and allows a constant offset (the torus zero mode); the returned
// residual is ||(-Delta)^s w - w^{2*-1} - c|| / ||w^{2*-1}|| there.
KappaCalibration calibrate_kappa(const GridSpec& g);

// Process-wide calibration cache keyed by grid signature; optionally backed
// by a JSON file.
class KappaCache {
 public:
  static KappaCache& instance();
  KappaCalibration get(const GridSpec& g);
  void load(const std::string& path);
  void save(const std::string& path) const;
  void clear();

 private:
  mutable std::mutex mu_;
  std::map<std::string, KappaCalibration> entries_;
};

double kappa(const GridSpec& g);

// Same residual as calibrate_kappa, for an arbitrary profile w centered in the box.
double bubble_residual(const Field& w);

// Share of integral |u|^{2*} at nodes whose periodic distance (max norm) from
// `center` exceeds L/2.
double tail_fraction(const Field& u, std::array<double, 2> center);
void check_boundary_decay(const Field& u, std::array<double, 2> center, double tol, const char* what);

// A kappa (lambda / (lambda^2 + |x - c|^2))^{(N-2s)/2}, with |x - c| the
// periodic (minimum image) distance.
Field talenti_bubble(const BubbleParams& p, const GridSpec& g, double decay_tol = kDefaultDecayTol);
double talenti_peak(const BubbleParams& p, const GridSpec& g);

// r^{-(N-2s)/2} u((x - y)/r), evaluated through the trigonometric interpolant.
Field rescale_translate(const Field& u, double r, std::array<double, 2> y,
                        double decay_tol = kDefaultDecayTol);
FieldPair rescale_translate(const FieldPair& p, double r, std::array<double, 2> y,
                            double decay_tol = kDefaultDecayTol);

namespace serial {
Field rescale_translate(const Field& u, double r, std::array<double, 2> y,
                        double decay_tol = kDefaultDecayTol);
}

// (B w, C w) with C = B sqrt(beta/alpha).
FieldPair ground_state_pair(double B, const BubbleParams& p, const SystemParams& params,
                            const GridSpec& g, double decay_tol = kDefaultDecayTol);
FieldPair ground_state_pair(const GroundStatePair& gs, const SystemParams& params, const GridSpec& g,
                            double decay_tol = kDefaultDecayTol);

double ground_state_ratio(const SystemParams& params);
// B for which (B w, C w) solves the homogeneous system: (alpha/2*) B^{alpha-2} C^beta = 1.
double ground_state_amplitude(const SystemParams& params);
// B for which the dilation path t -> (B w(x/t), C w(x/t)) peaks at t' = t_prime.
double amplitude_for_t_prime(const SystemParams& params, double s, double t_prime);
double t_prime(double B, double C, const SystemParams& params, double s);

}  // namespace fracsys
