#include <doctest.h>

#include <random>

#include "fracsys/bubbles.hpp"
#include "fracsys/decomposition.hpp"
#include "test_util.hpp"

using namespace fracsys;
using namespace testutil;

namespace {

// Frozen calibration on the desk grid (n = 4096, L = 40, s = 0.3).
constexpr double kKappaDesk = 0.7276378;
constexpr double kKappaResidualDesk = 3.79e-3;

}  // namespace

TEST_SUITE("talenti_bubble") {
  TEST_CASE("peak value") {
    GridSpec g = desk_grid();
    for (double lam : {0.25, 1.0, 3.0}) {
      BubbleParams p{{0.0, 0.0}, lam, 1.7};
      Field w = talenti_bubble(p, g);
      double peak = 1.7 * kappa(g) * std::pow(lam, -(g.dim - 2.0 * g.s) / 2.0);
      CHECK(rel(w[g.index(g.n / 2)], peak) < 1e-14);
      CHECK(rel(talenti_peak(p, g), peak) < 1e-14);
    }
  }

  TEST_CASE("kappa calibration on the desk grid") {
    GridSpec g = desk_grid();
    auto cal = calibrate_kappa(g);
    CHECK(cal.kappa == doctest::Approx(kKappaDesk).epsilon(1e-6));
    CHECK(cal.residual < 1e-2);
    CHECK(cal.residual == doctest::Approx(kKappaResidualDesk).epsilon(0.02));
    CHECK(bubble_residual(talenti_bubble(BubbleParams{}, g)) < 1e-2);
  }

  TEST_CASE("positive and radially decreasing") {
    GridSpec g = desk_grid();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> c(-10.0, 10.0), lam(0.05, 2.0);
    for (int k = 0; k < 10; ++k) {
      BubbleParams p{{c(rng), 0.0}, lam(rng), 1.0};
      Field w = talenti_bubble(p, g);
      CHECK(w.min() > 0.0);
      int ic = static_cast<int>(std::lround((p.center[0] + g.L) / g.h()));
      bool mono = true;
      for (int d = 1; d < g.n / 2 - 1; ++d) {
        int r1 = (ic + d) % g.n, r0 = (ic + d - 1) % g.n;
        if (w[r1] > w[r0]) mono = false;
      }
      CHECK(mono);
    }
  }

  TEST_CASE("scale too large for the box") {
    GridSpec g = desk_grid();
    CHECK_THROWS_AS(talenti_bubble(BubbleParams{{0.0, 0.0}, 12.0, 1.0}, g), BoundaryDecayError);
    CHECK_THROWS_AS(talenti_bubble(BubbleParams{{0.0, 0.0}, -1.0, 1.0}, g), ParameterError);
  }
}

TEST_SUITE("rescale_translate") {
  TEST_CASE("identity") {
    GridSpec g = desk_grid();
    Field w = talenti_bubble(BubbleParams{}, g);
    CHECK(max_abs_diff(rescale_translate(w, 1.0, {0.0, 0.0}), w) <= 1e-14 * w.max());
  }

  TEST_CASE("dilation covariance of the bubble formula") {
    GridSpec g = desk_grid();
    Field a = talenti_bubble(BubbleParams{{0.0, 0.0}, 0.4, 1.0}, g);
    Field b = talenti_bubble(BubbleParams{{0.0, 0.0}, 0.8, 1.0}, g);
    Field r = rescale_translate(a, 2.0, {0.0, 0.0});
    // Interior only: the rescaled profile is zero-extended past the box.
    double worst = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
      if (std::abs(g.coord(static_cast<int>(i))) < g.L / 2) worst = std::max(worst, std::abs(r[i] - b[i]));
    CHECK(worst / b.max() < 1e-6);
  }

  TEST_CASE("translation by a grid multiple is a shift") {
    GridSpec g = desk_grid();
    Field w = gaussian(g, 0.0, 1.0);
    Field t = rescale_translate(w, 1.0, {5.0 * g.h(), 0.0});
    CHECK(max_abs_diff(t, gaussian(g, 5.0 * g.h(), 1.0)) < 1e-12);
  }

  TEST_CASE("group action on smooth profiles") {
    GridSpec g = desk_grid();
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> w(1.0, 2.0), r(0.6, 1.6);
    for (int k = 0; k < 10; ++k) {
      Field u = gaussian(g, 0.0, w(rng));
      double r1 = r(rng), r2 = r(rng);
      Field a = rescale_translate(rescale_translate(u, r1, {0.0, 0.0}), r2, {0.0, 0.0});
      Field b = rescale_translate(u, r1 * r2, {0.0, 0.0});
      CHECK(max_abs_diff(a, b) <= 1e-10 * b.max());
    }
  }

  TEST_CASE("invariant norms on smooth profiles") {
    GridSpec g = desk_grid();
    Field u = gaussian(g, 0.0, 1.0);
    // |d_hat|^2 ~ xi^4 at the origin, so the xi-sum over the lowest modes is accurate.
    Field d = partial_derivative(partial_derivative(u, 0), 0);
    for (double r : {0.5, 2.0}) {
      Field v = rescale_translate(u, r, {1.0, 0.0});
      CHECK(rel(integral_power(v, g.two_star()), integral_power(u, g.two_star())) < 1e-6);
      CHECK(rel(hs_norm2(rescale_translate(d, r, {1.0, 0.0})), hs_norm2(d)) < 1e-6);
    }
  }

  TEST_CASE("H^s norm of a gaussian under r = 2" * doctest::should_fail()) {
    // The torus norm is a xi-sum with step pi/L; for a profile with nonzero mean
    // the lowest modes set the error near 1e-3.
    GridSpec g = desk_grid();
    Field u = gaussian(g, 0.0, 1.5);
    CHECK(rel(hs_norm2(rescale_translate(u, 2.0, {0.0, 0.0})), hs_norm2(u)) < 1e-6);
  }

  TEST_CASE("Morrey norm invariance under dyadic action") {
    GridSpec g = desk_grid();
    Field w = talenti_bubble(BubbleParams{{0.0, 0.0}, 0.5, 1.0}, g);
    double m = morrey_norm(w);
    for (double r : {0.5, 2.0}) CHECK(rel(morrey_norm(rescale_translate(w, r, {0.0, 0.0})), m) < 1e-6);
  }

  TEST_CASE("H^s norm of a bubble under r = 1/4" * doctest::should_fail()) {
    // The bubble tail decays like |x|^{-0.4}; the rescaled copy is cut off at the box.
    GridSpec g = desk_grid();
    Field w = talenti_bubble(BubbleParams{{0.0, 0.0}, 1.0, 1.0}, g);
    Field v = rescale_translate(w, 0.25, {0.0, 0.0});
    CHECK(rel(hs_norm2(v), hs_norm2(w)) < 1e-6);
  }

  TEST_CASE("profile pushed out of the box") {
    GridSpec g = desk_grid();
    Field w = talenti_bubble(BubbleParams{{0.0, 0.0}, 1.0, 1.0}, g);
    CHECK_THROWS_AS(rescale_translate(w, 16.0, {0.0, 0.0}), BoundaryDecayError);
  }

  TEST_CASE("OpenMP and serial rescale agree") {
    GridSpec g = desk_grid();
    Field u = gaussian(g, 0.3, 1.2);
    Field a = rescale_translate(u, 1.37, {0.41, 0.0});
    Field b = serial::rescale_translate(u, 1.37, {0.41, 0.0});
    CHECK(max_abs_diff(a, b) == 0.0);
  }
}

TEST_SUITE("ground_state_pair") {
  TEST_CASE("amplitude ratio") {
    GridSpec g = desk_grid();
    SystemParams P{2.0, 3.0};
    FieldPair gs = ground_state_pair(1.0, BubbleParams{}, P, g);
    CHECK(gs.v[100] / gs.u[100] == doctest::Approx(1.224745).epsilon(1e-6));
    CHECK(ground_state_ratio(P) == doctest::Approx(std::sqrt(1.5)).epsilon(1e-14));

    SystemParams Q{2.5, 2.5};
    FieldPair eq = ground_state_pair(0.8, BubbleParams{}, Q, g);
    CHECK(max_abs_diff(eq.u, eq.v) == 0.0);
  }

  TEST_CASE("coupling homogeneity") {
    GridSpec g = desk_grid();
    SystemParams P{2.0, 3.0};
    BubbleParams b{{0.0, 0.0}, 0.7, 1.0};
    double B = 1.3;
    FieldPair gs = ground_state_pair(B, b, P, g);
    double C = B * std::sqrt(1.5);
    double expect = std::pow(B, 2.0) * std::pow(C, 3.0) * integral_power(talenti_bubble(b, g), 5.0);
    CHECK(rel(coupling_integral(gs, P), expect) < 1e-12);
  }

  TEST_CASE("ground-state amplitude solves the algebraic system") {
    SystemParams P{2.0, 3.0};
    double B = ground_state_amplitude(P), C = B * ground_state_ratio(P);
    CHECK((2.0 / 5.0) * std::pow(B, 0.0) * std::pow(C, 3.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((3.0 / 5.0) * std::pow(B, 2.0) * C == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("t_prime formula and its inverse") {
    SystemParams P{2.0, 3.0};
    for (double tp : {2.0, 4.0, 8.0}) {
      double B = amplitude_for_t_prime(P, 0.3, tp), C = B * std::sqrt(1.5);
      CHECK(t_prime(B, C, P, 0.3) == doctest::Approx(tp).epsilon(1e-12));
      double direct = std::pow((B * B + C * C) / (B * B * C * C * C), 1.0 / 0.6);
      CHECK(direct == doctest::Approx(tp).epsilon(1e-12));
    }
  }

  TEST_CASE("GroundStatePair ratio invariant") {
    SystemParams P{2.0, 3.0};
    GroundStatePair ok{1.0, std::sqrt(1.5), BubbleParams{}};
    CHECK_NOTHROW(ok.validate(P));
    GroundStatePair bad{1.0, 1.3, BubbleParams{}};
    CHECK_THROWS_AS(bad.validate(P), ParameterError);
  }
}
