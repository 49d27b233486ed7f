#include <doctest.h>

#include <algorithm>
#include <memory>
#include <random>

#include "fracsys/decomposition.hpp"
#include "test_util.hpp"

using namespace fracsys;
using namespace testutil;

namespace {

const SystemParams P23{2.0, 3.0};

// argmax_R R^{N-2s} (1/2R) int_{-R}^{R} (1 + x^2)^{-(N-2s)} dx for N = 1, s = 0.3 (Simpson + golden).
double rho_star_oracle() {
  auto avg = [](double R) {
    const int m = 20000;
    double h = 2.0 * R / m, acc = 0.0;
    for (int i = 0; i <= m; ++i) {
      double x = -R + i * h;
      double w = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      acc += w * std::pow(1.0 + x * x, -0.4);
    }
    return acc * h / 3.0 / (2.0 * R);
  };
  auto f = [&](double R) { return -std::pow(R, 0.4) * avg(R); };
  double a = 0.5, b = 20.0;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 100; ++it) {
    double c = b - phi * (b - a), d = a + phi * (b - a);
    if (f(c) < f(d)) b = d; else a = c;
  }
  return 0.5 * (a + b);
}

FieldPair gs_bubble(const GridSpec& g, double center, double scale) {
  return ground_state_pair(ground_state_amplitude(P23), BubbleParams{{center, 0.0}, scale, 1.0}, P23, g);
}

struct Limit {
  ForcingPair F;
  FieldPair pair;
};

const Limit& limit() {
  static std::unique_ptr<Limit> l = [] {
    auto r = std::make_unique<Limit>();
    GridSpec g = desk_grid();
    // Half of the admissibility threshold for the frozen discrete S_ab.
    const double sab = 1.5134020664;
    Field f = gaussian(g, 0.0, 1.0);
    f *= 0.5 * admissibility_threshold(g, P23, sab) / dual_norm(f);
    r->F = ForcingPair(f, f);
    r->pair = find_first_solution(r->F, P23, SolverOpts::first_solution()).pair;
    return r;
  }();
  return *l;
}

// Sum of smooth compactly supported bumps (1 - x^2)^4 on [-1, 1], shifted.
Field compact_bump(const GridSpec& g, double c, double a) {
  return sample(g, [&](double x, double) {
    double t = x - c;
    return std::abs(t) < 1.0 ? a * std::pow(1.0 - t * t, 4.0) : 0.0;
  });
}

}  // namespace

TEST_SUITE("morrey_scan") {
  TEST_CASE("zero pair") {
    GridSpec g = small_grid();
    CHECK(morrey_scan(FieldPair(g)).value == 0.0);
  }

  TEST_CASE("dyadic ladder") {
    GridSpec g = desk_grid();
    auto r = dyadic_ladder(g);
    REQUIRE(!r.empty());
    CHECK(r.front() == doctest::Approx(2.0 * g.h()).epsilon(1e-14));
    for (std::size_t i = 1; i < r.size(); ++i) CHECK(r[i] == doctest::Approx(2.0 * r[i - 1]).epsilon(1e-14));
    CHECK(r.back() <= g.L / 2);
    CHECK(2.0 * r.back() > g.L / 2);
  }

  TEST_CASE("rho_star against quadrature") {
    double o = rho_star_oracle();
    CHECK(o == doctest::Approx(3.008).epsilon(1e-3));
    CHECK(rho_star(1, 0.3) == doctest::Approx(o).epsilon(1e-6));
  }

  TEST_CASE("single bubble: center and the rho_star radius") {
    GridSpec g = desk_grid();
    for (double lam : {0.25, 1.0}) {
      FieldPair p = gs_bubble(g, 3.0, lam);
      auto s = morrey_scan(p);
      CHECK(std::abs(s.argmax_center[0] - 3.0) <= g.h());
      // Nearest ladder radius to rho_star * lambda.
      auto ladder = dyadic_ladder(g);
      double want = rho_star(1, 0.3) * lam, best = ladder[0];
      for (double R : ladder)
        if (std::abs(std::log(R / want)) < std::abs(std::log(best / want))) best = R;
      CHECK(s.argmax_radius == best);
      CHECK(s.value > 0.0);
    }
  }

  TEST_CASE("single bubble: radius within one dyadic step of lambda" * doctest::should_fail()) {
    GridSpec g = desk_grid();
    auto s = morrey_scan(gs_bubble(g, 0.0, 1.0));
    CHECK(std::abs(std::log2(s.argmax_radius / 1.0)) <= 1.0);
  }

  TEST_CASE("invariance under dyadic rescaling") {
    GridSpec g = desk_grid();
    FieldPair p = gs_bubble(g, 0.0, 0.5);
    double v = morrey_scan(p).value;
    for (double r : {0.5, 2.0}) CHECK(rel(morrey_scan(rescale_translate(p, r, {0.0, 0.0})).value, v) < 1e-6);
  }

  TEST_CASE("OpenMP and serial scans agree") {
    GridSpec g = small_grid();
    std::mt19937_64 rng(3);
    FieldPair p(random_field(g, rng), random_field(g, rng));
    auto a = morrey_scan(p, dyadic_ladder(g));
    auto b = serial::morrey_scan(p, dyadic_ladder(g));
    CHECK(a.value == b.value);
    CHECK(a.argmax_index == b.argmax_index);
    CHECK(a.argmax_radius == b.argmax_radius);
  }
}

TEST_SUITE("extract_bubble") {
  TEST_CASE("exact template is recovered") {
    GridSpec g = desk_grid();
    FieldPair p = gs_bubble(g, -4.0, 0.8);
    auto ex = extract_bubble(p, morrey_scan(p), P23);
    double B = ground_state_amplitude(P23);
    CHECK(rel(ex.fit.B, B) < 1e-3);
    CHECK(rel(ex.fit.C, B * std::sqrt(1.5)) < 1e-3);
    CHECK(std::sqrt(hs_norm2(ex.residual) / hs_norm2(p)) < 1e-2);
    CHECK(ex.fit.B / ex.fit.C == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-2));
    CHECK(ex.fit.fit_correlation >= 0.95);
  }

  TEST_CASE("smooth non-bubble profile at matched scale") {
    GridSpec g = desk_grid();
    Field w = gaussian(g, 0.0, 0.8);
    FieldPair p(w, std::sqrt(1.5) * w);
    CHECK_THROWS_AS(extract_bubble(p, morrey_scan(p), P23), NoBubbleError);
  }
}

TEST_SUITE("profile_decompose") {
  TEST_CASE("limit alone has no bubbles") {
    const auto& L = limit();
    auto d = profile_decompose(L.pair, L.F, P23);
    CHECK(d.bubbles.empty());
    CHECK(d.residual_relative <= DecomposeOpts{}.residual_tol);
  }

  TEST_CASE("limit plus one bubble of scale L/100") {
    const auto& L = limit();
    GridSpec g = desk_grid();
    FieldPair in = L.pair + gs_bubble(g, -10.0, g.L / 100);
    auto d = profile_decompose_with_limit(in, L.pair, L.F, P23);
    REQUIRE(d.bubbles.size() == 1);
    CHECK(std::abs(d.bubbles[0].center[0] + 10.0) <= g.h());
    CHECK(rel(d.bubbles[0].scale, g.L / 100) < 0.1);
    double floor = 0.3 * std::pow(1.5134020664, 1.0 / 0.6);
    CHECK(d.bubbles[0].energy >= floor * 0.95);
    CHECK(d.residual_norm < std::sqrt(hs_norm2(in - L.pair)));

    // Idempotence on the residual.
    auto again = profile_decompose_with_limit(d.residual, FieldPair(g), ForcingPair::zero(g), P23);
    CHECK(again.bubbles.empty());
  }

  TEST_CASE("ledger defect below 1% of the input energy" * doctest::should_fail()) {
    // Cross terms of the slow bubble tails with the limit are not small on the box.
    const auto& L = limit();
    GridSpec g = desk_grid();
    FieldPair in = L.pair + gs_bubble(g, -10.0, g.L / 100);
    auto d = profile_decompose_with_limit(in, L.pair, L.F, P23);
    CHECK(std::abs(d.ledger.defect) < 0.01 * std::abs(d.ledger.gamma_input));
  }

  TEST_CASE("two separated bubbles") {
    GridSpec g = desk_grid();
    FieldPair in = gs_bubble(g, -10.0, g.L / 50) + gs_bubble(g, 10.0, g.L / 400);
    auto d = profile_decompose_with_limit(in, FieldPair(g), ForcingPair::zero(g), P23);
    REQUIRE(d.bubbles.size() == 2);
    auto b = d.bubbles;
    std::sort(b.begin(), b.end(), [](const BubbleFit& x, const BubbleFit& y) { return x.center[0] < y.center[0]; });
    CHECK(std::abs(b[0].center[0] + 10.0) <= g.h());
    CHECK(std::abs(b[1].center[0] - 10.0) <= g.h());
    CHECK(rel(b[0].scale, g.L / 50) < 0.1);
    CHECK(rel(b[1].scale, g.L / 400) < 0.1);
    for (const auto& x : b) CHECK(x.B / x.C == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-2));
    REQUIRE(d.separation.size() == 2);
    CHECK(d.separation[0][1] > 20.0);
    CHECK(d.separation[1][0] > 20.0);
  }

  TEST_CASE("options are validated") {
    DecomposeOpts o;
    o.max_bubbles = -1;
    CHECK_THROWS_AS(o.validate(), ParameterError);
    o = DecomposeOpts{};
    o.extract.fit_threshold = 1.5;
    CHECK_THROWS_AS(o.validate(), ParameterError);
  }
}

TEST_SUITE("brezis_lieb_defect") {
  TEST_CASE("vanishing second pair") {
    GridSpec g = small_grid();
    std::mt19937_64 rng(4);
    FieldPair a(random_field(g, rng, true), random_field(g, rng, true));
    CHECK(brezis_lieb_defect(a, FieldPair(g), P23) == 0.0);
  }

  TEST_CASE("disjoint supports") {
    GridSpec g = small_grid();
    FieldPair a(compact_bump(g, -5.0, 1.0), compact_bump(g, -5.0, 0.7));
    FieldPair b(compact_bump(g, 5.0, 0.3), compact_bump(g, 5.0, 2.0));
    CHECK(brezis_lieb_defect(a, b, P23) <= 1e-14 * coupling_integral(a, P23));
  }

  TEST_CASE("concentration sweep decreases") {
    const auto& L = limit();
    GridSpec g = desk_grid();
    double base = coupling_integral(L.pair, P23);
    std::vector<double> d;
    for (double lam : {0.8, 0.1, 0.0125}) d.push_back(brezis_lieb_defect(L.pair, gs_bubble(g, 3.0, lam), P23) / base);
    CHECK(d[1] < d[0]);
    CHECK(d[2] < d[1]);
  }

  TEST_CASE("concentration sweep reaches 1e-3" * doctest::should_fail()) {
    const auto& L = limit();
    GridSpec g = desk_grid();
    double base = coupling_integral(L.pair, P23);
    CHECK(brezis_lieb_defect(L.pair, gs_bubble(g, 3.0, 0.0125), P23) / base < 1e-3);
  }
}

TEST_SUITE("Morrey inequalities") {
  TEST_CASE("interpolation ratio under dyadic rescaling") {
    GridSpec g = desk_grid();
    Field u = partial_derivative(partial_derivative(gaussian(g, 0.0, 1.0), 0), 0);
    // 32 h: a node for r = 1/2 and r = 2, since the scan only visits nodes.
    Field v = partial_derivative(partial_derivative(gaussian(g, 32.0 * g.h(), 1.0), 0), 0);
    FieldPair p(u, v);
    for (double theta : {0.4, 0.9}) {
      double a = interpolation_ratio(p, theta);
      for (double r : {0.5, 2.0}) CHECK(rel(interpolation_ratio(rescale_translate(p, r, {0.0, 0.0}), theta), a) < 1e-6);
    }
  }

  TEST_CASE("pure bubble at both ends of the theta range") {
    GridSpec g = desk_grid();
    FieldPair p = gs_bubble(g, 0.0, 1.0);
    for (double theta : {0.4, 0.9}) {
      double r = interpolation_ratio(p, theta);
      CHECK(std::isfinite(r));
      CHECK(r > 0.0);
    }
    CHECK_THROWS_AS(interpolation_ratio(p, 0.3), ParameterError);
    CHECK_THROWS_AS(interpolation_ratio(FieldPair(g), 0.5), DomainError);
  }

  TEST_CASE("corpus of 200 random pairs and 20 bubbles") {
    GridSpec g = desk_grid();
    std::mt19937_64 rng(220);
    std::uniform_real_distribution<double> c(-10.0, 10.0), lam(0.05, 2.0);
    std::vector<FieldPair> corpus;
    for (int k = 0; k < 200; ++k) corpus.emplace_back(random_field(g, rng), random_field(g, rng));
    for (int k = 0; k < 20; ++k) corpus.push_back(gs_bubble(g, c(rng), lam(rng)));
    std::vector<double> ip, em;
    for (const auto& p : corpus) {
      ip.push_back(interpolation_ratio(p, 0.4));
      em.push_back(morrey_embedding_ratio(p));
    }
    for (auto* v : {&ip, &em}) {
      std::vector<double> s = *v;
      std::sort(s.begin(), s.end());
      double med = s[s.size() / 2];
      CHECK(std::isfinite(s.back()));
      CHECK(s.back() < 2.0 * med);
    }
  }
}
