#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "oracles/geometry.hpp"
#include "todalab/errors.hpp"
#include "todalab/regression.hpp"
#include "todalab/spectral.hpp"
#include "todalab/torus.hpp"

using namespace todalab;
using fixtures::pi;

TEST_CASE("torus construction rejects bad grids") {
  CHECK_THROWS_AS(FlatTorus(15), InvalidInput);
  CHECK_THROWS_AS(FlatTorus(8), InvalidInput);
  CHECK_THROWS_AS(FlatTorus(16, 2.0, 2.0), InvalidInput);
  CHECK_NOTHROW(FlatTorus(16, 2.0, 0.5));
}

TEST_CASE("distance examples") {
  FlatTorus t(16);
  CHECK(distance(t, {0.3, 0.7}, {0.3, 0.7}) == 0.0);
  CHECK(distance(t, {0, 0}, {0.5, 0}) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(distance(t, {0.9, 0}, {0.1, 0}) == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("distance matches nine-image oracle on random pairs, anisotropic periods") {
  FlatTorus t(32, 2.0, 0.5);
  std::mt19937_64 rng(11);
  for (int k = 0; k < 2000; ++k) {
    const Point a = fixtures::random_point(rng, t), b = fixtures::random_point(rng, t);
    CHECK(distance(t, a, b) == doctest::Approx(oracle::torus_distance(a.x1, a.x2, b.x1, b.x2, 2.0, 0.5)).epsilon(1e-13));
  }
}

TEST_CASE("triangle inequality exhaustive on a 16x16 grid") {
  FlatTorus t(16);
  std::vector<double> D(t.size() * t.size());
  for (std::size_t a = 0; a < t.size(); ++a)
    for (std::size_t b = 0; b < t.size(); ++b) D[a * t.size() + b] = distance(t, t.node(a), t.node(b));
  std::size_t violations = 0;
  for (std::size_t a = 0; a < t.size(); ++a)
    for (std::size_t b = 0; b < t.size(); ++b) {
      CHECK(D[a * t.size() + b] == D[b * t.size() + a]);
      for (std::size_t c = 0; c < t.size(); ++c)
        if (D[a * t.size() + c] > D[a * t.size() + b] + D[b * t.size() + c] + 1e-14) ++violations;
    }
  CHECK(violations == 0);
}

TEST_CASE("integrate examples") {
  FlatTorus t(32);
  CHECK(integrate(GridField(t, 1.0)) == doctest::Approx(1.0).epsilon(1e-15));
  auto s = GridField::from_function(t, [](Point x) { return std::sin(2 * pi * x.x1); });
  CHECK(std::abs(integrate(s)) < 1e-14);
  CHECK(std::abs(integrate(greens_function(t, {0.3, 0.6}))) < 1e-10);
}

TEST_CASE("integrate is exact for trigonometric polynomials below Nyquist") {
  FlatTorus t(16);
  auto f = GridField::from_function(t, [](Point x) {
    return std::cos(2 * pi * 7 * x.x1) * std::sin(2 * pi * 3 * x.x2) + std::cos(2 * pi * 5 * x.x2);
  });
  CHECK(std::abs(integrate(f)) < 1e-14);
}

TEST_CASE("grid translation commutes with Green's functions") {
  FlatTorus t(32);
  const std::size_t p = t.index(5, 9), shift_i = 7, shift_j = 3;
  const auto G = greens_function(t, t.node(p));
  const auto Gs = greens_function(t, t.node(t.index(5 + shift_i, 9 + shift_j)));
  double worst = 0;
  for (std::size_t i = 0; i < t.n(); ++i)
    for (std::size_t j = 0; j < t.n(); ++j) {
      const double a = G[t.index(i, j)];
      const double b = Gs[t.index((i + shift_i) % t.n(), (j + shift_j) % t.n())];
      worst = std::max(worst, std::abs(a - b));
    }
  CHECK(worst < 1e-10);
}

TEST_CASE("Green's function residual and symmetry") {
  FlatTorus t(64);
  std::mt19937_64 rng(5);
  const Point p = t.snap({0.31, 0.77});
  const auto G = greens_function(t, p);
  auto r = -1.0 * laplacian(G) - grid_delta(t, p) + 1.0;
  CHECK(max_abs(r) < 1e-8);
  for (int k = 0; k < 10; ++k) {
    const Point a = t.snap(fixtures::random_point(rng, t)), b = t.snap(fixtures::random_point(rng, t));
    const double gab = greens_function(t, a)[t.nearest_node(b)];
    const double gba = greens_function(t, b)[t.nearest_node(a)];
    CHECK(gab == doctest::Approx(gba).epsilon(1e-10).scale(1.0));
  }
}

TEST_CASE("Green's function near-field slope on 256^2") {
  FlatTorus t(256);
  const Point p = t.snap({0.5, 0.5});
  const auto G = greens_function(t, p);
  std::vector<double> x, y;
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double d = distance(t, p, t.node(k));
    if (d >= 4 * t.spacing() && d <= 16 * t.spacing()) {
      x.push_back(std::log(d));
      y.push_back(G[k]);
    }
  }
  const double slope = oracle::ols_slope(x, y);
  CHECK(slope == doctest::Approx(-1 / (2 * pi)).epsilon(0.10));
  CHECK(fit_line(x, y).slope == doctest::Approx(slope).epsilon(1e-10));
}

TEST_CASE("desingularized weights") {
  FlatTorus t(128);
  GridField h = GridField::from_function(t, [](Point x) { return 1.5 + std::cos(2 * pi * x.x1); });
  CHECK(desingularized_weight(h, SingularData{}, 1).data() == h.data());
  SingularData s(t, {{{0.5, 0.5}, 1.0, 0.0}});
  const auto w = desingularized_weight(h, s, 1);
  CHECK(desingularized_weight(h, s, 2).data() == h.data());
  std::vector<double> x, y;
  const Point p = s.points()[0].p;
  double far_min = 1e300;
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double d = distance(t, p, t.node(k));
    if (d >= 4 * t.spacing() && d <= 16 * t.spacing()) {
      x.push_back(std::log(d));
      y.push_back(std::log(w[k] / h[k]));
    }
    if (d > 0.1) far_min = std::min(far_min, w[k]);
  }
  CHECK(oracle::ols_slope(x, y) == doctest::Approx(2.0).epsilon(0.10));
  CHECK(far_min > 0);
  CHECK_THROWS_AS(desingularized_weight(GridField(t, 0.0), s, 1), InvalidInput);
}

TEST_CASE("singular data validation") {
  FlatTorus t(32);
  CHECK_THROWS_AS(SingularData({{{0.1, 0.1}, -1.0, 0.0}}), InvalidInput);
  CHECK_THROWS_AS(SingularData({{{0.1, 0.1}, 1.0, 0.0}, {{0.1, 0.1}, 0.0, 1.0}}), InvalidInput);
  CurveSystem c(t, 0.25, 0.75);
  SingularData near(t, {{{0.5, 0.25 + t.spacing()}, 1.0, 1.0}});
  CHECK_THROWS_AS(near.validate_against(t, c), InvalidInput);
  SingularData ok(t, {{{0.5, 0.5}, 1.0, 1.0}});
  CHECK_NOTHROW(ok.validate_against(t, c));
  CHECK_THROWS_AS(CurveSystem(t, 0.25, 0.25), InvalidInput);
}

TEST_CASE("retractions") {
  FlatTorus t(32);
  CurveSystem c(t, 0.25, 0.75);
  std::mt19937_64 rng(3);
  const Point on{0.4, 0.25};
  CHECK(retract(c, 1, on) == on);
  for (int k = 0; k < 500; ++k) {
    const Point x = fixtures::random_point(rng, t), y = fixtures::random_point(rng, t);
    for (int i : {1, 2}) {
      const Point px = retract(c, i, x);
      CHECK(px.x2 == c.level(i));
      CHECK(retract(c, i, px) == px);
      CHECK(distance(t, px, retract(c, i, y)) <= distance(t, x, y) + 1e-15);
    }
  }
}
