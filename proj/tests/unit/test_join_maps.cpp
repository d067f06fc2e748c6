#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "oracles/geometry.hpp"
#include "todalab/errors.hpp"
#include "todalab/join_maps.hpp"
#include "todalab/spectral.hpp"

using namespace todalab;
using fixtures::pi;

namespace {

struct Setup {
  FlatTorus t;
  CurveSystem c;
  GridField one;
  explicit Setup(std::size_t n) : t(n), c(t, 0.25, 0.75), one(t, 1.0) {}
  BarycenterMeasure on_curve(int i, std::vector<std::pair<double, double>> atoms) const {
    std::vector<Atom> out;
    for (auto [w, x1] : atoms) out.push_back({w, t.snap({x1, c.level(i)})});
    return BarycenterMeasure(out, out.size());
  }
  JoinElement single(double r) const { return JoinElement(t, c, on_curve(1, {{1.0, 0.3}}), on_curve(2, {{1.0, 0.6}}), r); }
};

std::vector<double> log_grid(double lo, double hi, int per_decade) {
  std::vector<double> g;
  const int steps = static_cast<int>(std::lround(std::log10(hi / lo) * per_decade));
  for (int i = 0; i <= steps; ++i) g.push_back(lo * std::pow(10.0, static_cast<double>(i) / per_decade));
  return g;
}

}  // namespace

TEST_CASE("join element validation and equality") {
  Setup s(64);
  CHECK_THROWS_AS(JoinElement(s.t, s.c, s.on_curve(1, {{1.0, 0.3}}), s.on_curve(2, {{1.0, 0.6}}), 1.5), InvalidInput);
  CHECK_THROWS_AS(JoinElement(s.t, s.c, s.on_curve(2, {{1.0, 0.3}}), s.on_curve(2, {{1.0, 0.6}}), 0.5), InvalidInput);
  JoinElement a(s.t, s.c, s.on_curve(1, {{1.0, 0.3}}), s.on_curve(2, {{1.0, 0.6}}), 0.0);
  JoinElement b(s.t, s.c, s.on_curve(1, {{1.0, 0.3}}), s.on_curve(2, {{0.5, 0.1}, {0.5, 0.9}}), 0.0);
  CHECK(join_equal(s.t, a, b));
  JoinElement c1(s.t, s.c, s.on_curve(1, {{1.0, 0.7}}), s.on_curve(2, {{1.0, 0.6}}), 1.0);
  JoinElement c2(s.t, s.c, s.on_curve(1, {{1.0, 0.1}}), s.on_curve(2, {{1.0, 0.6}}), 1.0);
  CHECK(join_equal(s.t, c1, c2));
  JoinElement m1(s.t, s.c, s.on_curve(1, {{1.0, 0.7}}), s.on_curve(2, {{1.0, 0.6}}), 0.5);
  JoinElement m2(s.t, s.c, s.on_curve(1, {{1.0, 0.1}}), s.on_curve(2, {{1.0, 0.6}}), 0.5);
  CHECK_FALSE(join_equal(s.t, m1, m2));
  CHECK(join_equal(s.t, m1, m1));
}

TEST_CASE("test function respects join identifications bit for bit") {
  Setup s(64);
  JoinElement a(s.t, s.c, s.on_curve(1, {{0.4, 0.3}, {0.6, 0.8}}), s.on_curve(2, {{1.0, 0.6}}), 0.0);
  JoinElement b(s.t, s.c, s.on_curve(1, {{0.4, 0.3}, {0.6, 0.8}}), s.on_curve(2, {{0.3, 0.1}, {0.7, 0.5}}), 0.0);
  for (double lam : {1.0, 50.0, 1000.0}) {
    auto pa = test_function(s.t, a, lam), pb = test_function(s.t, b, lam);
    CHECK(pa[0].data() == pb[0].data());
    CHECK(pa[1].data() == pb[1].data());
    auto v1 = bubble_log_sum(s.t, a.sigma1(), lam);
    for (std::size_t k = 0; k < s.t.size(); ++k) {
      CHECK(pa[0][k] == v1[k]);
      CHECK(pa[1][k] == -0.5 * v1[k]);
    }
    CHECK(scalar_test_function(s.t, a, lam).data() == scalar_test_function(s.t, b, lam).data());
  }
  JoinElement c(s.t, s.c, s.on_curve(1, {{1.0, 0.3}}), s.on_curve(2, {{1.0, 0.6}}), 1.0);
  JoinElement d(s.t, s.c, s.on_curve(1, {{1.0, 0.9}}), s.on_curve(2, {{1.0, 0.6}}), 1.0);
  CHECK(test_function(s.t, c, 30.0)[0].data() == test_function(s.t, d, 30.0)[0].data());
}

TEST_CASE("bubbles vanish as lambda goes to zero") {
  Setup s(32);
  auto z = s.single(0.5);
  CHECK(max_abs(bubble_log_sum(s.t, z.sigma1(), 0.0)) == 0.0);
  auto phi = test_function(s.t, z, 1e-9);
  CHECK(max_abs(phi[0]) < 1e-15);
  CHECK(max_abs(phi[1]) < 1e-15);
  CHECK(max_abs(scalar_test_function(s.t, z, 1e-9)) < 1e-15);
}

TEST_CASE("closed-form bubble gradient matches central differences away from the cut locus") {
  Setup s(512);
  auto sig = s.on_curve(1, {{1.0, 0.3}});
  const Point c = sig.atoms()[0].x;
  const double lam = 8.0, h = s.t.spacing();
  auto v = bubble_log_sum(s.t, sig, lam);
  auto g = bubble_log_sum_gradient(s.t, sig, lam);
  const std::size_t n = s.t.n();
  double worst = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const auto x = s.t.node(i * n + j);
      auto off = [](double a, double b) { return std::abs(std::remainder(a - b, 1.0)); };
      if (off(x.x1, c.x1) > 0.5 - 3 * h || off(x.x2, c.x2) > 0.5 - 3 * h) continue;
      const double d1 = (v[((i + 1) % n) * n + j] - v[((i + n - 1) % n) * n + j]) / (2 * h);
      const double d2 = (v[i * n + (j + 1) % n] - v[i * n + (j + n - 1) % n]) / (2 * h);
      worst = std::max({worst, std::abs(g[0][i * n + j] - d1), std::abs(g[1][i * n + j] - d2)});
    }
  CHECK(worst < 1e-3 * lam);
}

TEST_CASE("gradient bounds of the bubble sums") {
  Setup s(128);
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    const double w = fixtures::uniform(rng, 0.1, 0.9);
    auto z = JoinElement(s.t, s.c, s.on_curve(1, {{w, fixtures::uniform(rng)}, {1 - w, fixtures::uniform(rng)}}),
                         s.on_curve(2, {{1.0, fixtures::uniform(rng)}}), fixtures::uniform(rng, 0.1, 0.9));
    for (double lam : {10.0, 100.0}) {
      const double l1 = z.lambda1(lam);
      auto g = bubble_log_sum_gradient(s.t, z.sigma1(), l1);
      for (std::size_t k = 0; k < s.t.size(); ++k) {
        const double norm = std::hypot(g[0][k], g[1][k]);
        // Single-bubble maximum 2 lambda; a log-sum's gradient is a convex combination.
        CHECK(norm <= 2.0 * l1 * (1 + 1e-12));
        double dmin = 1e300;
        for (const auto& a : z.sigma1().atoms()) dmin = std::min(dmin, distance(s.t, s.t.node(k), a.x));
        if (dmin > 4 * s.t.spacing()) CHECK(norm <= 4.0 / dmin * (1 + 1e-12));
      }
    }
  }
}

TEST_CASE("mixed gradient term stays bounded along the lambda sweep") {
  Setup s(512);
  auto z = s.single(0.5);
  std::vector<double> mixed;
  for (double lam : {10.0, 100.0, 1000.0}) {
    auto v1 = bubble_log_sum(s.t, z.sigma1(), z.lambda1(lam));
    auto v2 = bubble_log_sum(s.t, z.sigma2(), z.lambda2(lam));
    auto g1 = gradient(v1), g2 = gradient(v2);
    mixed.push_back(inner(g1[0], g2[0]) + inner(g1[1], g2[1]));
    MESSAGE("mixed " << mixed.back());
  }
  // Increments shrink: the sequence settles instead of growing with log lambda.
  CHECK(std::abs(mixed[2] - mixed[1]) < 0.5 * std::abs(mixed[1] - mixed[0]));
  CHECK(std::abs(mixed[2]) < 16 * pi * std::log(1000.0) / 4);
}

TEST_CASE("exponential moment stays bounded at r = 1/2") {
  Setup s(512);
  auto z = s.single(0.5);
  for (double lam : {10.0, 100.0, 1000.0}) {
    auto phi = test_function(s.t, z, lam);
    const double gap = log_integral_exp(s.one, phi[0]) -
                       (2 * std::log(z.lambda2(lam)) - 2 * std::log(z.lambda1(lam)));
    MESSAGE("moment gap " << gap);
    CHECK(std::abs(gap) < 2.0);
  }
}

TEST_CASE("lambda grid validation") {
  CHECK_THROWS_AS(validate_lambda_grid({1, 10, 100}), InvalidInput);
  CHECK_THROWS_AS(validate_lambda_grid({1, 2, 3, 4}), InvalidInput);
  CHECK_THROWS_AS(validate_lambda_grid({1, 20, 10, 100}), InvalidInput);
  CHECK_NOTHROW(validate_lambda_grid({1, 10, 50, 100}));
}

TEST_CASE("top decade slope uses only the top decade") {
  std::vector<double> x{1, 10, 100, 300, 1000}, y{50, -3, 2 * std::log(100.0), 2 * std::log(300.0), 2 * std::log(1000.0)};
  CHECK(top_decade_slope(x, y) == doctest::Approx(2.0));
}

TEST_CASE("energy slope at r = 0 on a resolved grid") {
  Setup s(1024);
  auto lam = log_grid(10, 1000, 8);
  const RhoPair rho(5 * pi, 5 * pi);
  auto curve = energy_curve(s.t, s.single(0.0), rho, lam, s.one, s.one);
  MESSAGE("slope " << curve.slope);
  CHECK(curve.slope == doctest::Approx(8 * pi - 2 * rho.rho1).epsilon(0.15));
  CHECK(std::isnan(curve.rows.front().slope_so_far));
  CHECK(curve.rows.back().slope_so_far == curve.slope);

  auto sc = scalar_energy_curve(s.t, s.single(0.0), RhoPair(9 * pi, 9 * pi), lam, s.one);
  MESSAGE("scalar slope " << sc.slope);
  CHECK(sc.slope == doctest::Approx(16 * pi - 18 * pi).epsilon(0.15));

  std::vector<double> x, y;
  for (double l : lam) {
    if (l < 100) continue;
    auto phi = scalar_test_function(s.t, s.single(0.0), l);
    x.push_back(std::log(l));
    y.push_back(log_integral_exp(s.one, -1.0 * phi));
  }
  CHECK(oracle::ols_slope(x, y) == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("energy slope at r = 1/2 on a 256 grid") {
  Setup s(256);
  auto curve = energy_curve(s.t, s.single(0.5), RhoPair(5 * pi, 5 * pi), log_grid(10, 1000, 8), s.one, s.one);
  MESSAGE("slope " << curve.slope);
  CHECK(curve.slope == doctest::Approx(-4 * pi).epsilon(0.20));
}

TEST_CASE("energy along the curve is bounded below for rho below 4 pi") {
  Setup s(256);
  auto curve = energy_curve(s.t, s.single(0.5), RhoPair(2 * pi, 2 * pi), log_grid(1, 1000, 4), s.one, s.one);
  const double j1 = curve.rows.front().energy.total;
  double lowest = 1e300;
  for (const auto& r : curve.rows) lowest = std::min(lowest, r.energy.total);
  CHECK(lowest > -10 * std::abs(j1) - 1e-9);
  CHECK(curve.slope > 0);
}

TEST_CASE("energy curve is thread-count independent") {
  Setup s(64);
  auto lam = log_grid(10, 1000, 4);
  auto a = energy_curve(s.t, s.single(0.5), RhoPair(5 * pi, 5 * pi), lam, s.one, s.one, true, 1);
  auto b = energy_curve(s.t, s.single(0.5), RhoPair(5 * pi, 5 * pi), lam, s.one, s.one, true, 3);
  for (std::size_t i = 0; i < lam.size(); ++i) {
    CHECK(a.rows[i].energy.total == b.rows[i].energy.total);
    CHECK(a.rows[i].d1 == b.rows[i].d1);
  }
}

TEST_CASE("plateau and rtilde") {
  CHECK(rtilde(0.2, 0.8) == 0.0);
  CHECK(rtilde(0.5, 0.5) == 0.5);
  CHECK(rtilde(0.8, 0.2) == 1.0);
  CHECK(plateau(0.25) == 0.0);
  CHECK(plateau(0.75) == 1.0);
  CHECK_THROWS_AS(rtilde(0.0, 0.0), InvalidInput);
  CHECK(rtilde(std::numeric_limits<double>::infinity(), 1.0) == 1.0);
}

TEST_CASE("psi map recovers the join element") {
  Setup s(256);
  const double sp = s.t.spacing();
  for (double r : {0.0, 0.5, 1.0}) {
    CAPTURE(r);
    auto z = s.single(r);
    auto phi = test_function(s.t, z, 1000.0);
    auto p = psi_map(phi[0], phi[1], s.one, s.one, 1, 1, s.c);
    if (r == 0.0) CHECK(p.rtilde == 0.0);
    if (r == 1.0) CHECK(p.rtilde == 1.0);
    if (r == 0.5) {
      CHECK(p.rtilde > 0.0);
      CHECK(p.rtilde < 1.0);
    }
    if (r < 1.0) CHECK(kr_distance(s.t, z.sigma1(), p.zeta.sigma1()) < 3 * sp);
    if (r > 0.0) CHECK(kr_distance(s.t, z.sigma2(), p.zeta.sigma2()) < 3 * sp);
  }
  CHECK_THROWS_AS(psi_map(s.one, s.one, s.one, s.one, 0, 1, s.c), InvalidInput);
  // Two uniform densities are far from every barycenter space.
  CHECK_THROWS_AS(psi_map(GridField(s.t), GridField(s.t), s.one, s.one, 1, 1, s.c), PreconditionFailure);
}

TEST_CASE("homotopy identity check along lambda") {
  Setup s(256);
  for (double r : {0.0, 0.5}) {
    CAPTURE(r);
    auto z = s.single(r);
    double prev1 = 1e300, prev_r = 1e300;
    for (double lam : {10.0, 100.0, 1000.0}) {
      auto rep = homotopy_identity_check(s.t, z, lam, s.c, s.one, s.one);
      MESSAGE("lambda " << lam << " d1 " << rep.atom_displacement_1 << " dr " << rep.r_deviation);
      CHECK(rep.atom_displacement_1 <= prev1 + 1e-15);
      CHECK(rep.r_deviation <= prev_r + 1e-12);
      prev1 = rep.atom_displacement_1;
      prev_r = rep.r_deviation;
    }
    CHECK(prev1 < 3 * s.t.spacing());
  }
  for (double r : {0.1, 0.9}) {
    auto rep = homotopy_identity_check(s.t, s.single(r), 1000.0, s.c, s.one, s.one);
    CHECK(rep.r_deviation == 0.0);
  }
}

TEST_CASE("kr scaling on a 128 grid") {
  Setup s(128);
  const std::vector<double> lam{2.5, 5, 10, 20, 40, 80, 160, 250};
  for (int comp : {1, 2}) {
    auto chk = kr_scaling_check(s.t, s.single(0.5), lam, comp, s.one, s.one);
    MESSAGE("component " << comp << " slope " << chk.slope);
    CHECK(chk.slope == doctest::Approx(-1.0).epsilon(0.15));
    for (const auto& row : chk.rows) {
      const double li = comp == 1 ? row.lambda1 : row.lambda2;
      CHECK(row.in_fit == (li >= 10 && li * s.t.spacing() <= 1.0));
    }
  }
  auto deg = kr_scaling_check(s.t, s.single(0.0), lam, 2, s.one, s.one);
  CHECK(std::abs(deg.slope) < 0.1);
  CHECK_THROWS_AS(kr_scaling_check(s.t, s.single(0.5), {1, 2, 10, 100}, 1, s.one, s.one), InvalidInput);
}
