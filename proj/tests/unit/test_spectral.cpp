#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "oracles/geometry.hpp"
#include "todalab/spectral.hpp"

using namespace todalab;
using fixtures::pi;

TEST_CASE("laplacian of constants and eigenfunctions") {
  FlatTorus t(32);
  CHECK(max_abs(laplacian(GridField(t, 3.7))) < 1e-12);
  auto s = GridField::from_function(t, [](Point x) { return std::sin(2 * pi * x.x1); });
  auto l = laplacian(s);
  double worst = 0;
  for (std::size_t k = 0; k < t.size(); ++k) worst = std::max(worst, std::abs(l[k] + 4 * pi * pi * s[k]));
  CHECK(worst / (4 * pi * pi) < 1e-10);
}

TEST_CASE("laplacian on anisotropic periods") {
  FlatTorus t(32, 2.0, 0.5);
  auto s = GridField::from_function(t, [](Point x) { return std::cos(2 * pi * x.x1 / 2.0 + 2 * pi * 3 * x.x2 / 0.5); });
  const double k2 = std::pow(2 * pi / 2.0, 2) + std::pow(2 * pi * 3 / 0.5, 2);
  auto l = laplacian(s);
  double worst = 0;
  for (std::size_t k = 0; k < t.size(); ++k) worst = std::max(worst, std::abs(l[k] + k2 * s[k]));
  CHECK(worst / k2 < 1e-10);
}

TEST_CASE("spectral vs five-point Laplacian converges at second order") {
  std::mt19937_64 rng(7);
  double prev = 0;
  for (std::size_t n : {32u, 64u, 128u}) {
    FlatTorus t(n);
    std::mt19937_64 local(rng);
    auto f = fixtures::smooth_field(t, local);
    auto l = laplacian(f);
    auto fd = oracle::five_point_laplacian(f.data(), n, t.spacing1(), t.spacing2());
    double worst = 0;
    for (std::size_t k = 0; k < t.size(); ++k) worst = std::max(worst, std::abs(l[k] - fd[k]));
    if (prev > 0) CHECK(prev / worst == doctest::Approx(4.0).epsilon(0.1));
    prev = worst;
  }
}

TEST_CASE("laplacian output has zero mean") {
  FlatTorus t(64);
  std::mt19937_64 rng(9);
  auto f = fixtures::smooth_field(t, rng, 5.0, 20);
  CHECK(std::abs(integrate(laplacian(f))) < 1e-9);
}

TEST_CASE("gradient and divergence agree with the Dirichlet form") {
  FlatTorus t(32);
  std::mt19937_64 rng(13);
  auto f = fixtures::smooth_field(t, rng, 1.0, 15);
  auto g = gradient(f);
  const double energy = inner(g[0], g[0]) + inner(g[1], g[1]);
  CHECK(energy == doctest::Approx(-inner(f, gradient_divergence(f))).epsilon(1e-12));
  auto s = GridField::from_function(t, [](Point x) { return std::sin(2 * pi * x.x1); });
  auto gs = gradient(s);
  for (std::size_t k = 0; k < t.size(); ++k) CHECK(gs[0][k] == doctest::Approx(2 * pi * std::cos(2 * pi * t.node(k).x1)).epsilon(1e-10).scale(1));
}

TEST_CASE("Poisson and shifted inverse invert the Laplacian") {
  FlatTorus t(64);
  std::mt19937_64 rng(21);
  auto f = fixtures::smooth_field(t, rng, 2.0, 10);
  auto u = solve_poisson(f);
  CHECK(std::abs(integrate(u)) < 1e-12);
  CHECK(max_abs(-1.0 * laplacian(u) - (f + (-integrate(f)))) < 1e-9);
  const double tau = 0.7;
  auto v = shifted_inverse(f, tau);
  CHECK(max_abs(-1.0 * laplacian(v) + tau * v - f) < 1e-9);
}
