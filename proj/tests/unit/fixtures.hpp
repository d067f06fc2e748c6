#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

#include "todalab/torus.hpp"

namespace fixtures {

inline constexpr double pi = std::numbers::pi;

inline double uniform(std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Random trigonometric polynomial with modes |k| <= kmax, scaled to the given amplitude.
inline todalab::GridField smooth_field(const todalab::FlatTorus& t, std::mt19937_64& rng, double amplitude = 1.0,
                                       int kmax = 3) {
  todalab::GridField f(t);
  for (int a = -kmax; a <= kmax; ++a)
    for (int b = 0; b <= kmax; ++b) {
      if (a == 0 && b == 0) continue;
      const double c = uniform(rng, -1, 1), s = uniform(rng, -1, 1), w = 1.0 / (a * a + b * b);
      for (std::size_t k = 0; k < t.size(); ++k) {
        const auto x = t.node(k);
        const double ph = 2 * pi * (a * x.x1 / t.L1() + b * x.x2 / t.L2());
        f[k] += w * (c * std::cos(ph) + s * std::sin(ph));
      }
    }
  f *= amplitude / std::max(1e-300, todalab::max_abs(f));
  return f;
}

inline todalab::Point random_point(std::mt19937_64& rng, const todalab::FlatTorus& t) {
  return {uniform(rng, 0, t.L1()), uniform(rng, 0, t.L2())};
}

/// Scalar bubble log (1 + lambda^2 d(x, p)^2)^{-2}.
inline todalab::GridField bubble(const todalab::FlatTorus& t, todalab::Point p, double lambda) {
  return todalab::GridField::from_function(t, [&](todalab::Point x) {
    const double d = todalab::distance(t, x, p);
    return -2.0 * std::log1p(lambda * lambda * d * d);
  });
}

/// Normalized density of a sum of equal-weight bubbles.
inline std::vector<double> bubble_density(const todalab::FlatTorus& t, const std::vector<todalab::Point>& ps,
                                          double lambda) {
  std::vector<double> d(t.size(), 0.0);
  for (const auto& p : ps) {
    const auto b = bubble(t, p, lambda);
    for (std::size_t k = 0; k < t.size(); ++k) d[k] += std::exp(b[k]);
  }
  double total = 0.0;
  for (double x : d) total += x * t.cell_area();
  for (double& x : d) x /= total;
  return d;
}

/// Density of the atomic measure sum t_i delta_{x_i} placed on the nearest nodes.
inline std::vector<double> atomic_density(const todalab::FlatTorus& t, const std::vector<std::pair<double, todalab::Point>>& atoms) {
  std::vector<double> d(t.size(), 0.0);
  for (const auto& [w, x] : atoms) d[t.nearest_node(x)] += w / t.cell_area();
  return d;
}

}  // namespace fixtures
