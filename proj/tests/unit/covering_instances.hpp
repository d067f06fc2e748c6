#pragma once

// Constructed inputs for covering_merge and detect_spread, shared by the unit
// tests and the acceptance binary. Each instance is re-measured by check().

#include <algorithm>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "todalab/measures.hpp"

namespace instances {

struct CoveringInstance {
  std::string name;
  todalab::FlatTorus torus{64};
  std::vector<todalab::NodeSet> omegas1, omegas2;
  todalab::DiscreteMeasure f1, f2;
  double delta = 0.0, theta = 0.0;
  std::size_t expected_sets = 0;
};

inline todalab::NodeSet ball_set(const todalab::FlatTorus& t, todalab::Point c, double r) {
  return todalab::ball_nodes(t, t.nearest_node(c), r);
}

inline std::vector<CoveringInstance> covering_instances() {
  using todalab::DiscreteMeasure;
  using todalab::FlatTorus;
  const FlatTorus t(64);
  const double lam = 200.0, r = 0.04;
  const todalab::Point a = t.snap({0.25, 0.25}), b = t.snap({0.75, 0.7});
  std::vector<CoveringInstance> out;

  // One set per family, both densities concentrated in the same ball.
  out.push_back({"k=l=0 shared ball", t, {ball_set(t, a, r)}, {ball_set(t, a, r)},
                 DiscreteMeasure(t, fixtures::bubble_density(t, {a}, lam)),
                 DiscreteMeasure(t, fixtures::bubble_density(t, {a}, lam)), 0.3, 0.5, 1});
  // Two separated bubbles per component, aligned across components.
  out.push_back({"k=l=1 crosswise aligned", t, {ball_set(t, a, r), ball_set(t, b, r)},
                 {ball_set(t, b, r), ball_set(t, a, r)},
                 DiscreteMeasure(t, fixtures::bubble_density(t, {a, b}, lam)),
                 DiscreteMeasure(t, fixtures::bubble_density(t, {a, b}, lam)), 0.3, 0.4, 2});
  // Extra first-family set far from the only second-family set.
  out.push_back({"k=1 l=0 extra set", t, {ball_set(t, a, r), ball_set(t, b, r)}, {ball_set(t, a, r)},
                 DiscreteMeasure(t, fixtures::bubble_density(t, {a, b}, lam)),
                 DiscreteMeasure(t, fixtures::bubble_density(t, {a}, lam)), 0.3, 0.4, 2});
  return out;
}

struct CoveringCheck {
  bool ok = true;
  std::string detail;
  std::size_t sets_with_f2 = 0;
};

/// Re-measures separation (>= delta/8) and the mass postconditions.
inline CoveringCheck check(const CoveringInstance& in, const todalab::CoveringResult& res) {
  CoveringCheck c;
  const auto& t = in.torus;
  auto fail = [&](const std::string& why) {
    c.ok = false;
    if (!c.detail.empty()) c.detail += "; ";
    c.detail += why;
  };
  if (res.sets.size() != in.expected_sets) fail("set count " + std::to_string(res.sets.size()));
  if (res.delta_bar != in.delta / 8.0) fail("delta_bar");
  for (std::size_t i = 0; i < res.sets.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (todalab::set_distance(t, res.sets[i], res.sets[j]) < res.delta_bar)
        fail("sets " + std::to_string(j) + "," + std::to_string(i) + " closer than delta/8");
  for (std::size_t n = 0; n < res.sets.size(); ++n) {
    if (todalab::set_mass(in.f1, res.sets[n]) < res.theta_bar) fail("f1 mass of set " + std::to_string(n));
    const double m2 = todalab::set_mass(in.f2, res.sets[n]);
    if (res.partner[n] >= 0) {
      if (m2 < res.theta_bar) fail("f2 mass of set " + std::to_string(n));
      const auto& s = res.sets[n];
      if (std::find(s.begin(), s.end(), res.centers2[n]) == s.end()) fail("partner center missing");
    }
    if (m2 >= res.theta_bar) ++c.sets_with_f2;
    const auto& s = res.sets[n];
    if (std::find(s.begin(), s.end(), res.centers1[n]) == s.end()) fail("first center missing");
  }
  if (!(res.theta_bar > 0)) fail("theta_bar not positive");
  return c;
}

}  // namespace instances
