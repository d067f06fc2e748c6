#include "todalab/profiles.hpp"

#include <cmath>
#include <numbers>

#include "todalab/errors.hpp"

namespace todalab {

GridField make_weight(const FlatTorus& t, const WeightProfile& p) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  GridField h(t);
  if (p.name == "constant") {
    if (!(p.value > 0)) throw InvalidInput("weight profile: constant value must be positive");
    h = GridField(t, p.value);
  } else if (p.name == "sin-bump") {
    if (!(std::abs(p.amplitude) < 1)) throw InvalidInput("weight profile: sin-bump amplitude must lie in (-1, 1)");
    h = GridField::from_function(t, [&](Point x) {
      return 1.0 + p.amplitude * std::sin(two_pi * x.x1 / t.L1()) * std::sin(two_pi * x.x2 / t.L2());
    });
  } else if (p.name == "gauss-bump") {
    if (!(p.width > 0)) throw InvalidInput("weight profile: gauss-bump width must be positive");
    if (!(p.amplitude > -1.0 / 9.0)) throw InvalidInput("weight profile: gauss-bump amplitude too negative");
    const Point c = t.wrap(p.center);
    h = GridField::from_function(t, [&](Point x) {
      double s = 0.0;
      for (int a = -1; a <= 1; ++a)
        for (int b = -1; b <= 1; ++b) {
          const double d1 = x.x1 - c.x1 - a * t.L1();
          const double d2 = x.x2 - c.x2 - b * t.L2();
          s += std::exp(-(d1 * d1 + d2 * d2) / (2.0 * p.width * p.width));
        }
      return 1.0 + p.amplitude * s;
    });
  } else {
    throw InvalidInput("weight profile: unknown profile '" + p.name + "'");
  }
  for (double v : h.values())
    if (!(v > 0)) throw InvalidInput("weight profile: resulting weight is not positive");
  return h;
}

}  // namespace todalab
