#pragma once

#include <string>

#include "todalab/torus.hpp"

namespace todalab {

/// Named positive weight profiles for h.
///   constant:   value
///   sin-bump:   1 + amplitude sin(2 pi x1 / L1) sin(2 pi x2 / L2)
///   gauss-bump: 1 + amplitude sum over the nine nearest images of exp(-|x - c|^2 / (2 width^2))
struct WeightProfile {
  std::string name = "constant";
  double value = 1.0;
  double amplitude = 0.0;
  Point center{0.5, 0.5};
  double width = 0.1;
};

GridField make_weight(const FlatTorus& t, const WeightProfile& p);

}  // namespace todalab
