#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace todalab {

struct TransportArc {
  std::size_t source = 0;
  std::size_t sink = 0;
  double mass = 0.0;
};

struct TransportSolution {
  double cost = 0.0;
  std::vector<TransportArc> plan;  // basic arcs carrying positive mass
  std::size_t pivots = 0;
};

/// Balanced transportation problem min sum c_ij x_ij, x >= 0, with row sums
/// `supply` and column sums `demand`, solved by primal network simplex on a
/// strongly feasible spanning tree. `cost` is a row-major supply x demand matrix.
/// Marginals are normalized to a common total and carried as 2^50-scaled
/// integers so pivoting is exact; cost and plan are reported at the supply total.
TransportSolution solve_transport(std::span<const double> supply, std::span<const double> demand,
                                  std::span<const double> cost);

}  // namespace todalab
