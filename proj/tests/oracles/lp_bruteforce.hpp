#pragma once

// Brute-force optimum of a small balanced transportation problem by visiting
// every basis of the transportation polytope. Exponential; only for m, n <= 4.

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace oracle {

inline bool solve_basis(const std::vector<std::size_t>& arcs, std::size_t m, std::size_t n,
                        const std::vector<double>& a, const std::vector<double>& b, std::vector<double>& x) {
  // Equations: one per row and one per column; unknowns: the chosen arcs.
  const std::size_t rows = m + n, cols = arcs.size();
  std::vector<std::vector<double>> M(rows, std::vector<double>(cols + 1, 0.0));
  for (std::size_t c = 0; c < cols; ++c) {
    M[arcs[c] / n][c] = 1.0;
    M[m + arcs[c] % n][c] = 1.0;
  }
  for (std::size_t i = 0; i < m; ++i) M[i][cols] = a[i];
  for (std::size_t j = 0; j < n; ++j) M[m + j][cols] = b[j];

  std::vector<std::size_t> pivot_col;
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t best = r;
    for (std::size_t k = r; k < rows; ++k)
      if (std::abs(M[k][c]) > std::abs(M[best][c])) best = k;
    if (std::abs(M[best][c]) < 1e-12) return false;  // dependent arc set
    std::swap(M[r], M[best]);
    for (std::size_t k = 0; k < rows; ++k) {
      if (k == r) continue;
      const double f = M[k][c] / M[r][c];
      for (std::size_t q = 0; q <= cols; ++q) M[k][q] -= f * M[r][q];
    }
    pivot_col.push_back(c);
    ++r;
  }
  if (r < cols) return false;
  for (std::size_t k = r; k < rows; ++k)
    if (std::abs(M[k][cols]) > 1e-10) return false;
  x.assign(cols, 0.0);
  for (std::size_t k = 0; k < r; ++k) x[pivot_col[k]] = M[k][cols] / M[k][pivot_col[k]];
  return true;
}

/// Minimum of sum c_ij x_ij over the transportation polytope, by enumeration
/// of all (m + n - 1)-arc subsets.
inline double transport_optimum(const std::vector<double>& a, const std::vector<double>& b,
                                const std::vector<double>& cost) {
  const std::size_t m = a.size(), n = b.size();
  if (m == 0 || n == 0 || m * n > 16) throw std::invalid_argument("oracle: instance too large");
  const std::size_t k = m + n - 1, total = m * n;
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> pick;
  std::vector<double> x;
  for (std::size_t mask = 0; mask < (std::size_t{1} << total); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcountll(mask)) != k) continue;
    pick.clear();
    for (std::size_t e = 0; e < total; ++e)
      if (mask >> e & 1) pick.push_back(e);
    if (!solve_basis(pick, m, n, a, b, x)) continue;
    bool feasible = true;
    double c = 0.0;
    for (std::size_t q = 0; q < k; ++q) {
      if (x[q] < -1e-12) feasible = false;
      c += cost[pick[q]] * x[q];
    }
    if (feasible && c < best) best = c;
  }
  return best;
}

}  // namespace oracle
