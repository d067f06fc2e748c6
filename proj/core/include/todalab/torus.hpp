#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace todalab {

struct Point {
  double x1 = 0.0;
  double x2 = 0.0;
  bool operator==(const Point&) const = default;
};

/// Flat torus [0,L1) x [0,L2) of unit area carrying an n x n node grid.
/// Node (i, j) sits at (i * L1 / n, j * L2 / n); storage is row-major in i.
class FlatTorus {
 public:
  explicit FlatTorus(std::size_t n, double L1 = 1.0, double L2 = 1.0);

  std::size_t n() const noexcept { return n_; }
  std::size_t size() const noexcept { return n_ * n_; }
  double L1() const noexcept { return L1_; }
  double L2() const noexcept { return L2_; }
  double spacing1() const noexcept { return L1_ / static_cast<double>(n_); }
  double spacing2() const noexcept { return L2_ / static_cast<double>(n_); }
  double spacing() const noexcept;  // larger of the two
  double cell_area() const noexcept { return spacing1() * spacing2(); }
  double diameter() const noexcept;  // largest periodic distance

  std::size_t index(std::size_t i, std::size_t j) const noexcept { return i * n_ + j; }
  Point node(std::size_t idx) const noexcept;
  Point wrap(Point p) const noexcept;
  std::size_t nearest_node(Point p) const noexcept;
  Point snap(Point p) const noexcept { return node(nearest_node(p)); }

  bool operator==(const FlatTorus&) const = default;

 private:
  std::size_t n_;
  double L1_;
  double L2_;
};

/// Minimal-image displacement b - a, each component in [-L/2, L/2].
std::array<double, 2> displacement(const FlatTorus& t, Point a, Point b) noexcept;

/// Periodic distance: minimum over lattice translates of b.
double distance(const FlatTorus& t, Point a, Point b) noexcept;

/// Real samples at the nodes of a torus grid.
class GridField {
 public:
  explicit GridField(const FlatTorus& torus, double value = 0.0);
  GridField(const FlatTorus& torus, std::vector<double> values);

  template <class F>
  static GridField from_function(const FlatTorus& torus, F&& f) {
    GridField g(torus);
    for (std::size_t k = 0; k < torus.size(); ++k) g.v_[k] = f(torus.node(k));
    return g;
  }

  const FlatTorus& torus() const noexcept { return torus_; }
  std::size_t size() const noexcept { return v_.size(); }
  std::span<const double> values() const noexcept { return v_; }
  std::span<double> values() noexcept { return v_; }
  const std::vector<double>& data() const noexcept { return v_; }
  double operator[](std::size_t k) const noexcept { return v_[k]; }
  double& operator[](std::size_t k) noexcept { return v_[k]; }

  double max() const noexcept;
  double min() const noexcept;
  bool all_finite() const noexcept;

  GridField& operator+=(const GridField& o);
  GridField& operator-=(const GridField& o);
  GridField& operator*=(double c) noexcept;
  GridField& operator+=(double c) noexcept;

 private:
  FlatTorus torus_;
  std::vector<double> v_;
};

GridField operator+(GridField a, const GridField& b);
GridField operator-(GridField a, const GridField& b);
GridField operator*(double c, GridField a);
GridField operator+(GridField a, double c);

void require_same_torus(const GridField& a, const GridField& b, const char* where);

/// Midpoint Riemann sum with compensated accumulation.
double integrate(const GridField& f);
double integrate(const FlatTorus& t, std::span<const double> values);
double inner(const GridField& f, const GridField& g);
double l2_norm(const GridField& f);
double max_abs(const GridField& f);

/// Atom of a grid delta: 1 / cell_area at the node nearest p.
GridField grid_delta(const FlatTorus& t, Point p);

/// Zero-mean solution of -Laplace G = delta_p - 1.
GridField greens_function(const FlatTorus& t, Point p);

/// Two horizontal circles x2 = c1 and x2 = c2.
class CurveSystem {
 public:
  CurveSystem(const FlatTorus& t, double c1, double c2);
  double level(int i) const;  // i in {1, 2}
  /// Nearest point projection onto the i-th circle.
  Point retract(int i, Point x) const;
  double distance_to(const FlatTorus& t, int i, Point x) const;

 private:
  double c1_;
  double c2_;
};

Point retract(const CurveSystem& c, int i, Point x);

struct SingularPoint {
  Point p;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
};

/// Singular sources p_j with non-negative orders for each component.
class SingularData {
 public:
  SingularData() = default;
  explicit SingularData(std::vector<SingularPoint> pts);
  /// Snaps every point to its nearest grid node before validation.
  SingularData(const FlatTorus& t, std::vector<SingularPoint> pts);

  std::size_t size() const noexcept { return pts_.size(); }
  bool empty() const noexcept { return pts_.empty(); }
  const std::vector<SingularPoint>& points() const noexcept { return pts_; }
  double alpha(int component, std::size_t j) const;

  /// Throws InvalidInput if a point lies within 2 grid spacings of a curve.
  void validate_against(const FlatTorus& t, const CurveSystem& c) const;

 private:
  void validate() const;
  std::vector<SingularPoint> pts_;
};

/// h * exp(-4 pi sum_j alpha_{component,j} G_{p_j}); component in {1, 2}.
GridField desingularized_weight(const GridField& h, const SingularData& s, int component);

}  // namespace todalab
