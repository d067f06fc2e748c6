#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "todalab/functionals.hpp"
#include "todalab/torus.hpp"

namespace todalab {

struct QuantPoint {
  double s1 = 0.0;
  double s2 = 0.0;
};

/// Lambda_{alpha1,alpha2}: points on the ellipse
///   s1^2 - s1 s2 + s2^2 = 2(1+alpha1) s1 + 2(1+alpha2) s2,  s1, s2 >= 0.
struct LocalSet {
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  std::vector<QuantPoint> points;  // sorted lexicographically
};

double ellipse_residual(double alpha1, double alpha2, QuantPoint p);

/// The six seed points.
std::vector<QuantPoint> seed_points(double alpha1, double alpha2);

/// Closes a point list under the two shift rules; deduplicates within 1e-9.
std::vector<QuantPoint> close_under_rules(double alpha1, double alpha2, std::vector<QuantPoint> points);

LocalSet local_lambda(double alpha1, double alpha2);

struct GlobalSet {
  std::vector<std::array<double, 2>> lambda0;
  std::vector<double> lambda1;
  std::vector<double> lambda2;
};

/// Elements of Lambda_0, Lambda_1, Lambda_2 inside [0, b1] x [0, b2].
GlobalSet enumerate_global(const SingularData& s, double b1, double b2);

struct MembershipWitness {
  enum class Kind { line1, line2, point };
  Kind kind = Kind::point;
  double value1 = 0.0;  // line1: rho1 level; point: first coordinate
  double value2 = 0.0;  // line2: rho2 level; point: second coordinate
};

struct MembershipReport {
  RhoPair rho;
  bool inside = false;
  double nearest_distance = 0.0;
  MembershipWitness witness;
};

MembershipReport global_membership(RhoPair rho, const SingularData& s, double tol);

/// Distance of rho to (8 pi N x R) u (R x 8 pi N) with N = {1, 2, ...}.
double scalar_forbidden_distance(RhoPair rho);
bool scalar_forbidden(RhoPair rho, double tol);

/// 2 pi Lambda_{alpha1,alpha2} without the origin, for the given singular
/// point or a regular point (alpha = 0) when index is empty.
std::vector<std::array<double, 2>> blowup_candidates(const SingularData& s, std::optional<std::size_t> index);

/// 4 pi (1 + alpha) for the scalar problem.
double scalar_blowup_value(const SingularData& s, std::optional<std::size_t> index, int component = 1);

}  // namespace todalab
