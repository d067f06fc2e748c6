#include "todalab/quantization.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "todalab/errors.hpp"

namespace todalab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDedup = 1e-9;
constexpr double kOnEllipse = 1e-12;
constexpr std::size_t kMaxPoints = 100000;

void check_alpha(double a1, double a2) {
  if (!(a1 >= 0) || !(a2 >= 0) || !std::isfinite(a1) || !std::isfinite(a2))
    throw InvalidInput("quantization: orders must be finite and non-negative");
}

bool same(QuantPoint a, QuantPoint b) { return std::abs(a.s1 - b.s1) <= kDedup && std::abs(a.s2 - b.s2) <= kDedup; }

bool contains(const std::vector<QuantPoint>& v, QuantPoint p) {
  return std::any_of(v.begin(), v.end(), [&](QuantPoint q) { return same(p, q); });
}

// Real roots y of y^2 - (x + 2B) y + (x^2 - 2 A x) = 0, i.e. the partner
// coordinates of x on the ellipse with the roles (A, B) for (x, y).
std::vector<double> partner_roots(double x, double A, double B) {
  const double p = x + 2.0 * B;
  const double q = x * x - 2.0 * A * x;
  double disc = p * p - 4.0 * q;
  const double scale = std::max(1.0, p * p);
  if (disc < -kOnEllipse * scale) return {};
  if (disc < 0) disc = 0;
  // Numerically stable pair: the large root, then q over it.
  const double big = 0.5 * (p + std::sqrt(disc));
  std::vector<double> r{big};
  if (big != 0.0) r.push_back(q / big);
  else r.push_back(0.0);
  return r;
}

// Largest x with real partner: root of -3x^2 + (8A + 4B) x + 4B^2 = 0.
double coordinate_bound(double A, double B) {
  const double b = 8.0 * A + 4.0 * B;
  return (b + std::sqrt(b * b + 48.0 * B * B)) / 6.0;
}

}  // namespace

double ellipse_residual(double alpha1, double alpha2, QuantPoint p) {
  return p.s1 * p.s1 - p.s1 * p.s2 + p.s2 * p.s2 - 2.0 * (1.0 + alpha1) * p.s1 - 2.0 * (1.0 + alpha2) * p.s2;
}

std::vector<QuantPoint> seed_points(double alpha1, double alpha2) {
  check_alpha(alpha1, alpha2);
  const double A = 1.0 + alpha1, B = 1.0 + alpha2;
  return {{0.0, 0.0},           {2.0 * A, 0.0},           {0.0, 2.0 * B},
          {2.0 * A, 2.0 * (A + B)}, {2.0 * (A + B), 2.0 * B}, {2.0 * (A + B), 2.0 * (A + B)}};
}

std::vector<QuantPoint> close_under_rules(double alpha1, double alpha2, std::vector<QuantPoint> points) {
  check_alpha(alpha1, alpha2);
  const double A = 1.0 + alpha1, B = 1.0 + alpha2;
  std::vector<QuantPoint> out;
  for (auto p : points)
    if (!contains(out, p)) out.push_back(p);
  const double bound1 = coordinate_bound(A, B);
  const double bound2 = coordinate_bound(B, A);

  auto add = [&](QuantPoint p) {
    if (std::abs(ellipse_residual(alpha1, alpha2, p)) > 1e-9) return;
    if (!contains(out, p)) {
      out.push_back(p);
      if (out.size() > kMaxPoints) throw std::runtime_error("local_lambda: closure did not terminate");
    }
  };

  for (std::size_t idx = 0; idx < out.size(); ++idx) {
    const QuantPoint base = out[idx];
    // Shift the first coordinate by even integers, solve for the second.
    for (int m = 0;; ++m) {
      const double c = base.s1 + 2.0 * m;
      if (c > bound1 + kDedup) break;
      for (double d : partner_roots(c, A, B)) {
        if (d < 0 && d > -kOnEllipse) d = 0;
        if (d >= 0 && d >= base.s2 - kOnEllipse) add({c, d});
      }
    }
    // Shift the second coordinate, solve for the first.
    for (int n = 0;; ++n) {
      const double d = base.s2 + 2.0 * n;
      if (d > bound2 + kDedup) break;
      for (double c : partner_roots(d, B, A)) {
        if (c < 0 && c > -kOnEllipse) c = 0;
        if (c >= 0 && c >= base.s1 - kOnEllipse) add({c, d});
      }
    }
  }
  std::sort(out.begin(), out.end(), [](QuantPoint a, QuantPoint b) {
    if (std::abs(a.s1 - b.s1) > kDedup) return a.s1 < b.s1;
    return a.s2 < b.s2;
  });
  return out;
}

LocalSet local_lambda(double alpha1, double alpha2) {
  LocalSet s;
  s.alpha1 = alpha1;
  s.alpha2 = alpha2;
  s.points = close_under_rules(alpha1, alpha2, seed_points(alpha1, alpha2));
  return s;
}

namespace {

std::vector<double> line_values(const SingularData& s, int component, double bound) {
  const std::size_t m = s.size();
  if (m > 20) throw InvalidInput("quantization: at most 20 singular points are supported");
  std::vector<double> out;
  for (std::size_t mask = 0; mask < (std::size_t{1} << m); ++mask) {
    double base = 0.0;
    for (std::size_t j = 0; j < m; ++j)
      if (mask & (std::size_t{1} << j)) base += 1.0 + s.alpha(component, j);
    for (int n = 0;; ++n) {
      const double v = 4.0 * kPi * (n + base);
      if (v > bound) break;
      out.push_back(v);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(), [](double a, double b) { return std::abs(a - b) <= kDedup; }),
            out.end());
  return out;
}

}  // namespace

GlobalSet enumerate_global(const SingularData& s, double b1, double b2) {
  GlobalSet g;
  g.lambda1 = line_values(s, 1, b1);
  g.lambda2 = line_values(s, 2, b2);

  std::vector<LocalSet> locals;
  for (const auto& p : s.points()) locals.push_back(local_lambda(p.alpha1, p.alpha2));
  std::vector<std::array<double, 2>> sums;
  std::function<void(std::size_t, double, double)> rec = [&](std::size_t j, double x, double y) {
    if (2.0 * kPi * x > b1 || 2.0 * kPi * y > b2) return;
    if (j == locals.size()) {
      sums.push_back({x, y});
      return;
    }
    for (const auto& q : locals[j].points) rec(j + 1, x + q.s1, y + q.s2);
  };
  rec(0, 0.0, 0.0);
  for (const auto& sxy : sums)
    for (int p = 0; 2.0 * kPi * (sxy[0] + 2.0 * p) <= b1; ++p)
      for (int q = 0; 2.0 * kPi * (sxy[1] + 2.0 * q) <= b2; ++q)
        g.lambda0.push_back({2.0 * kPi * (sxy[0] + 2.0 * p), 2.0 * kPi * (sxy[1] + 2.0 * q)});
  std::sort(g.lambda0.begin(), g.lambda0.end());
  g.lambda0.erase(std::unique(g.lambda0.begin(), g.lambda0.end(),
                              [](const auto& a, const auto& b) {
                                return std::abs(a[0] - b[0]) <= kDedup && std::abs(a[1] - b[1]) <= kDedup;
                              }),
                  g.lambda0.end());
  return g;
}

MembershipReport global_membership(RhoPair rho, const SingularData& s, double tol) {
  if (!(tol > 0)) throw InvalidInput("global_membership: tol must be positive");
  const GlobalSet g = enumerate_global(s, rho.rho1 + 4.0 * kPi, rho.rho2 + 4.0 * kPi);
  MembershipReport r;
  r.rho = rho;
  r.nearest_distance = std::numeric_limits<double>::infinity();
  for (double v : g.lambda1)
    if (std::abs(rho.rho1 - v) < r.nearest_distance) {
      r.nearest_distance = std::abs(rho.rho1 - v);
      r.witness = {MembershipWitness::Kind::line1, v, 0.0};
    }
  for (double v : g.lambda2)
    if (std::abs(rho.rho2 - v) < r.nearest_distance) {
      r.nearest_distance = std::abs(rho.rho2 - v);
      r.witness = {MembershipWitness::Kind::line2, 0.0, v};
    }
  for (const auto& p : g.lambda0) {
    const double d = std::hypot(rho.rho1 - p[0], rho.rho2 - p[1]);
    if (d < r.nearest_distance) {
      r.nearest_distance = d;
      r.witness = {MembershipWitness::Kind::point, p[0], p[1]};
    }
  }
  r.inside = r.nearest_distance <= tol;
  return r;
}

double scalar_forbidden_distance(RhoPair rho) {
  auto dist = [](double x) {
    const double n = std::max(1.0, std::round(x / (8.0 * kPi)));
    return std::abs(x - 8.0 * kPi * n);
  };
  return std::min(dist(rho.rho1), dist(rho.rho2));
}

bool scalar_forbidden(RhoPair rho, double tol) {
  if (!(tol > 0)) throw InvalidInput("scalar_forbidden: tol must be positive");
  return scalar_forbidden_distance(rho) <= tol;
}

std::vector<std::array<double, 2>> blowup_candidates(const SingularData& s, std::optional<std::size_t> index) {
  double a1 = 0.0, a2 = 0.0;
  if (index) {
    if (*index >= s.size()) throw std::out_of_range("blowup_candidates: singular point index out of range");
    a1 = s.points()[*index].alpha1;
    a2 = s.points()[*index].alpha2;
  }
  std::vector<std::array<double, 2>> out;
  for (const auto& p : local_lambda(a1, a2).points)
    if (p.s1 != 0.0 || p.s2 != 0.0) out.push_back({2.0 * kPi * p.s1, 2.0 * kPi * p.s2});
  return out;
}

double scalar_blowup_value(const SingularData& s, std::optional<std::size_t> index, int component) {
  if (!index) return 4.0 * kPi;
  if (*index >= s.size()) throw std::out_of_range("scalar_blowup_value: singular point index out of range");
  return 4.0 * kPi * (1.0 + s.alpha(component, *index));
}

}  // namespace todalab
