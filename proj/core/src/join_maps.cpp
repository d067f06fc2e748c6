#include "todalab/join_maps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "todalab/errors.hpp"
#include "todalab/parallel.hpp"
#include "todalab/regression.hpp"

namespace todalab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_on_curve(const FlatTorus& t, const CurveSystem& c, const BarycenterMeasure& s, int i) {
  for (const auto& a : s.atoms())
    if (c.distance_to(t, i, a.x) > t.spacing())
      throw InvalidInput("JoinElement: atom of sigma" + std::to_string(i) + " is off curve " + std::to_string(i));
}

bool same_measure(const FlatTorus& t, const BarycenterMeasure& a, const BarycenterMeasure& b, double tol) {
  if (a.size() != b.size()) return false;
  std::vector<char> used(b.size(), 0);
  for (const auto& x : a.atoms()) {
    bool found = false;
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (used[j]) continue;
      const auto& y = b.atoms()[j];
      if (std::abs(x.t - y.t) <= tol && distance(t, x.x, y.x) <= tol) {
        used[j] = 1;
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

}  // namespace

JoinElement::JoinElement(const FlatTorus& t, const CurveSystem& c, BarycenterMeasure sigma1,
                         BarycenterMeasure sigma2, double r)
    : s1_(std::move(sigma1)), s2_(std::move(sigma2)), r_(r) {
  if (!(r >= 0.0 && r <= 1.0)) throw InvalidInput("JoinElement: r must lie in [0, 1]");
  check_on_curve(t, c, s1_, 1);
  check_on_curve(t, c, s2_, 2);
}

bool join_equal(const FlatTorus& t, const JoinElement& a, const JoinElement& b, double tol) {
  if (std::abs(a.r() - b.r()) > tol) return false;
  const bool at0 = a.r() == 0.0 && b.r() == 0.0;
  const bool at1 = a.r() == 1.0 && b.r() == 1.0;
  const bool s1 = same_measure(t, a.sigma1(), b.sigma1(), tol);
  const bool s2 = same_measure(t, a.sigma2(), b.sigma2(), tol);
  if (at0) return s1;
  if (at1) return s2;
  return s1 && s2;
}

GridField bubble_log_sum(const FlatTorus& t, const BarycenterMeasure& s, double lambda) {
  if (!(lambda >= 0) || !std::isfinite(lambda)) throw InvalidInput("bubble_log_sum: scale must be non-negative");
  GridField v(t);
  if (lambda == 0.0) return v;
  const double l2 = lambda * lambda;
  std::vector<double> a(s.size());
  for (std::size_t k = 0; k < t.size(); ++k) {
    const Point x = t.node(k);
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double d = distance(t, x, s.atoms()[i].x);
      a[i] = std::log(s.atoms()[i].t) - 2.0 * std::log1p(l2 * d * d);
      m = std::max(m, a[i]);
    }
    double acc = 0.0;
    for (double ai : a) acc += std::exp(ai - m);
    v[k] = m + std::log(acc);
  }
  return v;
}

std::array<GridField, 2> bubble_log_sum_gradient(const FlatTorus& t, const BarycenterMeasure& s, double lambda) {
  GridField g1(t), g2(t);
  if (lambda == 0.0) return {g1, g2};
  const double l2 = lambda * lambda;
  std::vector<double> a(s.size());
  for (std::size_t k = 0; k < t.size(); ++k) {
    const Point x = t.node(k);
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double d = distance(t, x, s.atoms()[i].x);
      a[i] = std::log(s.atoms()[i].t) - 2.0 * std::log1p(l2 * d * d);
      m = std::max(m, a[i]);
    }
    double den = 0.0, n1 = 0.0, n2 = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const auto dx = displacement(t, s.atoms()[i].x, x);
      const double w = std::exp(a[i] - m);
      const double q = -4.0 * l2 / (1.0 + l2 * (dx[0] * dx[0] + dx[1] * dx[1]));
      den += w;
      n1 += w * q * dx[0];
      n2 += w * q * dx[1];
    }
    g1[k] = n1 / den;
    g2[k] = n2 / den;
  }
  return {std::move(g1), std::move(g2)};
}

std::array<GridField, 2> test_function(const FlatTorus& t, const JoinElement& z, double lambda) {
  if (!(lambda > 0)) throw InvalidInput("test_function: lambda must be positive");
  const GridField v1 = bubble_log_sum(t, z.sigma1(), z.lambda1(lambda));
  const GridField v2 = bubble_log_sum(t, z.sigma2(), z.lambda2(lambda));
  GridField p1(t), p2(t);
  for (std::size_t k = 0; k < t.size(); ++k) {
    p1[k] = v1[k] - 0.5 * v2[k];
    p2[k] = -0.5 * v1[k] + v2[k];
  }
  return {std::move(p1), std::move(p2)};
}

GridField scalar_test_function(const FlatTorus& t, const JoinElement& z, double lambda) {
  if (!(lambda > 0)) throw InvalidInput("scalar_test_function: lambda must be positive");
  return bubble_log_sum(t, z.sigma1(), z.lambda1(lambda)) - bubble_log_sum(t, z.sigma2(), z.lambda2(lambda));
}

void validate_lambda_grid(const std::vector<double>& lambdas) {
  if (lambdas.size() < 4) throw InvalidInput("lambda grid needs at least 4 points");
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > 0) || !std::isfinite(lambdas[i])) throw InvalidInput("lambda grid must be positive");
    if (i > 0 && !(lambdas[i] > lambdas[i - 1])) throw InvalidInput("lambda grid must be increasing");
  }
  if (lambdas.back() < 100.0 * lambdas.front() * (1.0 - 1e-12))
    throw InvalidInput("lambda grid must span at least two decades");
}

double top_decade_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.empty()) return kNaN;
  const double top = *std::max_element(x.begin(), x.end());
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] >= top / 10.0 * (1.0 - 1e-12)) {
      lx.push_back(std::log(x[i]));
      ly.push_back(y[i]);
    }
  if (lx.size() < 2) return kNaN;
  return fit_line(lx, ly).slope;
}

namespace {

void fill_slopes(EnergyCurve& c) {
  std::vector<double> x, y;
  for (auto& row : c.rows) {
    x.push_back(row.lambda);
    y.push_back(row.energy.total);
    row.slope_so_far = top_decade_slope(x, y);
  }
  c.slope = top_decade_slope(x, y);
}

double fit_distance(const GridField& w, const GridField& phi, std::size_t k) {
  if (k == 0) return kNaN;
  return distance_to_barycenters(normalize_exp(w, phi), k).distance;
}

}  // namespace

EnergyCurve energy_curve(const FlatTorus& t, const JoinElement& z, RhoPair rho, const std::vector<double>& lambdas,
                         const GridField& w1, const GridField& w2, bool with_distances, std::size_t threads) {
  validate_lambda_grid(lambdas);
  EnergyCurve c;
  c.rows = parallel_map<CurveRow>(lambdas.size(), threads, [&](std::size_t i) {
    const double lam = lambdas[i];
    const auto phi = test_function(t, z, lam);
    CurveRow row;
    row.lambda = lam;
    row.lambda1 = z.lambda1(lam);
    row.lambda2 = z.lambda2(lam);
    row.energy = toda_energy(phi[0], phi[1], w1, w2, rho);
    row.d1 = with_distances ? fit_distance(w1, phi[0], z.sigma1().capacity()) : kNaN;
    row.d2 = with_distances ? fit_distance(w2, phi[1], z.sigma2().capacity()) : kNaN;
    return row;
  });
  fill_slopes(c);
  return c;
}

EnergyCurve scalar_energy_curve(const FlatTorus& t, const JoinElement& z, RhoPair rho,
                                const std::vector<double>& lambdas, const GridField& h, bool with_distances,
                                std::size_t threads) {
  validate_lambda_grid(lambdas);
  EnergyCurve c;
  c.rows = parallel_map<CurveRow>(lambdas.size(), threads, [&](std::size_t i) {
    const double lam = lambdas[i];
    const GridField phi = scalar_test_function(t, z, lam);
    CurveRow row;
    row.lambda = lam;
    row.lambda1 = z.lambda1(lam);
    row.lambda2 = z.lambda2(lam);
    row.energy = meanfield_energy(phi, h, rho);
    row.d1 = with_distances ? fit_distance(h, phi, z.sigma1().capacity()) : kNaN;
    row.d2 = with_distances ? fit_distance(h, -1.0 * phi, z.sigma2().capacity()) : kNaN;
    return row;
  });
  fill_slopes(c);
  return c;
}

double plateau(double z) {
  if (z <= 0.25) return 0.0;
  if (z >= 0.75) return 1.0;
  return 2.0 * z - 0.5;
}

double rtilde(double d1, double d2) {
  if (!(d1 >= 0) || !(d2 >= 0)) throw InvalidInput("rtilde: distances must be non-negative");
  if (d1 == 0.0 && d2 == 0.0) throw InvalidInput("rtilde: both distances vanish");
  if (std::isinf(d1) && std::isinf(d2)) throw InvalidInput("rtilde: both distances are infinite");
  if (std::isinf(d1)) return plateau(1.0);
  if (std::isinf(d2)) return plateau(0.0);
  return plateau(d1 / (d1 + d2));
}

PsiResult psi_map(const GridField& u1, const GridField& u2, const GridField& w1, const GridField& w2, std::size_t k,
                  std::size_t l, const CurveSystem& curves, const PsiOptions& opt) {
  if (k == 0 || l == 0) throw InvalidInput("psi_map: k and l must be at least 1");
  const FlatTorus& t = u1.torus();
  const auto fit1 = distance_to_barycenters(normalize_exp(w1, u1), k);
  const auto fit2 = distance_to_barycenters(normalize_exp(w2, u2), l);
  if (fit1.distance > opt.admission && fit2.distance > opt.admission)
    throw PreconditionFailure("psi_map", "both densities are farther than " + std::to_string(opt.admission) +
                                             " from the barycenter spaces (" + std::to_string(fit1.distance) + ", " +
                                             std::to_string(fit2.distance) + ")");
  // Exactly atomic densities give d1 = d2 = 0; treat the first as concentrated.
  const double r = (fit1.distance == 0.0 && fit2.distance == 0.0) ? 0.0 : rtilde(fit1.distance, fit2.distance);
  JoinElement zeta(t, curves, push_forward(t, fit1.sigma, curves, 1), push_forward(t, fit2.sigma, curves, 2), r);
  return PsiResult{std::move(zeta), fit1.distance, fit2.distance, r};
}

HomotopyReport homotopy_identity_check(const FlatTorus& t, const JoinElement& z, double lambda,
                                       const CurveSystem& curves, const GridField& w1, const GridField& w2,
                                       const PsiOptions& opt) {
  const auto phi = test_function(t, z, lambda);
  const PsiResult p = psi_map(phi[0], phi[1], w1, w2, z.sigma1().capacity(), z.sigma2().capacity(), curves, opt);
  HomotopyReport rep;
  rep.lambda = lambda;
  rep.atom_displacement_1 = kr_distance(t, z.sigma1(), p.zeta.sigma1());
  rep.atom_displacement_2 = kr_distance(t, z.sigma2(), p.zeta.sigma2());
  const double fr = plateau(z.r());
  rep.r_deviation = std::abs(p.rtilde - fr);
  rep.relevant_1 = fr < 1.0;
  rep.relevant_2 = fr > 0.0;
  rep.rtilde = p.rtilde;
  return rep;
}

ScalingCheck kr_scaling_check(const FlatTorus& t, const JoinElement& z, const std::vector<double>& lambdas,
                              int component, const GridField& w1, const GridField& w2, const ScalingOptions& opt,
                              std::size_t threads) {
  if (component != 1 && component != 2) throw InvalidInput("kr_scaling_check: component must be 1 or 2");
  validate_lambda_grid(lambdas);
  const bool degenerate = component == 1 ? z.r() == 1.0 : z.r() == 0.0;
  if (!degenerate)
    for (double lam : lambdas) {
      const double li = component == 1 ? z.lambda1(lam) : z.lambda2(lam);
      if (!(li > 1.0)) throw InvalidInput("kr_scaling_check: every component scale must exceed 1");
    }
  const std::size_t cap = component == 1 ? z.sigma1().capacity() : z.sigma2().capacity();
  ScalingCheck out;
  out.rows = parallel_map<ScalingRow>(lambdas.size(), threads, [&](std::size_t i) {
    const double lam = lambdas[i];
    const auto phi = test_function(t, z, lam);
    ScalingRow row;
    row.lambda = lam;
    row.lambda1 = z.lambda1(lam);
    row.lambda2 = z.lambda2(lam);
    const GridField& w = component == 1 ? w1 : w2;
    row.distance = distance_to_barycenters(normalize_exp(w, phi[component - 1]), cap).distance;
    return row;
  });
  std::vector<double> x, y;
  for (auto& row : out.rows) {
    const double li = component == 1 ? row.lambda1 : row.lambda2;
    if (degenerate)
      row.in_fit = true;
    else
      row.in_fit = li >= opt.min_scale && li * t.spacing() <= opt.max_scale_spacing;
    if (!(row.distance > 0)) row.in_fit = false;
    if (!row.in_fit) continue;
    x.push_back(std::log(degenerate ? row.lambda : li));
    y.push_back(std::log(row.distance));
  }
  if (x.size() < 2) throw InvalidInput("kr_scaling_check: fewer than two points inside the fit window");
  out.slope = fit_line(x, y).slope;
  return out;
}

}  // namespace todalab
