#include "todalab/functionals.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "todalab/errors.hpp"
#include "todalab/spectral.hpp"

namespace todalab {

RhoPair::RhoPair(double r1, double r2) : rho1(r1), rho2(r2) {
  if (!(r1 >= 0) || !(r2 >= 0) || !std::isfinite(r1) || !std::isfinite(r2))
    throw InvalidInput("RhoPair: parameters must be finite and non-negative");
}

namespace {

constexpr double kPi = std::numbers::pi;

double shift_for(const GridField& w, const GridField& u) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (w[k] < 0) throw InvalidInput("log_integral_exp: weight must be non-negative");
    if (w[k] > 0) m = std::max(m, u[k]);
  }
  if (!std::isfinite(m)) throw InvalidInput("log_integral_exp: weight vanishes identically");
  return m;
}

GridField negated(const GridField& u) { return -1.0 * u; }

}  // namespace

double log_integral_exp(const GridField& w, const GridField& u) {
  require_same_torus(w, u, "log_integral_exp");
  const double m = shift_for(w, u);
  std::vector<double> e(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) e[k] = w[k] > 0 ? w[k] * std::exp(u[k] - m) : 0.0;
  const double s = integrate(u.torus(), e);
  if (!(s > 0)) throw InvalidInput("log_integral_exp: weight has zero integral");
  return m + std::log(s);
}

GridField normalized_exp(const GridField& w, const GridField& u) {
  require_same_torus(w, u, "normalized_exp");
  const double m = shift_for(w, u);
  std::vector<double> e(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) e[k] = w[k] > 0 ? w[k] * std::exp(u[k] - m) : 0.0;
  const double s = integrate(u.torus(), e);
  if (!(s > 0)) throw InvalidInput("normalized_exp: weight has zero integral");
  for (auto& x : e) x /= s;
  return GridField(u.torus(), std::move(e));
}

GridField q_density(const GridField& u1, const GridField& u2) {
  require_same_torus(u1, u2, "q_density");
  const auto g1 = gradient(u1);
  const auto g2 = gradient(u2);
  GridField q(u1.torus());
  for (std::size_t k = 0; k < q.size(); ++k) {
    const double a = g1[0][k] * g1[0][k] + g1[1][k] * g1[1][k];
    const double b = g2[0][k] * g2[0][k] + g2[1][k] * g2[1][k];
    const double c = g1[0][k] * g2[0][k] + g1[1][k] * g2[1][k];
    q[k] = (a + b + c) / 3.0;
  }
  return q;
}

double dirichlet_integral(const GridField& u) { return -inner(u, laplacian(u)); }

namespace {

// 3 int Q in the same spectral form as dirichlet_integral.
double toda_form(const GridField& u1, const GridField& u2) {
  const GridField l1 = laplacian(u1), l2 = laplacian(u2);
  return -(inner(u1, l1) + inner(u2, l2) + inner(u1, l2));
}

}  // namespace

EnergyReport toda_energy(const GridField& u1, const GridField& u2, const GridField& w1, const GridField& w2,
                         RhoPair rho) {
  require_same_torus(u1, u2, "toda_energy");
  require_same_torus(u1, w1, "toda_energy");
  require_same_torus(u1, w2, "toda_energy");
  EnergyReport r;
  r.dirichlet = toda_form(u1, u2) / 3.0;
  r.average_terms = {integrate(u1), integrate(u2)};
  r.logexp_terms = {log_integral_exp(w1, u1), log_integral_exp(w2, u2)};
  r.total = r.dirichlet + rho.rho1 * (r.average_terms[0] - r.logexp_terms[0]) +
            rho.rho2 * (r.average_terms[1] - r.logexp_terms[1]);
  return r;
}

std::array<GridField, 2> toda_gradient(const GridField& u1, const GridField& u2, const GridField& w1,
                                       const GridField& w2, RhoPair rho) {
  require_same_torus(u1, u2, "toda_gradient");
  // d/du1 of int Q is -(2 L u1 + L u2) / 3.
  const GridField l1 = laplacian(u1);
  const GridField l2 = laplacian(u2);
  const GridField f1 = normalized_exp(w1, u1);
  const GridField f2 = normalized_exp(w2, u2);
  GridField g1(u1.torus()), g2(u1.torus());
  for (std::size_t k = 0; k < g1.size(); ++k) {
    g1[k] = -(2.0 * l1[k] + l2[k]) / 3.0 + rho.rho1 * (1.0 - f1[k]);
    g2[k] = -(2.0 * l2[k] + l1[k]) / 3.0 + rho.rho2 * (1.0 - f2[k]);
  }
  return {std::move(g1), std::move(g2)};
}

EnergyReport meanfield_energy(const GridField& u, const GridField& h, RhoPair rho) {
  require_same_torus(u, h, "meanfield_energy");
  EnergyReport r;
  r.dirichlet = 0.5 * dirichlet_integral(u);
  const double avg = integrate(u);
  r.average_terms = {avg, -avg};
  r.logexp_terms = {log_integral_exp(h, u), log_integral_exp(h, negated(u))};
  r.total = r.dirichlet + rho.rho1 * (r.average_terms[0] - r.logexp_terms[0]) +
            rho.rho2 * (r.average_terms[1] - r.logexp_terms[1]);
  return r;
}

GridField meanfield_gradient(const GridField& u, const GridField& h, RhoPair rho) {
  require_same_torus(u, h, "meanfield_gradient");
  const GridField l = laplacian(u);
  const GridField fp = normalized_exp(h, u);
  const GridField fm = normalized_exp(h, negated(u));
  GridField g(u.torus());
  for (std::size_t k = 0; k < g.size(); ++k)
    g[k] = -l[k] - rho.rho1 * (fp[k] - 1.0) + rho.rho2 * (fm[k] - 1.0);
  return g;
}

EnergyReport liouville_energy(const GridField& u, const GridField& h, double rho) {
  require_same_torus(u, h, "liouville_energy");
  if (!(rho >= 0)) throw InvalidInput("liouville_energy: rho must be non-negative");
  EnergyReport r;
  r.dirichlet = 0.5 * dirichlet_integral(u);
  r.average_terms = {integrate(u), 0.0};
  r.logexp_terms = {log_integral_exp(h, u), 0.0};
  r.total = r.dirichlet + rho * (r.average_terms[0] - r.logexp_terms[0]);
  return r;
}

GridField liouville_gradient(const GridField& u, const GridField& h, double rho) {
  require_same_torus(u, h, "liouville_gradient");
  const GridField l = laplacian(u);
  const GridField f = normalized_exp(h, u);
  GridField g(u.torus());
  for (std::size_t k = 0; k < g.size(); ++k) g[k] = -l[k] + rho * (1.0 - f[k]);
  return g;
}

double mt_ratio(const GridField& u) {
  const double lo = u.min(), hi = u.max();
  if (hi - lo <= 1e-12 * std::max(1.0, std::max(std::abs(lo), std::abs(hi))))
    throw InvalidInput("mt_ratio: field is constant");
  const double mean = integrate(u);
  const GridField one(u.torus(), 1.0);
  const double num = log_integral_exp(one, u + (-mean));
  const double den = dirichlet_integral(u) / (16.0 * kPi);
  return num / den;
}

double mt_system_gap(const GridField& u1, const GridField& u2, const GridField& h1, const GridField& h2) {
  require_same_torus(u1, u2, "mt_system_gap");
  const double q = toda_form(u1, u2) / 3.0;
  const double t1 = log_integral_exp(h1, u1) - integrate(u1);
  const double t2 = log_integral_exp(h2, u2) - integrate(u2);
  return q - 4.0 * kPi * (t1 + t2);
}

}  // namespace todalab
