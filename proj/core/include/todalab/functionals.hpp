#pragma once

#include <array>

#include "todalab/torus.hpp"

namespace todalab {

struct RhoPair {
  double rho1 = 0.0;
  double rho2 = 0.0;

  RhoPair() = default;
  RhoPair(double r1, double r2);
  double operator[](int i) const { return i == 0 ? rho1 : rho2; }
};

/// total = dirichlet + sum_i rho_i * (average_terms[i] - logexp_terms[i])
struct EnergyReport {
  double dirichlet = 0.0;
  std::array<double, 2> average_terms{0.0, 0.0};
  std::array<double, 2> logexp_terms{0.0, 0.0};
  double total = 0.0;
};

/// log of integral(w * exp(u)), shifted by max u over the support of w.
double log_integral_exp(const GridField& w, const GridField& u);

/// w e^u / integral(w e^u) evaluated with the same shift.
GridField normalized_exp(const GridField& w, const GridField& u);

/// (1/3)(|grad u1|^2 + |grad u2|^2 + grad u1 . grad u2), spectral gradients.
/// Its integral matches the Dirichlet term of toda_energy except on Nyquist modes.
GridField q_density(const GridField& u1, const GridField& u2);

EnergyReport toda_energy(const GridField& u1, const GridField& u2, const GridField& w1, const GridField& w2,
                         RhoPair rho);

/// L2 gradient of toda_energy; each component has zero mean.
std::array<GridField, 2> toda_gradient(const GridField& u1, const GridField& u2, const GridField& w1,
                                       const GridField& w2, RhoPair rho);

/// 1/2 int |grad u|^2 - rho1 (log int h e^u - int u) - rho2 (log int h e^{-u} + int u).
/// Reported with average_terms = (int u, -int u), logexp_terms = (log int h e^u, log int h e^{-u}).
EnergyReport meanfield_energy(const GridField& u, const GridField& h, RhoPair rho);
GridField meanfield_gradient(const GridField& u, const GridField& h, RhoPair rho);

/// Single Liouville functional 1/2 int |grad u|^2 + rho (int u - log int h e^u).
EnergyReport liouville_energy(const GridField& u, const GridField& h, double rho);
GridField liouville_gradient(const GridField& u, const GridField& h, double rho);

/// log int e^{u - mean u} divided by (1/16 pi) int |grad u|^2.
double mt_ratio(const GridField& u);

/// int Q(u1,u2) - 4 pi sum_i (log int h_i e^{u_i} - int u_i).
double mt_system_gap(const GridField& u1, const GridField& u2, const GridField& h1, const GridField& h2);

/// integral |grad u|^2 as -<u, Laplace u>. The Nyquist modes count, so the
/// form is positive on every non-constant field.
double dirichlet_integral(const GridField& u);

}  // namespace todalab
