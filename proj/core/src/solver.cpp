#include "todalab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <functional>
#include <numbers>
#include <string>

#include "todalab/errors.hpp"
#include "todalab/measures.hpp"
#include "todalab/quantization.hpp"
#include "todalab/spectral.hpp"

namespace todalab {

void SolverConfig::validate() const {
  if (max_iterations == 0) throw InvalidInput("SolverConfig: max_iterations must be positive");
  if (!(gradient_tolerance > 0)) throw InvalidInput("SolverConfig: tolerance must be positive");
  if (!(shrink > 0 && shrink < 1)) throw InvalidInput("SolverConfig: shrink must lie in (0, 1)");
  if (!(sufficient_decrease > 0 && sufficient_decrease < 1))
    throw InvalidInput("SolverConfig: sufficient decrease must lie in (0, 1)");
  if (!(preconditioner_shift > 0)) throw InvalidInput("SolverConfig: preconditioner shift must be positive");
  if (!(initial_step > 0)) throw InvalidInput("SolverConfig: initial step must be positive");
}

namespace {

constexpr double kPi = std::numbers::pi;
using Fields = std::vector<GridField>;

struct Objective {
  std::function<double(const Fields&)> energy;
  std::function<Fields(const Fields&)> gradient;
  // alpha -> E(u + alpha p) - E(u), evaluated without cancellation against E.
  std::function<std::function<double(double)>(const Fields&, const Fields&)> change;
};

// log int w e^{u + alpha p} - log int w e^u = log1p(int n_u expm1(alpha p)).
struct LogShift {
  GridField n, p;
  double operator()(double alpha) const {
    std::vector<double> e(n.size());
    for (std::size_t k = 0; k < e.size(); ++k) e[k] = n[k] * std::expm1(alpha * p[k]);
    return std::log1p(integrate(n.torus(), e));
  }
};

// alpha -> D(u + alpha p) - D(u) for the quadratic Dirichlet term D.
struct QuadraticShift {
  double linear = 0.0, quadratic = 0.0;
  double operator()(double alpha) const { return alpha * (linear + alpha * quadratic); }
};


double dot(const Fields& a, const Fields& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += inner(a[i], b[i]);
  return s;
}

void recenter(Fields& u) {
  for (auto& f : u) f += -integrate(f);
}

SolveResult descend(const Objective& obj, Fields u, const SolverConfig& cfg) {
  cfg.validate();
  recenter(u);
  SolveResult res;
  double E = obj.energy(u);
  res.energy_history.push_back(E);
  Fields g = obj.gradient(u);
  Fields prev_u, prev_g;
  double alpha = cfg.initial_step;
  std::size_t it = 0;
  for (;; ++it) {
    const double gnorm = std::sqrt(std::max(0.0, dot(g, g)));
    res.residual_norm = gnorm;
    Fields p;
    for (const auto& gi : g) p.push_back(-1.0 * shifted_inverse(gi, cfg.preconditioner_shift));
    res.preconditioned_norm = std::sqrt(std::max(0.0, dot(p, p)));
    if (gnorm <= cfg.gradient_tolerance) {
      res.converged = true;
      break;
    }
    if (it >= cfg.max_iterations) break;

    // Barzilai-Borwein trial step in the preconditioner metric.
    if (!prev_u.empty()) {
      Fields s, y;
      for (std::size_t i = 0; i < u.size(); ++i) {
        s.push_back(u[i] - prev_u[i]);
        y.push_back(g[i] - prev_g[i]);
      }
      double ss = 0.0;
      for (const auto& si : s) ss += cfg.preconditioner_shift * inner(si, si) - inner(si, laplacian(si));
      const double sy = dot(s, y);
      alpha = sy > 0 ? ss / sy : 2.0 * alpha;
      alpha = std::clamp(alpha, 1e-8, 1e8);
    }
    const double slope = dot(g, p);
    const auto change = obj.change(u, p);
    double delta = 0.0;
    bool accepted = false;
    while (alpha > 1e-14) {
      delta = change(alpha);
      if (std::isfinite(delta) && delta <= cfg.sufficient_decrease * alpha * slope) {
        accepted = true;
        break;
      }
      alpha *= cfg.shrink;
    }
    if (!accepted) break;
    Fields trial;
    for (std::size_t i = 0; i < u.size(); ++i) trial.push_back(u[i] + alpha * p[i]);
    recenter(trial);
    const double centered_E = obj.energy(trial);
    // Direct evaluation carries rounding of order eps |E|; anything beyond that is a bug.
    if (!(delta <= 0) || centered_E > E + 1e-12 * (1.0 + std::abs(E)))
      throw std::logic_error("minimize: energy increased across an accepted step");
    prev_u = std::move(u);
    prev_g = std::move(g);
    u = std::move(trial);
    E = centered_E;
    res.energy_history.push_back(E);
    g = obj.gradient(u);
  }
  res.iterations = it;
  res.energy = E;
  res.u = std::move(u);
  return res;
}

}  // namespace

SolveResult minimize_toda(const GridField& w1, const GridField& w2, RhoPair rho, const SolverConfig& cfg,
                          const std::optional<std::array<GridField, 2>>& guess) {
  require_same_torus(w1, w2, "minimize");
  Objective obj;
  obj.energy = [&](const Fields& u) { return toda_energy(u[0], u[1], w1, w2, rho).total; };
  obj.gradient = [&](const Fields& u) {
    auto g = toda_gradient(u[0], u[1], w1, w2, rho);
    return Fields{std::move(g[0]), std::move(g[1])};
  };
  obj.change = [&](const Fields& u, const Fields& p) -> std::function<double(double)> {
    const GridField a = laplacian(u[0]), b = laplacian(u[1]), c = laplacian(p[0]), d = laplacian(p[1]);
    QuadraticShift q;
    q.linear = -(2 * inner(a, p[0]) + 2 * inner(b, p[1]) + inner(a, p[1]) + inner(b, p[0])) / 3.0;
    q.quadratic = -(inner(p[0], c) + inner(p[1], d) + inner(p[0], d)) / 3.0;
    const double m1 = integrate(p[0]), m2 = integrate(p[1]);
    LogShift l1{normalized_exp(w1, u[0]), p[0]}, l2{normalized_exp(w2, u[1]), p[1]};
    return [=](double alpha) {
      return q(alpha) + rho.rho1 * (alpha * m1 - l1(alpha)) + rho.rho2 * (alpha * m2 - l2(alpha));
    };
  };
  Fields u0;
  if (guess) {
    require_same_torus((*guess)[0], w1, "minimize");
    require_same_torus((*guess)[1], w1, "minimize");
    u0 = {(*guess)[0], (*guess)[1]};
  } else {
    u0 = {GridField(w1.torus()), GridField(w1.torus())};
  }
  SolveResult r = descend(obj, std::move(u0), cfg);
  r.coercive = rho.rho1 < 4.0 * kPi && rho.rho2 < 4.0 * kPi;
  return r;
}

SolveResult minimize(const TodaProblem& p, const SolverConfig& cfg,
                     const std::optional<std::array<GridField, 2>>& guess) {
  const GridField w1 = desingularized_weight(p.h1, p.singular, 1);
  const GridField w2 = desingularized_weight(p.h2, p.singular, 2);
  return minimize_toda(w1, w2, p.rho, cfg, guess);
}

SolveResult minimize(const MeanFieldProblem& p, const SolverConfig& cfg, const std::optional<GridField>& guess) {
  for (double x : p.h.values())
    if (!(x > 0)) throw InvalidInput("minimize: weight must be strictly positive");
  Objective obj;
  obj.energy = [&](const Fields& u) { return meanfield_energy(u[0], p.h, p.rho).total; };
  obj.gradient = [&](const Fields& u) { return Fields{meanfield_gradient(u[0], p.h, p.rho)}; };
  obj.change = [&](const Fields& u, const Fields& dir) -> std::function<double(double)> {
    const QuadraticShift q{-inner(laplacian(u[0]), dir[0]), -0.5 * inner(dir[0], laplacian(dir[0]))};
    const double m = integrate(dir[0]);
    const RhoPair rho = p.rho;
    LogShift lp{normalized_exp(p.h, u[0]), dir[0]}, lm{normalized_exp(p.h, -1.0 * u[0]), -1.0 * dir[0]};
    return [=](double alpha) { return q(alpha) + rho.rho1 * (alpha * m - lp(alpha)) + rho.rho2 * (-alpha * m - lm(alpha)); };
  };
  Fields u0;
  if (guess) {
    require_same_torus(*guess, p.h, "minimize");
    u0 = {*guess};
  } else {
    u0 = {GridField(p.h.torus())};
  }
  SolveResult r = descend(obj, std::move(u0), cfg);
  r.coercive = p.rho.rho1 < 8.0 * kPi && p.rho.rho2 < 8.0 * kPi;
  return r;
}

double pde_residual_toda(const GridField& u1, const GridField& u2, const GridField& w1, const GridField& w2,
                         RhoPair rho) {
  const GridField l1 = laplacian(u1);
  const GridField l2 = laplacian(u2);
  const GridField f1 = normalized_exp(w1, u1);
  const GridField f2 = normalized_exp(w2, u2);
  GridField r1(u1.torus()), r2(u1.torus());
  for (std::size_t k = 0; k < r1.size(); ++k) {
    const double s1 = rho.rho1 * (f1[k] - 1.0);
    const double s2 = rho.rho2 * (f2[k] - 1.0);
    r1[k] = -l1[k] - (2.0 * s1 - s2);
    r2[k] = -l2[k] - (2.0 * s2 - s1);
  }
  return std::sqrt(inner(r1, r1) + inner(r2, r2));
}

double pde_residual_meanfield(const GridField& u, const GridField& h, RhoPair rho) {
  const GridField l = laplacian(u);
  const GridField fp = normalized_exp(h, u);
  const GridField fm = normalized_exp(h, -1.0 * u);
  GridField r(u.torus());
  for (std::size_t k = 0; k < r.size(); ++k) r[k] = -l[k] - (rho.rho1 * (fp[k] - 1.0) - rho.rho2 * (fm[k] - 1.0));
  return l2_norm(r);
}

namespace {

std::vector<double> mu_grid(double nu, std::size_t steps) {
  if (!(nu >= 0)) throw InvalidInput("continuation_sweep: nu must be non-negative");
  if (steps == 0) throw InvalidInput("continuation_sweep: need at least one step");
  std::vector<double> mu(steps, 0.0);
  for (std::size_t j = 0; j < steps && steps > 1; ++j)
    mu[j] = -nu + 2.0 * nu * static_cast<double>(j) / static_cast<double>(steps - 1);
  return mu;
}

std::string fmt(double x) { return std::to_string(x); }

void check_box_toda(RhoPair c, double nu, const SingularData& s, double tol) {
  const double lo1 = c.rho1 - 2 * nu, hi1 = c.rho1 + 2 * nu, lo2 = c.rho2 - 2 * nu, hi2 = c.rho2 + 2 * nu;
  const GlobalSet g = enumerate_global(s, hi1 + 4 * kPi, hi2 + 4 * kPi);
  for (double v : g.lambda1)
    if (v >= lo1 - tol && v <= hi1 + tol)
      throw PreconditionFailure("continuation_sweep", "parameter box meets the Lambda_1 line rho1 = " + fmt(v));
  for (double v : g.lambda2)
    if (v >= lo2 - tol && v <= hi2 + tol)
      throw PreconditionFailure("continuation_sweep", "parameter box meets the Lambda_2 line rho2 = " + fmt(v));
  for (const auto& p : g.lambda0)
    if (p[0] >= lo1 - tol && p[0] <= hi1 + tol && p[1] >= lo2 - tol && p[1] <= hi2 + tol)
      throw PreconditionFailure("continuation_sweep",
                                "parameter box contains the Lambda_0 point (" + fmt(p[0]) + ", " + fmt(p[1]) + ")");
}

void check_box_meanfield(RhoPair c, double nu, double tol) {
  for (int i = 0; i < 2; ++i) {
    const double lo = c[i] - 2 * nu, hi = c[i] + 2 * nu;
    for (int n = 1; 8.0 * kPi * n <= hi + tol; ++n)
      if (8.0 * kPi * n >= lo - tol)
        throw PreconditionFailure("continuation_sweep", "parameter box meets the line rho" + std::to_string(i + 1) +
                                                            " = 8 pi * " + std::to_string(n));
  }
}

}  // namespace

std::vector<ContinuationStep> continuation_sweep(const TodaProblem& p, double nu, std::size_t steps,
                                                 const SolverConfig& cfg, double tol) {
  if (!(tol > 0)) throw InvalidInput("continuation_sweep: tol must be positive");
  const auto mu = mu_grid(nu, steps);
  check_box_toda(p.rho, nu, p.singular, tol);
  const GridField w1 = desingularized_weight(p.h1, p.singular, 1);
  const GridField w2 = desingularized_weight(p.h2, p.singular, 2);
  std::vector<ContinuationStep> out;
  std::optional<std::array<GridField, 2>> warm;
  for (double m : mu) {
    const RhoPair rho(p.rho.rho1 + m, p.rho.rho2 + m);
    SolveResult r = minimize_toda(w1, w2, rho, cfg, warm);
    warm = std::array<GridField, 2>{r.u[0], r.u[1]};
    out.push_back({m, rho, std::move(r)});
  }
  return out;
}

std::vector<ContinuationStep> continuation_sweep(const MeanFieldProblem& p, double nu, std::size_t steps,
                                                 const SolverConfig& cfg, double tol) {
  if (!(tol > 0)) throw InvalidInput("continuation_sweep: tol must be positive");
  const auto mu = mu_grid(nu, steps);
  check_box_meanfield(p.rho, nu, tol);
  std::vector<ContinuationStep> out;
  std::optional<GridField> warm;
  for (double m : mu) {
    const MeanFieldProblem q{p.h, RhoPair(p.rho.rho1 + m, p.rho.rho2 + m)};
    SolveResult r = minimize(q, cfg, warm);
    warm = r.u[0];
    out.push_back({m, q.rho, std::move(r)});
  }
  return out;
}

namespace {

std::optional<std::size_t> singular_index_at(const FlatTorus& t, const SingularData& s, Point c) {
  for (std::size_t j = 0; j < s.size(); ++j)
    if (distance(t, s.points()[j].p, c) < 0.5 * t.spacing()) return j;
  return std::nullopt;
}

double ball_integral(const GridField& f, std::size_t center, double r) {
  double m = 0.0;
  for (auto k : ball_nodes(f.torus(), center, r)) m += f[k];
  return m * f.torus().cell_area();
}

}  // namespace

std::vector<LocalMass> blowup_masses(const GridField& u1, const GridField& u2, const GridField& w1,
                                     const GridField& w2, RhoPair rho, const std::vector<Point>& centers, double r,
                                     const SingularData& s) {
  const FlatTorus& t = u1.torus();
  if (!(r > 2.0 * t.spacing())) throw InvalidInput("blowup_masses: radius must exceed two grid spacings");
  const GridField f1 = normalized_exp(w1, u1);
  const GridField f2 = normalized_exp(w2, u2);
  std::vector<LocalMass> out;
  for (const auto& c : centers) {
    LocalMass lm;
    const std::size_t node = t.nearest_node(c);
    lm.center = t.node(node);
    lm.mass = {rho.rho1 * ball_integral(f1, node, r), rho.rho2 * ball_integral(f2, node, r)};
    lm.candidate_distance = std::numeric_limits<double>::infinity();
    for (const auto& cand : blowup_candidates(s, singular_index_at(t, s, lm.center))) {
      const double d = std::hypot(lm.mass[0] - cand[0], lm.mass[1] - cand[1]);
      if (d < lm.candidate_distance) {
        lm.candidate_distance = d;
        lm.nearest_candidate = cand;
      }
    }
    out.push_back(lm);
  }
  return out;
}

std::vector<LocalMass> blowup_masses(const GridField& u, const GridField& w, double rho,
                                     const std::vector<Point>& centers, double r, const SingularData& s) {
  const FlatTorus& t = u.torus();
  if (!(r > 2.0 * t.spacing())) throw InvalidInput("blowup_masses: radius must exceed two grid spacings");
  const GridField f = normalized_exp(w, u);
  std::vector<LocalMass> out;
  for (const auto& c : centers) {
    LocalMass lm;
    const std::size_t node = t.nearest_node(c);
    lm.center = t.node(node);
    lm.mass = {rho * ball_integral(f, node, r), 0.0};
    const double cand = scalar_blowup_value(s, singular_index_at(t, s, lm.center), 1);
    lm.nearest_candidate = {cand, 0.0};
    lm.candidate_distance = std::abs(lm.mass[0] - cand);
    out.push_back(lm);
  }
  return out;
}

}  // namespace todalab
