#pragma once

#include <array>
#include <optional>
#include <vector>

#include "todalab/functionals.hpp"
#include "todalab/torus.hpp"

namespace todalab {

struct SolverConfig {
  std::size_t max_iterations = 2000;
  double gradient_tolerance = 1e-8;  // on the L2 norm of the energy gradient
  double shrink = 0.5;
  double sufficient_decrease = 1e-4;
  double preconditioner_shift = 1.0;
  double initial_step = 1.0;
  void validate() const;
};

struct LocalMass {
  Point center;
  std::array<double, 2> mass{0.0, 0.0};
  std::array<double, 2> nearest_candidate{0.0, 0.0};
  double candidate_distance = 0.0;
};

struct SolveResult {
  std::vector<GridField> u;
  double energy = 0.0;
  double residual_norm = 0.0;  // gradient norm at the returned iterate
  double preconditioned_norm = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  bool coercive = true;
  std::vector<double> energy_history;
  std::vector<LocalMass> mass_report;
};

/// Toda problem in desingularized form: weights h_i are turned into
/// h~_i = desingularized_weight(h_i, singular, i) and u is the regular part.
struct TodaProblem {
  GridField h1;
  GridField h2;
  SingularData singular;
  RhoPair rho;
};

struct MeanFieldProblem {
  GridField h;
  RhoPair rho;
};

/// Preconditioned descent on J with weights already desingularized.
SolveResult minimize_toda(const GridField& w1, const GridField& w2, RhoPair rho, const SolverConfig& cfg,
                          const std::optional<std::array<GridField, 2>>& guess = std::nullopt);
SolveResult minimize(const TodaProblem& p, const SolverConfig& cfg,
                     const std::optional<std::array<GridField, 2>>& guess = std::nullopt);
SolveResult minimize(const MeanFieldProblem& p, const SolverConfig& cfg,
                     const std::optional<GridField>& guess = std::nullopt);

/// L2 norm of the strong-form residual, assembled independently of the gradient.
double pde_residual_toda(const GridField& u1, const GridField& u2, const GridField& w1, const GridField& w2,
                         RhoPair rho);
double pde_residual_meanfield(const GridField& u, const GridField& h, RhoPair rho);

struct ContinuationStep {
  double mu = 0.0;
  RhoPair rho;
  SolveResult result;
};

/// Solves along rho_center + (mu, mu), mu evenly spaced in [-nu, nu], with
/// warm starts. Requires the box rho_center +- 2 nu to stay tol away from the
/// forbidden set.
std::vector<ContinuationStep> continuation_sweep(const TodaProblem& p, double nu, std::size_t steps,
                                                 const SolverConfig& cfg, double tol);
std::vector<ContinuationStep> continuation_sweep(const MeanFieldProblem& p, double nu, std::size_t steps,
                                                 const SolverConfig& cfg, double tol);

/// rho_i * integral over B_r(center) of the normalized density, per center,
/// with the nearest entry of the blow-up table.
std::vector<LocalMass> blowup_masses(const GridField& u1, const GridField& u2, const GridField& w1,
                                     const GridField& w2, RhoPair rho, const std::vector<Point>& centers, double r,
                                     const SingularData& s = {});

/// Scalar variant; mass[1] stays 0 and the table is {4 pi (1 + alpha)}.
std::vector<LocalMass> blowup_masses(const GridField& u, const GridField& w, double rho,
                                     const std::vector<Point>& centers, double r, const SingularData& s = {});

}  // namespace todalab
