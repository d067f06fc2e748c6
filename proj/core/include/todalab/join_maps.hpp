#pragma once

#include <array>
#include <optional>
#include <vector>

#include "todalab/functionals.hpp"
#include "todalab/measures.hpp"
#include "todalab/torus.hpp"

namespace todalab {

/// (1 - r) sigma1 + r sigma2 in the join of the barycenter spaces on the two
/// curves. At r = 0 only sigma1 matters, at r = 1 only sigma2.
class JoinElement {
 public:
  JoinElement(const FlatTorus& t, const CurveSystem& c, BarycenterMeasure sigma1, BarycenterMeasure sigma2, double r);

  const BarycenterMeasure& sigma1() const noexcept { return s1_; }
  const BarycenterMeasure& sigma2() const noexcept { return s2_; }
  double r() const noexcept { return r_; }
  double lambda1(double lambda) const noexcept { return (1.0 - r_) * lambda; }
  double lambda2(double lambda) const noexcept { return r_ * lambda; }

 private:
  BarycenterMeasure s1_, s2_;
  double r_;
};

/// Join equality up to the endpoint identifications, atoms compared with tol.
bool join_equal(const FlatTorus& t, const JoinElement& a, const JoinElement& b, double tol = 1e-12);

/// log sum_i t_i (1 + lambda^2 d(x, x_i)^2)^{-2}; identically 0 when lambda = 0.
GridField bubble_log_sum(const FlatTorus& t, const BarycenterMeasure& s, double lambda);

/// Closed-form gradient of bubble_log_sum at the nodes.
std::array<GridField, 2> bubble_log_sum_gradient(const FlatTorus& t, const BarycenterMeasure& s, double lambda);

/// (v1 - v2/2, -v1/2 + v2) with v_i at scales lambda_{i,r}.
std::array<GridField, 2> test_function(const FlatTorus& t, const JoinElement& z, double lambda);

/// v1 - v2 with the same scales.
GridField scalar_test_function(const FlatTorus& t, const JoinElement& z, double lambda);

struct CurveRow {
  double lambda = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  EnergyReport energy;
  double d1 = 0.0;  // NaN when not computed
  double d2 = 0.0;
  double slope_so_far = 0.0;  // NaN until two top-decade points exist
};

struct EnergyCurve {
  std::vector<CurveRow> rows;
  double slope = 0.0;  // least squares of J against log lambda over the top decade
};

void validate_lambda_grid(const std::vector<double>& lambdas);

/// Least-squares slope of y against log x over points with x >= x_max / 10.
double top_decade_slope(const std::vector<double>& x, const std::vector<double>& y);

EnergyCurve energy_curve(const FlatTorus& t, const JoinElement& z, RhoPair rho, const std::vector<double>& lambdas,
                         const GridField& w1, const GridField& w2, bool with_distances = false,
                         std::size_t threads = 1);

EnergyCurve scalar_energy_curve(const FlatTorus& t, const JoinElement& z, RhoPair rho,
                                const std::vector<double>& lambdas, const GridField& h,
                                bool with_distances = false, std::size_t threads = 1);

/// Plateau function: 0 on [0,1/4], 2z - 1/2 on (1/4,3/4), 1 on [3/4,1].
double plateau(double z);
double rtilde(double d1, double d2);

struct PsiOptions {
  double admission = 0.25;
};

struct PsiResult {
  JoinElement zeta;
  double d1 = 0.0;
  double d2 = 0.0;
  double rtilde = 0.0;
};

PsiResult psi_map(const GridField& u1, const GridField& u2, const GridField& w1, const GridField& w2, std::size_t k,
                  std::size_t l, const CurveSystem& curves, const PsiOptions& opt = {});

struct HomotopyReport {
  double lambda = 0.0;
  double atom_displacement_1 = 0.0;
  double atom_displacement_2 = 0.0;
  double r_deviation = 0.0;
  bool relevant_1 = true;  // component carries weight in the join, f(r) < 1
  bool relevant_2 = true;  // f(r) > 0
  double rtilde = 0.0;
};

HomotopyReport homotopy_identity_check(const FlatTorus& t, const JoinElement& z, double lambda,
                                       const CurveSystem& curves, const GridField& w1, const GridField& w2,
                                       const PsiOptions& opt = {});

struct ScalingOptions {
  double min_scale = 10.0;            // keep lambda_{i,r} >= min_scale
  double max_scale_spacing = 1.0;     // keep lambda_{i,r} * spacing <= this
};

struct ScalingRow {
  double lambda = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double distance = 0.0;
  bool in_fit = false;
};

struct ScalingCheck {
  std::vector<ScalingRow> rows;
  double slope = 0.0;
};

ScalingCheck kr_scaling_check(const FlatTorus& t, const JoinElement& z, const std::vector<double>& lambdas,
                              int component, const GridField& w1, const GridField& w2,
                              const ScalingOptions& opt = {}, std::size_t threads = 1);

}  // namespace todalab
