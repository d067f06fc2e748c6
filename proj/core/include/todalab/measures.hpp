#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "todalab/torus.hpp"

namespace todalab {

/// Non-negative density on the grid; mass = integrate(density).
class DiscreteMeasure {
 public:
  DiscreteMeasure(const FlatTorus& t, std::vector<double> density);
  explicit DiscreteMeasure(const GridField& density);

  const FlatTorus& torus() const noexcept { return torus_; }
  const std::vector<double>& density() const noexcept { return density_; }
  double node_mass(std::size_t k) const noexcept { return density_[k] * torus_.cell_area(); }
  double mass() const;

 private:
  FlatTorus torus_;
  std::vector<double> density_;
};

struct Atom {
  double t = 0.0;
  Point x;
};

/// sum_i t_i delta_{x_i} with at most `capacity` atoms and unit total weight.
class BarycenterMeasure {
 public:
  BarycenterMeasure(std::vector<Atom> atoms, std::size_t capacity);

  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return atoms_.size(); }

 private:
  std::vector<Atom> atoms_;
  std::size_t capacity_;
};

DiscreteMeasure normalize_exp(const GridField& w, const GridField& u);

struct KrOptions {
  std::size_t coarse_n = 48;
  // Largest |supp mu| * |supp nu| solved exactly on the original supports.
  std::size_t exact_arc_budget = std::size_t{1} << 23;
};

struct KrReport {
  double distance = 0.0;
  double error_bound = 0.0;  // zero when exact
  bool exact = true;
};

KrReport kr_distance_report(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const KrOptions& opt = {});
KrReport kr_distance_report(const DiscreteMeasure& mu, const BarycenterMeasure& nu, const KrOptions& opt = {});
KrReport kr_distance_report(const FlatTorus& t, const BarycenterMeasure& mu, const BarycenterMeasure& nu,
                            const KrOptions& opt = {});

double kr_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu);
double kr_distance(const DiscreteMeasure& mu, const BarycenterMeasure& nu);
double kr_distance(const BarycenterMeasure& mu, const DiscreteMeasure& nu);
double kr_distance(const FlatTorus& t, const BarycenterMeasure& mu, const BarycenterMeasure& nu);

/// integral of min_i d(x, c_i) d mu(x): the transport cost to the centers when
/// every center receives its Voronoi mass.
double voronoi_cost(const DiscreteMeasure& mu, const std::vector<Point>& centers);

struct BarycenterFit {
  double distance = 0.0;
  BarycenterMeasure sigma;
};

/// Upper bound on the distance from mu to Sigma_k, with the witness sigma.
BarycenterFit distance_to_barycenters(const DiscreteMeasure& mu, std::size_t k);

/// Atoms retracted onto curve i; images closer than one grid spacing merge.
BarycenterMeasure push_forward(const FlatTorus& t, const BarycenterMeasure& s, const CurveSystem& c, int i);

/// Nodes within distance < radius of center, in the order of a fixed stencil.
std::vector<std::size_t> ball_nodes(const FlatTorus& t, std::size_t center, double radius);
double ball_mass(const DiscreteMeasure& f, std::size_t center, double radius);

using NodeSet = std::vector<std::size_t>;

struct CoveringResult {
  std::vector<NodeSet> sets;  // k + 1 sets
  std::vector<std::size_t> centers1, centers2;
  std::vector<int> partner;  // partner[n] = index of the second-family ball in sets[n], or -1
  double delta_bar = 0.0;
  double theta_bar = 0.0;
};

double set_distance(const FlatTorus& t, const NodeSet& a, const NodeSet& b);
double set_mass(const DiscreteMeasure& f, const NodeSet& s);

/// Merges two separated, massive families of sets into k+1 separated sets.
CoveringResult covering_merge(const std::vector<NodeSet>& omegas1, const std::vector<NodeSet>& omegas2,
                              const DiscreteMeasure& f1, const DiscreteMeasure& f2, double delta, double theta);

struct GreedyCapture {
  std::vector<std::size_t> centers;
  double captured = 0.0;
};

/// m rounds of picking the radius ball with the most not-yet-captured mass.
GreedyCapture greedy_capture(const DiscreteMeasure& f, std::size_t m, double radius);

struct SpreadWitness {
  std::vector<std::size_t> points;
  std::vector<double> masses;  // mass of the radius-s_bar ball at each point
  double s_bar = 0.0;
  double eps_bar = 0.0;  // smallest of the masses
};

/// nullopt when m balls of radius s capture at least 1 - eps.
std::optional<SpreadWitness> detect_spread(const DiscreteMeasure& f, std::size_t m, double eps, double s);

struct ConcentrationResult {
  enum class Kind { component1, component2, neither };
  Kind kind = Kind::neither;
  std::vector<std::size_t> centers;
  std::optional<BarycenterMeasure> sigma;
  std::optional<SpreadWitness> spread1, spread2;
};

/// Builds sigma from ball masses plus equal shares of the residual mass.
BarycenterMeasure concentration_sigma(const DiscreteMeasure& f, const std::vector<std::size_t>& centers, double s);

ConcentrationResult concentration_alternative(const GridField& u1, const GridField& u2, const GridField& w1,
                                              const GridField& w2, std::size_t k, std::size_t l, double eps,
                                              double s);

}  // namespace todalab
