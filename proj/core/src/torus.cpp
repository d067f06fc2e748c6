#include "todalab/torus.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "todalab/errors.hpp"
#include "todalab/spectral.hpp"

namespace todalab {

namespace {

double wrap_coord(double x, double L) noexcept {
  double r = std::fmod(x, L);
  if (r < 0) r += L;
  if (r >= L) r -= L;
  return r;
}

double periodic_gap(double d, double L) noexcept {
  double r = std::fmod(d, L);
  if (r > 0.5 * L) r -= L;
  if (r < -0.5 * L) r += L;
  return r;
}

}  // namespace

FlatTorus::FlatTorus(std::size_t n, double L1, double L2) : n_(n), L1_(L1), L2_(L2) {
  if (n < 16 || n % 2 != 0)
    throw InvalidInput("FlatTorus: grid size must be even and at least 16, got " + std::to_string(n));
  if (!(L1 > 0) || !(L2 > 0) || !std::isfinite(L1) || !std::isfinite(L2))
    throw InvalidInput("FlatTorus: periods must be positive");
  if (std::abs(L1 * L2 - 1.0) > 1e-12) throw InvalidInput("FlatTorus: L1 * L2 must equal 1");
}

double FlatTorus::spacing() const noexcept { return std::max(spacing1(), spacing2()); }

double FlatTorus::diameter() const noexcept { return 0.5 * std::hypot(L1_, L2_); }

Point FlatTorus::node(std::size_t idx) const noexcept {
  const std::size_t i = idx / n_;
  const std::size_t j = idx % n_;
  return {static_cast<double>(i) * spacing1(), static_cast<double>(j) * spacing2()};
}

Point FlatTorus::wrap(Point p) const noexcept { return {wrap_coord(p.x1, L1_), wrap_coord(p.x2, L2_)}; }

std::size_t FlatTorus::nearest_node(Point p) const noexcept {
  const Point q = wrap(p);
  auto to_index = [this](double x, double h) {
    auto k = static_cast<long long>(std::floor(x / h + 0.5));
    const auto nn = static_cast<long long>(n_);
    k %= nn;
    if (k < 0) k += nn;
    return static_cast<std::size_t>(k);
  };
  return index(to_index(q.x1, spacing1()), to_index(q.x2, spacing2()));
}

std::array<double, 2> displacement(const FlatTorus& t, Point a, Point b) noexcept {
  return {periodic_gap(b.x1 - a.x1, t.L1()), periodic_gap(b.x2 - a.x2, t.L2())};
}

double distance(const FlatTorus& t, Point a, Point b) noexcept {
  // For a rectangular lattice the minimum over the nine nearest translates
  // is attained by the minimal image along each axis separately.
  const auto d = displacement(t, a, b);
  return std::hypot(d[0], d[1]);
}

GridField::GridField(const FlatTorus& torus, double value) : torus_(torus), v_(torus.size(), value) {
  if (!std::isfinite(value)) throw InvalidInput("GridField: non-finite value");
}

GridField::GridField(const FlatTorus& torus, std::vector<double> values) : torus_(torus), v_(std::move(values)) {
  if (v_.size() != torus_.size()) throw InvalidInput("GridField: sample count does not match grid");
  if (!all_finite()) throw InvalidInput("GridField: non-finite sample");
}

double GridField::max() const noexcept { return *std::max_element(v_.begin(), v_.end()); }
double GridField::min() const noexcept { return *std::min_element(v_.begin(), v_.end()); }

bool GridField::all_finite() const noexcept {
  return std::all_of(v_.begin(), v_.end(), [](double x) { return std::isfinite(x); });
}

GridField& GridField::operator+=(const GridField& o) {
  require_same_torus(*this, o, "GridField::operator+=");
  for (std::size_t k = 0; k < v_.size(); ++k) v_[k] += o.v_[k];
  return *this;
}

GridField& GridField::operator-=(const GridField& o) {
  require_same_torus(*this, o, "GridField::operator-=");
  for (std::size_t k = 0; k < v_.size(); ++k) v_[k] -= o.v_[k];
  return *this;
}

GridField& GridField::operator*=(double c) noexcept {
  for (auto& x : v_) x *= c;
  return *this;
}

GridField& GridField::operator+=(double c) noexcept {
  for (auto& x : v_) x += c;
  return *this;
}

GridField operator+(GridField a, const GridField& b) { return a += b; }
GridField operator-(GridField a, const GridField& b) { return a -= b; }
GridField operator*(double c, GridField a) { return a *= c; }
GridField operator+(GridField a, double c) { return a += c; }

void require_same_torus(const GridField& a, const GridField& b, const char* where) {
  if (!(a.torus() == b.torus())) throw InvalidInput(std::string(where) + ": fields live on different tori");
}

double integrate(const FlatTorus& t, std::span<const double> values) {
  // Neumaier summation keeps the zero-mean checks at round-off level.
  double sum = 0.0;
  double comp = 0.0;
  for (double x : values) {
    const double s = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - s) + x;
    else
      comp += (x - s) + sum;
    sum = s;
  }
  return (sum + comp) * t.cell_area();
}

double integrate(const GridField& f) { return integrate(f.torus(), f.values()); }

double inner(const GridField& f, const GridField& g) {
  require_same_torus(f, g, "inner");
  std::vector<double> p(f.size());
  for (std::size_t k = 0; k < p.size(); ++k) p[k] = f[k] * g[k];
  return integrate(f.torus(), p);
}

double l2_norm(const GridField& f) { return std::sqrt(std::max(0.0, inner(f, f))); }

double max_abs(const GridField& f) {
  double m = 0.0;
  for (double x : f.values()) m = std::max(m, std::abs(x));
  return m;
}

GridField grid_delta(const FlatTorus& t, Point p) {
  GridField d(t);
  d[t.nearest_node(p)] = 1.0 / t.cell_area();
  return d;
}

GridField greens_function(const FlatTorus& t, Point p) { return solve_poisson(grid_delta(t, p)); }

CurveSystem::CurveSystem(const FlatTorus& t, double c1, double c2) {
  if (!std::isfinite(c1) || !std::isfinite(c2)) throw InvalidInput("CurveSystem: non-finite level");
  c1_ = t.wrap({0.0, c1}).x2;
  c2_ = t.wrap({0.0, c2}).x2;
  if (std::abs(periodic_gap(c1_ - c2_, t.L2())) < t.spacing2())
    throw InvalidInput("CurveSystem: the two circles must be disjoint");
}

double CurveSystem::level(int i) const {
  if (i == 1) return c1_;
  if (i == 2) return c2_;
  throw InvalidInput("CurveSystem: component must be 1 or 2");
}

Point CurveSystem::retract(int i, Point x) const { return {x.x1, level(i)}; }

double CurveSystem::distance_to(const FlatTorus& t, int i, Point x) const {
  return std::abs(periodic_gap(x.x2 - level(i), t.L2()));
}

Point retract(const CurveSystem& c, int i, Point x) { return c.retract(i, x); }

SingularData::SingularData(std::vector<SingularPoint> pts) : pts_(std::move(pts)) { validate(); }

SingularData::SingularData(const FlatTorus& t, std::vector<SingularPoint> pts) : pts_(std::move(pts)) {
  for (auto& s : pts_) s.p = t.snap(s.p);
  validate();
}

void SingularData::validate() const {
  for (std::size_t j = 0; j < pts_.size(); ++j) {
    const auto& s = pts_[j];
    if (!(s.alpha1 >= 0) || !(s.alpha2 >= 0) || !std::isfinite(s.alpha1) || !std::isfinite(s.alpha2))
      throw InvalidInput("SingularData: orders must be finite and non-negative (point " + std::to_string(j) + ")");
    for (std::size_t q = 0; q < j; ++q)
      if (pts_[q].p == s.p) throw InvalidInput("SingularData: points " + std::to_string(q) + " and " +
                                               std::to_string(j) + " coincide");
  }
}

double SingularData::alpha(int component, std::size_t j) const {
  if (j >= pts_.size()) throw std::out_of_range("SingularData: point index out of range");
  if (component == 1) return pts_[j].alpha1;
  if (component == 2) return pts_[j].alpha2;
  throw InvalidInput("SingularData: component must be 1 or 2");
}

void SingularData::validate_against(const FlatTorus& t, const CurveSystem& c) const {
  for (std::size_t j = 0; j < pts_.size(); ++j)
    for (int i = 1; i <= 2; ++i)
      if (c.distance_to(t, i, pts_[j].p) <= 2.0 * t.spacing())
        throw InvalidInput("SingularData: point " + std::to_string(j) + " lies within two grid spacings of curve " +
                           std::to_string(i));
}

GridField desingularized_weight(const GridField& h, const SingularData& s, int component) {
  if (component != 1 && component != 2) throw InvalidInput("desingularized_weight: component must be 1 or 2");
  for (double x : h.values())
    if (!(x > 0)) throw InvalidInput("desingularized_weight: weight must be strictly positive");
  const FlatTorus& t = h.torus();
  GridField exponent(t);
  for (std::size_t j = 0; j < s.size(); ++j) {
    const double a = s.alpha(component, j);
    if (a == 0.0) continue;
    const GridField g = greens_function(t, s.points()[j].p);
    for (std::size_t k = 0; k < t.size(); ++k) exponent[k] += -4.0 * std::numbers::pi * a * g[k];
  }
  GridField out(t);
  for (std::size_t k = 0; k < t.size(); ++k) out[k] = h[k] * std::exp(exponent[k]);
  return out;
}

}  // namespace todalab
