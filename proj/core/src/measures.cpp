#include "todalab/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "todalab/errors.hpp"
#include "todalab/functionals.hpp"
#include "todalab/transport.hpp"

namespace todalab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Support {
  std::vector<Point> points;
  std::vector<double> weights;
  double total() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }
};

Support support_of(const DiscreteMeasure& m) {
  Support s;
  const FlatTorus& t = m.torus();
  for (std::size_t k = 0; k < t.size(); ++k)
    if (m.density()[k] > 0) {
      s.points.push_back(t.node(k));
      s.weights.push_back(m.node_mass(k));
    }
  return s;
}

Support support_of(const BarycenterMeasure& m) {
  Support s;
  for (const auto& a : m.atoms()) {
    s.points.push_back(a.x);
    s.weights.push_back(a.t);
  }
  return s;
}

double exact_w1(const FlatTorus& t, const Support& a, const Support& b) {
  std::vector<double> cost(a.points.size() * b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i)
    for (std::size_t j = 0; j < b.points.size(); ++j)
      cost[i * b.points.size() + j] = distance(t, a.points[i], b.points[j]);
  return solve_transport(a.weights, b.weights, cost).cost;
}

Support coarsen(const FlatTorus& t, const Support& s, std::size_t nc) {
  const double h1 = t.L1() / static_cast<double>(nc);
  const double h2 = t.L2() / static_cast<double>(nc);
  std::vector<double> bins(nc * nc, 0.0);
  auto cell = [nc](double x, double h) {
    auto c = static_cast<long long>(std::floor(x / h + 0.5)) % static_cast<long long>(nc);
    if (c < 0) c += static_cast<long long>(nc);
    return static_cast<std::size_t>(c);
  };
  for (std::size_t k = 0; k < s.points.size(); ++k) {
    const Point p = t.wrap(s.points[k]);
    bins[cell(p.x1, h1) * nc + cell(p.x2, h2)] += s.weights[k];
  }
  Support out;
  for (std::size_t c = 0; c < bins.size(); ++c)
    if (bins[c] > 0) {
      out.points.push_back({static_cast<double>(c / nc) * h1, static_cast<double>(c % nc) * h2});
      out.weights.push_back(bins[c]);
    }
  return out;
}

KrReport kr_support(const FlatTorus& t, const Support& a, const Support& b, const KrOptions& opt) {
  const double ma = a.total(), mb = b.total();
  if (std::abs(ma - mb) > 1e-9)
    throw InvalidInput("kr_distance: masses differ (" + std::to_string(ma) + " vs " + std::to_string(mb) + ")");
  if (a.points.empty() || b.points.empty()) throw InvalidInput("kr_distance: empty measure");
  KrReport r;
  const std::size_t combined = a.points.size() + b.points.size();
  if (combined <= 4096 || a.points.size() * b.points.size() <= opt.exact_arc_budget) {
    r.distance = exact_w1(t, a, b);
    return r;
  }
  if (opt.coarse_n < 2) throw InvalidInput("kr_distance: coarse grid too small");
  const Support ca = coarsen(t, a, opt.coarse_n);
  const Support cb = coarsen(t, b, opt.coarse_n);
  r.distance = exact_w1(t, ca, cb);
  r.exact = false;
  // Each measure moves by at most half a coarse-cell diagonal.
  r.error_bound = std::hypot(t.L1(), t.L2()) / static_cast<double>(opt.coarse_n);
  return r;
}

struct Offset {
  long long di, dj;
};

// Offsets of the open ball of the given radius, unique modulo the grid,
// ordered by (di, dj).
std::vector<Offset> stencil(const FlatTorus& t, double radius) {
  const auto n = static_cast<long long>(t.n());
  const long long r1 = std::min(n / 2, static_cast<long long>(std::ceil(radius / t.spacing1())));
  const long long r2 = std::min(n / 2, static_cast<long long>(std::ceil(radius / t.spacing2())));
  std::vector<Offset> out;
  for (long long di = -r1; di <= r1; ++di) {
    if (di == -n / 2 && r1 == n / 2) continue;  // same residue as +n/2
    for (long long dj = -r2; dj <= r2; ++dj) {
      if (dj == -n / 2 && r2 == n / 2) continue;
      const double d = std::hypot(static_cast<double>(std::min(std::abs(di), n - std::abs(di))) * t.spacing1(),
                                  static_cast<double>(std::min(std::abs(dj), n - std::abs(dj))) * t.spacing2());
      if (d < radius) out.push_back({di, dj});
    }
  }
  return out;
}

std::size_t shift(const FlatTorus& t, std::size_t k, Offset o) {
  const auto n = static_cast<long long>(t.n());
  long long i = static_cast<long long>(k / t.n()) + o.di;
  long long j = static_cast<long long>(k % t.n()) + o.dj;
  i %= n;
  j %= n;
  if (i < 0) i += n;
  if (j < 0) j += n;
  return static_cast<std::size_t>(i * n + j);
}

std::vector<double> ball_sums(const FlatTorus& t, const std::vector<double>& w, const std::vector<Offset>& st) {
  std::vector<double> out(t.size(), 0.0);
  const std::size_t n = t.n();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (const auto& o : st) {
        const std::size_t ii = static_cast<std::size_t>((static_cast<long long>(i + n) + o.di) % static_cast<long long>(n));
        const std::size_t jj = static_cast<std::size_t>((static_cast<long long>(j + n) + o.dj) % static_cast<long long>(n));
        s += w[ii * n + jj];
      }
      out[i * n + j] = s;
    }
  return out;
}

std::size_t argmax_lowest(const std::vector<double>& v, const std::vector<char>* eligible = nullptr) {
  std::size_t best = std::numeric_limits<std::size_t>::max();
  double bv = -kInf;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (eligible && !(*eligible)[k]) continue;
    if (v[k] > bv) {
      bv = v[k];
      best = k;
    }
  }
  return best;
}

std::vector<double> node_masses(const DiscreteMeasure& f) {
  std::vector<double> w(f.torus().size());
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = f.node_mass(k);
  return w;
}

void require_unit_mass(const DiscreteMeasure& f, const char* where) {
  if (std::abs(f.mass() - 1.0) > 1e-9) throw InvalidInput(std::string(where) + ": measure must have unit mass");
}

}  // namespace

DiscreteMeasure::DiscreteMeasure(const FlatTorus& t, std::vector<double> density)
    : torus_(t), density_(std::move(density)) {
  if (density_.size() != t.size()) throw InvalidInput("DiscreteMeasure: density size does not match grid");
  for (double x : density_)
    if (!(x >= 0) || !std::isfinite(x)) throw InvalidInput("DiscreteMeasure: density must be finite and non-negative");
}

DiscreteMeasure::DiscreteMeasure(const GridField& density) : DiscreteMeasure(density.torus(), density.data()) {}

double DiscreteMeasure::mass() const { return integrate(torus_, density_); }

BarycenterMeasure::BarycenterMeasure(std::vector<Atom> atoms, std::size_t capacity) : capacity_(capacity) {
  double total = 0.0;
  for (const auto& a : atoms) {
    if (!(a.t >= 0) || !(a.t <= 1.0 + 1e-12)) throw InvalidInput("BarycenterMeasure: weights must lie in [0, 1]");
    if (a.t > 0) atoms_.push_back(a);
    total += a.t;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InvalidInput("BarycenterMeasure: weights must sum to 1");
  if (atoms_.size() > capacity_) throw InvalidInput("BarycenterMeasure: more atoms than capacity");
}

DiscreteMeasure normalize_exp(const GridField& w, const GridField& u) {
  return DiscreteMeasure(normalized_exp(w, u));
}

KrReport kr_distance_report(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const KrOptions& opt) {
  if (!(mu.torus() == nu.torus())) throw InvalidInput("kr_distance: measures live on different tori");
  return kr_support(mu.torus(), support_of(mu), support_of(nu), opt);
}

KrReport kr_distance_report(const DiscreteMeasure& mu, const BarycenterMeasure& nu, const KrOptions& opt) {
  return kr_support(mu.torus(), support_of(mu), support_of(nu), opt);
}

KrReport kr_distance_report(const FlatTorus& t, const BarycenterMeasure& mu, const BarycenterMeasure& nu,
                            const KrOptions& opt) {
  return kr_support(t, support_of(mu), support_of(nu), opt);
}

double kr_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu) { return kr_distance_report(mu, nu).distance; }
double kr_distance(const DiscreteMeasure& mu, const BarycenterMeasure& nu) { return kr_distance_report(mu, nu).distance; }
double kr_distance(const BarycenterMeasure& mu, const DiscreteMeasure& nu) { return kr_distance_report(nu, mu).distance; }
double kr_distance(const FlatTorus& t, const BarycenterMeasure& mu, const BarycenterMeasure& nu) {
  return kr_distance_report(t, mu, nu).distance;
}

double voronoi_cost(const DiscreteMeasure& mu, const std::vector<Point>& centers) {
  if (centers.empty()) throw InvalidInput("voronoi_cost: no centers");
  const FlatTorus& t = mu.torus();
  std::vector<double> e(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) {
    double d = kInf;
    const Point x = t.node(k);
    for (const auto& c : centers) d = std::min(d, distance(t, x, c));
    e[k] = mu.density()[k] * d;
  }
  return integrate(t, e);
}

namespace {

// Coordinate descent on node-valued centers for the Voronoi transport cost.
void refine_centers(const FlatTorus& t, const std::vector<double>& w, std::vector<std::size_t>& centers) {
  const std::size_t N = t.size();
  std::vector<double> others(N);
  auto cost_with = [&](std::size_t c) {
    const Point p = t.node(c);
    double s = 0.0;
    for (std::size_t x = 0; x < N; ++x)
      if (w[x] > 0) s += w[x] * std::min(others[x], distance(t, t.node(x), p));
    return s;
  };
  for (long long step : {16LL, 8LL, 4LL, 2LL, 1LL}) {
    if (static_cast<std::size_t>(2 * step) >= t.n()) continue;
    bool improved = true;
    std::size_t sweeps = 0;
    while (improved && sweeps++ < 10000) {
      improved = false;
      for (std::size_t i = 0; i < centers.size(); ++i) {
        for (std::size_t x = 0; x < N; ++x) {
          double d = kInf;
          const Point px = t.node(x);
          for (std::size_t j = 0; j < centers.size(); ++j)
            if (j != i) d = std::min(d, distance(t, px, t.node(centers[j])));
          others[x] = d;
        }
        double best = cost_with(centers[i]);
        std::size_t best_c = centers[i];
        for (long long di = -1; di <= 1; ++di)
          for (long long dj = -1; dj <= 1; ++dj) {
            if (di == 0 && dj == 0) continue;
            const std::size_t c = shift(t, centers[i], {di * step, dj * step});
            const double v = cost_with(c);
            if (v < best - 1e-15) {
              best = v;
              best_c = c;
            }
          }
        if (best_c != centers[i]) {
          centers[i] = best_c;
          improved = true;
        }
      }
    }
  }
}

}  // namespace

BarycenterFit distance_to_barycenters(const DiscreteMeasure& mu, std::size_t k) {
  if (k == 0) throw InvalidInput("distance_to_barycenters: k must be at least 1");
  require_unit_mass(mu, "distance_to_barycenters");
  const FlatTorus& t = mu.torus();
  const std::size_t N = t.size();
  const std::vector<double> w = node_masses(mu);
  const auto st = stencil(t, 2.0 * t.spacing() + 1e-12 * t.spacing());

  // Greedy rounds interleaved with refinement: each round adds the ball of
  // largest uncovered mass, so the cost is non-increasing in k.
  std::vector<double> rem = w;
  std::vector<std::size_t> centers;
  for (std::size_t r = 0; r < k; ++r) {
    const auto sums = ball_sums(t, rem, st);
    std::size_t c = argmax_lowest(sums);
    if (!(sums[c] > 0)) {
      for (c = 0; c < N && std::find(centers.begin(), centers.end(), c) != centers.end(); ++c) {
      }
      if (c == N) break;
    }
    centers.push_back(c);
    for (const auto& o : st) rem[shift(t, c, o)] = 0.0;
    refine_centers(t, w, centers);
  }

  // Voronoi masses; ties go to the lowest center index.
  std::vector<double> mass(centers.size(), 0.0);
  std::vector<double> e(N);
  for (std::size_t x = 0; x < N; ++x) {
    const Point px = t.node(x);
    double d = kInf;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < centers.size(); ++i) {
      const double di = distance(t, px, t.node(centers[i]));
      if (di < d) {
        d = di;
        arg = i;
      }
    }
    mass[arg] += w[x];
    e[x] = w[x] * d;
  }
  const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
  std::vector<Atom> atoms;
  for (std::size_t i = 0; i < centers.size(); ++i) atoms.push_back({mass[i] / total, t.node(centers[i])});
  double cost = 0.0;
  for (double x : e) cost += x;
  return BarycenterFit{cost, BarycenterMeasure(std::move(atoms), k)};
}

BarycenterMeasure push_forward(const FlatTorus& t, const BarycenterMeasure& s, const CurveSystem& c, int i) {
  std::vector<Atom> out;
  for (const auto& a : s.atoms()) {
    const Point y = t.wrap(c.retract(i, a.x));
    bool merged = false;
    for (auto& b : out) {
      const auto d = displacement(t, b.x, y);
      if (std::hypot(d[0], d[1]) < t.spacing()) {
        const double tw = b.t + a.t;
        b.x = t.wrap({b.x.x1 + d[0] * a.t / tw, b.x.x2});
        b.t = tw;
        merged = true;
        break;
      }
    }
    if (!merged) out.push_back({a.t, y});
  }
  return BarycenterMeasure(std::move(out), s.capacity());
}

std::vector<std::size_t> ball_nodes(const FlatTorus& t, std::size_t center, double radius) {
  std::vector<std::size_t> out;
  for (const auto& o : stencil(t, radius)) out.push_back(shift(t, center, o));
  return out;
}

double ball_mass(const DiscreteMeasure& f, std::size_t center, double radius) {
  double s = 0.0;
  for (auto k : ball_nodes(f.torus(), center, radius)) s += f.node_mass(k);
  return s;
}

double set_distance(const FlatTorus& t, const NodeSet& a, const NodeSet& b) {
  double d = kInf;
  for (auto x : a)
    for (auto y : b) d = std::min(d, distance(t, t.node(x), t.node(y)));
  return d;
}

double set_mass(const DiscreteMeasure& f, const NodeSet& s) {
  double m = 0.0;
  for (auto k : s) m += f.node_mass(k);
  return m;
}

CoveringResult covering_merge(const std::vector<NodeSet>& omegas1, const std::vector<NodeSet>& omegas2,
                              const DiscreteMeasure& f1, const DiscreteMeasure& f2, double delta, double theta) {
  const FlatTorus& t = f1.torus();
  if (!(f2.torus() == t)) throw InvalidInput("covering_merge: densities live on different tori");
  if (omegas1.empty() || omegas2.empty()) throw InvalidInput("covering_merge: families must be non-empty");
  if (omegas1.size() < omegas2.size())
    throw InvalidInput("covering_merge: the first family must be at least as large as the second");
  if (!(delta > 0) || !(theta > 0)) throw InvalidInput("covering_merge: delta and theta must be positive");

  auto check_family = [&](const std::vector<NodeSet>& fam, const DiscreteMeasure& f, int which) {
    for (std::size_t i = 0; i < fam.size(); ++i) {
      if (fam[i].empty()) throw InvalidInput("covering_merge: empty set in family " + std::to_string(which));
      if (set_mass(f, fam[i]) < theta)
        throw PreconditionFailure("covering_merge", "set " + std::to_string(which) + "," + std::to_string(i) +
                                                        " carries mass below theta");
      for (std::size_t j = 0; j < i; ++j)
        if (set_distance(t, fam[i], fam[j]) < delta)
          throw PreconditionFailure("covering_merge", "sets " + std::to_string(which) + "," + std::to_string(j) +
                                                          " and " + std::to_string(which) + "," + std::to_string(i) +
                                                          " are closer than delta");
    }
  };
  check_family(omegas1, f1, 1);
  check_family(omegas2, f2, 2);

  CoveringResult res;
  res.delta_bar = delta / 8.0;
  const auto st = stencil(t, res.delta_bar);
  const double ball_area = static_cast<double>(st.size()) * t.cell_area();

  // Cover by radius-delta_bar balls centred at every node; for each set pick
  // the intersecting ball of largest mass.
  std::size_t max_cover = 1;
  auto pick = [&](const NodeSet& om, const DiscreteMeasure& f) {
    std::vector<char> cand(t.size(), 0);
    for (auto y : om)
      for (const auto& o : st) cand[shift(t, y, o)] = 1;
    std::size_t count = 0, best = 0;
    double bm = -1.0;
    for (std::size_t x = 0; x < t.size(); ++x) {
      if (!cand[x]) continue;
      ++count;
      double m = 0.0;
      for (const auto& o : st) m += f.node_mass(shift(t, x, o));
      if (m > bm) {
        bm = m;
        best = x;
      }
    }
    max_cover = std::max(max_cover, count);
    return best;
  };
  for (const auto& om : omegas1) res.centers1.push_back(pick(om, f1));
  for (const auto& om : omegas2) res.centers2.push_back(pick(om, f2));
  res.theta_bar = std::min(theta / static_cast<double>(max_cover), ball_area);

  const std::size_t K = res.centers1.size(), L = res.centers2.size();
  std::vector<int> pair_of1(K, -1);
  std::vector<char> used2(L, 0);
  for (std::size_t i = 0; i < K; ++i) {
    double bd = 3.0 * res.delta_bar;
    for (std::size_t j = 0; j < L; ++j) {
      if (used2[j]) continue;
      const double d = distance(t, t.node(res.centers1[i]), t.node(res.centers2[j]));
      if (d < bd) {
        bd = d;
        pair_of1[i] = static_cast<int>(j);
      }
    }
    if (pair_of1[i] >= 0) used2[static_cast<std::size_t>(pair_of1[i])] = 1;
  }
  // Remaining second-family balls join unpaired first-family balls in order.
  std::vector<std::size_t> free1;
  for (std::size_t i = 0; i < K; ++i)
    if (pair_of1[i] < 0) free1.push_back(i);
  std::size_t next_free = 0;
  std::vector<std::size_t> order1;
  std::vector<int> partner;
  for (std::size_t i = 0; i < K; ++i)
    if (pair_of1[i] >= 0) {
      order1.push_back(i);
      partner.push_back(pair_of1[i]);
    }
  for (std::size_t j = 0; j < L; ++j)
    if (!used2[j]) {
      order1.push_back(free1[next_free++]);
      partner.push_back(static_cast<int>(j));
    }
  for (; next_free < free1.size(); ++next_free) {
    order1.push_back(free1[next_free]);
    partner.push_back(-1);
  }

  auto ball = [&](std::size_t c) {
    NodeSet s;
    for (const auto& o : st) s.push_back(shift(t, c, o));
    return s;
  };
  std::vector<std::size_t> c1, c2;
  for (std::size_t n = 0; n < order1.size(); ++n) {
    NodeSet s = ball(res.centers1[order1[n]]);
    if (partner[n] >= 0) {
      const NodeSet b = ball(res.centers2[static_cast<std::size_t>(partner[n])]);
      s.insert(s.end(), b.begin(), b.end());
      std::sort(s.begin(), s.end());
      s.erase(std::unique(s.begin(), s.end()), s.end());
    }
    res.sets.push_back(std::move(s));
    c1.push_back(res.centers1[order1[n]]);
  }
  res.centers1 = c1;
  for (int p : partner) c2.push_back(p >= 0 ? res.centers2[static_cast<std::size_t>(p)] : std::size_t(-1));
  res.centers2 = c2;
  res.partner = partner;
  return res;
}

GreedyCapture greedy_capture(const DiscreteMeasure& f, std::size_t m, double radius) {
  const FlatTorus& t = f.torus();
  const auto st = stencil(t, radius);
  std::vector<double> rem = node_masses(f);
  GreedyCapture g;
  for (std::size_t r = 0; r < m; ++r) {
    const auto sums = ball_sums(t, rem, st);
    const std::size_t c = argmax_lowest(sums);
    g.centers.push_back(c);
    g.captured += sums[c];
    for (const auto& o : st) rem[shift(t, c, o)] = 0.0;
  }
  return g;
}

std::optional<SpreadWitness> detect_spread(const DiscreteMeasure& f, std::size_t m, double eps, double s) {
  require_unit_mass(f, "detect_spread");
  if (!(s > 0) || !(eps > 0)) throw InvalidInput("detect_spread: eps and s must be positive");
  if (m > 0 && greedy_capture(f, m, s).captured >= 1.0 - eps) return std::nullopt;
  const FlatTorus& t = f.torus();
  SpreadWitness w;
  w.s_bar = s / 4.0;
  const auto sums = ball_sums(t, node_masses(f), stencil(t, w.s_bar));
  std::vector<char> eligible(t.size(), 1);
  for (std::size_t r = 0; r < m; ++r) {
    const std::size_t c = argmax_lowest(sums, &eligible);
    if (c >= t.size()) break;
    w.points.push_back(c);
    w.masses.push_back(sums[c]);
    const Point pc = t.node(c);
    for (std::size_t x = 0; x < t.size(); ++x)
      if (distance(t, t.node(x), pc) < 4.0 * w.s_bar) eligible[x] = 0;
  }
  w.eps_bar = w.masses.empty() ? 0.0 : *std::min_element(w.masses.begin(), w.masses.end());
  return w;
}

BarycenterMeasure concentration_sigma(const DiscreteMeasure& f, const std::vector<std::size_t>& centers, double s) {
  const FlatTorus& t = f.torus();
  if (centers.empty()) throw InvalidInput("concentration_sigma: no centers");
  std::vector<char> taken(t.size(), 0);
  std::vector<double> tw(centers.size(), 0.0);
  const auto st = stencil(t, s);
  for (std::size_t i = 0; i < centers.size(); ++i)
    for (const auto& o : st) {
      const std::size_t x = shift(t, centers[i], o);
      if (!taken[x]) {
        taken[x] = 1;
        tw[i] += f.node_mass(x);
      }
    }
  double rest = 0.0, total = 0.0;
  for (std::size_t x = 0; x < t.size(); ++x) {
    total += f.node_mass(x);
    if (!taken[x]) rest += f.node_mass(x);
  }
  std::vector<Atom> atoms;
  for (std::size_t i = 0; i < centers.size(); ++i)
    atoms.push_back({(tw[i] + rest / static_cast<double>(centers.size())) / total, t.node(centers[i])});
  return BarycenterMeasure(std::move(atoms), centers.size());
}

ConcentrationResult concentration_alternative(const GridField& u1, const GridField& u2, const GridField& w1,
                                              const GridField& w2, std::size_t k, std::size_t l, double eps,
                                              double s) {
  const DiscreteMeasure f1 = normalize_exp(w1, u1);
  const DiscreteMeasure f2 = normalize_exp(w2, u2);
  ConcentrationResult r;
  // Component 1 is examined first; ties therefore resolve to component 1.
  r.spread1 = detect_spread(f1, k, eps, s);
  if (!r.spread1) {
    r.kind = ConcentrationResult::Kind::component1;
    r.centers = greedy_capture(f1, k, s).centers;
    r.sigma = concentration_sigma(f1, r.centers, s);
    return r;
  }
  r.spread2 = detect_spread(f2, l, eps, s);
  if (!r.spread2) {
    r.kind = ConcentrationResult::Kind::component2;
    r.centers = greedy_capture(f2, l, s).centers;
    r.sigma = concentration_sigma(f2, r.centers, s);
    return r;
  }
  return r;
}

}  // namespace todalab
