#include "todalab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "todalab/errors.hpp"

namespace todalab {

namespace {

using Flow = std::int64_t;
constexpr Flow kScale = Flow{1} << 50;
constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

std::vector<Flow> to_integer_masses(std::span<const double> v) {
  double total = 0.0;
  for (double x : v) {
    if (!(x >= 0) || !std::isfinite(x)) throw InvalidInput("solve_transport: masses must be finite and non-negative");
    total += x;
  }
  if (!(total > 0)) throw InvalidInput("solve_transport: empty marginal");
  std::vector<Flow> out(v.size());
  Flow sum = 0;
  std::size_t largest = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = static_cast<Flow>(std::llround(v[i] / total * static_cast<double>(kScale)));
    sum += out[i];
    if (out[i] > out[largest]) largest = i;
  }
  out[largest] += kScale - sum;
  return out;
}

// Uncapacitated network simplex on the bipartite graph plus an artificial
// root. Nodes 0..n-1 are supplies, n..n+m-1 demands, n+m the root. Real arc
// e < n*m runs e/m -> n + e%m; arc n*m + i runs i -> root (cost 0); arc
// n*m + n + j runs root -> n + j (cost above every real cost).
class NetworkSimplex {
 public:
  NetworkSimplex(std::vector<Flow> a, std::vector<Flow> b, std::span<const double> cost)
      : n_(a.size()), m_(b.size()), cost_(cost) {
    double cmax = 0.0;
    for (double c : cost_) {
      if (!std::isfinite(c)) throw InvalidInput("solve_transport: non-finite cost");
      cmax = std::max(cmax, std::abs(c));
    }
    art_cost_ = cmax + 1.0;
    eps_ = 1e-12 * art_cost_;
    const std::size_t nodes = n_ + m_ + 1;
    root_ = n_ + m_;
    parent_.assign(nodes, kNone);
    pred_.assign(nodes, kNone);
    up_.assign(nodes, 0);
    flow_.assign(nodes, 0);
    pi_.assign(nodes, 0.0);
    depth_.assign(nodes, 0);
    first_child_.assign(nodes, kNone);
    next_sib_.assign(nodes, kNone);
    prev_sib_.assign(nodes, kNone);
    for (std::size_t i = 0; i < n_; ++i) {
      parent_[i] = root_;
      pred_[i] = n_ * m_ + i;
      up_[i] = 1;
      flow_[i] = a[i];
      depth_[i] = 1;
      add_child(root_, i);
    }
    for (std::size_t j = 0; j < m_; ++j) {
      const std::size_t v = n_ + j;
      parent_[v] = root_;
      pred_[v] = n_ * m_ + n_ + j;
      up_[v] = 0;
      flow_[v] = b[j];
      depth_[v] = 1;
      add_child(root_, v);
    }
    for (std::size_t v = 0; v < root_; ++v) pi_[v] = potential_from_parent(v);
    arcs_ = n_ * m_ + n_ + m_;
  }

  void run() {
    const std::size_t block = std::max<std::size_t>(10, static_cast<std::size_t>(std::sqrt(double(arcs_))));
    const std::size_t max_pivots = 100 * arcs_ + 1000;
    std::size_t next = 0;
    while (true) {
      const std::size_t e = find_entering(next, block);
      if (e == kNone) break;
      pivot(e);
      if (++pivots_ > max_pivots) throw std::runtime_error("solve_transport: pivot limit exceeded");
    }
  }

  TransportSolution solution() const {
    TransportSolution s;
    s.pivots = pivots_;
    long double c = 0.0L;
    for (std::size_t v = 0; v < root_; ++v) {
      const std::size_t e = pred_[v];
      if (flow_[v] == 0) continue;
      if (e >= n_ * m_) throw std::runtime_error("solve_transport: artificial arc carries flow at optimum");
      const double mass = static_cast<double>(flow_[v]) / static_cast<double>(kScale);
      c += static_cast<long double>(flow_[v]) * cost_[e];
      s.plan.push_back({e / m_, e % m_, mass});
    }
    s.cost = static_cast<double>(c / static_cast<long double>(kScale));
    std::sort(s.plan.begin(), s.plan.end(),
              [](const TransportArc& x, const TransportArc& y) { return x.source != y.source ? x.source < y.source : x.sink < y.sink; });
    return s;
  }

 private:
  std::size_t src(std::size_t e) const noexcept {
    if (e < n_ * m_) return e / m_;
    if (e < n_ * m_ + n_) return e - n_ * m_;
    return root_;
  }
  std::size_t tgt(std::size_t e) const noexcept {
    if (e < n_ * m_) return n_ + e % m_;
    if (e < n_ * m_ + n_) return root_;
    return n_ + (e - n_ * m_ - n_);
  }
  double cost(std::size_t e) const noexcept {
    if (e < n_ * m_) return cost_[e];
    if (e < n_ * m_ + n_) return 0.0;
    return art_cost_;
  }
  double reduced(std::size_t e) const noexcept { return cost(e) + pi_[src(e)] - pi_[tgt(e)]; }

  // Tree arcs have zero reduced cost: cost + pi[src] - pi[tgt] = 0.
  double potential_from_parent(std::size_t v) const noexcept {
    const std::size_t p = parent_[v];
    const double c = cost(pred_[v]);
    return up_[v] ? pi_[p] - c : pi_[p] + c;
  }

  void add_child(std::size_t p, std::size_t c) noexcept {
    prev_sib_[c] = kNone;
    next_sib_[c] = first_child_[p];
    if (first_child_[p] != kNone) prev_sib_[first_child_[p]] = c;
    first_child_[p] = c;
  }
  void remove_child(std::size_t p, std::size_t c) noexcept {
    if (prev_sib_[c] != kNone)
      next_sib_[prev_sib_[c]] = next_sib_[c];
    else
      first_child_[p] = next_sib_[c];
    if (next_sib_[c] != kNone) prev_sib_[next_sib_[c]] = prev_sib_[c];
    prev_sib_[c] = next_sib_[c] = kNone;
  }

  // Block search pricing: scan blocks cyclically, take the most negative
  // reduced cost within the first block that has one.
  std::size_t find_entering(std::size_t& next, std::size_t block) const {
    std::size_t best = kNone;
    double best_rc = -eps_;
    std::size_t seen = 0;
    std::size_t e = next;
    while (seen < arcs_) {
      const std::size_t stop = std::min(arcs_ - seen, block);
      for (std::size_t c = 0; c < stop; ++c) {
        const double r = reduced(e);
        if (r < best_rc) {
          best_rc = r;
          best = e;
        }
        if (++e == arcs_) e = 0;
      }
      seen += stop;
      if (best != kNone) {
        next = e;
        return best;
      }
    }
    return kNone;
  }

  std::size_t find_join(std::size_t a, std::size_t b) const noexcept {
    while (a != b) {
      if (depth_[a] > depth_[b])
        a = parent_[a];
      else if (depth_[b] > depth_[a])
        b = parent_[b];
      else {
        a = parent_[a];
        b = parent_[b];
      }
    }
    return a;
  }

  void pivot(std::size_t e_in) {
    const std::size_t first = src(e_in);
    const std::size_t second = tgt(e_in);
    const std::size_t join = find_join(first, second);

    // Cycle orientation: e_in then second -> join -> first. Ties on the
    // second side win, which keeps the tree strongly feasible.
    Flow delta = std::numeric_limits<Flow>::max();
    std::size_t u_out = kNone;
    int side = 0;
    for (std::size_t u = first; u != join; u = parent_[u])
      if (up_[u] && flow_[u] < delta) {
        delta = flow_[u];
        u_out = u;
        side = 1;
      }
    for (std::size_t u = second; u != join; u = parent_[u])
      if (!up_[u] && flow_[u] <= delta) {
        delta = flow_[u];
        u_out = u;
        side = 2;
      }
    if (side == 0) throw std::runtime_error("solve_transport: unbounded cycle");

    if (delta > 0) {
      for (std::size_t u = first; u != join; u = parent_[u]) flow_[u] += up_[u] ? -delta : delta;
      for (std::size_t u = second; u != join; u = parent_[u]) flow_[u] += up_[u] ? delta : -delta;
    }

    const std::size_t w0 = side == 1 ? first : second;
    const std::size_t q = side == 1 ? second : first;

    path_.clear();
    for (std::size_t u = w0;; u = parent_[u]) {
      path_.push_back(u);
      if (u == u_out) break;
    }
    const std::size_t k = path_.size() - 1;
    old_pred_.resize(k + 1);
    old_flow_.resize(k + 1);
    old_up_.resize(k + 1);
    for (std::size_t i = 0; i <= k; ++i) {
      old_pred_[i] = pred_[path_[i]];
      old_flow_[i] = flow_[path_[i]];
      old_up_[i] = up_[path_[i]];
    }
    for (std::size_t i = 0; i <= k; ++i) remove_child(parent_[path_[i]], path_[i]);
    for (std::size_t i = 1; i <= k; ++i) {
      const std::size_t w = path_[i];
      parent_[w] = path_[i - 1];
      pred_[w] = old_pred_[i - 1];
      flow_[w] = old_flow_[i - 1];
      up_[w] = old_up_[i - 1] ? 0 : 1;
      add_child(path_[i - 1], w);
    }
    parent_[w0] = q;
    pred_[w0] = e_in;
    flow_[w0] = delta;
    up_[w0] = src(e_in) == w0 ? 1 : 0;
    add_child(q, w0);

    // Refresh depth and potentials on the re-hung subtree.
    stack_.clear();
    stack_.push_back(w0);
    while (!stack_.empty()) {
      const std::size_t v = stack_.back();
      stack_.pop_back();
      depth_[v] = depth_[parent_[v]] + 1;
      pi_[v] = potential_from_parent(v);
      for (std::size_t c = first_child_[v]; c != kNone; c = next_sib_[c]) stack_.push_back(c);
    }
  }

  std::size_t n_, m_, root_ = 0, arcs_ = 0;
  std::span<const double> cost_;
  double art_cost_ = 1.0;
  double eps_ = 1e-12;
  std::vector<std::size_t> parent_, pred_, depth_, first_child_, next_sib_, prev_sib_;
  std::vector<char> up_;
  std::vector<Flow> flow_;
  std::vector<double> pi_;
  std::size_t pivots_ = 0;
  std::vector<std::size_t> path_, old_pred_, stack_;
  std::vector<Flow> old_flow_;
  std::vector<char> old_up_;
};

}  // namespace

TransportSolution solve_transport(std::span<const double> supply, std::span<const double> demand,
                                  std::span<const double> cost) {
  if (cost.size() != supply.size() * demand.size()) throw InvalidInput("solve_transport: cost matrix shape");
  const auto a_all = to_integer_masses(supply);
  const auto b_all = to_integer_masses(demand);

  // Drop empty rows and columns so every initial tree arc carries flow.
  std::vector<std::size_t> rows, cols;
  for (std::size_t i = 0; i < a_all.size(); ++i)
    if (a_all[i] > 0) rows.push_back(i);
  for (std::size_t j = 0; j < b_all.size(); ++j)
    if (b_all[j] > 0) cols.push_back(j);
  std::vector<Flow> a, b;
  for (auto i : rows) a.push_back(a_all[i]);
  for (auto j : cols) b.push_back(b_all[j]);
  std::vector<double> c;
  std::span<const double> cs = cost;
  if (rows.size() != supply.size() || cols.size() != demand.size()) {
    c.resize(rows.size() * cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < cols.size(); ++j) c[i * cols.size() + j] = cost[rows[i] * demand.size() + cols[j]];
    cs = c;
  }

  double total = 0.0;
  for (double x : supply) total += x;

  NetworkSimplex ns(std::move(a), std::move(b), cs);
  ns.run();
  TransportSolution s = ns.solution();
  s.cost *= total;
  for (auto& arc : s.plan) {
    arc.source = rows[arc.source];
    arc.sink = cols[arc.sink];
    arc.mass *= total;
  }
  return s;
}

}  // namespace todalab
