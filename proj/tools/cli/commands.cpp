#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "todalab/errors.hpp"
#include "todalab/field_io.hpp"
#include "todalab/join_maps.hpp"
#include "todalab/measures.hpp"
#include "todalab/quantization.hpp"
#include "todalab/solver.hpp"

namespace todalab::cli {

namespace {

using ojson = nlohmann::ordered_json;
constexpr double kPi = std::numbers::pi;

struct Setup {
  FlatTorus t;
  CurveSystem curves;
  SingularData singular;
  GridField h1, h2, w1, w2;
  explicit Setup(const ExperimentConfig& c)
      : t(c.torus()),
        curves(t, c.level1, c.level2),
        singular(c.singular_data()),
        h1(make_weight(t, c.h1)),
        h2(make_weight(t, c.h2)),
        w1(desingularized_weight(h1, singular, 1)),
        w2(desingularized_weight(h2, singular, 2)) {}
};

BarycenterMeasure on_curve(const Setup& s, const std::vector<AtomSpec>& spec, int i) {
  double total = 0;
  for (const auto& a : spec) total += a.weight;
  if (!(total > 0)) throw InvalidInput("sigma weights must have positive sum");
  std::vector<Atom> atoms;
  double used = 0;
  for (std::size_t j = 0; j < spec.size(); ++j) {
    const double w = j + 1 < spec.size() ? spec[j].weight / total : 1.0 - used;
    used += w;
    atoms.push_back({w, s.t.snap({spec[j].x1, s.curves.level(i)})});
  }
  return BarycenterMeasure(atoms, atoms.size());
}

JoinElement join_at(const Setup& s, const ExperimentConfig& c, double r) {
  return JoinElement(s.t, s.curves, on_curve(s, c.sigma1, 1), on_curve(s, c.sigma2, 2), r);
}

double expected_slope(double r, RhoPair rho, double mass) {
  double e = 0;
  if (r < 1) e += mass - 2 * rho.rho1;
  if (r > 0) e += mass - 2 * rho.rho2;
  return e;
}

GridField random_field(const FlatTorus& t, std::mt19937_64& rng, double amplitude, int kmax) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  GridField f(t);
  for (int a = -kmax; a <= kmax; ++a)
    for (int b = 0; b <= kmax; ++b) {
      if (b == 0 && a <= 0) continue;
      const double cs = unit(rng), sn = unit(rng), w = 1.0 / (a * a + b * b);
      for (std::size_t k = 0; k < t.size(); ++k) {
        const Point x = t.node(k);
        const double ph = 2 * kPi * (a * x.x1 / t.L1() + b * x.x2 / t.L2());
        f[k] += w * (cs * std::cos(ph) + sn * std::sin(ph));
      }
    }
  const double m = max_abs(f);
  if (m > 0) f *= amplitude / m;
  return f;
}

ojson point_json(Point p) { return ojson::array({p.x1, p.x2}); }

ojson witness_json(const MembershipWitness& w) {
  const char* kind = w.kind == MembershipWitness::Kind::line1 ? "Lambda_1"
                     : w.kind == MembershipWitness::Kind::line2 ? "Lambda_2"
                                                                : "Lambda_0";
  return {{"kind", kind}, {"value1", w.value1}, {"value2", w.value2}};
}

// ---------------------------------------------------------------------------

int quantization(const ExperimentConfig& c, OutputDir& out) {
  const SingularData sd = c.singular_data();
  ojson report;
  report["local"] = ojson::array();
  std::vector<std::vector<double>> rows;
  for (const auto& a : c.alphas) {
    const auto set = local_lambda(a[0], a[1]);
    ojson pts = ojson::array(), pairs = ojson::array();
    for (const auto& p : set.points) {
      pts.push_back({p.s1, p.s2});
      if (p.s1 != 0 || p.s2 != 0) pairs.push_back({2 * kPi * p.s1, 2 * kPi * p.s2});
      rows.push_back({a[0], a[1], p.s1, p.s2, ellipse_residual(a[0], a[1], p)});
    }
    report["local"].push_back({{"alpha", {a[0], a[1]}}, {"points", pts}, {"blowup_pairs", pairs}});
  }
  if (!rows.empty()) out.csv("local_sets.csv", {"alpha1", "alpha2", "s1", "s2", "ellipse_residual"}, rows);

  ojson cand;
  cand["regular"] = blowup_candidates(sd, std::nullopt);
  cand["singular"] = ojson::array();
  for (std::size_t j = 0; j < sd.size(); ++j) cand["singular"].push_back(blowup_candidates(sd, j));
  report["blowup_candidates"] = cand;

  const auto g = enumerate_global(sd, c.global_bound1 * kPi, c.global_bound2 * kPi);
  report["global"] = {{"bound", {c.global_bound1 * kPi, c.global_bound2 * kPi}},
                      {"lambda1", g.lambda1},
                      {"lambda2", g.lambda2},
                      {"lambda0", g.lambda0}};

  report["membership"] = ojson::array();
  std::vector<std::vector<double>> mrows;
  for (const auto& rho : c.rho_samples) {
    const auto m = global_membership(rho, sd, c.tol);
    report["membership"].push_back({{"rho", {rho.rho1, rho.rho2}},
                                    {"inside", m.inside},
                                    {"nearest_distance", m.nearest_distance},
                                    {"witness", witness_json(m.witness)}});
    mrows.push_back({rho.rho1, rho.rho2, m.inside ? 1.0 : 0.0, m.nearest_distance});
  }
  if (!mrows.empty()) out.csv("membership.csv", {"rho1", "rho2", "inside", "nearest_distance"}, mrows);
  out.json("quantization.json", report);
  return kSuccess;
}

int test_energy(const ExperimentConfig& c, OutputDir& out) {
  const Setup s(c);
  std::vector<std::vector<double>> rows, srows;
  ojson fits = ojson::array(), sfits = ojson::array();
  for (double r : c.r_values) {
    const auto z = join_at(s, c, r);
    const auto curve = energy_curve(s.t, z, *c.rho, c.lambdas, s.w1, s.w2, false, c.threads);
    for (const auto& row : curve.rows)
      rows.push_back({r, row.lambda, row.lambda1, row.lambda2, row.energy.dirichlet, row.energy.average_terms[0],
                      row.energy.average_terms[1], row.energy.logexp_terms[0], row.energy.logexp_terms[1],
                      row.energy.total, row.slope_so_far});
    fits.push_back({{"r", r}, {"slope", curve.slope}, {"expected_slope", expected_slope(r, *c.rho, 8 * kPi)}});
    if (c.scalar_rho) {
      const auto sc = scalar_energy_curve(s.t, z, *c.scalar_rho, c.lambdas, s.h1, false, c.threads);
      for (const auto& row : sc.rows)
        srows.push_back({r, row.lambda, row.lambda1, row.lambda2, row.energy.dirichlet, row.energy.logexp_terms[0],
                         row.energy.logexp_terms[1], row.energy.total, row.slope_so_far});
      sfits.push_back({{"r", r}, {"slope", sc.slope}, {"expected_slope", expected_slope(r, *c.scalar_rho, 16 * kPi)}});
    }
  }
  out.csv("energy_curve.csv",
          {"r", "lambda", "lambda1", "lambda2", "dirichlet", "average1", "average2", "logexp1", "logexp2", "total",
           "slope_so_far"},
          rows);
  ojson report{{"rho", {c.rho->rho1, c.rho->rho2}}, {"toda", fits}};
  if (c.scalar_rho) {
    out.csv("scalar_energy_curve.csv",
            {"r", "lambda", "lambda1", "lambda2", "dirichlet", "logexp_plus", "logexp_minus", "total", "slope_so_far"},
            srows);
    report["scalar_rho"] = {c.scalar_rho->rho1, c.scalar_rho->rho2};
    report["scalar"] = sfits;
  }
  out.json("slopes.json", report);
  return kSuccess;
}

int kr_scaling(const ExperimentConfig& c, OutputDir& out) {
  const Setup s(c);
  ScalingOptions opt;
  opt.min_scale = c.min_scale;
  opt.max_scale_spacing = c.max_scale_spacing;
  std::vector<std::vector<double>> rows;
  ojson fits = ojson::array();
  for (double r : c.r_values) {
    const auto z = join_at(s, c, r);
    for (int comp : c.components) {
      const auto chk = kr_scaling_check(s.t, z, c.lambdas, comp, s.w1, s.w2, opt, c.threads);
      for (const auto& row : chk.rows)
        rows.push_back({r, static_cast<double>(comp), row.lambda, row.lambda1, row.lambda2, row.distance,
                        row.in_fit ? 1.0 : 0.0});
      const bool degenerate = comp == 1 ? r == 1.0 : r == 0.0;
      fits.push_back({{"r", r}, {"component", comp}, {"slope", chk.slope}, {"degenerate", degenerate}});
    }
  }
  out.csv("kr_scaling.csv", {"r", "component", "lambda", "lambda1", "lambda2", "distance", "in_fit"}, rows);
  out.json("fits.json", {{"fits", fits}});
  return kSuccess;
}

int projection(const ExperimentConfig& c, OutputDir& out) {
  const Setup s(c);
  PsiOptions opt;
  opt.admission = c.admission;
  std::vector<std::vector<double>> rows;
  ojson report = ojson::array();
  for (double r : c.r_values) {
    const auto z = join_at(s, c, r);
    double prev1 = INFINITY, prev2 = INFINITY;
    bool monotone = true;
    HomotopyReport last;
    for (double lam : c.lambdas) {
      last = homotopy_identity_check(s.t, z, lam, s.curves, s.w1, s.w2, opt);
      if (last.relevant_1) monotone = monotone && last.atom_displacement_1 <= prev1;
      if (last.relevant_2) monotone = monotone && last.atom_displacement_2 <= prev2;
      prev1 = last.atom_displacement_1;
      prev2 = last.atom_displacement_2;
      rows.push_back({r, lam, last.atom_displacement_1, last.atom_displacement_2, last.r_deviation,
                      last.relevant_1 ? 1.0 : 0.0, last.relevant_2 ? 1.0 : 0.0, last.rtilde});
    }
    const double lam = c.lambdas.back();
    const auto phi = test_function(s.t, z, lam);
    const std::size_t k = z.sigma1().capacity(), l = z.sigma2().capacity();
    const auto psi = psi_map(phi[0], phi[1], s.w1, s.w2, k, l, s.curves, opt);
    auto atoms = [](const BarycenterMeasure& b) {
      ojson a = ojson::array();
      for (const auto& x : b.atoms()) a.push_back({{"t", x.t}, {"x", point_json(x.x)}});
      return a;
    };
    report.push_back({{"r", r},
                      {"lambda", lam},
                      {"d1", psi.d1},
                      {"d2", psi.d2},
                      {"rtilde", psi.rtilde},
                      {"sigma1", atoms(psi.zeta.sigma1())},
                      {"sigma2", atoms(psi.zeta.sigma2())},
                      {"displacement_non_increasing", monotone},
                      {"spacing", s.t.spacing()}});
  }
  out.csv("homotopy.csv",
          {"r", "lambda", "displacement1", "displacement2", "r_deviation", "relevant1", "relevant2", "rtilde"}, rows);
  out.json("projection.json", {{"results", report}});
  return kSuccess;
}

int mt_check(const ExperimentConfig& c, OutputDir& out) {
  const Setup s(c);
  const Point mid = s.t.snap({0.5 * s.t.L1(), 0.5 * s.t.L2()});
  std::vector<std::vector<double>> brows, grows, rrows;
  double worst = -INFINITY;
  for (double lam : c.lambdas) {
    const auto b = GridField::from_function(s.t, [&](Point x) {
      const double d = distance(s.t, x, mid);
      return -2.0 * std::log1p(lam * lam * d * d);
    });
    const double ratio = mt_ratio(b);
    worst = std::max(worst, ratio);
    brows.push_back({lam, ratio, dirichlet_integral(b)});
  }
  for (double r : c.r_values) {
    const auto z = join_at(s, c, r);
    for (double lam : c.lambdas) {
      const auto phi = test_function(s.t, z, lam);
      grows.push_back({r, lam, mt_system_gap(phi[0], phi[1], s.h1, s.h2)});
    }
  }
  std::mt19937_64 rng(c.seed);
  for (std::size_t i = 0; i < c.random_fields; ++i) {
    const auto u = random_field(s.t, rng, c.random_amplitude, c.random_kmax);
    const double ratio = mt_ratio(u);
    worst = std::max(worst, ratio);
    rrows.push_back({static_cast<double>(i), ratio, dirichlet_integral(u)});
  }
  out.csv("mt_bubble.csv", {"lambda", "ratio", "dirichlet"}, brows);
  out.csv("mt_gap.csv", {"r", "lambda", "gap"}, grows);
  if (!rrows.empty()) out.csv("mt_random.csv", {"index", "ratio", "dirichlet"}, rrows);
  double min_gap = INFINITY;
  for (const auto& g : grows) min_gap = std::min(min_gap, g[2]);
  out.json("mt_check.json", {{"max_ratio", worst}, {"min_system_gap", grows.empty() ? 0.0 : min_gap}});
  return kSuccess;
}

void gate_toda(RhoPair rho, const SingularData& sd, double tol, const char* where) {
  const auto m = global_membership(rho, sd, tol);
  if (m.inside)
    throw PreconditionFailure(where, "rho = (" + format_real(rho.rho1) + ", " + format_real(rho.rho2) + ") lies within " +
                                         format_real(tol) + " of the forbidden set (" +
                                         witness_json(m.witness)["kind"].get<std::string>() + ")");
}

ojson mass_json(const std::vector<LocalMass>& ms) {
  ojson a = ojson::array();
  for (const auto& m : ms)
    a.push_back({{"center", point_json(m.center)},
                 {"mass", {m.mass[0], m.mass[1]}},
                 {"nearest_candidate", {m.nearest_candidate[0], m.nearest_candidate[1]}},
                 {"candidate_distance", m.candidate_distance}});
  return a;
}

Point argmax(const GridField& f) {
  const auto& v = f.values();
  return f.torus().node(static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin()));
}

int solve(const ExperimentConfig& c, OutputDir& out) {
  const Setup s(c);
  const RhoPair rho = *c.rho;
  std::mt19937_64 rng(c.seed);
  SolveResult res;
  double pde = 0;
  ojson report;
  if (c.problem == "toda") {
    gate_toda(rho, s.singular, c.tol, "solve");
    std::optional<std::array<GridField, 2>> guess;
    if (c.initial_guess == "random") {
      auto g1 = random_field(s.t, rng, c.guess_amplitude, 3);
      auto g2 = random_field(s.t, rng, c.guess_amplitude, 3);
      guess = std::array<GridField, 2>{std::move(g1), std::move(g2)};
    }
    res = minimize_toda(s.w1, s.w2, rho, c.solver, guess);
    pde = pde_residual_toda(res.u[0], res.u[1], s.w1, s.w2, rho);
    std::vector<Point> centers = c.centers;
    if (centers.empty()) centers = {argmax(normalized_exp(s.w1, res.u[0])), argmax(normalized_exp(s.w2, res.u[1]))};
    res.mass_report = blowup_masses(res.u[0], res.u[1], s.w1, s.w2, rho, centers, c.mass_radius, s.singular);
  } else {
    if (scalar_forbidden(rho, c.tol))
      throw PreconditionFailure("solve", "rho = (" + format_real(rho.rho1) + ", " + format_real(rho.rho2) +
                                             ") lies within " + format_real(c.tol) + " of 8 pi N");
    std::optional<GridField> guess;
    if (c.initial_guess == "random") guess = random_field(s.t, rng, c.guess_amplitude, 3);
    res = minimize(MeanFieldProblem{s.h1, rho}, c.solver, guess);
    pde = pde_residual_meanfield(res.u[0], s.h1, rho);
    std::vector<Point> centers = c.centers;
    if (centers.empty()) centers = {argmax(normalized_exp(s.h1, res.u[0]))};
    res.mass_report = blowup_masses(res.u[0], s.h1, rho.rho1, centers, c.mass_radius);
  }
  report = {{"problem", c.problem},
            {"rho", {rho.rho1, rho.rho2}},
            {"converged", res.converged},
            {"coercive", res.coercive},
            {"iterations", res.iterations},
            {"energy", res.energy},
            {"gradient_norm", res.residual_norm},
            {"preconditioned_norm", res.preconditioned_norm},
            {"pde_residual", pde},
            {"mass_report", mass_json(res.mass_report)}};
  std::vector<std::vector<double>> hist;
  for (std::size_t i = 0; i < res.energy_history.size(); ++i) hist.push_back({static_cast<double>(i), res.energy_history[i]});
  out.csv("energy_history.csv", {"iteration", "energy"}, hist);
  out.json("solve.json", report);
  if (c.write_fields)
    for (std::size_t i = 0; i < res.u.size(); ++i) out.field("u" + std::to_string(i + 1), res.u[i]);
  return res.converged ? kSuccess : kNonConvergence;
}

int continuation(const ExperimentConfig& c, OutputDir& out) {
  const Setup s(c);
  std::vector<ContinuationStep> steps;
  if (c.problem == "toda")
    steps = continuation_sweep(TodaProblem{s.h1, s.h2, s.singular, *c.rho}, c.nu, c.steps, c.solver, c.tol);
  else
    steps = continuation_sweep(MeanFieldProblem{s.h1, *c.rho}, c.nu, c.steps, c.solver, c.tol);
  std::vector<std::vector<double>> rows;
  bool failed = false;
  for (const auto& st : steps) {
    const auto& r = st.result;
    const double pde = c.problem == "toda" ? pde_residual_toda(r.u[0], r.u[1], s.w1, s.w2, st.rho)
                                           : pde_residual_meanfield(r.u[0], s.h1, st.rho);
    if (r.coercive && !r.converged) failed = true;
    rows.push_back({st.mu, st.rho.rho1, st.rho.rho2, r.energy, r.residual_norm, pde, static_cast<double>(r.iterations),
                    r.converged ? 1.0 : 0.0, r.coercive ? 1.0 : 0.0});
  }
  out.csv("continuation.csv",
          {"mu", "rho1", "rho2", "energy", "gradient_norm", "pde_residual", "iterations", "converged", "coercive"}, rows);
  if (c.write_fields && !steps.empty())
    for (std::size_t i = 0; i < steps.back().result.u.size(); ++i)
      out.field("u" + std::to_string(i + 1) + "_final", steps.back().result.u[i]);
  out.json("continuation.json",
           {{"problem", c.problem}, {"rho_center", {c.rho->rho1, c.rho->rho2}}, {"nu", c.nu}, {"steps", c.steps},
            {"all_coercive_steps_converged", !failed}});
  return failed ? kNonConvergence : kSuccess;
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"quantization", "test-energy", "kr-scaling", "projection",
                                              "mt-check",     "solve",       "continuation"};
  return names;
}

int run_command(const ExperimentConfig& c, OutputDir& out, std::string& message) {
  int code = kSuccess;
  if (c.subcommand == "quantization") code = quantization(c, out);
  else if (c.subcommand == "test-energy") code = test_energy(c, out);
  else if (c.subcommand == "kr-scaling") code = kr_scaling(c, out);
  else if (c.subcommand == "projection") code = projection(c, out);
  else if (c.subcommand == "mt-check") code = mt_check(c, out);
  else if (c.subcommand == "solve") code = solve(c, out);
  else if (c.subcommand == "continuation") code = continuation(c, out);
  else throw ConfigError("unknown subcommand " + c.subcommand);
  message = code == kNonConvergence ? "solver did not converge" : "ok";
  return code;
}

}  // namespace todalab::cli
