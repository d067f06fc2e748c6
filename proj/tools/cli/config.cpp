#include "config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

#include "todalab/errors.hpp"
#include "todalab/join_maps.hpp"

namespace todalab::cli {

namespace {

using json = nlohmann::json;
constexpr double kPi = std::numbers::pi;

const std::set<std::string> kKeys{
    "grid",        "curves",          "singular",    "h1",           "h2",         "h",
    "problem",     "rho",             "rho_pi",      "scalar_rho",   "scalar_rho_pi", "lambdas",
    "r",           "sigma1",          "sigma2",      "components",   "min_scale",  "max_scale_spacing",
    "admission",   "alphas",          "rho_samples", "global_bound_pi", "random_fields", "random_amplitude",
    "random_kmax", "solver",          "initial_guess", "guess_amplitude", "centers", "mass_radius",
    "nu",          "nu_pi",           "steps",       "write_fields", "seed",       "threads",
    "tol",         "subcommand"};

[[noreturn]] void fail(const std::string& what) { throw ConfigError("config: " + what); }

double number(const json& j, const std::string& key) {
  if (!j.is_number()) fail(key + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(key + " must be finite");
  return v;
}

std::size_t count(const json& j, const std::string& key) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) fail(key + " must be an integer");
  const auto v = j.get<long long>();
  if (v < 0) fail(key + " must be non-negative");
  return static_cast<std::size_t>(v);
}

std::array<double, 2> pair(const json& j, const std::string& key) {
  if (!j.is_array() || j.size() != 2) fail(key + " must be a pair of numbers");
  return {number(j[0], key), number(j[1], key)};
}

std::vector<double> numbers(const json& j, const std::string& key) {
  if (!j.is_array()) fail(key + " must be a list of numbers");
  std::vector<double> out;
  for (const auto& x : j) out.push_back(number(x, key));
  return out;
}

RhoPair rho_pair(std::array<double, 2> v, const std::string& key) {
  if (v[0] < 0 || v[1] < 0) fail(key + " entries must be non-negative");
  return RhoPair(v[0], v[1]);
}

std::vector<double> lambda_grid(const json& j) {
  if (j.is_array()) return numbers(j, "lambdas");
  if (!j.is_object()) fail("lambdas must be a list or {from, to, per_decade}");
  for (const auto& [k, v] : j.items())
    if (k != "from" && k != "to" && k != "per_decade") fail("unknown key lambdas." + k);
  if (!j.contains("from") || !j.contains("to") || !j.contains("per_decade")) fail("lambdas needs from, to, per_decade");
  const double lo = number(j["from"], "lambdas.from"), hi = number(j["to"], "lambdas.to");
  const std::size_t per = count(j["per_decade"], "lambdas.per_decade");
  if (!(lo > 0) || !(hi > lo) || per == 0) fail("lambdas range must satisfy 0 < from < to, per_decade > 0");
  const long steps = std::lround(std::log10(hi / lo) * static_cast<double>(per));
  std::vector<double> g;
  for (long i = 0; i <= steps; ++i) g.push_back(lo * std::pow(10.0, static_cast<double>(i) / static_cast<double>(per)));
  return g;
}

WeightProfile profile(const json& j, const std::string& key) {
  if (!j.is_object()) fail(key + " must be an object");
  WeightProfile p;
  for (const auto& [k, v] : j.items()) {
    if (k == "profile") {
      if (!v.is_string()) fail(key + ".profile must be a string");
      p.name = v.get<std::string>();
    } else if (k == "value") {
      p.value = number(v, key + ".value");
    } else if (k == "amplitude") {
      p.amplitude = number(v, key + ".amplitude");
    } else if (k == "center") {
      const auto c = pair(v, key + ".center");
      p.center = {c[0], c[1]};
    } else if (k == "width") {
      p.width = number(v, key + ".width");
    } else {
      fail("unknown key " + key + "." + k);
    }
  }
  if (p.name != "constant" && p.name != "sin-bump" && p.name != "gauss-bump")
    fail(key + ".profile must be constant, sin-bump or gauss-bump");
  return p;
}

json profile_json(const WeightProfile& p) {
  return {{"profile", p.name}, {"value", p.value}, {"amplitude", p.amplitude},
          {"center", {p.center.x1, p.center.x2}}, {"width", p.width}};
}

std::vector<AtomSpec> atoms(const json& j, const std::string& key) {
  if (!j.is_array() || j.empty()) fail(key + " must be a non-empty list of [weight, x1]");
  std::vector<AtomSpec> out;
  for (const auto& a : j) {
    const auto v = pair(a, key);
    out.push_back({v[0], v[1]});
  }
  return out;
}

void validate(ExperimentConfig& c) {
  const auto& sc = c.subcommand;
  if (c.threads == 0) fail("threads must be at least 1");
  if (!(c.tol > 0)) fail("tol must be positive");
  const bool needs_lambdas = sc == "test-energy" || sc == "kr-scaling" || sc == "projection" || sc == "mt-check";
  if (needs_lambdas && c.lambdas.empty()) fail("lambdas are required for " + sc);
  for (double l : c.lambdas)
    if (!(l > 0)) fail("lambdas must be positive");
  if (sc == "test-energy" || sc == "kr-scaling") validate_lambda_grid(c.lambdas);
  if (sc == "projection")
    for (std::size_t i = 1; i < c.lambdas.size(); ++i)
      if (!(c.lambdas[i] > c.lambdas[i - 1])) fail("lambdas must be increasing");
  for (double r : c.r_values)
    if (!(r >= 0 && r <= 1)) fail("r values must lie in [0, 1]");
  for (int comp : c.components)
    if (comp != 1 && comp != 2) fail("components must be 1 or 2");
  if ((sc == "test-energy" || sc == "solve" || sc == "continuation") && !c.rho) fail("rho is required for " + sc);
  if (c.problem != "toda" && c.problem != "meanfield") fail("problem must be toda or meanfield");
  if (c.problem == "meanfield" && !c.singular.empty()) fail("meanfield problems take no singular points");
  if (c.initial_guess != "zero" && c.initial_guess != "random") fail("initial_guess must be zero or random");
  if (!(c.mass_radius > 0)) fail("mass_radius must be positive");
  if (!(c.nu >= 0)) fail("nu must be non-negative");
  if (c.steps == 0) fail("steps must be at least 1");
  if (sc == "quantization" && c.alphas.empty() && c.rho_samples.empty()) fail("quantization needs alphas or rho_samples");
  for (const auto& a : c.alphas)
    if (!(a[0] >= 0 && a[1] >= 0)) fail("alphas must be non-negative");
  if (!(c.global_bound1 > 0 && c.global_bound2 > 0)) fail("global_bound_pi must be positive");
  if (c.random_kmax < 1) fail("random_kmax must be at least 1");
  // Construct everything that validates itself.
  c.solver.validate();
  const FlatTorus t = c.torus();
  make_weight(t, c.h1);
  make_weight(t, c.h2);
  c.singular_data();
  CurveSystem curves(t, c.level1, c.level2);
  for (const auto& a : c.sigma1)
    if (!(a.weight >= 0)) fail("sigma weights must be non-negative");
}

}  // namespace

FlatTorus ExperimentConfig::torus() const { return FlatTorus(n, L1, L2); }

SingularData ExperimentConfig::singular_data() const {
  if (singular.empty()) return SingularData{};
  return SingularData(torus(), singular);
}

nlohmann::ordered_json ExperimentConfig::to_json() const {
  nlohmann::ordered_json j;
  j["subcommand"] = subcommand;
  j["grid"] = {{"n", n}, {"L1", L1}, {"L2", L2}};
  j["curves"] = {{"level1", level1}, {"level2", level2}};
  j["singular"] = nlohmann::ordered_json::array();
  for (const auto& s : singular) j["singular"].push_back({{"p", {s.p.x1, s.p.x2}}, {"alpha1", s.alpha1}, {"alpha2", s.alpha2}});
  j["h1"] = profile_json(h1);
  j["h2"] = profile_json(h2);
  j["problem"] = problem;
  if (rho) j["rho"] = {rho->rho1, rho->rho2};
  if (scalar_rho) j["scalar_rho"] = {scalar_rho->rho1, scalar_rho->rho2};
  j["lambdas"] = lambdas;
  j["r"] = r_values;
  auto atoms_json = [](const std::vector<AtomSpec>& v) {
    nlohmann::ordered_json a = nlohmann::ordered_json::array();
    for (const auto& x : v) a.push_back({x.weight, x.x1});
    return a;
  };
  j["sigma1"] = atoms_json(sigma1);
  j["sigma2"] = atoms_json(sigma2);
  j["components"] = components;
  j["min_scale"] = min_scale;
  j["max_scale_spacing"] = max_scale_spacing;
  j["admission"] = admission;
  j["alphas"] = alphas;
  j["rho_samples"] = nlohmann::ordered_json::array();
  for (const auto& r : rho_samples) j["rho_samples"].push_back({r.rho1, r.rho2});
  j["global_bound_pi"] = {global_bound1, global_bound2};
  j["random_fields"] = random_fields;
  j["random_amplitude"] = random_amplitude;
  j["random_kmax"] = random_kmax;
  j["solver"] = {{"max_iterations", solver.max_iterations},
                 {"gradient_tolerance", solver.gradient_tolerance},
                 {"shrink", solver.shrink},
                 {"sufficient_decrease", solver.sufficient_decrease},
                 {"preconditioner_shift", solver.preconditioner_shift},
                 {"initial_step", solver.initial_step}};
  j["initial_guess"] = initial_guess;
  j["guess_amplitude"] = guess_amplitude;
  j["centers"] = nlohmann::ordered_json::array();
  for (const auto& p : centers) j["centers"].push_back({p.x1, p.x2});
  j["mass_radius"] = mass_radius;
  j["nu"] = nu;
  j["steps"] = steps;
  j["write_fields"] = write_fields;
  j["seed"] = seed;
  j["threads"] = threads;
  j["tol"] = tol;
  return j;
}

ExperimentConfig parse_config(const nlohmann::json& in, const std::string& subcommand) {
  const json& j = in.contains("manifest_version") && in.contains("config") ? in["config"] : in;
  if (!j.is_object()) fail("top level must be an object");
  ExperimentConfig c;
  c.subcommand = subcommand;
  if (j.contains("subcommand") && j["subcommand"] != subcommand)
    fail("config was written for " + j["subcommand"].dump() + ", not " + subcommand);
  for (const auto& [k, v] : j.items()) {
    if (!kKeys.count(k)) fail("unknown key " + k);
    if (k == "grid") {
      for (const auto& [gk, gv] : v.items()) {
        if (gk == "n") c.n = count(gv, "grid.n");
        else if (gk == "L1") c.L1 = number(gv, "grid.L1");
        else if (gk == "L2") c.L2 = number(gv, "grid.L2");
        else fail("unknown key grid." + gk);
      }
    } else if (k == "curves") {
      for (const auto& [ck, cv] : v.items()) {
        if (ck == "level1") c.level1 = number(cv, "curves.level1");
        else if (ck == "level2") c.level2 = number(cv, "curves.level2");
        else fail("unknown key curves." + ck);
      }
    } else if (k == "singular") {
      if (!v.is_array()) fail("singular must be a list");
      for (const auto& s : v) {
        if (!s.is_object() || !s.contains("p")) fail("singular entries need p");
        SingularPoint sp;
        const auto p = pair(s["p"], "singular.p");
        sp.p = {p[0], p[1]};
        for (const auto& [sk, sv] : s.items()) {
          if (sk == "alpha1") sp.alpha1 = number(sv, "singular.alpha1");
          else if (sk == "alpha2") sp.alpha2 = number(sv, "singular.alpha2");
          else if (sk != "p") fail("unknown key singular." + sk);
        }
        c.singular.push_back(sp);
      }
    } else if (k == "h1" || k == "h") {
      c.h1 = profile(v, k);
    } else if (k == "h2") {
      c.h2 = profile(v, k);
    } else if (k == "problem") {
      if (!v.is_string()) fail("problem must be a string");
      c.problem = v.get<std::string>();
    } else if (k == "rho") {
      c.rho = rho_pair(pair(v, k), k);
    } else if (k == "rho_pi") {
      const auto p = pair(v, k);
      c.rho = rho_pair({p[0] * kPi, p[1] * kPi}, k);
    } else if (k == "scalar_rho") {
      c.scalar_rho = rho_pair(pair(v, k), k);
    } else if (k == "scalar_rho_pi") {
      const auto p = pair(v, k);
      c.scalar_rho = rho_pair({p[0] * kPi, p[1] * kPi}, k);
    } else if (k == "lambdas") {
      c.lambdas = lambda_grid(v);
    } else if (k == "r") {
      c.r_values = numbers(v, k);
    } else if (k == "sigma1") {
      c.sigma1 = atoms(v, k);
    } else if (k == "sigma2") {
      c.sigma2 = atoms(v, k);
    } else if (k == "components") {
      c.components.clear();
      for (double x : numbers(v, k)) c.components.push_back(static_cast<int>(x));
    } else if (k == "min_scale") {
      c.min_scale = number(v, k);
    } else if (k == "max_scale_spacing") {
      c.max_scale_spacing = number(v, k);
    } else if (k == "admission") {
      c.admission = number(v, k);
    } else if (k == "alphas") {
      if (!v.is_array()) fail("alphas must be a list of pairs");
      for (const auto& a : v) c.alphas.push_back(pair(a, k));
    } else if (k == "rho_samples") {
      if (!v.is_array()) fail("rho_samples must be a list of pairs");
      for (const auto& a : v) c.rho_samples.push_back(rho_pair(pair(a, k), k));
    } else if (k == "global_bound_pi") {
      const auto b = pair(v, k);
      c.global_bound1 = b[0];
      c.global_bound2 = b[1];
    } else if (k == "random_fields") {
      c.random_fields = count(v, k);
    } else if (k == "random_amplitude") {
      c.random_amplitude = number(v, k);
    } else if (k == "random_kmax") {
      c.random_kmax = static_cast<int>(count(v, k));
    } else if (k == "solver") {
      for (const auto& [sk, sv] : v.items()) {
        if (sk == "max_iterations") c.solver.max_iterations = count(sv, "solver.max_iterations");
        else if (sk == "gradient_tolerance") c.solver.gradient_tolerance = number(sv, "solver.gradient_tolerance");
        else if (sk == "shrink") c.solver.shrink = number(sv, "solver.shrink");
        else if (sk == "sufficient_decrease") c.solver.sufficient_decrease = number(sv, "solver.sufficient_decrease");
        else if (sk == "preconditioner_shift") c.solver.preconditioner_shift = number(sv, "solver.preconditioner_shift");
        else if (sk == "initial_step") c.solver.initial_step = number(sv, "solver.initial_step");
        else fail("unknown key solver." + sk);
      }
    } else if (k == "initial_guess") {
      if (!v.is_string()) fail("initial_guess must be a string");
      c.initial_guess = v.get<std::string>();
    } else if (k == "guess_amplitude") {
      c.guess_amplitude = number(v, k);
    } else if (k == "centers") {
      if (!v.is_array()) fail("centers must be a list of points");
      for (const auto& p : v) {
        const auto q = pair(p, k);
        c.centers.push_back({q[0], q[1]});
      }
    } else if (k == "mass_radius") {
      c.mass_radius = number(v, k);
    } else if (k == "nu") {
      c.nu = number(v, k);
    } else if (k == "nu_pi") {
      c.nu = number(v, k) * kPi;
    } else if (k == "steps") {
      c.steps = count(v, k);
    } else if (k == "write_fields") {
      if (!v.is_boolean()) fail("write_fields must be true or false");
      c.write_fields = v.get<bool>();
    } else if (k == "seed") {
      c.seed = static_cast<std::uint64_t>(count(v, k));
    } else if (k == "threads") {
      c.threads = count(v, k);
    } else if (k == "tol") {
      c.tol = number(v, k);
    }
  }
  try {
    validate(c);
  } catch (const InvalidInput& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const PreconditionFailure& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::string& path, const std::string& subcommand) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open " + path);
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    throw ConfigError("config: " + path + ": " + e.what());
  }
  return parse_config(j, subcommand);
}

}  // namespace todalab::cli
