#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "todalab/functionals.hpp"
#include "todalab/profiles.hpp"
#include "todalab/solver.hpp"
#include "todalab/torus.hpp"

namespace todalab::cli {

/// Malformed or out-of-range configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AtomSpec {
  double weight = 1.0;
  double x1 = 0.0;  // position along the curve
};

/// Everything a run needs. Unset sections keep the defaults below.
struct ExperimentConfig {
  std::string subcommand;

  std::size_t n = 64;
  double L1 = 1.0, L2 = 1.0;
  double level1 = 0.25, level2 = 0.75;
  std::vector<SingularPoint> singular;
  WeightProfile h1, h2;  // h1 doubles as the mean-field weight

  std::string problem = "toda";  // toda | meanfield
  std::optional<RhoPair> rho;
  std::optional<RhoPair> scalar_rho;
  std::vector<double> lambdas;
  std::vector<double> r_values{0.5};
  std::vector<AtomSpec> sigma1{{1.0, 0.3}}, sigma2{{1.0, 0.6}};
  std::vector<int> components{1, 2};
  double min_scale = 10.0, max_scale_spacing = 1.0;
  double admission = 0.25;

  // quantization
  std::vector<std::array<double, 2>> alphas;
  std::vector<RhoPair> rho_samples;
  double global_bound1 = 40.0, global_bound2 = 40.0;  // in units of pi

  // mt-check
  std::size_t random_fields = 0;
  double random_amplitude = 1.0;
  int random_kmax = 3;

  // solve / continuation
  SolverConfig solver;
  std::string initial_guess = "zero";  // zero | random
  double guess_amplitude = 0.1;
  std::vector<Point> centers;
  double mass_radius = 0.1;
  double nu = 0.0;
  std::size_t steps = 1;
  bool write_fields = true;

  std::uint64_t seed = 0;
  std::size_t threads = 1;
  double tol = 1e-6;  // distance to the forbidden set treated as "on" it

  FlatTorus torus() const;
  SingularData singular_data() const;
  nlohmann::ordered_json to_json() const;
};

/// Parses and validates; throws ConfigError. A manifest.json is accepted in
/// place of a config and replays the config it records.
ExperimentConfig parse_config(const nlohmann::json& j, const std::string& subcommand);
ExperimentConfig load_config(const std::string& path, const std::string& subcommand);

}  // namespace todalab::cli
