#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include "commands.hpp"
#include "todalab/errors.hpp"

using namespace todalab;
using namespace todalab::cli;

namespace {

struct Args {
  std::string config, out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::optional<double> tol;
};

nlohmann::json read_input(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open " + path);
  try {
    auto j = nlohmann::json::parse(is);
    if (j.is_object() && j.contains("manifest_version") && j.contains("config")) j = nlohmann::json(j["config"]);
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config: " + path + ": " + e.what());
  }
}

int execute(const std::string& sub, const Args& a) {
  std::optional<OutputDir> out;
  try {
    out.emplace(a.out);
  } catch (const ConfigError& e) {
    std::cerr << "todalab: " << e.what() << '\n';
    return kConfigInvalid;
  }

  nlohmann::json raw = nlohmann::json::object();
  std::optional<ExperimentConfig> cfg;
  auto finish = [&](int code, const std::string& message) {
    if (code != kSuccess) std::cerr << "todalab " << sub << ": " << message << '\n';
    if (cfg) out->manifest(*cfg, code, message);
    else out->manifest(sub, a.seed.value_or(0), a.threads.value_or(1), code, message, nlohmann::ordered_json(raw));
    return code;
  };

  try {
    raw = read_input(a.config);
    if (!raw.is_object()) throw ConfigError("config: top level must be an object");
    if (a.seed) raw["seed"] = *a.seed;
    if (a.threads) raw["threads"] = *a.threads;
    if (a.tol) raw["tol"] = *a.tol;
    cfg = parse_config(raw, sub);
  } catch (const ConfigError& e) {
    return finish(kConfigInvalid, e.what());
  } catch (const InvalidInput& e) {
    return finish(kConfigInvalid, e.what());
  }

  try {
    std::string message;
    const int code = run_command(*cfg, *out, message);
    return finish(code, message);
  } catch (const PreconditionFailure& e) {
    return finish(kPrecondition, e.what());
  } catch (const ConfigError& e) {
    return finish(kConfigInvalid, e.what());
  } catch (const InvalidInput& e) {
    return finish(kConfigInvalid, e.what());
  } catch (const std::exception& e) {
    return finish(1, std::string("internal error: ") + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"todalab: variational experiments for the SU(3) Toda system on a flat torus"};
  app.set_version_flag("--version", TODALAB_VERSION);
  app.require_subcommand(1);

  Args args;
  for (const auto& name : subcommands()) {
    auto* sc = app.add_subcommand(name, "run the " + name + " experiment");
    sc->add_option("--config", args.config, "JSON config or a previous manifest.json")->required();
    sc->add_option("--out", args.out, "output directory")->required();
    sc->add_option("--seed", args.seed, "override the config seed");
    sc->add_option("--threads", args.threads, "override the config thread count")->check(CLI::PositiveNumber);
    sc->add_option("--tol", args.tol, "distance to the forbidden set treated as on it")
        ->check(CLI::NonNegativeNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigInvalid;
  }
  return execute(app.get_subcommands().front()->get_name(), args);
}
