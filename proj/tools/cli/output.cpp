#include "output.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>

#include "todalab/field_io.hpp"

namespace todalab::cli {

namespace fs = std::filesystem;

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

OutputDir::OutputDir(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec || !fs::is_directory(root_)) throw ConfigError("output: cannot create directory " + root_.string());
  std::ofstream probe(root_ / ".write_probe");
  if (!probe) throw ConfigError("output: directory " + root_.string() + " is not writable");
  probe.close();
  fs::remove(root_ / ".write_probe", ec);
}

void OutputDir::record(const std::string& file) { files_.push_back(file); }

void OutputDir::csv(const std::string& name, const std::vector<std::string>& header,
                    const std::vector<std::vector<double>>& rows) {
  std::ofstream os(root_ / name, std::ios::binary);
  if (!os) throw ConfigError("output: cannot write " + name);
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_real(row[i]);
    os << '\n';
  }
  record(name);
}

void OutputDir::json(const std::string& name, const nlohmann::ordered_json& j) {
  std::ofstream os(root_ / name, std::ios::binary);
  if (!os) throw ConfigError("output: cannot write " + name);
  os << j.dump(2) << '\n';
  record(name);
}

void OutputDir::field(const std::string& name, const GridField& f) {
  write_field(root_ / (name + ".bin"), f);
  record(name + ".bin");
  nlohmann::ordered_json side{{"format", "TDLFLD01"},
                              {"n", f.torus().n()},
                              {"L1", f.torus().L1()},
                              {"L2", f.torus().L2()},
                              {"layout", "32-byte header then n*n little-endian doubles, row-major"},
                              {"min", f.min()},
                              {"max", f.max()}};
  json(name + ".json", side);
}

void OutputDir::manifest(const ExperimentConfig& cfg, int exit_code, const std::string& message) {
  manifest(cfg.subcommand, cfg.seed, cfg.threads, exit_code, message, cfg.to_json());
}

void OutputDir::manifest(const std::string& subcommand, std::uint64_t seed, std::size_t threads, int exit_code,
                         const std::string& message, const nlohmann::ordered_json& config) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  nlohmann::ordered_json m;
  m["manifest_version"] = 1;
  m["subcommand"] = subcommand;
  m["timestamp"] = stamp;
  m["exit_code"] = exit_code;
  m["message"] = message;
  m["seed"] = seed;
  m["threads"] = threads;
  m["versions"] = {{"todalab", TODALAB_VERSION},
                   {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                         std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                         std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                   {"cli11", CLI11_VERSION},
                   {"compiler", __VERSION__},
                   {"cplusplus", __cplusplus}};
  m["outputs"] = files_;
  m["config"] = config;
  std::ofstream os(root_ / "manifest.json", std::ios::binary);
  os << m.dump(2) << '\n';
}

}  // namespace todalab::cli
