#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "todalab/torus.hpp"

namespace todalab::cli {

/// Output directory for one run. Data files are written deterministically;
/// the wall-clock timestamp goes to manifest.json only.
class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path root);

  const std::filesystem::path& root() const noexcept { return root_; }

  /// Reals are printed with %.17g so they round-trip.
  void csv(const std::string& name, const std::vector<std::string>& header,
           const std::vector<std::vector<double>>& rows);
  void json(const std::string& name, const nlohmann::ordered_json& j);
  /// name.bin in the binary field layout plus a name.json sidecar.
  void field(const std::string& name, const GridField& f);

  void manifest(const ExperimentConfig& cfg, int exit_code, const std::string& message);
  /// For runs whose config never parsed; echoes the raw input instead.
  void manifest(const std::string& subcommand, std::uint64_t seed, std::size_t threads, int exit_code,
                const std::string& message, const nlohmann::ordered_json& config);

 private:
  void record(const std::string& file);
  std::filesystem::path root_;
  std::vector<std::string> files_;
};

std::string format_real(double x);

}  // namespace todalab::cli
