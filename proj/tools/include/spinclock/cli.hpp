#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "spinclock/thermo.hpp"

namespace spinclock::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

struct GridSpec {
  double min = 0.0;
  double max = 0.0;
  int n = 0;
  bool log = true;

  /// Throws ConfigError unless 0 < min < max (min <= max for n = 1) and n >= 1.
  void validate(std::string_view name, bool positive) const;
  std::vector<double> values() const;
  TemperatureGrid temperatures() const;
};

/// Batch configuration loaded with --config. Unknown keys are rejected; JSON
/// sub-objects (system, orientation, lattice, cluster, fit) are kept as text and
/// parsed by the command that uses them.
struct RunConfig {
  std::string command;
  std::optional<std::string> preset;
  std::optional<std::string> system_json;
  std::vector<std::filesystem::path> data;
  std::optional<std::filesystem::path> outdir;
  std::optional<std::uint64_t> seed;
  std::map<std::string, GridSpec> grids;  // keys T, H, angle, omega
  std::optional<std::string> orientation_json;
  std::optional<std::string> lattice_json;
  std::optional<std::string> cluster_json;
  std::optional<std::string> fit_json;
  std::optional<std::string> target;
};

/// Relative paths inside the file are resolved against `base_dir`.
RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir);

/// Worker cap from SPINCLOCK_THREADS (default 1). Throws ConfigError when malformed.
unsigned thread_cap();

/// Entry point: args exclude the program name. Returns 0, 2 (config) or 3 (numerical).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spinclock::cli
