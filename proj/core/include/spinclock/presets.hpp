#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spinclock/spin_system.hpp"

namespace spinclock {

struct AlternateSystem {
  std::string label;
  SpinSystem system;
};

struct Preset {
  std::string name;
  SpinSystem system;
  /// Parameters not stated by the source measurements (placeholders).
  std::vector<std::string> assumed;
  double tip = 0.0;  // cm^3/mol
  std::optional<double> easy_axis_deg;
  std::vector<AlternateSystem> alternates;
  std::string json;
};

/// complex1 (S = 1 Ni), complex2 (S = 3/2 Co), complex4 (S = 1 Ni, weaker D).
std::vector<std::string> preset_names();
/// Throws ConfigError for unknown names.
Preset load_preset(const std::string& name);

}  // namespace spinclock
