#pragma once

#include <string>
#include <utility>
#include <vector>

namespace spinclock::cli {

struct OutputFile {
  std::string name;
  std::string content;
};

std::vector<std::string> reproduce_targets();
bool is_reproduce_target(const std::string& target);

/// Simulated curves for one figure target, computed from the presets.
std::vector<OutputFile> reproduce(const std::string& target, unsigned threads);

}  // namespace spinclock::cli
