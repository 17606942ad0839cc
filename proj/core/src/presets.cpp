#include "spinclock/presets.hpp"

#include "json.hpp"
#include "spinclock/io.hpp"

namespace spinclock {

namespace {

struct Entry {
  const char* name;
  const char* json;
};

// D for complex1 is not pinned by the measurements (only the tunnel gap is), so it
// and the g values there are placeholders.
constexpr Entry kPresets[] = {
    {"complex1", R"({
  "system": {
    "S": 1,
    "unit": "cm-1",
    "D": {"value": -100, "unit": "cm-1", "assumed": true},
    "E": {"value": 1.45, "unit": "cm-1"},
    "g": {"value": 2.2, "assumed": true}
  }
})"},
    {"complex2", R"({
  "system": {
    "S": 1.5,
    "unit": "cm-1",
    "D": {"value": -8.31, "unit": "cm-1"},
    "E": {"value": 0, "unit": "cm-1"},
    "g": {"value": 2.0, "assumed": true},
    "hyperfine": {"A": {"value": 0.014, "unit": "K"}, "I": 3.5}
  }
})"},
    {"complex4", R"({
  "system": {
    "S": 1,
    "unit": "cm-1",
    "D": {"value": -2.71, "unit": "cm-1"},
    "E": {"value": 0.105, "unit": "cm-1"},
    "g": 2.16
  },
  "tip": 1e-4,
  "easy_axis_deg": 52.6,
  "alternates": {
    "magnetometry_negative": {"S": 1, "unit": "cm-1", "D": -2.96, "E": 0.06, "g": 2.16},
    "magnetometry_positive": {"S": 1, "unit": "cm-1", "D": 2.11, "E": 0.09, "g": 2.16}
  }
})"},
};

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const Entry& e : kPresets) out.emplace_back(e.name);
  return out;
}

Preset load_preset(const std::string& name) {
  for (const Entry& e : kPresets) {
    if (name != e.name) continue;
    const nlohmann::json j = nlohmann::json::parse(e.json);
    Preset p;
    p.name = name;
    p.json = e.json;
    io::ParsedSystem parsed = io::parse_spin_system(j["system"].dump());
    p.system = parsed.system;
    p.assumed = parsed.assumed;
    p.tip = j.value("tip", 0.0);
    if (j.contains("easy_axis_deg")) p.easy_axis_deg = j["easy_axis_deg"].get<double>();
    if (j.contains("alternates")) {
      for (const auto& item : j["alternates"].items()) {
        p.alternates.push_back({item.key(), io::parse_spin_system(item.value().dump()).system});
      }
    }
    return p;
  }
  std::string known;
  for (const Entry& e : kPresets) known += std::string(known.empty() ? "" : ", ") + e.name;
  throw ConfigError("unknown preset '" + name + "' (" + known + ", custom)");
}

}  // namespace spinclock
