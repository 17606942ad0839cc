#include <cmath>
#include <cstdlib>
#include <initializer_list>

#include "json.hpp"
#include "spinclock/cli.hpp"
#include "spinclock/error.hpp"
#include "spinclock/io.hpp"

namespace spinclock::cli {

using nlohmann::json;

void GridSpec::validate(std::string_view name, bool positive) const {
  const std::string label(name);
  if (n < 1) throw ConfigError("grid " + label + " needs n >= 1");
  if (!std::isfinite(min) || !std::isfinite(max)) throw ConfigError("grid " + label + " bounds must be finite");
  if (n > 1 && !(max > min)) throw ConfigError("grid " + label + " needs max > min");
  if (n == 1 && max < min) throw ConfigError("grid " + label + " needs max >= min");
  if ((positive || log) && !(min > 0.0)) throw ConfigError("grid " + label + " needs min > 0");
}

std::vector<double> GridSpec::values() const {
  std::vector<double> v;
  if (n == 1) return {min};
  for (int i = 0; i < n; ++i) {
    const double f = static_cast<double>(i) / (n - 1);
    v.push_back(log ? min * std::pow(max / min, f) : min + f * (max - min));
  }
  v.back() = max;
  return v;
}

TemperatureGrid GridSpec::temperatures() const { return TemperatureGrid(values()); }

namespace {

void check_keys(const json& j, std::string_view what, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw ConfigError(std::string(what) + " must be a JSON object");
  for (const auto& item : j.items()) {
    bool ok = false;
    for (std::string_view a : allowed) ok = ok || a == item.key();
    if (!ok) throw ConfigError("unknown key '" + item.key() + "' in " + std::string(what));
  }
}

std::string string_value(const json& j, std::string_view key) {
  if (!j.is_string()) throw ConfigError("'" + std::string(key) + "' must be a string");
  return j.get<std::string>();
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

// An inline object, or a path to a JSON file holding one.
std::string object_or_file(const json& j, std::string_view key, const std::filesystem::path& base) {
  if (j.is_object()) return j.dump();
  const std::filesystem::path path = resolve(base, string_value(j, key));
  if (!std::filesystem::exists(path)) throw ConfigError("referenced file does not exist: " + path.string());
  return io::read_text(path);
}

GridSpec grid_from(const json& j, const std::string& name) {
  check_keys(j, "grid " + name, {"min", "max", "n", "scale"});
  GridSpec g;
  if (!j.contains("min") || !j.contains("max") || !j.contains("n")) {
    throw ConfigError("grid " + name + " needs min, max and n");
  }
  if (!j["min"].is_number() || !j["max"].is_number() || !j["n"].is_number_integer()) {
    throw ConfigError("grid " + name + " has non-numeric bounds");
  }
  g.min = j["min"].get<double>();
  g.max = j["max"].get<double>();
  g.n = j["n"].get<int>();
  g.log = name == "T" || name == "omega";
  if (j.contains("scale")) {
    const std::string s = string_value(j["scale"], "scale");
    if (s != "log" && s != "linear") throw ConfigError("grid scale must be 'log' or 'linear'");
    g.log = s == "log";
  }
  g.validate(name, name == "T" || name == "omega");
  return g;
}

}  // namespace

RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const std::size_t offset = e.byte > 0 ? e.byte - 1 : 0;
    throw ConfigError(std::string("malformed JSON: ") + e.what(), io::line_of_offset(text, offset));
  }
  check_keys(j, "run config",
             {"command", "preset", "system", "data", "outdir", "seed", "grids", "orientation", "lattice",
              "cluster", "fit", "target"});
  RunConfig c;
  if (j.contains("command")) c.command = string_value(j["command"], "command");
  if (j.contains("preset")) {
    c.preset = string_value(j["preset"], "preset");
    if (*c.preset != "complex1" && *c.preset != "complex2" && *c.preset != "complex4" && *c.preset != "custom") {
      throw ConfigError("preset must be one of complex1, complex2, complex4, custom");
    }
  }
  if (j.contains("system")) c.system_json = object_or_file(j["system"], "system", base_dir);
  if (c.preset == std::optional<std::string>("custom") && !c.system_json) {
    throw ConfigError("preset 'custom' needs a 'system'");
  }
  if (j.contains("data")) {
    const json& d = j["data"];
    std::vector<std::string> paths;
    if (d.is_string()) {
      paths.push_back(d.get<std::string>());
    } else if (d.is_array()) {
      for (const json& p : d) paths.push_back(string_value(p, "data"));
    } else {
      throw ConfigError("'data' must be a path or a list of paths");
    }
    for (const std::string& p : paths) {
      const auto path = resolve(base_dir, p);
      if (!std::filesystem::exists(path)) throw ConfigError("referenced file does not exist: " + path.string());
      c.data.push_back(path);
    }
  }
  if (j.contains("outdir")) c.outdir = resolve(base_dir, string_value(j["outdir"], "outdir"));
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw ConfigError("'seed' must be a non-negative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("grids")) {
    check_keys(j["grids"], "grids", {"T", "H", "angle", "omega"});
    for (const auto& item : j["grids"].items()) c.grids[item.key()] = grid_from(item.value(), item.key());
  }
  if (j.contains("orientation")) c.orientation_json = object_or_file(j["orientation"], "orientation", base_dir);
  if (j.contains("lattice")) c.lattice_json = object_or_file(j["lattice"], "lattice", base_dir);
  if (j.contains("cluster")) c.cluster_json = object_or_file(j["cluster"], "cluster", base_dir);
  if (j.contains("fit")) c.fit_json = object_or_file(j["fit"], "fit", base_dir);
  if (j.contains("target")) c.target = string_value(j["target"], "target");
  return c;
}

unsigned thread_cap() {
  const char* env = std::getenv("SPINCLOCK_THREADS");
  if (env == nullptr || *env == '\0') return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1 || v > 1024) throw ConfigError("SPINCLOCK_THREADS must be an integer in [1, 1024]");
  return static_cast<unsigned>(v);
}

}  // namespace spinclock::cli
