#include "spinclock/io.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "json.hpp"
#include "spinclock/units.hpp"

namespace spinclock::io {

using nlohmann::json;

namespace {

json parse_json(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const std::size_t offset = e.byte > 0 ? e.byte - 1 : 0;
    throw ConfigError(std::string("malformed JSON: ") + e.what(), line_of_offset(text, offset));
  }
}

void require_object(const json& j, std::string_view what) {
  if (!j.is_object()) throw ConfigError(std::string(what) + " must be a JSON object");
}

void check_keys(const json& j, std::string_view what, std::initializer_list<std::string_view> allowed) {
  require_object(j, what);
  for (const auto& item : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      throw ConfigError("unknown key '" + item.key() + "' in " + std::string(what));
    }
  }
}

double number(const json& j, std::string_view key) {
  if (!j.is_number()) throw ConfigError("'" + std::string(key) + "' must be a number");
  return j.get<double>();
}

int integer(const json& j, std::string_view key) {
  if (!j.is_number_integer()) throw ConfigError("'" + std::string(key) + "' must be an integer");
  return j.get<int>();
}

// A bare number in `default_unit`, or {"value":..,"unit":..,"assumed":..}.
double energy(const json& j, std::string_view key, units::EnergyUnit default_unit, bool* assumed) {
  if (j.is_number()) return units::to_kelvin(j.get<double>(), default_unit);
  check_keys(j, key, {"value", "unit", "assumed"});
  if (!j.contains("value")) throw ConfigError("'" + std::string(key) + "' needs a value");
  units::EnergyUnit unit = default_unit;
  if (j.contains("unit")) {
    if (!j["unit"].is_string()) throw ConfigError("unit must be a string");
    unit = units::parse_energy_unit(j["unit"].get<std::string>());
  }
  if (j.contains("assumed")) {
    if (!j["assumed"].is_boolean()) throw ConfigError("'assumed' must be true or false");
    if (assumed) *assumed = j["assumed"].get<bool>();
  }
  return units::to_kelvin(number(j["value"], key), unit);
}

Vec3 vec3(const json& j, std::string_view key) {
  if (!j.is_array() || j.size() != 3) throw ConfigError("'" + std::string(key) + "' must be a 3-vector");
  return {number(j[0], key), number(j[1], key), number(j[2], key)};
}

SpinSystem system_from(const json& j, std::vector<std::string>* assumed) {
  check_keys(j, "spin system", {"S", "D", "E", "g", "unit", "hyperfine"});
  units::EnergyUnit unit = units::EnergyUnit::kKelvin;
  if (j.contains("unit")) {
    if (!j["unit"].is_string()) throw ConfigError("unit must be a string");
    unit = units::parse_energy_unit(j["unit"].get<std::string>());
  }
  if (!j.contains("S")) throw ConfigError("spin system needs S");
  SpinSystem sys;
  sys.spin = number(j["S"], "S");
  auto mark = [&](const char* key, bool flag) {
    if (flag && assumed) assumed->emplace_back(key);
  };
  bool flag = false;
  if (j.contains("D")) {
    sys.D = energy(j["D"], "D", unit, &flag);
    mark("D", flag);
  }
  flag = false;
  if (j.contains("E")) {
    sys.E = energy(j["E"], "E", unit, &flag);
    mark("E", flag);
  }
  if (j.contains("g")) {
    json g = j["g"];
    if (g.is_object()) {
      check_keys(g, "g", {"value", "assumed"});
      if (g.contains("assumed") && g["assumed"].is_boolean() && g["assumed"].get<bool>()) mark("g", true);
      g = g.value("value", json());
    }
    if (g.is_number()) {
      sys.g = {g.get<double>(), g.get<double>(), g.get<double>()};
    } else {
      const Vec3 v = vec3(g, "g");
      sys.g = {v.x(), v.y(), v.z()};
    }
  }
  if (j.contains("hyperfine")) {
    const json& h = j["hyperfine"];
    check_keys(h, "hyperfine", {"A", "I"});
    if (!h.contains("A") || !h.contains("I")) throw ConfigError("hyperfine needs A and I");
    flag = false;
    sys.hyperfine = Hyperfine{energy(h["A"], "A", unit, &flag), number(h["I"], "I")};
    mark("A", flag);
  }
  try {
    sys.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return sys;
}

}  // namespace

std::size_t line_of_offset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(offset), '\n'));
}

ParsedSystem parse_spin_system(std::string_view json_text) {
  ParsedSystem out;
  out.system = system_from(parse_json(json_text), &out.assumed);
  return out;
}

std::string spin_system_to_json(const SpinSystem& sys) {
  json j;
  j["S"] = sys.spin;
  j["D"] = {{"value", sys.D}, {"unit", "K"}};
  j["E"] = {{"value", sys.E}, {"unit", "K"}};
  j["g"] = {sys.g[0], sys.g[1], sys.g[2]};
  if (sys.hyperfine) {
    j["hyperfine"] = {{"A", {{"value", sys.hyperfine->coupling}, {"unit", "K"}}}, {"I", sys.hyperfine->nuclear_spin}};
  }
  return j.dump(2);
}

OrientationScheme parse_orientation_scheme(std::string_view json_text) {
  const json j = parse_json(json_text);
  require_object(j, "orientation scheme");
  if (!j.contains("scheme") || !j["scheme"].is_string()) throw ConfigError("orientation needs a 'scheme' string");
  const std::string kind = j["scheme"].get<std::string>();
  auto deg = [&](const char* key, double fallback) {
    return units::degrees_to_radians(j.contains(key) ? number(j[key], key) : fallback);
  };
  if (kind == "single") {
    check_keys(j, "single scheme", {"scheme", "theta_deg", "phi_deg"});
    return SingleAngle{deg("theta_deg", 0.0), deg("phi_deg", 0.0)};
  }
  if (kind == "cone") {
    check_keys(j, "cone scheme", {"scheme", "aperture_deg", "n"});
    return Cone{deg("aperture_deg", 0.0), j.contains("n") ? integer(j["n"], "n") : 350};
  }
  if (kind == "powder") {
    check_keys(j, "powder scheme", {"scheme", "n", "fold_octant"});
    RandomPowder p;
    if (j.contains("n")) p.n_points = integer(j["n"], "n");
    if (j.contains("fold_octant")) {
      if (!j["fold_octant"].is_boolean()) throw ConfigError("'fold_octant' must be true or false");
      p.fold_octant = j["fold_octant"].get<bool>();
    }
    return p;
  }
  if (kind == "crystal") {
    check_keys(j, "crystal scheme", {"scheme", "easy_axis_deg"});
    const double polar = j.contains("easy_axis_deg") ? number(j["easy_axis_deg"], "easy_axis_deg") : 52.6;
    const auto ops = SymmetryOp::p21n();
    return CrystalSites{crystal_site_frames(polar, ops)};
  }
  if (kind == "rotation") {
    check_keys(j, "rotation scheme", {"scheme", "axis", "angles_deg"});
    RotationSweep r;
    if (j.contains("axis")) r.axis = vec3(j["axis"], "axis");
    if (!j.contains("angles_deg") || !j["angles_deg"].is_array()) throw ConfigError("rotation needs angles_deg");
    for (const json& a : j["angles_deg"]) r.angles.push_back(units::degrees_to_radians(number(a, "angles_deg")));
    return r;
  }
  if (kind == "mix") {
    check_keys(j, "mix scheme", {"scheme", "aligned_fraction", "n"});
    AlignedPowderMix m;
    if (j.contains("aligned_fraction")) m.aligned_fraction = number(j["aligned_fraction"], "aligned_fraction");
    if (j.contains("n")) m.n_points = integer(j["n"], "n");
    return m;
  }
  throw ConfigError("unknown orientation scheme '" + kind + "' (single, cone, powder, crystal, rotation, mix)");
}

IsingLattice parse_lattice(std::string_view json_text) {
  const json j = parse_json(json_text);
  check_keys(j, "lattice", {"preset", "offsets", "L", "J", "m_eff", "unit"});
  units::EnergyUnit unit = units::EnergyUnit::kKelvin;
  if (j.contains("unit")) unit = units::parse_energy_unit(j["unit"].get<std::string>());
  std::vector<Offset> offsets;
  if (j.contains("preset") == j.contains("offsets")) throw ConfigError("lattice needs exactly one of preset, offsets");
  try {
    if (j.contains("preset")) {
      if (!j["preset"].is_string()) throw ConfigError("lattice preset must be a string");
      offsets = IsingLattice::preset(j["preset"].get<std::string>());
    } else {
      if (!j["offsets"].is_array()) throw ConfigError("offsets must be an array");
      for (const json& o : j["offsets"]) {
        if (!o.is_array() || o.size() != 3) throw ConfigError("each offset must have 3 integers");
        offsets.push_back({integer(o[0], "offset"), integer(o[1], "offset"), integer(o[2], "offset")});
      }
    }
    std::array<int, 3> sizes{10, 10, 10};
    if (j.contains("L")) {
      if (j["L"].is_array()) {
        if (j["L"].size() != 3) throw ConfigError("L must be an integer or 3 integers");
        for (int k = 0; k < 3; ++k) sizes[k] = integer(j["L"][k], "L");
      } else {
        sizes.fill(integer(j["L"], "L"));
      }
    }
    if (!j.contains("J")) throw ConfigError("lattice needs J");
    const double coupling = energy(j["J"], "J", unit, nullptr);
    const double m_eff = j.contains("m_eff") ? number(j["m_eff"], "m_eff") : 1.0;
    return IsingLattice(sizes, offsets, coupling, m_eff);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

ClusterModel parse_cluster(std::string_view json_text) {
  const json j = parse_json(json_text);
  check_keys(j, "cluster", {"site", "J", "neighbors", "topology", "field", "sites", "bonds", "unit"});
  units::EnergyUnit unit = units::EnergyUnit::kKelvin;
  if (j.contains("unit")) unit = units::parse_energy_unit(j["unit"].get<std::string>());
  if (!j.contains("site")) throw ConfigError("cluster needs a 'site' spin system");
  const SpinSystem site = system_from(j["site"], nullptr);
  const double coupling = j.contains("J") ? energy(j["J"], "J", unit, nullptr) : 0.0;
  FieldVector field;
  if (j.contains("field")) field = FieldVector(vec3(j["field"], "field"));
  ClusterModel model;
  if (j.contains("bonds")) {
    if (j.contains("neighbors") || j.contains("topology")) {
      throw ConfigError("cluster takes either bonds or neighbors/topology");
    }
    const int n = j.contains("sites") ? integer(j["sites"], "sites") : 0;
    if (n < 1) throw ConfigError("explicit bonds need 'sites' >= 1");
    model.sites.assign(static_cast<std::size_t>(n), site);
    model.field = field;
    for (const json& b : j["bonds"]) {
      if (!b.is_array() || (b.size() != 2 && b.size() != 3)) throw ConfigError("bond must be [i, j] or [i, j, J]");
      const double c = b.size() == 3 ? energy(b[2], "bond J", unit, nullptr) : coupling;
      model.bonds.push_back({integer(b[0], "bond"), integer(b[1], "bond"), c});
    }
  } else {
    if (j.contains("sites")) throw ConfigError("'sites' is only valid with explicit bonds");
    const int neighbors = j.contains("neighbors") ? integer(j["neighbors"], "neighbors") : 6;
    BondTopology topology = BondTopology::kStarRing;
    if (j.contains("topology")) {
      const std::string t = j["topology"].get<std::string>();
      if (t == "star") {
        topology = BondTopology::kStar;
      } else if (t != "star_ring") {
        throw ConfigError("unknown topology '" + t + "' (star, star_ring)");
      }
    }
    if (neighbors < 0) throw ConfigError("neighbors must be >= 0");
    model = star_cluster(site, coupling, neighbors, topology, field);
  }
  try {
    model.validate();
  } catch (const ResourceError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return model;
}

std::string fit_result_to_json(const FitResult& result) {
  json j;
  j["status"] = to_string(result.status);
  j["ssr"] = result.ssr;
  j["points"] = result.points;
  j["parameters"] = json::object();
  for (std::size_t i = 0; i < result.names.size() && i < result.best.size(); ++i) {
    json p{{"value", result.best[i]}};
    const double u = result.uncertainty(result.names[i]);
    if (std::isfinite(u)) p["uncertainty"] = u;
    j["parameters"][result.names[i]] = p;
  }
  if (result.reduced_chi2) j["reduced_chi2"] = *result.reduced_chi2;
  j["starts"] = json::array();
  for (const StartOutcome& s : result.starts) {
    j["starts"].push_back({{"start", s.start},
                           {"params", s.params},
                           {"ssr", std::isfinite(s.ssr) ? json(s.ssr) : json(nullptr)},
                           {"evaluations", s.evaluations},
                           {"status", to_string(s.status)}});
  }
  j["covariance"] = json::array();
  for (Eigen::Index r = 0; r < result.covariance.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < result.covariance.cols(); ++c) row.push_back(result.covariance(r, c));
    j["covariance"].push_back(row);
  }
  j["free_parameters"] = result.free_names;
  j["warnings"] = result.warnings;
  return j.dump(2);
}

// ---- CSV ------------------------------------------------------------------------

int CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

namespace {

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    std::string cell(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    const auto first = cell.find_first_not_of(" \t");
    const auto last = cell.find_last_not_of(" \t");
    out.push_back(first == std::string::npos ? std::string() : cell.substr(first, last - first + 1));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

CsvTable parse_csv(std::string_view text) {
  CsvTable table;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) {
      if (pos > text.size()) break;
      continue;
    }
    if (line.front() == '#') {
      table.metadata.emplace_back(line.substr(1));
      continue;
    }
    std::vector<std::string> cells = split(line);
    if (table.header.empty()) {
      for (const std::string& c : cells) {
        if (c.empty()) throw ConfigError("empty column name in CSV header", line_no);
      }
      table.header = std::move(cells);
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw ConfigError("expected " + std::to_string(table.header.size()) + " columns, found " +
                            std::to_string(cells.size()),
                        line_no);
    }
    std::vector<double> row;
    for (const std::string& c : cells) {
      char* stop = nullptr;
      errno = 0;
      const double v = std::strtod(c.c_str(), &stop);
      if (c.empty() || stop != c.c_str() + c.size() || errno == ERANGE || !std::isfinite(v)) {
        throw ConfigError("not a finite number: '" + c + "'", line_no);
      }
      row.push_back(v);
    }
    table.rows.push_back(std::move(row));
  }
  if (table.header.empty()) throw ConfigError("CSV has no header line");
  return table;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CsvTable read_csv(const std::filesystem::path& path) {
  try {
    return parse_csv(read_text(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string format_csv(const CsvTable& table) {
  std::string out;
  for (const std::string& m : table.metadata) out += "#" + m + "\n";
  for (std::size_t i = 0; i < table.header.size(); ++i) out += (i ? "," : "") + table.header[i];
  out += "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + format_number(row[i]);
    out += "\n";
  }
  return out;
}

std::string curve_to_csv(const ThermoCurve& curve) {
  CsvTable t;
  t.metadata.push_back(" " + curve.observable + "," + format_number(curve.field_tesla) + "," + curve.scheme);
  t.header = {"x", "value"};
  for (std::size_t i = 0; i < curve.size(); ++i) t.rows.push_back({curve.x[i], curve.values[i]});
  return format_csv(t);
}

std::string curves_to_csv(const std::vector<ThermoCurve>& curves, std::string_view x_name) {
  CsvTable t;
  t.header.emplace_back(x_name);
  for (const ThermoCurve& c : curves) {
    t.metadata.push_back(" " + c.observable + "," + format_number(c.field_tesla) + "," + c.scheme);
    t.header.push_back(c.observable + "_" + format_number(c.field_tesla) + "T");
  }
  if (!curves.empty()) {
    for (std::size_t i = 0; i < curves.front().size(); ++i) {
      std::vector<double> row{curves.front().x[i]};
      for (const ThermoCurve& c : curves) {
        if (c.size() != curves.front().size()) throw ContractViolation("curves must share their x grid");
        row.push_back(c.values[i]);
      }
      t.rows.push_back(std::move(row));
    }
  }
  return format_csv(t);
}

std::string mc_result_to_csv(const McResult& result) {
  CsvTable t;
  t.metadata.push_back(" L=" + std::to_string(result.sizes[0]) + "x" + std::to_string(result.sizes[1]) + "x" +
                       std::to_string(result.sizes[2]) + ",sweeps=" + std::to_string(result.sweeps) +
                       ",burn_in=" + std::to_string(result.burn_in) + ",seed=" + std::to_string(result.seed));
  t.header = {"T", "E", "c", "err_c", "m_stag", "binder"};
  for (const McPoint& p : result.points) {
    t.rows.push_back({p.temperature, p.energy, p.specific_heat, p.specific_heat_error, p.m_staggered, p.binder});
  }
  return format_csv(t);
}

std::string levels_to_csv(const std::vector<double>& x, const std::vector<Eigen::VectorXd>& levels,
                          std::string_view x_name) {
  CsvTable t;
  t.header.emplace_back(x_name);
  const Eigen::Index n = levels.empty() ? 0 : levels.front().size();
  for (Eigen::Index k = 0; k < n; ++k) t.header.push_back("E" + std::to_string(k) + "_K");
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::vector<double> row{x[i]};
    for (Eigen::Index k = 0; k < n; ++k) row.push_back(levels[i](k));
    t.rows.push_back(std::move(row));
  }
  return format_csv(t);
}

namespace {

int need(const CsvTable& t, std::string_view name) {
  const int c = t.column(name);
  if (c < 0) throw ConfigError("CSV is missing column '" + std::string(name) + "'");
  return c;
}

}  // namespace

std::vector<AcPoint> ac_points_from_csv(const CsvTable& table) {
  const int f = need(table, "f_Hz");
  const int re = need(table, "chi_re");
  const int im = need(table, "chi_im");
  const int s = table.column("sigma");
  std::vector<AcPoint> out;
  for (const auto& row : table.rows) {
    AcPoint p{2.0 * units::kPi * row[f], row[re], row[im], std::nullopt};
    if (s >= 0) p.sigma = row[s];
    out.push_back(p);
  }
  return out;
}

std::vector<T1Point> t1_points_from_csv(const CsvTable& table) {
  const int t = need(table, "T_K");
  const int t1 = need(table, "T1_s");
  const int s = table.column("sigma");
  std::vector<T1Point> out;
  for (const auto& row : table.rows) {
    T1Point p{row[t], row[t1], std::nullopt};
    if (s >= 0) p.sigma = row[s];
    out.push_back(p);
  }
  return out;
}

Dataset dataset_from_csv(const CsvTable& table, ResponseKind kind) {
  const int t = need(table, "T_K");
  const int v = need(table, "value");
  const int h = table.column("H_T");
  const int a = table.column("angle_deg");
  const int s = table.column("sigma");
  Dataset d;
  d.kind = kind;
  for (const auto& row : table.rows) {
    DataPoint p;
    p.t = row[t];
    p.value = row[v];
    if (h >= 0) p.field = row[h];
    if (a >= 0) p.angle = row[a];
    if (s >= 0) p.sigma = row[s];
    d.points.push_back(p);
  }
  return d;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ResourceError("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw ResourceError("short write to '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw ResourceError("cannot rename onto '" + path.string() + "'");
  }
}

}  // namespace spinclock::io
