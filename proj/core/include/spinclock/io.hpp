#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "spinclock/cluster.hpp"
#include "spinclock/fitting.hpp"
#include "spinclock/lattice_mc.hpp"
#include "spinclock/orientation.hpp"
#include "spinclock/relaxation.hpp"
#include "spinclock/spin_system.hpp"
#include "spinclock/thermo.hpp"

// Text formats. JSON parsing reports syntax errors with their line; unknown keys
// are rejected. All functions throw ConfigError on malformed input.
namespace spinclock::io {

struct ParsedSystem {
  SpinSystem system;
  /// Keys whose value object carried "assumed": true (e.g. "D", "g").
  std::vector<std::string> assumed;
};

/// {"S":1,"D":{"value":-100,"unit":"cm-1"},"E":1.45,"g":[2.2,2.2,2.2],
///  "unit":"cm-1","hyperfine":{"A":{"value":0.014,"unit":"K"},"I":3.5}}
/// Bare numbers use the object's "unit" (default K). "g" may be a scalar.
ParsedSystem parse_spin_system(std::string_view json_text);
std::string spin_system_to_json(const SpinSystem& sys);

/// {"scheme":"single","theta_deg":..,"phi_deg":..} | {"scheme":"cone","aperture_deg":..,"n":..}
/// | {"scheme":"powder","n":..,"fold_octant":..} | {"scheme":"crystal","easy_axis_deg":..}
/// | {"scheme":"rotation","axis":[..],"angles_deg":[..]} | {"scheme":"mix","aligned_fraction":..,"n":..}
OrientationScheme parse_orientation_scheme(std::string_view json_text);

/// {"preset":"bipartite12","L":10,"J":{"value":-0.035,"unit":"cm-1"},"m_eff":1.5}
/// or {"offsets":[[1,0,0],[-1,0,0],..],"L":[10,10,10],...}
IsingLattice parse_lattice(std::string_view json_text);

/// {"site":{spin system},"J":..,"neighbors":6,"topology":"star_ring","field":[0,0,0]}
/// or {"site":{..},"sites":7,"bonds":[[0,1],[0,2,-0.05],..],"J":..}
ClusterModel parse_cluster(std::string_view json_text);

std::string fit_result_to_json(const FitResult& result);

/// Converts a byte offset within `text` to a 1-based line number.
std::size_t line_of_offset(std::string_view text, std::size_t offset);

// ---- CSV ------------------------------------------------------------------------

struct CsvTable {
  std::vector<std::string> metadata;  // '#' lines without the marker
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Index of a named column, or -1.
  int column(std::string_view name) const;
};

/// Comma-separated, '.' decimal, '#' metadata lines, one header line.
CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::filesystem::path& path);
std::string format_csv(const CsvTable& table);

/// "%.9g".
std::string format_number(double v);

/// "# observable,field_T,scheme" then "x,value" rows.
std::string curve_to_csv(const ThermoCurve& curve);
/// Several curves sharing x, one value column each.
std::string curves_to_csv(const std::vector<ThermoCurve>& curves, std::string_view x_name);
/// Columns T,E,c,err_c,m_stag,binder.
std::string mc_result_to_csv(const McResult& result);
std::string levels_to_csv(const std::vector<double>& x, const std::vector<Eigen::VectorXd>& levels,
                          std::string_view x_name);

/// Columns f_Hz, chi_re, chi_im, optional sigma; omega = 2 pi f.
std::vector<AcPoint> ac_points_from_csv(const CsvTable& table);
/// Columns T_K, T1_s, optional sigma.
std::vector<T1Point> t1_points_from_csv(const CsvTable& table);
/// Columns T_K, value, optional H_T, angle_deg, sigma.
Dataset dataset_from_csv(const CsvTable& table, ResponseKind kind);

std::string read_text(const std::filesystem::path& path);
/// Writes to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace spinclock::io
