#include "spinclock/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>

#include "CLI11.hpp"
#include "json.hpp"
#include "reproduce.hpp"
#include "spinclock/cluster.hpp"
#include "spinclock/error.hpp"
#include "spinclock/fitting.hpp"
#include "spinclock/io.hpp"
#include "spinclock/lattice_mc.hpp"
#include "spinclock/orientation.hpp"
#include "spinclock/presets.hpp"
#include "spinclock/relaxation.hpp"
#include "spinclock/thermo.hpp"
#include "spinclock/units.hpp"

namespace spinclock::cli {

using nlohmann::json;

namespace {

const std::vector<std::string> kCommands = {"levels", "heatcap", "magnetize", "suscept", "powder", "mc",
                                            "cluster", "relax", "fit", "rabi", "reproduce"};

struct Options {
  std::optional<std::string> config;
  std::optional<std::string> preset;
  std::optional<std::string> system;
  std::optional<std::string> outdir;
  std::optional<std::string> output;
  std::optional<std::uint64_t> seed;

  std::optional<double> field;
  double theta = 0.0;
  double phi = 0.0;
  std::optional<double> tmin, tmax;
  std::optional<int> nt;
  std::optional<std::string> scale;
  std::optional<double> hmin, hmax;
  std::optional<int> nh;
  std::optional<double> temperature;

  std::optional<std::string> scheme;
  std::optional<double> aperture;
  std::optional<int> npoints;
  std::optional<double> fraction;
  std::optional<double> easy_axis;

  std::string mode = "chiT";
  std::optional<double> tip;
  std::string observable = "c";

  std::optional<std::string> lattice;
  std::optional<int> size;
  std::optional<double> coupling;
  std::string unit = "K";
  std::optional<double> m_eff;
  std::optional<int> sweeps, burn_in;

  std::optional<int> neighbors;
  std::optional<std::string> topology;
  bool gap_zero = false;

  std::optional<std::string> data;
  std::optional<std::string> model;
  std::optional<double> a_dir, a_raman;

  std::optional<double> g;
  std::optional<double> bz;
  std::optional<double> spin;

  std::optional<std::string> target;
};

// Everything a command needs, resolved and validated before any computation.
struct Context {
  Options opt;
  RunConfig cfg;
  std::filesystem::path outdir = ".";
  unsigned threads = 1;
  std::ostream* out = nullptr;
  std::vector<OutputFile> files;

  std::uint64_t seed() const { return opt.seed.value_or(cfg.seed.value_or(1)); }
};

std::string fmt(double v, const char* spec = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

struct ResolvedSystem {
  SpinSystem system;
  std::optional<Preset> preset;
};

ResolvedSystem resolve_system(const Context& c, bool required = true) {
  ResolvedSystem r;
  if (c.opt.system) {
    r.system = io::parse_spin_system(io::read_text(*c.opt.system)).system;
    return r;
  }
  std::optional<std::string> name = c.opt.preset ? c.opt.preset : c.cfg.preset;
  if (name && *name != "custom") {
    r.preset = load_preset(*name);
    r.system = r.preset->system;
    return r;
  }
  if (c.cfg.system_json) {
    r.system = io::parse_spin_system(*c.cfg.system_json).system;
    return r;
  }
  if (required) throw ConfigError("this command needs --preset or --system (or 'system' in the config)");
  return r;
}

GridSpec grid(const Context& c, const std::string& name, GridSpec fallback) {
  const bool is_t = name == "T";
  const auto& lo = is_t ? c.opt.tmin : c.opt.hmin;
  const auto& hi = is_t ? c.opt.tmax : c.opt.hmax;
  const auto& n = is_t ? c.opt.nt : c.opt.nh;
  GridSpec g = fallback;
  if (auto it = c.cfg.grids.find(name); it != c.cfg.grids.end()) g = it->second;
  if (lo) g.min = *lo;
  if (hi) g.max = *hi;
  if (n) g.n = *n;
  if (is_t && c.opt.scale) {
    if (*c.opt.scale != "log" && *c.opt.scale != "linear") throw ConfigError("--scale must be log or linear");
    g.log = *c.opt.scale == "log";
  }
  g.validate(name, is_t);
  return g;
}

bool has_field_grid(const Context& c) {
  return c.opt.hmin || c.opt.hmax || c.opt.nh || c.cfg.grids.count("H");
}

OrientationScheme scheme(const Context& c, const std::string& fallback) {
  if (!c.opt.scheme && c.cfg.orientation_json) return io::parse_orientation_scheme(*c.cfg.orientation_json);
  const std::string s = c.opt.scheme.value_or(fallback);
  const int n = c.opt.npoints.value_or(350);
  if (s == "single") {
    return SingleAngle{units::degrees_to_radians(c.opt.theta), units::degrees_to_radians(c.opt.phi)};
  }
  if (s == "powder") return RandomPowder{n, true};
  if (s == "cone") {
    if (!c.opt.aperture) throw ConfigError("--scheme cone needs --aperture");
    return Cone{units::degrees_to_radians(*c.opt.aperture), n};
  }
  if (s == "crystal") {
    const auto ops = SymmetryOp::p21n();
    return CrystalSites{crystal_site_frames(c.opt.easy_axis.value_or(52.6), ops)};
  }
  if (s == "mix") return AlignedPowderMix{c.opt.fraction.value_or(0.5), n};
  throw ConfigError("unknown --scheme '" + s + "' (single, powder, cone, crystal, mix)");
}

void emit(Context& c, const std::string& default_name, std::string content) {
  c.files.push_back({c.opt.output.value_or(default_name), std::move(content)});
}

// ---- commands -------------------------------------------------------------------

void cmd_levels(Context& c) {
  const ResolvedSystem rs = resolve_system(c);
  const double theta = units::degrees_to_radians(c.opt.theta);
  const double phi = units::degrees_to_radians(c.opt.phi);
  std::vector<double> fields{c.opt.field.value_or(0.0)};
  if (has_field_grid(c)) fields = grid(c, "H", {0.0, 3.0, 31, false}).values();

  std::vector<Eigen::VectorXd> spectra;
  for (double h : fields) spectra.push_back(solve(rs.system, FieldVector::polar(h, theta, phi), false).energies);
  emit(c, "levels.csv", io::levels_to_csv(fields, spectra, "H_T"));

  SpinSystem electronic = rs.system;
  electronic.hyperfine.reset();
  const LevelSet levels = solve(electronic, FieldVector::polar(fields.front(), theta, phi), false);
  const std::vector<double> distinct = levels.distinct_levels();
  const std::vector<int> deg = levels.degeneracies();
  std::ostream& out = *c.out;
  out << "electronic levels at H = " << fmt(fields.front()) << " T"
      << (rs.system.hyperfine ? " (hyperfine excluded)" : "") << "\n";
  for (std::size_t k = 0; k < distinct.size(); ++k) {
    out << "  E" << k << " = " << fmt(distinct[k]) << " K = " << fmt(units::kelvin_to_wavenumber(distinct[k]))
        << " cm-1  (x" << deg[k] << ")\n";
  }
  if (distinct.size() > 1) {
    const double gap = distinct[1] - distinct[0];
    out << "gap_K = " << fmt(gap) << "\n";
    out << "gap_cm-1 = " << fmt(units::kelvin_to_wavenumber(gap), "%.4f") << "\n";
    out << "gap_GHz = " << fmt(units::kelvin_to_ghz(gap)) << "\n";
  }
  for (const std::string& w : rs.system.warnings()) out << "warning: " << w << "\n";
}

void cmd_heatcap(Context& c) {
  const ResolvedSystem rs = resolve_system(c);
  const GridSpec g = grid(c, "T", {0.35, 20.0, 200, true});
  const OrientationScheme sch = scheme(c, "single");
  const Vec3 field(0.0, 0.0, c.opt.field.value_or(0.0));
  const TemperatureGrid temps = g.temperatures();
  ThermoCurve curve = averaged_observable(rs.system, sch, ObservableKind::kSpecificHeat, temps, field);
  emit(c, "heatcap.csv", io::curve_to_csv(curve));
  const OrientationEnsemble ens(rs.system, generate_orientations(sch), field);
  const Peak peak = ens.specific_heat_peak(temps[0], temps[temps.size() - 1]);
  *c.out << "T0_K = " << fmt(peak.temperature, "%.4f") << "\n"
         << "c_max = " << fmt(peak.value, "%.5f") << "\n";
  if (peak.at_boundary) *c.out << "warning: maximum at the edge of the temperature range\n";
}

void cmd_magnetize(Context& c) {
  const ResolvedSystem rs = resolve_system(c);
  const std::vector<double> fields = grid(c, "H", {0.0, 5.0, 51, false}).values();
  std::vector<double> temps{c.opt.temperature.value_or(2.0)};
  if (c.opt.tmin || c.opt.tmax || c.opt.nt || c.cfg.grids.count("T")) temps = grid(c, "T", {2.0, 6.0, 3, false}).values();
  if (!(temps.front() > 0.0)) throw ConfigError("temperature must be > 0");
  const OrientationScheme sch = scheme(c, "single");
  const TemperatureGrid tgrid(temps);
  io::CsvTable t;
  t.metadata.push_back(" magnetization (mu_B per molecule)," + scheme_name(sch));
  t.header.push_back("H_T");
  for (double temp : temps) t.header.push_back("M_" + fmt(temp) + "K");
  for (double h : fields) {
    std::vector<double> row{h};
    const ThermoCurve m = averaged_observable(rs.system, sch, ObservableKind::kMagnetization, tgrid, Vec3(0, 0, h));
    row.insert(row.end(), m.values.begin(), m.values.end());
    t.rows.push_back(std::move(row));
  }
  emit(c, "magnetization.csv", io::format_csv(t));
  *c.out << "M(H=" << fmt(fields.back()) << " T, T=" << fmt(temps.front()) << " K) = " << fmt(t.rows.back()[1])
         << " mu_B\n";
}

void cmd_suscept(Context& c) {
  const ResolvedSystem rs = resolve_system(c);
  if (c.opt.mode == "chiT") {
    const GridSpec g = grid(c, "T", {2.0, 300.0, 100, true});
    const double tip = c.opt.tip.value_or(rs.preset ? rs.preset->tip : 0.0);
    std::vector<DataPoint> pts;
    for (double t : g.values()) pts.push_back({t, c.opt.field.value_or(0.0), 0.0, 0.0, std::nullopt});
    const std::vector<double> chit = powder_chi_t(rs.system, tip, pts);
    ThermoCurve curve{"chiT", c.opt.field.value_or(0.0), "powder", g.values(), chit};
    emit(c, "chiT.csv", io::curve_to_csv(curve));
    *c.out << "chiT(" << fmt(pts.front().t) << " K) = " << fmt(chit.front(), "%.4f") << " cm3 K/mol\n"
           << "chiT(" << fmt(pts.back().t) << " K) = " << fmt(chit.back(), "%.4f") << " cm3 K/mol\n";
  } else if (c.opt.mode == "field") {
    const std::vector<double> fields = grid(c, "H", {0.0, 3.0, 61, false}).values();
    const double t = c.opt.temperature.value_or(2.0);
    if (!(t > 0.0)) throw ConfigError("temperature must be > 0");
    const Vec3 dir = FieldVector::polar(1.0, units::degrees_to_radians(c.opt.theta),
                                        units::degrees_to_radians(c.opt.phi)).tesla;
    io::CsvTable tab;
    tab.metadata.push_back(" isothermal and van Vleck susceptibility (cm3/mol) at T=" + fmt(t) + " K");
    tab.header = {"H_T", "chi_T", "chi_S"};
    for (double h : fields) {
      tab.rows.push_back({h, susceptibility_isothermal(rs.system, dir, h, t), susceptibility_vanvleck(rs.system, dir, h, t)});
    }
    emit(c, "susceptibility.csv", io::format_csv(tab));
    *c.out << "chi_T(0) = " << fmt(tab.rows.front()[1]) << ", chi_S(0) = " << fmt(tab.rows.front()[2]) << " cm3/mol\n";
  } else {
    throw ConfigError("--mode must be chiT or field");
  }
}

void cmd_powder(Context& c) {
  const ResolvedSystem rs = resolve_system(c);
  const GridSpec g = grid(c, "T", {0.35, 20.0, 200, true});
  ObservableKind kind;
  if (c.opt.observable == "c") {
    kind = ObservableKind::kSpecificHeat;
  } else if (c.opt.observable == "M") {
    kind = ObservableKind::kMagnetization;
  } else if (c.opt.observable == "chi") {
    kind = ObservableKind::kSusceptibility;
  } else {
    throw ConfigError("--observable must be c, M or chi");
  }
  const OrientationScheme sch = scheme(c, "powder");
  const ThermoCurve curve =
      averaged_observable(rs.system, sch, kind, g.temperatures(), Vec3(0, 0, c.opt.field.value_or(0.0)));
  emit(c, "powder.csv", io::curve_to_csv(curve));
  const auto it = std::max_element(curve.values.begin(), curve.values.end());
  *c.out << "max " << curve.observable << " = " << fmt(*it) << " at T = " << fmt(curve.x[it - curve.values.begin()])
         << " K (" << scheme_name(sch) << ")\n";
}

void cmd_mc(Context& c) {
  std::optional<IsingLattice> lattice;
  if (c.cfg.lattice_json && !c.opt.coupling) {
    lattice = io::parse_lattice(*c.cfg.lattice_json);
  } else {
    if (!c.opt.coupling) throw ConfigError("mc needs --J (or a 'lattice' object in the config)");
    const units::EnergyUnit unit = units::parse_energy_unit(c.opt.unit);
    const int l = c.opt.size.value_or(10);
    const std::string name = c.opt.lattice.value_or("bipartite12");
    const std::vector<Offset> offsets = IsingLattice::preset(name);
    const std::array<int, 3> sizes = name == "square4" ? std::array<int, 3>{l, l, 1}
                                     : name == "chain2" ? std::array<int, 3>{l, 1, 1}
                                                        : std::array<int, 3>{l, l, l};
    lattice.emplace(sizes, offsets, units::to_kelvin(*c.opt.coupling, unit), c.opt.m_eff.value_or(1.0));
  }
  const GridSpec g = grid(c, "T", {0.05, 1.0, 40, false});
  McOptions mo;
  mo.sweeps = static_cast<std::size_t>(c.opt.sweeps.value_or(20000));
  mo.burn_in = static_cast<std::size_t>(c.opt.burn_in.value_or(5000));
  if (mo.burn_in >= mo.sweeps) throw ConfigError("--burn-in must be smaller than --sweeps");
  mo.seed = c.seed();
  const McResult result = metropolis_run(*lattice, g.temperatures(), mo);
  emit(c, "mc.csv", io::mc_result_to_csv(result));
  const TnEstimate tn = estimate_tn(result);
  *c.out << "T_N_K = " << fmt(tn.temperature, "%.4f") << " +- " << fmt(tn.error, "%.2g")
         << (tn.inconclusive ? " (inconclusive: peak at grid edge)" : "") << "\n";
}

void cmd_cluster(Context& c) {
  ClusterModel model;
  if (c.cfg.cluster_json && !c.opt.coupling) {
    model = io::parse_cluster(*c.cfg.cluster_json);
  } else {
    SpinSystem site = resolve_system(c).system;
    if (c.opt.gap_zero) site.E = 0.0;
    BondTopology topo = BondTopology::kStarRing;
    const std::string t = c.opt.topology.value_or("star_ring");
    if (t == "star") {
      topo = BondTopology::kStar;
    } else if (t != "star_ring") {
      throw ConfigError("--topology must be star or star_ring");
    }
    model = star_cluster(site, c.opt.coupling.value_or(-0.0504), c.opt.neighbors.value_or(6), topo);
  }
  if (c.opt.gap_zero && c.cfg.cluster_json && !c.opt.coupling) {
    for (SpinSystem& s : model.sites) s.E = 0.0;
  }
  model.validate();
  const GridSpec g = grid(c, "T", {0.005, 2.0, 200, true});
  const LevelSet levels = cluster_levels(model);
  const ThermoCurve curve = cluster_specific_heat(levels, model.sites.size(), g.temperatures());
  emit(c, "cluster.csv", io::curve_to_csv(curve));
  io::CsvTable lv;
  lv.header = {"index", "E_K"};
  for (Eigen::Index k = 0; k < std::min<Eigen::Index>(64, levels.energies.size()); ++k) {
    lv.rows.push_back({static_cast<double>(k), levels.energies(k)});
  }
  emit(c, "cluster_levels.csv", io::format_csv(lv));
  double cmax = 0.0;
  double tmax = 0.0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (curve.x[i] < 0.5 && curve.values[i] > cmax) {
      cmax = curve.values[i];
      tmax = curve.x[i];
    }
  }
  *c.out << "dimension = " << model.dimension() << "\n"
         << "ground_degeneracy = " << levels.degeneracies().front() << "\n"
         << "max c/R below 0.5 K = " << fmt(cmax, "%.5f") << " at T = " << fmt(tmax) << " K\n";
}

json cole_cole_json(const ColeColeFit& f) {
  json j{{"chi_T", f.params.chi_t},
         {"chi_S", f.params.chi_s},
         {"tau_s", f.params.tau},
         {"beta", f.params.beta},
         {"ssr", f.ssr},
         {"status", to_string(f.status)},
         {"tau_identifiable", f.tau_identifiable},
         {"peak_bracketed", f.peak_bracketed},
         {"warnings", f.warnings}};
  json cov = json::array();
  for (int r = 0; r < 4; ++r) cov.push_back({f.covariance(r, 0), f.covariance(r, 1), f.covariance(r, 2), f.covariance(r, 3)});
  j["covariance"] = cov;
  if (f.reduced_chi2) j["reduced_chi2"] = *f.reduced_chi2;
  return j;
}

json t1_json(const T1Fit& f) {
  json j{{"A_dir", f.model.a_direct},
         {"A_Raman", f.model.a_raman},
         {"A_dir_uncertainty", std::sqrt(std::max(0.0, f.covariance(0, 0)))},
         {"A_Raman_uncertainty", std::sqrt(std::max(0.0, f.covariance(1, 1)))},
         {"ssr", f.ssr},
         {"warnings", f.warnings}};
  if (f.reduced_chi2) j["reduced_chi2"] = *f.reduced_chi2;
  return j;
}

std::optional<std::filesystem::path> data_path(const Context& c) {
  if (c.opt.data) {
    if (!std::filesystem::exists(*c.opt.data)) throw ConfigError("data file does not exist: " + *c.opt.data);
    return std::filesystem::path(*c.opt.data);
  }
  if (!c.cfg.data.empty()) return c.cfg.data.front();
  return std::nullopt;
}

void cmd_relax(Context& c) {
  if (const auto path = data_path(c)) {
    const io::CsvTable table = io::read_csv(*path);
    if (table.column("f_Hz") >= 0) {
      const ColeColeFit f = cole_cole_fit(io::ac_points_from_csv(table), {});
      emit(c, "relax_fit.json", cole_cole_json(f).dump(2) + "\n");
      *c.out << "tau_s = " << fmt(f.params.tau) << ", beta = " << fmt(f.params.beta, "%.4f") << "\n";
      for (const std::string& w : f.warnings) *c.out << "warning: " << w << "\n";
    } else if (table.column("T1_s") >= 0) {
      const T1Fit f = t1_fit(io::t1_points_from_csv(table));
      emit(c, "relax_fit.json", t1_json(f).dump(2) + "\n");
      *c.out << "A_dir = " << fmt(f.model.a_direct) << " 1/(s K), A_Raman = " << fmt(f.model.a_raman) << " 1/(s K^4)\n";
      for (const std::string& w : f.warnings) *c.out << "warning: " << w << "\n";
    } else {
      throw ConfigError("relax data need columns f_Hz,chi_re,chi_im or T_K,T1_s");
    }
    return;
  }
  if (!c.opt.a_dir && !c.opt.a_raman) throw ConfigError("relax needs --data, or --adir/--araman for a T1 curve");
  const T1Model model{c.opt.a_dir.value_or(0.0), c.opt.a_raman.value_or(0.0)};
  if (model.a_direct < 0.0 || model.a_raman < 0.0) throw ConfigError("--adir and --araman must be >= 0");
  const GridSpec g = grid(c, "T", {1.0, 10.0, 46, false});
  io::CsvTable t;
  t.header = {"T_K", "T1_s"};
  for (double temp : g.values()) t.rows.push_back({temp, t1_eval(model, temp).seconds});
  emit(c, "t1.csv", io::format_csv(t));
  *c.out << "T1(" << fmt(g.values().front()) << " K) = " << fmt(t.rows.front()[1]) << " s\n";
}

void reject_unknown(const json& j, std::initializer_list<std::string_view> allowed, const std::string& what) {
  for (const auto& item : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      throw ConfigError("unknown key '" + item.key() + "' in " + what);
    }
  }
}

double num(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) throw ConfigError(std::string("'") + key + "' must be a number");
  return j[key].get<double>();
}

void cmd_fit(Context& c) {
  json spec = json::object();
  if (c.cfg.fit_json) spec = json::parse(*c.cfg.fit_json);
  if (!spec.is_object()) throw ConfigError("fit must be a JSON object");
  reject_unknown(spec, {"model", "options"}, "fit");
  const json options = spec.value("options", json::object());
  if (!options.is_object()) throw ConfigError("fit options must be an object");
  const std::string model = c.opt.model ? *c.opt.model : spec.value("model", std::string());
  if (model.empty()) throw ConfigError("fit needs --model (zfs, angle, chiT, cole-cole, t1)");
  const auto path = data_path(c);
  if (!path) throw ConfigError("fit needs --data");
  const io::CsvTable table = io::read_csv(*path);
  const int starts = static_cast<int>(num(options, "starts", 16));
  const std::uint64_t seed = c.seed();

  json report;
  std::vector<double> residuals;
  if (model == "zfs") {
    reject_unknown(options, {"starts", "g", "tip", "d_max_cm", "quality_threshold", "n_points"}, "zfs options");
    const Dataset data = io::dataset_from_csv(table, ResponseKind::kMagnetization);
    ZfsFitOptions zo;
    zo.g = c.opt.g.value_or(num(options, "g", zo.g));
    zo.tip = c.opt.tip.value_or(num(options, "tip", zo.tip));
    zo.d_max_cm = num(options, "d_max_cm", zo.d_max_cm);
    zo.quality_threshold = num(options, "quality_threshold", zo.quality_threshold);
    zo.powder.n_points = static_cast<int>(num(options, "n_points", zo.powder.n_points));
    zo.starts_per_sign = std::max(1, starts / 2);
    zo.seed = seed;
    zo.threads = c.threads;
    const ZfsFitReport r = fit_zfs_powder_magnetization(data, zo);
    auto branch = [](const ZfsBranch& b) {
      return json{{"D_cm", b.D_cm},          {"E_cm", b.E_cm},
                  {"D_uncertainty", b.D_uncertainty}, {"E_uncertainty", b.E_uncertainty},
                  {"ssr", b.ssr},            {"relative_rms", b.relative_rms},
                  {"at_boundary", b.at_boundary}};
    };
    report = {{"model", "zfs"},
              {"negative_D", branch(r.negative)},
              {"positive_D", branch(r.positive)},
              {"sign_ambiguous", r.sign_ambiguous},
              {"warnings", r.warnings},
              {"combined", json::parse(io::fit_result_to_json(r.combined))}};
    residuals = r.combined.residuals;
    *c.out << "D<0 branch: D = " << fmt(r.negative.D_cm, "%.4f") << " cm-1, E = " << fmt(r.negative.E_cm, "%.4f")
           << " cm-1, ssr = " << fmt(r.negative.ssr) << "\n"
           << "D>0 branch: D = " << fmt(r.positive.D_cm, "%.4f") << " cm-1, E = " << fmt(r.positive.E_cm, "%.4f")
           << " cm-1, ssr = " << fmt(r.positive.ssr) << "\n";
    if (r.sign_ambiguous) *c.out << "sign of D not determined by these data\n";
  } else if (model == "angle") {
    reject_unknown(options, {"starts", "angle_init_deg", "fit_zfs", "d_lower_cm", "d_upper_cm", "e_max_cm"},
                   "angle options");
    const Dataset data = io::dataset_from_csv(table, ResponseKind::kSpecificHeat);
    AxisAngleFitOptions ao;
    ao.starts = starts;
    ao.seed = seed;
    ao.threads = c.threads;
    ao.angle_init_deg = num(options, "angle_init_deg", ao.angle_init_deg);
    ao.fit_zfs = options.value("fit_zfs", false);
    ao.d_lower_cm = num(options, "d_lower_cm", ao.d_lower_cm);
    ao.d_upper_cm = num(options, "d_upper_cm", ao.d_upper_cm);
    ao.e_max_cm = num(options, "e_max_cm", ao.e_max_cm);
    const AxisAngleFit r = fit_axis_angle_from_heatcap(data, resolve_system(c).system, ao);
    report = json::parse(io::fit_result_to_json(r.fit));
    report["model"] = "angle";
    report["angle_deg"] = r.angle_deg;
    report["angle_identifiable"] = r.angle_identifiable;
    report["warnings"] = r.warnings;
    residuals = r.fit.residuals;
    *c.out << "angle_deg = " << fmt(r.angle_deg, "%.3f") << " +- " << fmt(r.angle_uncertainty_deg, "%.2g") << "\n";
  } else if (model == "chiT") {
    reject_unknown(options, {"starts", "fit_g", "fit_tip", "tip"}, "chiT options");
    const Dataset data = io::dataset_from_csv(table, ResponseKind::kChiT);
    ChiTFitOptions co;
    co.starts = starts;
    co.seed = seed;
    co.fit_g = options.value("fit_g", true);
    co.fit_tip = options.value("fit_tip", false);
    co.tip = c.opt.tip.value_or(num(options, "tip", co.tip));
    const ChiTFit r = fit_chi_t(data, resolve_system(c).system, co);
    report = json::parse(io::fit_result_to_json(r.fit));
    report["model"] = "chiT";
    residuals = r.fit.residuals;
    *c.out << "g = " << fmt(r.g, "%.4f") << ", TIP = " << fmt(r.tip) << " cm3/mol\n";
  } else if (model == "cole-cole") {
    reject_unknown(options, {"starts", "beta_lower", "beta_upper", "beta_init"}, "cole-cole options");
    ColeColeFitOptions co;
    co.starts = starts;
    co.seed = seed;
    co.beta_lower = num(options, "beta_lower", co.beta_lower);
    co.beta_upper = num(options, "beta_upper", co.beta_upper);
    co.beta_init = num(options, "beta_init", co.beta_init);
    const ColeColeFit r = cole_cole_fit(io::ac_points_from_csv(table), co);
    report = cole_cole_json(r);
    report["model"] = "cole-cole";
    *c.out << "tau_s = " << fmt(r.params.tau) << ", beta = " << fmt(r.params.beta, "%.4f") << "\n";
  } else if (model == "t1") {
    reject_unknown(options, {}, "t1 options");
    const T1Fit r = t1_fit(io::t1_points_from_csv(table));
    report = t1_json(r);
    report["model"] = "t1";
    *c.out << "A_dir = " << fmt(r.model.a_direct) << ", A_Raman = " << fmt(r.model.a_raman) << "\n";
  } else {
    throw ConfigError("unknown fit model '" + model + "' (zfs, angle, chiT, cole-cole, t1)");
  }
  emit(c, "fit.json", report.dump(2) + "\n");
  if (!residuals.empty()) {
    io::CsvTable t;
    t.header = {"index", "residual"};
    for (std::size_t i = 0; i < residuals.size(); ++i) t.rows.push_back({static_cast<double>(i), residuals[i]});
    c.files.push_back({"fit_residuals.csv", io::format_csv(t)});
  }
}

void cmd_rabi(Context& c) {
  if (!c.opt.bz) throw ConfigError("rabi needs --bz (tesla)");
  const RabiFrequency r = rabi_frequency(c.opt.g.value_or(2.0), *c.opt.bz, c.opt.spin.value_or(1.0));
  *c.out << "rabi_hz = " << fmt(r.hertz, "%.4e") << "\n"
         << "rabi_rad_per_s = " << fmt(r.angular, "%.4e") << "\n"
         << "period_s = " << fmt(r.period(), "%.4e") << "\n";
}

void cmd_reproduce(Context& c) {
  const std::string target = c.opt.target ? *c.opt.target : c.cfg.target.value_or("");
  if (!is_reproduce_target(target)) {
    throw ConfigError("reproduce needs a target: fig2, fig3, fig4, fig8, fig10, figS6");
  }
  for (OutputFile& f : reproduce(target, c.threads)) {
    *c.out << "wrote " << f.name << "\n";
    c.files.push_back(std::move(f));
  }
}

void add_common(CLI::App* app, Options& o) {
  app->add_option("--preset", o.preset, "complex1, complex2, complex4");
  app->add_option("--system", o.system, "spin-system JSON file")->check(CLI::ExistingFile);
  app->add_option("--outdir", o.outdir, "output directory (created if missing)");
  app->add_option("--output", o.output, "output file name relative to --outdir");
  app->add_option("--seed", o.seed, "random seed");
}

void add_tgrid(CLI::App* app, Options& o) {
  app->add_option("--tmin", o.tmin, "lowest temperature (K)");
  app->add_option("--tmax", o.tmax, "highest temperature (K)");
  app->add_option("--nt", o.nt, "number of temperatures");
  app->add_option("--scale", o.scale, "temperature spacing: log or linear");
}

void add_hgrid(CLI::App* app, Options& o) {
  app->add_option("--hmin", o.hmin, "lowest field (T)");
  app->add_option("--hmax", o.hmax, "highest field (T)");
  app->add_option("--nh", o.nh, "number of fields");
}

void add_direction(CLI::App* app, Options& o) {
  app->add_option("--theta", o.theta, "field polar angle from molecular z (deg)");
  app->add_option("--phi", o.phi, "field azimuth from molecular x (deg)");
}

void add_scheme(CLI::App* app, Options& o) {
  app->add_option("--scheme", o.scheme, "single, powder, cone, crystal, mix");
  app->add_option("--aperture", o.aperture, "cone aperture (deg)");
  app->add_option("--npoints", o.npoints, "orientations for powder-like schemes");
  app->add_option("--fraction", o.fraction, "aligned fraction for --scheme mix");
  app->add_option("--easy-axis", o.easy_axis, "easy-axis polar angle for --scheme crystal (deg)");
}

void write_outputs(const Context& c) {
  if (c.files.empty()) return;
  std::filesystem::create_directories(c.outdir);
  for (const OutputFile& f : c.files) io::write_file_atomic(c.outdir / f.name, f.content);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Spin clock-transition simulation and fitting toolkit", "spinclock"};
  app.add_option("--config", o.config, "RunConfig JSON file")->check(CLI::ExistingFile);
  app.require_subcommand(0, 1);
  app.fallthrough();

  std::map<std::string, CLI::App*> sub;
  sub["levels"] = app.add_subcommand("levels", "energy levels and gaps");
  sub["heatcap"] = app.add_subcommand("heatcap", "specific heat c/R versus T");
  sub["magnetize"] = app.add_subcommand("magnetize", "magnetization isotherms");
  sub["suscept"] = app.add_subcommand("suscept", "chi*T versus T, or chi_T and chi_S versus H");
  sub["powder"] = app.add_subcommand("powder", "orientation-averaged observables");
  sub["mc"] = app.add_subcommand("mc", "Metropolis Monte Carlo of the Ising lattice");
  sub["cluster"] = app.add_subcommand("cluster", "exact diagonalization of a coupled-spin cluster");
  sub["relax"] = app.add_subcommand("relax", "ac susceptibility and T1 relaxation");
  sub["fit"] = app.add_subcommand("fit", "model fits to CSV data");
  sub["rabi"] = app.add_subcommand("rabi", "clock-transition Rabi frequency");
  sub["reproduce"] = app.add_subcommand("reproduce", "simulated figure data from presets");
  for (auto& [name, s] : sub) {
    if (name != "rabi") add_common(s, o);
  }
  for (const char* n : {"levels", "heatcap", "magnetize", "suscept", "powder"}) {
    sub[n]->add_option("--field", o.field, "field magnitude (T)");
  }
  add_direction(sub["levels"], o);
  add_hgrid(sub["levels"], o);
  for (const char* n : {"heatcap", "powder", "suscept", "mc", "cluster", "relax", "magnetize"}) add_tgrid(sub[n], o);
  for (const char* n : {"heatcap", "magnetize", "powder"}) add_scheme(sub[n], o);
  sub["heatcap"]->add_option("--theta", o.theta, "field polar angle for --scheme single (deg)");
  sub["heatcap"]->add_option("--phi", o.phi, "field azimuth for --scheme single (deg)");
  sub["magnetize"]->add_option("--theta", o.theta, "field polar angle for --scheme single (deg)");
  add_hgrid(sub["magnetize"], o);
  sub["magnetize"]->add_option("--temperature", o.temperature, "temperature (K)");
  sub["suscept"]->add_option("--mode", o.mode, "chiT or field");
  sub["suscept"]->add_option("--tip", o.tip, "temperature-independent paramagnetism (cm3/mol)");
  sub["suscept"]->add_option("--temperature", o.temperature, "temperature for --mode field (K)");
  add_direction(sub["suscept"], o);
  add_hgrid(sub["suscept"], o);
  sub["powder"]->add_option("--observable", o.observable, "c, M or chi");
  sub["mc"]->add_option("--lattice", o.lattice, "fcc12, bipartite12, square4, chain2");
  sub["mc"]->add_option("-L,--L", o.size, "linear size");
  sub["mc"]->add_option("--J", o.coupling, "coupling J");
  sub["mc"]->add_option("--unit", o.unit, "unit of J: K, cm-1, GHz");
  sub["mc"]->add_option("--meff", o.m_eff, "effective Ising moment");
  sub["mc"]->add_option("--sweeps", o.sweeps, "sweeps per temperature including burn-in");
  sub["mc"]->add_option("--burn-in", o.burn_in, "burn-in sweeps");
  sub["cluster"]->add_option("--J", o.coupling, "Ising coupling (K)");
  sub["cluster"]->add_option("--neighbors", o.neighbors, "neighbors of the central site");
  sub["cluster"]->add_option("--topology", o.topology, "star or star_ring");
  sub["cluster"]->add_flag("--gap-zero", o.gap_zero, "set E = 0 on every site");
  sub["relax"]->add_option("--data", o.data, "ac (f_Hz,chi_re,chi_im) or T1 (T_K,T1_s) CSV");
  sub["relax"]->add_option("--adir", o.a_dir, "direct coefficient (1/(s K))");
  sub["relax"]->add_option("--araman", o.a_raman, "Raman coefficient (1/(s K^4))");
  sub["fit"]->add_option("--model", o.model, "zfs, angle, chiT, cole-cole, t1");
  sub["fit"]->add_option("--data", o.data, "data CSV");
  sub["fit"]->add_option("--g", o.g, "fixed g for zfs");
  sub["fit"]->add_option("--tip", o.tip, "TIP (cm3/mol)");
  sub["rabi"]->add_option("--g", o.g, "g factor");
  sub["rabi"]->add_option("--bz", o.bz, "microwave field along z (T)");
  sub["rabi"]->add_option("--S", o.spin, "spin");
  sub["reproduce"]->add_option("target", o.target, "fig2, fig3, fig4, fig8, fig10, figS6");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  Context c;
  c.out = &out;
  try {
    c.threads = thread_cap();
    if (o.config) {
      const std::filesystem::path path(*o.config);
      c.cfg = parse_run_config(io::read_text(path), path.parent_path());
    }
    std::string command;
    for (auto& [name, s] : sub) {
      if (s->parsed()) command = name;
    }
    if (command.empty()) command = c.cfg.command;
    if (command.empty()) throw ConfigError("no command given; use one of the subcommands (see --help)");
    if (!c.cfg.command.empty() && c.cfg.command != command) {
      throw ConfigError("config command '" + c.cfg.command + "' does not match '" + command + "'");
    }
    if (std::find(kCommands.begin(), kCommands.end(), command) == kCommands.end()) {
      throw ConfigError("unknown command '" + command + "'");
    }
    c.opt = o;
    c.outdir = o.outdir ? std::filesystem::path(*o.outdir) : c.cfg.outdir.value_or(".");
    static const std::map<std::string, std::function<void(Context&)>> handlers = {
        {"levels", cmd_levels},   {"heatcap", cmd_heatcap}, {"magnetize", cmd_magnetize},
        {"suscept", cmd_suscept}, {"powder", cmd_powder},   {"mc", cmd_mc},
        {"cluster", cmd_cluster}, {"relax", cmd_relax},     {"fit", cmd_fit},
        {"rabi", cmd_rabi},       {"reproduce", cmd_reproduce}};
    handlers.at(command)(c);
    write_outputs(c);
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const json::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InvalidSpinError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const UnsupportedFormulaError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace spinclock::cli
