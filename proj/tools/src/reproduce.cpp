#include "reproduce.hpp"

#include <algorithm>
#include <cmath>

#include "spinclock/cluster.hpp"
#include "spinclock/error.hpp"
#include "spinclock/io.hpp"
#include "spinclock/optimize.hpp"
#include "spinclock/orientation.hpp"
#include "spinclock/presets.hpp"
#include "spinclock/thermo.hpp"
#include "spinclock/units.hpp"

namespace spinclock::cli {

namespace {

constexpr double kDebyeTheta = 72.0;
constexpr double kClusterCoupling = -0.0504;  // K

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(a + (b - a) * i / (n - 1));
  return v;
}

OutputFile fig2() {
  const Preset p = load_preset("complex1");
  const TemperatureGrid grid = TemperatureGrid::logarithmic(0.35, 20.0, 200);
  const ThermoCurve magnetic = averaged_observable(p.system, RandomPowder{350, true},
                                                   ObservableKind::kSpecificHeat, grid, Vec3::Zero());
  io::CsvTable t;
  t.metadata.push_back(" complex1 powder c/R at zero field; Debye lattice per mole of atoms, theta_D=72 K");
  t.header = {"T_K", "c_magnetic", "c_debye_per_atom"};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    t.rows.push_back({grid[i], magnetic.values[i], debye_specific_heat(kDebyeTheta, grid[i])});
  }
  return {"fig2_complex1_heatcap.csv", io::format_csv(t)};
}

std::vector<OutputFile> fig3(unsigned threads) {
  const Preset p = load_preset("complex1");
  const std::vector<double> fields = linspace(0.0, 3.0, 31);
  std::vector<std::vector<double>> rows(fields.size());
  const auto powder = generate_orientations(RandomPowder{350, true});
  parallel_for(fields.size(), threads, [&](std::size_t i) {
    const double h = fields[i];
    const OrientationEnsemble aligned(p.system, {Orientation{}}, Vec3(0, 0, h));
    const OrientationEnsemble averaged(p.system, powder, Vec3(0, 0, h));
    const double gap = zeeman_gap(p.system, h);
    const LevelSet levels = aligned.levels(0);
    rows[i] = {h, aligned.specific_heat_peak(0.05, 50.0).temperature, t0_from_gap(gap),
               averaged.specific_heat_peak(0.05, 50.0).temperature, levels.energies(1), gap};
  });
  io::CsvTable t0;
  t0.metadata.push_back(" complex1 T0(H) for the field along z, closed-form gap, and random powder");
  t0.header = {"H_T", "T0_aligned_K", "T0_closed_form_K", "T0_powder_K", "gap_aligned_K", "gap_closed_form_K"};
  t0.rows = rows;

  const TemperatureGrid grid = TemperatureGrid::logarithmic(0.35, 20.0, 200);
  std::vector<ThermoCurve> curves;
  for (double h : {0.0, 1.0, 2.0, 3.0}) {
    curves.push_back(averaged_observable(p.system, SingleAngle{}, ObservableKind::kSpecificHeat, grid, Vec3(0, 0, h)));
  }
  return {{"fig3_t0_vs_field.csv", io::format_csv(t0)}, {"fig3_heatcap.csv", io::curves_to_csv(curves, "T_K")}};
}

OutputFile fig4() {
  const Preset p = load_preset("complex2");
  SpinSystem electronic = p.system;
  electronic.hyperfine.reset();
  const TemperatureGrid grid = TemperatureGrid::logarithmic(0.03, 20.0, 220);
  const LevelSet levels = solve(electronic, FieldVector(), false);
  const ThermoCurve nuclear = hyperfine_specific_heat_bound(p.system.hyperfine->coupling, p.system.spin,
                                                            p.system.hyperfine->nuclear_spin, grid);
  io::CsvTable t;
  t.metadata.push_back(" complex2 zero-field c/R: electronic ZFS, hyperfine bound (A=14 mK, I=7/2), Debye per atom");
  t.header = {"T_K", "c_electronic", "c_hyperfine", "c_debye_per_atom"};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    t.rows.push_back({grid[i], specific_heat(levels, grid[i]), nuclear.values[i], debye_specific_heat(kDebyeTheta, grid[i])});
  }
  return {"fig4_complex2_heatcap.csv", io::format_csv(t)};
}

OutputFile fig8() {
  const Preset p = load_preset("complex4");
  const double theta = units::degrees_to_radians(*p.easy_axis_deg);
  const TemperatureGrid grid = TemperatureGrid::logarithmic(0.1, 10.0, 200);
  std::vector<ThermoCurve> curves;
  for (double h : {0.0, 0.025, 0.05, 0.075, 0.1, 0.125, 0.25, 0.5, 1.0, 2.0}) {
    curves.push_back(averaged_observable(p.system, SingleAngle{theta, 0.0}, ObservableKind::kSpecificHeat, grid,
                                         Vec3(0, 0, h)));
  }
  return {"fig8_complex4_heatcap.csv", io::curves_to_csv(curves, "T_K")};
}

OutputFile fig10() {
  const Preset p = load_preset("complex4");
  const double theta = units::degrees_to_radians(*p.easy_axis_deg);
  io::CsvTable t;
  t.metadata.push_back(" complex4 effective gap k_B T0 / 0.4168 with the field at 52.6 deg from z");
  t.header = {"H_T", "gap_from_peak_K", "gap_from_peak_GHz", "gap_lowest_pair_K", "gap_closed_form_K"};
  for (double h : linspace(0.0, 2.0, 41)) {
    const OrientationEnsemble e(p.system, {Orientation{rotation_to(theta, 0.0), 1.0}}, Vec3(0, 0, h));
    const double gap = e.effective_gap(0.02, 30.0);
    t.rows.push_back({h, gap, units::kelvin_to_ghz(gap), e.levels(0).energies(1),
                      zeeman_gap(p.system, h * std::cos(theta))});
  }
  return {"fig10_complex4_gap.csv", io::format_csv(t)};
}

std::vector<OutputFile> figs6() {
  const Preset p = load_preset("complex1");
  SpinSystem gapless = p.system;
  gapless.E = 0.0;
  const TemperatureGrid grid = TemperatureGrid::logarithmic(0.005, 2.0, 200);
  const ClusterModel with_gap = star_cluster(p.system, kClusterCoupling);
  const ClusterModel no_gap = star_cluster(gapless, kClusterCoupling);
  const LevelSet l1 = cluster_levels(with_gap);
  const LevelSet l0 = cluster_levels(no_gap);
  io::CsvTable t;
  t.metadata.push_back(" 7-site star+ring Ising cluster, J=-0.0504 K, c/R per site; Delta=2.9 cm-1 vs Delta=0");
  t.header = {"T_K", "c_gap", "c_no_gap"};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    t.rows.push_back({grid[i], specific_heat(l1, grid[i]) / 7.0, specific_heat(l0, grid[i]) / 7.0});
  }
  io::CsvTable lv;
  lv.header = {"index", "E_gap_K", "E_no_gap_K"};
  const Eigen::Index n = std::min<Eigen::Index>(64, l1.energies.size());
  for (Eigen::Index k = 0; k < n; ++k) lv.rows.push_back({static_cast<double>(k), l1.energies(k), l0.energies(k)});
  return {{"figS6_cluster_heatcap.csv", io::format_csv(t)}, {"figS6_cluster_levels.csv", io::format_csv(lv)}};
}

}  // namespace

std::vector<std::string> reproduce_targets() { return {"fig2", "fig3", "fig4", "fig8", "fig10", "figS6"}; }

bool is_reproduce_target(const std::string& target) {
  const auto t = reproduce_targets();
  return std::find(t.begin(), t.end(), target) != t.end();
}

std::vector<OutputFile> reproduce(const std::string& target, unsigned threads) {
  if (target == "fig2") return {fig2()};
  if (target == "fig3") return fig3(threads);
  if (target == "fig4") return {fig4()};
  if (target == "fig8") return {fig8()};
  if (target == "fig10") return {fig10()};
  if (target == "figS6") return figs6();
  throw ConfigError("unknown reproduce target '" + target + "' (fig2, fig3, fig4, fig8, fig10, figS6)");
}

}  // namespace spinclock::cli
