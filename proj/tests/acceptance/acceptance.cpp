// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.
// Tolerances are fixed here.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "spinclock/cluster.hpp"
#include "spinclock/fitting.hpp"
#include "spinclock/lattice_mc.hpp"
#include "spinclock/optimize.hpp"
#include "spinclock/orientation.hpp"
#include "spinclock/presets.hpp"
#include "spinclock/relaxation.hpp"
#include "spinclock/thermo.hpp"
#include "spinclock/units.hpp"

using namespace spinclock;

namespace {

// ---- pinned tolerances ------------------------------------------------------

constexpr double kT0Low = 1.74;
constexpr double kT0High = 1.76;
constexpr double kT0RuntimeS = 1.0;
constexpr double kRootValue = 0.41678;
constexpr double kRootTol = 1e-5;
constexpr double kParabolaTol = 0.02;
constexpr double kKramersSplitting = 1e-10;
constexpr double kHyperfinePeakMaxK = 0.1;
constexpr double kHyperfineAt03Max = 0.1;
constexpr double kTnLow = 0.15;
constexpr double kTnHigh = 0.30;
constexpr double kOnsagerTol = 0.03;
constexpr double kMcRuntimeS = 300.0;
constexpr double kGappedClusterMax = 0.02;
constexpr double kGaplessClusterMin = 0.05;
constexpr double kClusterRuntimeS = 60.0;
constexpr double kChiT300 = 1.19;
constexpr double kChiT300Tol = 0.02;
constexpr double kChiT2 = 0.99;
constexpr double kChiT2Tol = 0.10;
constexpr double kZfsTol = 0.05;
constexpr double kAngle = 52.6;
constexpr double kAngleTolDeg = 1.0;
constexpr double kPositiveRejection = 10.0;
constexpr double kColeColeTol = 0.01;
constexpr double kT1FitTol = 0.02;
constexpr double kT1Target = 100e-6;
constexpr double kT1Factor = 10.0;
constexpr double kHermiticity = 1e-12;
constexpr double kHellmannFeynman = 1e-6;
constexpr double kEntropyTol = 0.01;
constexpr double kChi2Critical = 11.345;  // 3 dof, 99%

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [x]");
  }
};

std::string f(const char* fmt, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, fmt, a);
  return buf;
}

std::string f2(const char* fmt, double a, double b) {
  char buf[128];
  std::snprintf(buf, sizeof buf, fmt, a, b);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Maximum of c/R for the two-level Schottky form sits at y tanh y = 1, y = gap / (2 T).
double bisect_schottky_root() {
  double lo = 0.5;
  double hi = 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (mid * std::tanh(mid) < 1.0 ? lo : hi) = mid;
  }
  return 0.5 / (0.5 * (lo + hi));
}

double closed_form_gap(double delta, double g_z, double spin, double h) {
  const double zeeman = 2.0 * g_z * units::kBohrMagnetonKelvinPerTesla * spin * h;
  return std::sqrt(zeeman * zeeman + delta * delta);
}

const SpinSystem& alternate(const Preset& p, const std::string& label) {
  for (const AlternateSystem& a : p.alternates) {
    if (a.label == label) return a.system;
  }
  throw std::runtime_error("preset " + p.name + " has no alternate " + label);
}

LevelSet levels_of(std::vector<double> e) {
  LevelSet l;
  l.energies = Eigen::Map<Eigen::VectorXd>(e.data(), static_cast<Eigen::Index>(e.size()));
  return l;
}

double max_on(const ThermoCurve& c, double t_max) {
  double m = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c.x[i] < t_max) m = std::max(m, c.values[i]);
  }
  return m;
}

// ---- criteria ------------------------------------------------------------------

Verdict clock_gap_schottky() {
  Verdict v;
  const auto start = std::chrono::steady_clock::now();
  const Preset p = load_preset("complex1");
  const Peak peak = specific_heat_peak(solve(p.system, FieldVector(), false), 0.35, 20.0);
  const double elapsed = seconds_since(start);
  v.require(peak.temperature >= kT0Low && peak.temperature <= kT0High && !peak.at_boundary,
            f("T0 = %.4f K", peak.temperature));
  v.require(std::abs(peak.temperature / 1.75 - 1.0) <= 0.01, f("vs 1.75 K: %+.2f%%", 100.0 * (peak.temperature / 1.75 - 1.0)));
  v.require(elapsed < kT0RuntimeS, f("%.3f s", elapsed));
  return v;
}

Verdict root_constant() {
  Verdict v;
  const double lib = t0_from_gap(1.0);
  const double oracle = bisect_schottky_root();
  v.require(std::abs(lib - kRootValue) <= kRootTol, f("kT0/Delta = %.7f", lib));
  v.require(std::abs(lib - oracle) <= kRootTol, f("bisection %.7f", oracle));
  return v;
}

Verdict field_parabola() {
  Verdict v;
  const Preset p = load_preset("complex1");
  const double delta = 2.0 * std::abs(p.system.E);
  double worst = 0.0;
  for (double h = 0.0; h <= 3.0001; h += 0.25) {
    const double t0 = specific_heat_peak(solve(p.system, FieldVector::along_z(h), false), 0.05, 50.0).temperature;
    const double expected = bisect_schottky_root() * closed_form_gap(delta, p.system.g[2], p.system.spin, h);
    worst = std::max(worst, std::abs(t0 / expected - 1.0));
  }
  v.require(worst <= kParabolaTol, f("worst T0(H) deviation %.3f%% over 0-3 T", 100.0 * worst));

  // Cone apertures from aligned to hemisphere at 1 T: T0 moves monotonically toward the powder value.
  const Vec3 field(0.0, 0.0, 1.0);
  const double aligned = OrientationEnsemble(p.system, generate_orientations(SingleAngle{}), field).specific_heat_peak(0.05, 50.0).temperature;
  const double powder = OrientationEnsemble(p.system, generate_orientations(RandomPowder{}), field).specific_heat_peak(0.05, 50.0).temperature;
  std::vector<double> t0s;
  for (double a = 0.0; a <= 90.0001; a += 15.0) {
    const OrientationEnsemble e(p.system, generate_orientations(Cone{units::degrees_to_radians(a), 350}), field);
    t0s.push_back(e.specific_heat_peak(0.05, 50.0).temperature);
  }
  const double sign = powder < aligned ? -1.0 : 1.0;
  bool monotone = true;
  for (std::size_t k = 1; k < t0s.size(); ++k) monotone = monotone && sign * (t0s[k] - t0s[k - 1]) >= -1e-9;
  v.require(monotone, f2("cone T0 %.4f -> %.4f K monotone", t0s.front(), t0s.back()));
  v.require(std::abs(t0s.front() / aligned - 1.0) < 1e-9, f("aligned %.4f K", aligned));
  v.require(std::abs(t0s.back() / powder - 1.0) < 0.02, f("powder %.4f K", powder));
  return v;
}

Verdict kramers_contrast() {
  Verdict v;
  const Preset p = load_preset("complex2");
  SpinSystem electronic = p.system;
  electronic.hyperfine.reset();
  const LevelSet l = solve(electronic, FieldVector(), false);
  const double split = std::max(std::abs(l.energies(1) - l.energies(0)), std::abs(l.energies(3) - l.energies(2)));
  v.require(split < kKramersSplitting, f("doublet splitting %.1e K", split));
  const double gap = l.energies(2) - l.energies(0);
  v.require(std::abs(gap - 2.0 * std::abs(electronic.D)) < 1e-9 * std::abs(electronic.D),
            f("gap %.4f cm-1 = 2|D|", units::kelvin_to_wavenumber(gap)));

  const TemperatureGrid grid = TemperatureGrid::logarithmic(0.002, 2.0, 600);
  const ThermoCurve hf = hyperfine_specific_heat_bound(p.system.hyperfine->coupling, p.system.spin,
                                                       p.system.hyperfine->nuclear_spin, grid);
  const auto it = std::max_element(hf.values.begin(), hf.values.end());
  const double t_peak = hf.x[static_cast<std::size_t>(it - hf.values.begin())];
  v.require(t_peak < kHyperfinePeakMaxK, f("hyperfine peak at %.4f K", t_peak));
  const ThermoCurve at03 = hyperfine_specific_heat_bound(p.system.hyperfine->coupling, p.system.spin,
                                                         p.system.hyperfine->nuclear_spin, TemperatureGrid({0.3}));
  v.require(at03.values[0] < kHyperfineAt03Max, f("c_hf(0.3 K) = %.4f vs 0.4 needed", at03.values[0]));
  return v;
}

double timed_tn(const IsingLattice& lattice, const TemperatureGrid& grid, const McOptions& opt, TnEstimate& out) {
  const auto start = std::chrono::steady_clock::now();
  out = estimate_tn(metropolis_run(lattice, grid, opt));
  return seconds_since(start);
}

Verdict monte_carlo_tn(std::string& note) {
  Verdict v;
  const double j = units::wavenumber_to_kelvin(-0.035);
  McOptions opt;
  opt.sweeps = 6000;
  opt.burn_in = 1500;
  opt.seed = 2022;
  // Grid wide enough to place the peak wherever it is, not only inside the target window.
  const TemperatureGrid grid = TemperatureGrid::linear(0.10, 2.0, 39);
  TnEstimate bip;
  const double t_bip = timed_tn(IsingLattice({10, 10, 10}, IsingLattice::bipartite12(), j, 1.5), grid, opt, bip);
  v.require(!bip.inconclusive && bip.temperature >= kTnLow && bip.temperature <= kTnHigh,
            f2("bipartite Z=12 T_N = %.3f +- %.3f K", bip.temperature, bip.error));
  v.require(t_bip < kMcRuntimeS, f("%.1f s", t_bip));

  TnEstimate fcc;
  const double t_fcc = timed_tn(IsingLattice({10, 10, 10}, IsingLattice::fcc12(), j, 1.5), grid, opt, fcc);
  note = f2("fcc Z=12 (frustrated) c peak at %.3f K, %.1f s", fcc.temperature, t_fcc);

  McOptions iopt;
  iopt.sweeps = 12000;
  iopt.burn_in = 2000;
  iopt.seed = 31;
  const double onsager = 2.0 / std::log(1.0 + std::sqrt(2.0));
  TnEstimate ising;
  const double t_ising =
      timed_tn(IsingLattice({32, 32, 1}, IsingLattice::square4(), 1.0, 1.0), TemperatureGrid::linear(2.0, 2.6, 13), iopt, ising);
  v.require(!ising.inconclusive && std::abs(ising.temperature / onsager - 1.0) <= kOnsagerTol,
            f2("2D Ising L=32 T_c = %.4f (Onsager %.4f)", ising.temperature, onsager));
  v.require(t_ising < kMcRuntimeS, f("%.1f s", t_ising));
  return v;
}

Verdict quantum_decoupling() {
  Verdict v;
  const Preset p = load_preset("complex1");
  SpinSystem gapless = p.system;
  gapless.E = 0.0;
  const double j = -0.0504;
  const TemperatureGrid grid = TemperatureGrid::logarithmic(0.005, 0.5, 200);

  const auto start = std::chrono::steady_clock::now();
  const ClusterModel with_gap = star_cluster(p.system, j);
  const LevelSet l1 = cluster_levels(with_gap);
  const double elapsed = seconds_since(start);
  const LevelSet l0 = cluster_levels(star_cluster(gapless, j));

  v.require(with_gap.dimension() == 2187, f("dim %.0f", static_cast<double>(with_gap.dimension())));
  v.require(l1.degeneracies().front() == 1, f("gapped ground degeneracy %.0f", l1.degeneracies().front()));
  const double c_gap = max_on(cluster_specific_heat(l1, 7, grid), 0.5);
  const double c_none = max_on(cluster_specific_heat(l0, 7, grid), 0.5);
  v.require(c_gap < kGappedClusterMax, f("gapped max c/R below 0.5 K = %.5f", c_gap));
  v.require(c_none > kGaplessClusterMin, f("gapless max c/R below 0.5 K = %.4f", c_none));
  v.require(elapsed < kClusterRuntimeS, f("diag %.2f s", elapsed));
  return v;
}

Verdict chi_t_with_tip() {
  Verdict v;
  const Preset p = load_preset("complex4");
  const SpinSystem& negative = alternate(p, "magnetometry_negative");
  const std::vector<DataPoint> pts{{300.0, 0.1, 0.0, 0.0, std::nullopt}, {2.0, 0.1, 0.0, 0.0, std::nullopt}};
  const auto chi = powder_chi_t(negative, p.tip, pts);
  v.require(std::abs(chi[0] - kChiT300) <= kChiT300Tol, f("chiT(300 K) = %.4f", chi[0]));
  v.require(chi[1] < chi[0], "chiT(2 K) below plateau");
  v.require(std::abs(chi[1] / kChiT2 - 1.0) <= kChiT2Tol, f("chiT(2 K) = %.4f", chi[1]));
  return v;
}

Dataset isotherms(const SpinSystem& s, double tip) {
  Dataset d;
  d.kind = ResponseKind::kMagnetization;
  for (double t : {2.0, 4.0, 6.0}) {
    for (double h = 0.25; h <= 5.0001; h += 0.25) d.points.push_back({t, h, 0.0, 0.0, std::nullopt});
  }
  const auto m = powder_magnetization(s, tip, d.points);
  for (std::size_t i = 0; i < m.size(); ++i) d.points[i].value = m[i];
  return d;
}

Verdict dual_minimum() {
  Verdict v;
  const Preset p = load_preset("complex4");
  const SpinSystem& truth = alternate(p, "magnetometry_negative");
  const ZfsFitReport r = fit_zfs_powder_magnetization(isotherms(truth, p.tip));
  const double d_true = units::kelvin_to_wavenumber(truth.D);
  v.require(std::abs(r.negative.D_cm / d_true - 1.0) <= kZfsTol, f("D<0 branch %.4f cm-1", r.negative.D_cm));
  v.require(r.positive.D_cm > 0.0 && !r.positive.at_boundary, f("D>0 local minimum %.4f cm-1", r.positive.D_cm));
  v.require(r.best().sign < 0, f2("ssr %.2e vs %.2e", r.negative.ssr, r.positive.ssr));
  return v;
}

Verdict angle_recovery() {
  Verdict v;
  const Preset p = load_preset("complex4");
  Dataset d;
  d.kind = ResponseKind::kSpecificHeat;
  for (double h : {0.0, 0.25, 0.5, 1.0, 2.0}) {
    for (double t = 0.15; t <= 6.0; t *= 1.25) d.points.push_back({t, h, kAngle, 0.0, std::nullopt});
  }
  const auto c = crystal_specific_heat(p.system, d.points);
  std::mt19937_64 rng(526);
  std::normal_distribution<double> noise(0.0, 0.01);
  for (std::size_t i = 0; i < c.size(); ++i) d.points[i].value = c[i] * (1.0 + noise(rng));

  AxisAngleFitOptions opt;
  opt.starts = 8;
  const AxisAngleFit fixed = fit_axis_angle_from_heatcap(d, p.system, opt);
  v.require(std::abs(fixed.angle_deg - kAngle) <= kAngleTolDeg, f("angle %.3f deg (1%% noise)", fixed.angle_deg));

  opt.fit_zfs = true;
  const AxisAngleFit neg = fit_axis_angle_from_heatcap(d, p.system, opt);
  opt.d_lower_cm = 0.01;
  opt.d_upper_cm = 10.0;
  SpinSystem positive_start = p.system;
  positive_start.D = std::abs(p.system.D);
  const AxisAngleFit pos = fit_axis_angle_from_heatcap(d, positive_start, opt);
  const double ratio = pos.fit.ssr / neg.fit.ssr;
  v.require(ratio > kPositiveRejection, f("positive-D residual ratio %.1f", ratio));
  return v;
}

std::vector<double> log_space(double lo, double hi, int n) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
  return out;
}

Verdict relaxation_round_trips() {
  Verdict v;
  const ColeColeParams truth{1.0, 0.2, 1e-4, 0.97};
  std::vector<AcPoint> ac;
  for (double w : log_space(10.0, 1e7, 20)) {
    const ComplexSusceptibility c = cole_cole_eval(truth, w);
    ac.push_back({w, c.re, c.im, std::nullopt});
  }
  const ColeColeFit cc = cole_cole_fit(ac);
  const double worst_cc = std::max({std::abs(cc.params.chi_t / truth.chi_t - 1.0), std::abs(cc.params.chi_s / truth.chi_s - 1.0),
                                    std::abs(cc.params.tau / truth.tau - 1.0), std::abs(cc.params.beta / truth.beta - 1.0)});
  v.require(worst_cc <= kColeColeTol, f("Cole-Cole worst %.2e", worst_cc));

  const T1Model model{10.0, 300.0};
  std::vector<T1Point> t1;
  for (double t = 2.0; t <= 6.0; t += 0.5) t1.push_back({t, 1.0 / (model.a_direct * t + model.a_raman * std::pow(t, 4)), std::nullopt});
  const T1Fit tf = t1_fit(t1);
  const double worst_t1 = std::max(std::abs(tf.model.a_direct / model.a_direct - 1.0), std::abs(tf.model.a_raman / model.a_raman - 1.0));
  v.require(worst_t1 <= kT1FitTol, f("T1 fit worst %.2e", worst_t1));

  const double t1_2k = t1_eval(model, 2.0).seconds;
  const bool raman_dominated = model.a_raman * 16.0 > 10.0 * model.a_direct * 2.0;
  v.require(raman_dominated && t1_2k > kT1Target / kT1Factor && t1_2k < kT1Target * kT1Factor,
            f("T1(2 K) = %.0f us", t1_2k * 1e6));
  return v;
}

SpinSystem random_system(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> twice(1, 5);
  SpinSystem s;
  s.spin = twice(rng) / 2.0;
  s.D = 20.0 * u(rng);
  s.E = 4.0 * u(rng);
  s.g = {2.0 + 0.3 * u(rng), 2.0 + 0.3 * u(rng), 2.0 + 0.3 * u(rng)};
  return s;
}

double entropy_integral(const LevelSet& l, double lo, double hi) {
  const double a = std::log(lo);
  const double b = std::log(hi);
  const int n = 20000;
  const double h = (b - a) / n;
  double sum = 0.0;
  for (int k = 0; k <= n; ++k) sum += ((k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0)) * specific_heat(l, std::exp(a + k * h));
  return sum * h / 3.0 + 0.5 * specific_heat(l, hi);
}

Verdict property_suites() {
  Verdict v;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  double herm = 0.0;
  for (int k = 0; k < 10000; ++k) {
    SpinSystem s = random_system(rng);
    if (k % 10 == 0) s.hyperfine = Hyperfine{0.05 * (u(rng) - 0.5), 3.5};
    herm = std::max(herm, hermiticity_defect(build_hamiltonian(s, FieldVector(5.0 * u(rng), -5.0 * u(rng), 5.0 * u(rng)))));
  }
  v.require(herm < kHermiticity, f("Hermiticity %.1e", herm));

  double hf = 0.0;
  for (int k = 0; k < 100; ++k) {
    const SpinSystem s = random_system(rng);
    const Vec3 dir = Vec3(u(rng) - 0.5, u(rng) - 0.5, u(rng) - 0.5).normalized();
    const double h = 0.5 + 2.5 * u(rng);
    const double t = 1.0 + 9.0 * u(rng);
    const double step = 1e-4 * h;
    const double fd = -(free_energy(s, FieldVector(dir * (h + step)), t) - free_energy(s, FieldVector(dir * (h - step)), t)) /
                      (2.0 * step) / units::kBohrMagnetonKelvinPerTesla;
    const double m = magnetization(s, FieldVector(dir * h), t);
    hf = std::max(hf, std::abs(m - fd) / std::max(std::abs(fd), 1e-12));
  }
  v.require(hf < kHellmannFeynman, f("Hellmann-Feynman %.1e", hf));

  double entropy = 0.0;
  for (const std::vector<double>& e : {std::vector<double>{0.0, 1.0}, {0.0, 1.0, 3.0}, {0.0, 2.0, 2.0, 5.0}}) {
    entropy = std::max(entropy, std::abs(entropy_integral(levels_of(e), 1.0 / 50.0, 1e4) / std::log(e.size()) - 1.0));
  }
  const Preset c1 = load_preset("complex1");
  const LevelSet l1 = solve(c1.system, FieldVector(), false);
  entropy = std::max(entropy, std::abs(entropy_integral(l1, l1.energies(1) / 50.0, 1e4 * l1.energies(2)) / std::log(3.0) - 1.0));
  v.require(entropy < kEntropyTol, f("entropy vs ln(levels) %.1e", entropy));

  const double t = 4.0;
  MetropolisChain chain(IsingLattice({2, 1, 1}, IsingLattice::chain2(), 1.0, 1.0), 2024);
  chain.set_temperature(t);
  std::array<double, 4> counts{};
  int samples = 0;
  for (int k = 0; k < 100000; ++k) {
    chain.propose(static_cast<std::size_t>(k % 2));
    if (k % 20 == 19) {
      counts[(chain.lattice().spin(0) > 0 ? 2 : 0) + (chain.lattice().spin(1) > 0 ? 1 : 0)] += 1.0;
      ++samples;
    }
  }
  // Two sites on a periodic chain of length 2 share two bonds: E = -2 J s1 s2.
  double z = 0.0;
  std::array<double, 4> w{};
  for (int idx = 0; idx < 4; ++idx) {
    w[idx] = std::exp(2.0 * (idx & 2 ? 1 : -1) * (idx & 1 ? 1 : -1) / t);
    z += w[idx];
  }
  double chi2 = 0.0;
  for (int idx = 0; idx < 4; ++idx) {
    const double expected = samples * w[idx] / z;
    chi2 += (counts[idx] - expected) * (counts[idx] - expected) / expected;
  }
  v.require(chi2 < kChi2Critical, f("detailed balance chi2 %.2f", chi2));

  McOptions opt;
  opt.sweeps = 500;
  opt.burn_in = 100;
  opt.seed = 9;
  const IsingLattice lat({4, 4, 4}, IsingLattice::bipartite12(), -0.0504, 1.5);
  const TemperatureGrid grid = TemperatureGrid::linear(0.5, 2.0, 4);
  const bool mc_same = metropolis_run(lat, grid, opt) == metropolis_run(lat, grid, opt);
  FitProblem prob;
  prob.parameters = {{"x", -1.5, -2.0, 2.0}, {"y", 2.0, -1.0, 3.0}};
  prob.options.seed = 4;
  auto rosen = [](std::span<const double> x, std::vector<double>& r) {
    r = {10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0]};
    return true;
  };
  const FitResult a = least_squares(prob, rosen);
  prob.options.threads = 3;
  const FitResult b = least_squares(prob, rosen);
  v.require(mc_same && a.best == b.best, "seeded determinism");
  return v;
}

}  // namespace

int main() {
  std::string mc_note;
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"clock-gap Schottky peak", clock_gap_schottky},
      {"Schottky root constant", root_constant},
      {"field parabola and cone averaging", field_parabola},
      {"Kramers contrast and hyperfine bound", kramers_contrast},
      {"Monte Carlo T_N", [&] { return monte_carlo_tn(mc_note); }},
      {"quantum decoupling cluster", quantum_decoupling},
      {"chi*T with TIP", chi_t_with_tip},
      {"dual-minimum ZFS fit", dual_minimum},
      {"axis-angle recovery", angle_recovery},
      {"relaxation round trips", relaxation_round_trips},
      {"property suites", property_suites},
  };

  std::size_t failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k + 1);
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[k].second();
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    if (!v.pass) ++failed;
    std::printf("%s %2d %s: %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", id, criteria[k].first.c_str(), v.detail.c_str(),
                seconds_since(start));
    if (id == 5 && !mc_note.empty()) std::printf("     5 info: %s\n", mc_note.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria pass\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
