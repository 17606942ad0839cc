#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "spinclock/orientation.hpp"
#include "spinclock/presets.hpp"
#include "spinclock/units.hpp"

using namespace spinclock;

namespace {

constexpr double kPi = 3.14159265358979323846;

double sum_weights(const std::vector<Orientation>& o) {
  double s = 0.0;
  for (const auto& x : o) s += x.weight;
  return s;
}

bool same_spectrum(const LevelSet& a, const LevelSet& b, double tol) {
  return (a.energies - b.energies).cwiseAbs().maxCoeff() < tol;
}

}  // namespace

TEST_CASE("generate_orientations: weights and degenerate cone") {
  const auto cone0 = generate_orientations(Cone{0.0, 100});
  REQUIRE(cone0.size() == 1);
  CHECK((cone0[0].rotation - Mat3::Identity()).norm() == 0.0);
  for (const OrientationScheme& s :
       {OrientationScheme(Cone{0.5, 40}), OrientationScheme(RandomPowder{350, false}),
        OrientationScheme(RandomPowder{350, true}), OrientationScheme(AlignedPowderMix{0.3, 50}),
        OrientationScheme(RotationSweep{Vec3::UnitX(), {0.0, 0.1, 0.2}})}) {
    const auto o = generate_orientations(s);
    CHECK(sum_weights(o) == doctest::Approx(1.0).epsilon(1e-12));
    for (const auto& x : o) {
      CHECK(x.weight >= 0.0);
      CHECK((x.rotation.transpose() * x.rotation - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
  CHECK_THROWS_AS(generate_orientations(Cone{-0.1, 10}), DomainError);
  CHECK_THROWS_AS(generate_orientations(Cone{kPi / 2 + 0.01, 10}), DomainError);
  CHECK_THROWS_AS(generate_orientations(RandomPowder{0, false}), DomainError);
}

TEST_CASE("generate_orientations: powder mean of z.H vanishes within 3/sqrt(n)") {
  for (int n : {10, 100, 350, 2000}) {
    double mean = 0.0;
    for (const auto& o : generate_orientations(RandomPowder{n, false})) mean += o.weight * (o.rotation * Vec3::UnitZ())(2);
    CHECK(std::abs(mean) < 3.0 / std::sqrt(n));
  }
}

TEST_CASE("averaged_observable: single orientation equals the direct thermo call") {
  const Preset p = load_preset("complex4");
  const TemperatureGrid grid = TemperatureGrid::logarithmic(0.1, 10.0, 30);
  const ThermoCurve c = averaged_observable(p.system, SingleAngle{}, ObservableKind::kSpecificHeat, grid, Vec3(0, 0, 0.3));
  const LevelSet l = solve(p.system, FieldVector::along_z(0.3), false);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(c.values[i] == doctest::Approx(specific_heat(l, grid[i])).epsilon(1e-12));
  const ThermoCurve m = averaged_observable(p.system, SingleAngle{}, ObservableKind::kMagnetization, grid, Vec3(0, 0, 0.3));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(m.values[i] == doctest::Approx(magnetization(p.system, FieldVector::along_z(0.3), grid[i])).epsilon(1e-10));
  }
}

TEST_CASE("averaged_observable: hemisphere cone matches the random powder") {
  const Preset p = load_preset("complex4");
  const TemperatureGrid grid = TemperatureGrid::logarithmic(0.2, 10.0, 20);
  const Vec3 h(0, 0, 0.5);
  const ThermoCurve cone = averaged_observable(p.system, Cone{kPi / 2, 2000}, ObservableKind::kSpecificHeat, grid, h);
  const ThermoCurve powder = averaged_observable(p.system, RandomPowder{4000, false}, ObservableKind::kSpecificHeat, grid, h);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(cone.values[i] == doctest::Approx(powder.values[i]).epsilon(5e-3));
}

TEST_CASE("property: octant folding leaves powder averages unchanged to sampling accuracy") {
  const Preset p = load_preset("complex4");
  const TemperatureGrid grid = TemperatureGrid::logarithmic(0.5, 10.0, 10);
  const Vec3 h(0, 0, 1.0);
  const ThermoCurve full = averaged_observable(p.system, RandomPowder{8000, false}, ObservableKind::kMagnetization, grid, h);
  const ThermoCurve folded = averaged_observable(p.system, RandomPowder{8000, true}, ObservableKind::kMagnetization, grid, h);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(folded.values[i] == doctest::Approx(full.values[i]).epsilon(2e-3));
}

TEST_CASE("property: rotations preserve isotropic spectra") {
  SpinSystem s;
  s.g = {2.1, 2.1, 2.1};
  const TemperatureGrid grid = TemperatureGrid::logarithmic(0.2, 20.0, 25);
  const Vec3 h(0.0, 0.0, 0.8);
  const ThermoCurve single = averaged_observable(s, SingleAngle{}, ObservableKind::kSpecificHeat, grid, h);
  for (const OrientationScheme& scheme : {OrientationScheme(RandomPowder{200, false}), OrientationScheme(Cone{0.7, 50})}) {
    const ThermoCurve avg = averaged_observable(s, scheme, ObservableKind::kSpecificHeat, grid, h);
    for (std::size_t i = 0; i < grid.size(); ++i) CHECK(std::abs(avg.values[i] - single.values[i]) < 1e-10);
  }
}

TEST_CASE("property: effective gap of a single angle is the spectrum's own peak gap") {
  const Preset p = load_preset("complex1");
  for (double h : {0.0, 0.5, 2.0}) {
    const OrientationEnsemble e(p.system, generate_orientations(SingleAngle{}), Vec3(0, 0, h));
    const LevelSet l = solve(p.system, FieldVector::along_z(h), false);
    CHECK(e.effective_gap(0.05, 50.0) == doctest::Approx(gap_from_t0(specific_heat_peak(l, 0.05, 50.0).temperature)).epsilon(1e-12));
  }
  const OrientationEnsemble zero(p.system, generate_orientations(SingleAngle{}), Vec3::Zero());
  CHECK(zero.effective_gap(0.05, 50.0) == doctest::Approx(clock_gap(p.system)).epsilon(1e-6));
}

TEST_CASE("SymmetryOp: P2_1/n operations are orthogonal; others are rejected") {
  for (const SymmetryOp& op : SymmetryOp::p21n()) CHECK_NOTHROW(op.validate());
  SymmetryOp bad;
  bad.matrix(0, 1) = 0.1;
  CHECK_THROWS_AS(bad.validate(), ContractViolation);
  const std::vector<SymmetryOp> ops{bad};
  CHECK_THROWS_AS(crystal_site_frames(52.6, ops), ContractViolation);
}

TEST_CASE("crystal_site_frames: equivalent sites along b and in the ac plane") {
  const Preset p = load_preset("complex4");
  const auto ops = SymmetryOp::p21n();
  const auto frames = crystal_site_frames(52.6, ops);
  REQUIRE(frames.size() == 4);
  auto spectra = [&](const Vec3& h) {
    std::vector<LevelSet> out;
    for (const Mat3& f : frames) out.push_back(solve(p.system, FieldVector(f * h), false));
    return out;
  };
  for (const Vec3& h : {Vec3(0, 0.7, 0), Vec3(0.5, 0, 0.3), Vec3(-0.2, 0, 1.1)}) {
    const auto s = spectra(h);
    for (std::size_t k = 1; k < 4; ++k) CHECK(same_spectrum(s[0], s[k], 1e-10));
  }
  const auto generic = spectra(Vec3(0.4, 0.5, 0.6));
  std::vector<const LevelSet*> distinct;
  for (const auto& l : generic) {
    if (std::none_of(distinct.begin(), distinct.end(), [&](const LevelSet* d) { return same_spectrum(*d, l, 1e-10); })) {
      distinct.push_back(&l);
    }
  }
  CHECK(distinct.size() <= 2);
  CHECK(same_spectrum(generic[0], generic[1], 1e-10));  // inversion pairs
}

TEST_CASE("magnetization_sweep: minimum along b, maximum along a, period 180 deg") {
  const Preset p = load_preset("complex4");
  const auto ops = SymmetryOp::p21n();
  const auto frames = crystal_site_frames(*p.easy_axis_deg, ops);
  std::vector<double> angles;
  for (int a = 0; a <= 360; a += 5) angles.push_back(a);
  const ThermoCurve m = magnetization_sweep(p.system, frames, Vec3::UnitZ(), Vec3::UnitX(), angles, 0.1, 5.0);
  const auto lo = std::min_element(m.values.begin(), m.values.end()) - m.values.begin();
  const auto hi = std::max_element(m.values.begin(), m.values.end()) - m.values.begin();
  CHECK(std::fmod(m.x[lo], 180.0) == doctest::Approx(90.0));
  CHECK(std::fmod(m.x[hi], 180.0) == doctest::Approx(0.0));
  for (std::size_t i = 0; i + 36 < angles.size(); ++i) CHECK(m.values[i] == doctest::Approx(m.values[i + 36]).epsilon(1e-12));
}

TEST_CASE("aligned/powder mix interpolates linearly between the two limits") {
  const Preset p = load_preset("complex1");
  const TemperatureGrid grid = TemperatureGrid::logarithmic(0.5, 10.0, 15);
  const Vec3 h(0, 0, 2.0);
  const ThermoCurve a = averaged_observable(p.system, AlignedPowderMix{1.0, 100}, ObservableKind::kSpecificHeat, grid, h);
  const ThermoCurve b = averaged_observable(p.system, AlignedPowderMix{0.0, 100}, ObservableKind::kSpecificHeat, grid, h);
  const ThermoCurve m = averaged_observable(p.system, AlignedPowderMix{0.25, 100}, ObservableKind::kSpecificHeat, grid, h);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(m.values[i] == doctest::Approx(0.25 * a.values[i] + 0.75 * b.values[i]).epsilon(1e-12));
}
