#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "spinclock/spin_system.hpp"

namespace spinclock {

/// Strictly increasing list of positive temperatures in kelvin.
class TemperatureGrid {
 public:
  TemperatureGrid() = default;
  explicit TemperatureGrid(std::vector<double> kelvin);

  static TemperatureGrid linear(double t_min, double t_max, std::size_t n);
  static TemperatureGrid logarithmic(double t_min, double t_max, std::size_t n);

  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  double operator[](std::size_t i) const { return values_[i]; }

 private:
  std::vector<double> values_;
};

/// Sampled observable. `x` is a temperature (K), field (T) or angle (deg).
struct ThermoCurve {
  std::string observable;  // "specific_heat", "magnetization", "chi", "chiT", ...
  double field_tesla = 0.0;
  std::string scheme = "single";
  std::vector<double> x;
  std::vector<double> values;

  std::size_t size() const { return x.size(); }
};

// ---- canonical averages over a LevelSet ----------------------------------

/// Boltzmann populations at temperature `t` (normalized).
Eigen::VectorXd populations(const LevelSet& levels, double t);
/// ln Z with energies measured from the ground level.
double log_partition(const LevelSet& levels, double t);
/// c/R = (<E^2> - <E>^2) / T^2.
double specific_heat(const LevelSet& levels, double t);
ThermoCurve specific_heat(const LevelSet& levels, const TemperatureGrid& grid);

// ---- Schottky peak relation -----------------------------------------------

/// Root y* of y tanh(y) = 1 (about 1.19968).
double schottky_root();
/// Temperature of the two-level specific-heat maximum, Delta / (2 y*).
double t0_from_gap(double gap_kelvin);
/// Exact inverse of t0_from_gap.
double gap_from_t0(double t0_kelvin);

struct Peak {
  double temperature = 0.0;
  double value = 0.0;
  bool at_boundary = false;
};

/// Locates the maximum of `f` on [t_min, t_max]: log-spaced scan followed by a
/// golden-section refinement. Flags maxima that sit on the interval ends.
Peak find_peak(const std::function<double(double)>& f, double t_min, double t_max,
               std::size_t scan_points = 400);
/// Maximum of c/R of one spectrum.
Peak specific_heat_peak(const LevelSet& levels, double t_min, double t_max);

// ---- magnetic response ------------------------------------------------------

/// Projection on `direction` of the thermal moment (mu_B per molecule) with the
/// field `signed_field * direction` applied. Hellmann-Feynman form.
double moment_along(const SpinSystem& sys, const Vec3& direction, double signed_field, double t);

/// Magnetization projected on the field direction. Zero field returns 0.
double magnetization(const SpinSystem& sys, const FieldVector& field, double t);

/// Helmholtz free energy -T ln Z in kelvin (absolute, not ground-shifted).
double free_energy(const SpinSystem& sys, const FieldVector& field, double t);

/// Isothermal susceptibility dM/dH along `direction` at field magnitude `field`
/// (tesla), in cm^3 mol^-1. Central difference with step 1e-4 |H| (1e-5 T at H = 0).
double susceptibility_isothermal(const SpinSystem& sys, const Vec3& direction, double field,
                                 double t);
/// Same, along the field direction (z when the field vanishes).
double susceptibility_isothermal(const SpinSystem& sys, const FieldVector& field, double t);

struct VanVleckOptions {
  /// Pairs closer than this (K) are treated as one degenerate block.
  double degenerate_gap = 1e-7;
  /// When false, a degenerate pair with a non-zero moment element raises
  /// SingularTermError instead of being resolved inside its block.
  bool resolve_degenerate_blocks = true;
};

/// Reversible (frozen-population) van Vleck susceptibility, cm^3 mol^-1.
double susceptibility_vanvleck(const SpinSystem& sys, const Vec3& direction, double field, double t,
                               const VanVleckOptions& options = {});
double susceptibility_vanvleck(const SpinSystem& sys, const FieldVector& field, double t,
                               const VanVleckOptions& options = {});

// ---- lattice and nuclear contributions ------------------------------------

/// Debye phonon c/R per mole of atoms.
double debye_specific_heat(double theta_d, double t);
ThermoCurve debye_specific_heat(double theta_d, const TemperatureGrid& grid);

enum class HyperfineSpectrum {
  kFull,           // all (2S+1)(2I+1) levels of A S.I
  kGroundDoublet,  // A m_S m_I restricted to m_S = +-S
};

/// Nuclear Schottky of the A S.I spectrum; zero coupling gives c = 0.
ThermoCurve hyperfine_specific_heat_bound(double coupling_kelvin, double spin, double nuclear_spin,
                                          const TemperatureGrid& grid,
                                          HyperfineSpectrum mode = HyperfineSpectrum::kFull);

}  // namespace spinclock
