#pragma once

#include <string_view>

namespace spinclock::units {

// Energies are carried internally as E/k_B in kelvin.
inline constexpr double kKelvinPerWavenumber = 1.4387769;   // 1 cm^-1 in K
inline constexpr double kGHzPerKelvin = 20.836619;          // 1 K in GHz
inline constexpr double kBohrMagnetonKelvinPerTesla = 0.67171382;  // mu_B / k_B
inline constexpr double kBohrMagnetonHzPerTesla = 13.996245e9;     // mu_B / h

// N_A * mu_B expressed in emu/mol divided by 1e4 Oe/T: converts dM/dH in
// (mu_B per molecule)/T to a molar susceptibility in cm^3 mol^-1.
inline constexpr double kMolarChiPerBohrMagnetonPerTesla = 0.55849394101;

inline constexpr double kPi = 3.14159265358979323846;

enum class EnergyUnit { kKelvin, kWavenumber, kGHz };

double to_kelvin(double value, EnergyUnit unit);
double from_kelvin(double kelvin, EnergyUnit unit);

inline double wavenumber_to_kelvin(double cm) { return cm * kKelvinPerWavenumber; }
inline double kelvin_to_wavenumber(double k) { return k / kKelvinPerWavenumber; }
inline double kelvin_to_ghz(double k) { return k * kGHzPerKelvin; }
inline double ghz_to_kelvin(double ghz) { return ghz / kGHzPerKelvin; }

/// Accepts "K", "cm-1", "GHz" (case-sensitive as written in config files).
EnergyUnit parse_energy_unit(std::string_view text);
std::string_view unit_name(EnergyUnit unit);

inline double degrees_to_radians(double deg) { return deg * kPi / 180.0; }
inline double radians_to_degrees(double rad) { return rad * 180.0 / kPi; }

}  // namespace spinclock::units
