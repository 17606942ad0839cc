#include "spinclock/units.hpp"

#include <string>

#include "spinclock/error.hpp"

namespace spinclock::units {

double to_kelvin(double value, EnergyUnit unit) {
  switch (unit) {
    case EnergyUnit::kKelvin:
      return value;
    case EnergyUnit::kWavenumber:
      return wavenumber_to_kelvin(value);
    case EnergyUnit::kGHz:
      return ghz_to_kelvin(value);
  }
  return value;
}

double from_kelvin(double kelvin, EnergyUnit unit) {
  switch (unit) {
    case EnergyUnit::kKelvin:
      return kelvin;
    case EnergyUnit::kWavenumber:
      return kelvin_to_wavenumber(kelvin);
    case EnergyUnit::kGHz:
      return kelvin_to_ghz(kelvin);
  }
  return kelvin;
}

EnergyUnit parse_energy_unit(std::string_view text) {
  if (text == "K") return EnergyUnit::kKelvin;
  if (text == "cm-1") return EnergyUnit::kWavenumber;
  if (text == "GHz") return EnergyUnit::kGHz;
  throw ConfigError("unknown energy unit '" + std::string(text) + "' (expected K, cm-1 or GHz)");
}

std::string_view unit_name(EnergyUnit unit) {
  switch (unit) {
    case EnergyUnit::kKelvin:
      return "K";
    case EnergyUnit::kWavenumber:
      return "cm-1";
    case EnergyUnit::kGHz:
      return "GHz";
  }
  return "K";
}

}  // namespace spinclock::units
