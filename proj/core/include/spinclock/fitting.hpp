#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spinclock/optimize.hpp"
#include "spinclock/spin_system.hpp"

namespace spinclock {

enum class ResponseKind { kMagnetization, kChiT, kSpecificHeat };

std::string to_string(ResponseKind kind);
ResponseKind parse_response_kind(const std::string& text);

struct DataPoint {
  double t = 0.0;      // K
  double field = 0.0;  // T
  double angle = 0.0;  // degrees, field from molecular z (single-crystal data)
  double value = 0.0;
  std::optional<double> sigma;
};

struct Dataset {
  ResponseKind kind = ResponseKind::kMagnetization;
  std::vector<DataPoint> points;

  /// Throws DomainError when empty, non-finite, T <= 0 or sigma <= 0.
  void validate() const;
  bool weighted() const;
};

// ---- forward models ---------------------------------------------------------

struct PowderOptions {
  int n_points = 350;
  bool fold_octant = true;
};

/// Powder-averaged magnetization along the field (mu_B per molecule) plus
/// TIP * H, for each point of `data` (values ignored).
std::vector<double> powder_magnetization(const SpinSystem& sys, double tip,
                                         const std::vector<DataPoint>& points,
                                         const PowderOptions& options = {});

/// Zero-field linear-response susceptibility along `direction` (cm^3/mol).
double susceptibility_zero_field(const SpinSystem& sys, const Vec3& direction, double t);

/// Powder chi*T (cm^3 mol^-1 K) including TIP. Zero field uses the exact tensor
/// average (chi_x + chi_y + chi_z)/3; finite fields use the powder average of M/H.
std::vector<double> powder_chi_t(const SpinSystem& sys, double tip, const std::vector<DataPoint>& points,
                                 const PowderOptions& options = {});

/// Single-crystal c/R with the field in the molecular xz plane at `angle` from z.
std::vector<double> crystal_specific_heat(const SpinSystem& sys, const std::vector<DataPoint>& points);

// ---- model fits -----------------------------------------------------------------

struct ZfsBranch {
  int sign = -1;
  double D_cm = 0.0;
  double E_cm = 0.0;  // >= 0; the sign of E is not observable in powder data
  double D_uncertainty = 0.0;
  double E_uncertainty = 0.0;
  double ssr = 0.0;
  double relative_rms = 0.0;  // sqrt(ssr / n) / max |value|
  /// True when the minimum sits on the D = 0 edge of its half-space, i.e. it is
  /// not a local minimum of the unconstrained problem.
  bool at_boundary = false;
  FitResult fit;
};

struct ZfsFitOptions {
  double g = 2.16;
  double tip = 1e-4;
  double spin = 1.0;
  double d_max_cm = 10.0;
  double d_min_cm = 0.01;
  int starts_per_sign = 8;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  /// A branch with relative RMS below this counts as a high-quality fit.
  double quality_threshold = 0.01;
  PowderOptions powder;
};

struct ZfsFitReport {
  ZfsBranch negative;
  ZfsBranch positive;
  /// All 2 * starts_per_sign starts (negative half-space first).
  FitResult combined;
  /// Both branches fit at high quality: the data cannot pick the sign of D.
  bool sign_ambiguous = false;
  Warnings warnings;

  const ZfsBranch& best() const { return negative.ssr <= positive.ssr ? negative : positive; }
};

/// Fits D and E (cm^-1) to powder magnetization isotherms with g and TIP fixed,
/// running half of the starts in D < 0 and half in D > 0. E is parameterized as
/// eta |D| with 0 <= eta <= 1/3.
ZfsFitReport fit_zfs_powder_magnetization(const Dataset& data, const ZfsFitOptions& options = {});

struct AxisAngleFitOptions {
  double angle_init_deg = 45.0;
  bool fit_zfs = false;
  /// Bounds on D (cm^-1) when fit_zfs is set; must not straddle 0.
  double d_lower_cm = -10.0;
  double d_upper_cm = -0.01;
  double e_max_cm = 2.0;
  int starts = 16;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

struct AxisAngleFit {
  double angle_deg = 0.0;
  double angle_uncertainty_deg = 0.0;
  SpinSystem system;
  bool angle_identifiable = true;
  FitResult fit;
  Warnings warnings;
};

/// Fits the polar angle between field and easy axis (0..90 deg) to a family of
/// single-crystal c/R curves, optionally with D and E.
AxisAngleFit fit_axis_angle_from_heatcap(const Dataset& data, const SpinSystem& sys,
                                         const AxisAngleFitOptions& options = {});

struct ChiTFitOptions {
  bool fit_g = true;
  bool fit_tip = false;
  double tip = 1e-4;
  double g_lower = 1.5;
  double g_upper = 2.5;
  double tip_lower = -1e-3;
  double tip_upper = 1e-3;
  int starts = 8;
  std::uint64_t seed = 1;
  PowderOptions powder;
};

struct ChiTFit {
  double g = 0.0;
  double tip = 0.0;
  FitResult fit;
};

/// Fits an isotropic g and/or TIP to powder chi*T with D, E from `sys`.
ChiTFit fit_chi_t(const Dataset& data, const SpinSystem& sys, const ChiTFitOptions& options = {});

}  // namespace spinclock
