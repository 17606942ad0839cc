#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "spinclock/error.hpp"
#include "spinclock/optimize.hpp"

namespace spinclock {

struct ColeColeParams {
  double chi_t = 0.0;  // isothermal, cm^3/mol
  double chi_s = 0.0;  // adiabatic, cm^3/mol
  double tau = 1.0;    // seconds
  double beta = 1.0;

  void validate() const;
};

struct ComplexSusceptibility {
  double re = 0.0;
  double im = 0.0;
};

/// Generalized Debye response with x = (w tau)^beta:
///   chi'  = chi_s + (chi_t - chi_s) (1 + x cos(pi beta/2)) / (1 + 2 x cos(pi beta/2) + x^2)
///   chi'' = (chi_t - chi_s) x sin(pi beta/2) / (1 + 2 x cos(pi beta/2) + x^2)
ComplexSusceptibility cole_cole_eval(const ColeColeParams& p, double omega);

struct AcPoint {
  double omega = 0.0;  // rad/s
  double re = 0.0;
  double im = 0.0;
  std::optional<double> sigma;
};

struct ColeColeFitOptions {
  std::optional<ColeColeParams> init;
  double beta_lower = 0.5;
  double beta_upper = 1.0;
  double beta_init = 0.97;
  int starts = 8;
  std::uint64_t seed = 1;
};

struct ColeColeFit {
  ColeColeParams params;
  /// Order: chi_t, chi_s, tau, beta.
  Eigen::Matrix4d covariance = Eigen::Matrix4d::Zero();
  double ssr = 0.0;
  std::optional<double> reduced_chi2;
  bool tau_identifiable = true;
  bool peak_bracketed = true;
  FitStatus status = FitStatus::kFailed;
  Warnings warnings;

  double tau_uncertainty() const;
};

/// Joint least squares on chi' and chi'' with tau searched in log space.
ColeColeFit cole_cole_fit(const std::vector<AcPoint>& data, const ColeColeFitOptions& options = {});

struct T1Model {
  double a_direct = 0.0;  // s^-1 K^-1
  double a_raman = 0.0;   // s^-1 K^-4

  double rate(double t) const { return a_direct * t + a_raman * t * t * t * t; }
};

struct T1Value {
  double seconds = 0.0;
  bool infinite = false;
};

/// T1 = 1 / (A_dir T + A_Raman T^4).
T1Value t1_eval(const T1Model& model, double t);

struct T1Point {
  double t = 0.0;   // K
  double t1 = 0.0;  // s
  std::optional<double> sigma;  // on T1, s
};

struct T1Fit {
  T1Model model;
  Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();  // a_direct, a_raman
  double ssr = 0.0;
  std::optional<double> reduced_chi2;
  Warnings warnings;
};

/// Linear least squares on the rate 1/T1 over the basis {T, T^4}. Negative
/// coefficients are clipped to zero (with a warning) and the other refitted.
T1Fit t1_fit(const std::vector<T1Point>& data);

struct RabiFrequency {
  double hertz = 0.0;
  double angular = 0.0;  // rad/s
  double period() const { return hertz > 0.0 ? 1.0 / hertz : 0.0; }
};

/// Omega_R ~ 2 g mu_B b_z S / h between the tunnel-split states.
RabiFrequency rabi_frequency(double g, double b_z_tesla, double spin);

}  // namespace spinclock
