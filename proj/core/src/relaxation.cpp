#include "spinclock/relaxation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spinclock/units.hpp"

namespace spinclock {

void ColeColeParams::validate() const {
  if (!(chi_s >= 0.0) || !(chi_t >= chi_s)) throw DomainError("Cole-Cole needs chi_T >= chi_S >= 0");
  if (!(tau > 0.0)) throw DomainError("Cole-Cole needs tau > 0");
  if (!(beta > 0.0 && beta <= 1.0)) throw DomainError("Cole-Cole needs 0 < beta <= 1");
}

ComplexSusceptibility cole_cole_eval(const ColeColeParams& p, double omega) {
  if (!(omega >= 0.0)) throw DomainError("angular frequency must be >= 0");
  if (omega == 0.0) return {p.chi_t, 0.0};
  const double x = std::pow(omega * p.tau, p.beta);
  const double c = std::cos(units::kPi * p.beta / 2.0);
  const double s = std::sin(units::kPi * p.beta / 2.0);
  const double dchi = p.chi_t - p.chi_s;
  if (!std::isfinite(x)) return {p.chi_s, 0.0};
  const double denom = 1.0 + 2.0 * x * c + x * x;
  return {p.chi_s + dchi * (1.0 + x * c) / denom, dchi * x * s / denom};
}

double ColeColeFit::tau_uncertainty() const {
  return covariance(2, 2) >= 0.0 ? std::sqrt(covariance(2, 2)) : std::numeric_limits<double>::quiet_NaN();
}

ColeColeFit cole_cole_fit(const std::vector<AcPoint>& data, const ColeColeFitOptions& options) {
  if (data.size() < 4) throw DomainError("Cole-Cole fit needs at least 4 frequency points");
  if (!(options.beta_lower > 0.0 && options.beta_upper <= 1.0 && options.beta_lower <= options.beta_upper)) {
    throw DomainError("beta bounds must satisfy 0 < lower <= upper <= 1");
  }
  bool weighted = true;
  double w_min = std::numeric_limits<double>::infinity();
  double w_max = 0.0;
  double scale = 0.0;
  double re_max = -std::numeric_limits<double>::infinity();
  double re_min = std::numeric_limits<double>::infinity();
  for (const AcPoint& p : data) {
    if (!(p.omega >= 0.0) || !std::isfinite(p.re) || !std::isfinite(p.im)) {
      throw DomainError("ac point needs omega >= 0 and finite chi', chi''");
    }
    if (p.sigma && !(*p.sigma > 0.0)) throw DomainError("sigma must be > 0");
    weighted = weighted && p.sigma.has_value();
    if (p.omega > 0.0) {
      w_min = std::min(w_min, p.omega);
      w_max = std::max(w_max, p.omega);
    }
    scale = std::max({scale, std::abs(p.re), std::abs(p.im)});
    re_max = std::max(re_max, p.re);
    re_min = std::min(re_min, p.re);
  }
  if (w_max == 0.0) throw DomainError("Cole-Cole fit needs positive frequencies");

  std::vector<AcPoint> sorted = data;
  std::stable_sort(sorted.begin(), sorted.end(), [](const AcPoint& a, const AcPoint& b) { return a.omega < b.omega; });
  const auto peak = std::max_element(sorted.begin(), sorted.end(),
                                     [](const AcPoint& a, const AcPoint& b) { return a.im < b.im; });

  ColeColeFit out;
  if (peak->im <= 1e-9 * scale || scale == 0.0) {
    out.tau_identifiable = false;
    out.warnings.emplace_back("chi'' carries no dispersion: tau is unidentifiable");
  } else if (peak == sorted.begin() || peak == sorted.end() - 1) {
    out.peak_bracketed = false;
    out.warnings.emplace_back("data do not bracket the chi'' maximum: fit is ill-conditioned");
  }

  const double chi_cap = std::max(scale, 1e-300);
  const double tau_lo = 1e-3 / w_max;
  const double tau_hi = 1e3 / w_min;
  ColeColeParams init;
  if (options.init) {
    init = *options.init;
  } else {
    init.chi_t = std::max(re_max, 0.0);
    init.chi_s = std::clamp(re_min, 0.0, init.chi_t);
    init.tau = peak->omega > 0.0 ? 1.0 / peak->omega : 1.0 / w_min;
    init.beta = options.beta_init;
  }
  init.tau = std::clamp(init.tau, tau_lo, tau_hi);
  init.beta = std::clamp(init.beta, options.beta_lower, options.beta_upper);

  FitProblem problem;
  problem.parameters = {
      {"chi_s", std::clamp(init.chi_s, 0.0, 2.0 * chi_cap), 0.0, 2.0 * chi_cap, false, false},
      {"delta", std::clamp(init.chi_t - init.chi_s, 0.0, 3.0 * chi_cap), 0.0, 3.0 * chi_cap, false, false},
      {"tau", init.tau, tau_lo, tau_hi, false, true},
      {"beta", init.beta, options.beta_lower, options.beta_upper, false, false},
  };
  problem.options.starts = options.starts;
  problem.options.seed = options.seed;
  problem.options.absolute_sigma = weighted;

  auto residuals = [&](std::span<const double> x, std::vector<double>& r) {
    const ColeColeParams p{x[0] + x[1], x[0], x[2], x[3]};
    r.reserve(2 * data.size());
    for (const AcPoint& d : data) {
      const ComplexSusceptibility m = cole_cole_eval(p, d.omega);
      const double w = d.sigma ? 1.0 / *d.sigma : 1.0;
      r.push_back((m.re - d.re) * w);
      r.push_back((m.im - d.im) * w);
    }
    return true;
  };
  const FitResult fit = least_squares(problem, residuals);
  out.status = fit.status;
  out.warnings.insert(out.warnings.end(), fit.warnings.begin(), fit.warnings.end());
  if (fit.status == FitStatus::kFailed) return out;

  out.params = {fit.best[0] + fit.best[1], fit.best[0], fit.best[2], fit.best[3]};
  out.ssr = fit.ssr;
  out.reduced_chi2 = fit.reduced_chi2;
  if (fit.covariance.rows() == 4 && fit.free_names.size() == 4) {
    // (chi_s, delta, tau, beta) -> (chi_t, chi_s, tau, beta)
    Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
    m(0, 0) = 1.0;
    m(0, 1) = 1.0;
    m(1, 0) = 1.0;
    m(2, 2) = 1.0;
    m(3, 3) = 1.0;
    out.covariance = m * fit.covariance * m.transpose();
  } else {
    out.covariance.setConstant(std::numeric_limits<double>::quiet_NaN());
  }
  return out;
}

T1Value t1_eval(const T1Model& model, double t) {
  if (!(t > 0.0)) throw DomainError("temperature must be > 0");
  if (model.a_direct < 0.0 || model.a_raman < 0.0) throw DomainError("T1 coefficients must be >= 0");
  const double rate = model.rate(t);
  if (rate == 0.0) return {std::numeric_limits<double>::infinity(), true};
  return {1.0 / rate, false};
}

T1Fit t1_fit(const std::vector<T1Point>& data) {
  if (data.size() < 3) throw DomainError("T1 fit needs at least 3 temperatures");
  bool weighted = true;
  const Eigen::Index n = static_cast<Eigen::Index>(data.size());
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const T1Point& p = data[static_cast<std::size_t>(i)];
    if (!(p.t > 0.0) || !(p.t1 > 0.0)) throw DomainError("T1 data need T > 0 and T1 > 0");
    if (p.sigma && !(*p.sigma > 0.0)) throw DomainError("sigma must be > 0");
    weighted = weighted && p.sigma.has_value();
    // sigma on the rate 1/T1 propagates as sigma_T1 / T1^2.
    const double w = p.sigma ? (p.t1 * p.t1) / *p.sigma : 1.0;
    a(i, 0) = p.t * w;
    a(i, 1) = std::pow(p.t, 4) * w;
    y(i) = w / p.t1;
  }

  auto solve_subset = [&](bool use_dir, bool use_raman) {
    Eigen::Vector2d c = Eigen::Vector2d::Zero();
    if (use_dir && use_raman) {
      c = a.colPivHouseholderQr().solve(y);
    } else if (use_dir) {
      c(0) = a.col(0).dot(y) / a.col(0).squaredNorm();
    } else if (use_raman) {
      c(1) = a.col(1).dot(y) / a.col(1).squaredNorm();
    }
    return c;
  };

  T1Fit out;
  Eigen::Vector2d c = solve_subset(true, true);
  bool clipped = false;
  if (c(0) < 0.0 || c(1) < 0.0) {
    clipped = true;
    Eigen::Vector2d best = Eigen::Vector2d::Zero();
    double best_ssr = y.squaredNorm();
    for (auto [d, r] : {std::pair{true, false}, std::pair{false, true}}) {
      Eigen::Vector2d trial = solve_subset(d, r);
      if (trial(0) < 0.0 || trial(1) < 0.0) continue;
      const double s = (a * trial - y).squaredNorm();
      if (s < best_ssr) {
        best_ssr = s;
        best = trial;
      }
    }
    if (c(0) < 0.0) out.warnings.emplace_back("negative A_dir clipped to 0");
    if (c(1) < 0.0) out.warnings.emplace_back("negative A_Raman clipped to 0");
    c = best;
  }
  out.model = {c(0), c(1)};
  out.ssr = (a * c - y).squaredNorm();

  const std::size_t free = clipped ? static_cast<std::size_t>((c(0) > 0.0) + (c(1) > 0.0)) : 2;
  const double dof = static_cast<double>(data.size()) - static_cast<double>(free);
  double s2 = 1.0;
  if (weighted) {
    if (dof > 0) out.reduced_chi2 = out.ssr / dof;
  } else {
    s2 = dof > 0 ? out.ssr / dof : 0.0;
  }
  if (!clipped) {
    out.covariance = s2 * (a.transpose() * a).inverse();
  } else {
    for (int k = 0; k < 2; ++k) {
      if (c(k) > 0.0) out.covariance(k, k) = s2 / a.col(k).squaredNorm();
    }
  }
  return out;
}

RabiFrequency rabi_frequency(double g, double b_z_tesla, double spin) {
  if (!(b_z_tesla > 0.0)) throw DomainError("microwave field b_z must be > 0");
  if (!(spin >= 0.0)) throw DomainError("spin must be >= 0");
  RabiFrequency out;
  out.hertz = 2.0 * g * units::kBohrMagnetonHzPerTesla * b_z_tesla * spin;
  out.angular = 2.0 * units::kPi * out.hertz;
  return out;
}

}  // namespace spinclock
