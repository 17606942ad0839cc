#include "spinclock/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "spinclock/units.hpp"

namespace spinclock {

TemperatureGrid::TemperatureGrid(std::vector<double> kelvin) : values_(std::move(kelvin)) {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!(values_[i] > 0.0) || !std::isfinite(values_[i])) {
      throw DomainError("temperature grid: every temperature must be finite and > 0");
    }
    if (i > 0 && !(values_[i] > values_[i - 1])) {
      throw DomainError("temperature grid: values must be strictly increasing");
    }
  }
}

TemperatureGrid TemperatureGrid::linear(double t_min, double t_max, std::size_t n) {
  if (n == 1) return TemperatureGrid({t_min});
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = t_min + (t_max - t_min) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return TemperatureGrid(std::move(t));
}

TemperatureGrid TemperatureGrid::logarithmic(double t_min, double t_max, std::size_t n) {
  if (!(t_min > 0.0)) throw DomainError("logarithmic grid needs t_min > 0");
  if (n == 1) return TemperatureGrid({t_min});
  std::vector<double> t(n);
  const double a = std::log(t_min);
  const double b = std::log(t_max);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  t.front() = t_min;
  t.back() = t_max;
  return TemperatureGrid(std::move(t));
}

Eigen::VectorXd populations(const LevelSet& levels, double t) {
  if (!(t > 0.0)) throw DomainError("temperature must be > 0");
  Eigen::VectorXd w = (-levels.energies.array() / t).exp();
  return w / w.sum();
}

double log_partition(const LevelSet& levels, double t) {
  if (!(t > 0.0)) throw DomainError("temperature must be > 0");
  return std::log((-levels.energies.array() / t).exp().sum());
}

double specific_heat(const LevelSet& levels, double t) {
  if (levels.size() < 2) return 0.0;
  const Eigen::VectorXd p = populations(levels, t);
  // Variance computed around the mean for cancellation safety.
  const double mean = p.dot(levels.energies);
  const Eigen::ArrayXd dev = levels.energies.array() - mean;
  const double var = (p.array() * dev * dev).sum();
  return std::max(0.0, var) / (t * t);
}

ThermoCurve specific_heat(const LevelSet& levels, const TemperatureGrid& grid) {
  ThermoCurve curve;
  curve.observable = "specific_heat";
  for (double t : grid.values()) {
    curve.x.push_back(t);
    curve.values.push_back(specific_heat(levels, t));
  }
  return curve;
}

double schottky_root() {
  // y tanh y - 1 is increasing on (0, inf); bisection on [1, 1.5].
  static const double root = [] {
    double lo = 1.0;
    double hi = 1.5;
    for (int i = 0; i < 200 && hi - lo > 1e-16; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (mid * std::tanh(mid) - 1.0 > 0.0) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    return 0.5 * (lo + hi);
  }();
  return root;
}

double t0_from_gap(double gap_kelvin) {
  if (!(gap_kelvin > 0.0)) throw DomainError("t0_from_gap: gap must be > 0");
  return gap_kelvin / (2.0 * schottky_root());
}

double gap_from_t0(double t0_kelvin) {
  if (!(t0_kelvin > 0.0)) throw DomainError("gap_from_t0: T0 must be > 0");
  return 2.0 * schottky_root() * t0_kelvin;
}

Peak find_peak(const std::function<double(double)>& f, double t_min, double t_max,
               std::size_t scan_points) {
  if (!(t_min > 0.0) || !(t_max > t_min)) throw DomainError("find_peak: need 0 < t_min < t_max");
  scan_points = std::max<std::size_t>(scan_points, 3);
  const double la = std::log(t_min);
  const double lb = std::log(t_max);
  std::vector<double> lt(scan_points);
  std::vector<double> fv(scan_points);
  std::size_t best = 0;
  for (std::size_t i = 0; i < scan_points; ++i) {
    lt[i] = la + (lb - la) * static_cast<double>(i) / static_cast<double>(scan_points - 1);
    fv[i] = f(std::exp(lt[i]));
    if (fv[i] > fv[best]) best = i;
  }
  Peak peak;
  if (best == 0 || best == scan_points - 1) {
    peak.temperature = std::exp(lt[best]);
    peak.value = fv[best];
    peak.at_boundary = true;
    return peak;
  }
  // Golden section in log T on the bracketing interval.
  double a = lt[best - 1];
  double b = lt[best + 1];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(std::exp(c));
  double fd = f(std::exp(d));
  while (b - a > 1e-12) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(std::exp(d));
    }
  }
  const double lx = 0.5 * (a + b);
  peak.temperature = std::exp(lx);
  peak.value = f(peak.temperature);
  return peak;
}

Peak specific_heat_peak(const LevelSet& levels, double t_min, double t_max) {
  return find_peak([&](double t) { return specific_heat(levels, t); }, t_min, t_max);
}

namespace {

double thermal_moment(const LevelSet& levels, double t) {
  const Eigen::VectorXd p = populations(levels, t);
  return p.dot(levels.moment->diagonal().real());
}

}  // namespace

double moment_along(const SpinSystem& sys, const Vec3& direction, double signed_field, double t) {
  const Vec3 u = direction.normalized();
  LevelSet levels = diagonalize(build_hamiltonian(sys, FieldVector(Vec3(signed_field * u))), true);
  const CMatrix& v = *levels.eigenvectors;
  levels.moment = v.adjoint() * moment_operator(sys, u) * v;
  return thermal_moment(levels, t);
}

double magnetization(const SpinSystem& sys, const FieldVector& field, double t) {
  if (!(t > 0.0)) throw DomainError("magnetization: temperature must be > 0");
  const double h = field.magnitude();
  if (h == 0.0) return 0.0;
  return moment_along(sys, field.direction(), h, t);
}

double free_energy(const SpinSystem& sys, const FieldVector& field, double t) {
  const LevelSet levels = diagonalize(build_hamiltonian(sys, field), false);
  return levels.ground_energy - t * log_partition(levels, t);
}

double susceptibility_isothermal(const SpinSystem& sys, const Vec3& direction, double field,
                                 double t) {
  if (!(t > 0.0)) throw DomainError("susceptibility: temperature must be > 0");
  const double step = field != 0.0 ? 1e-4 * std::abs(field) : 1e-5;
  const double up = moment_along(sys, direction, field + step, t);
  const double down = moment_along(sys, direction, field - step, t);
  return units::kMolarChiPerBohrMagnetonPerTesla * (up - down) / (2.0 * step);
}

double susceptibility_isothermal(const SpinSystem& sys, const FieldVector& field, double t) {
  return susceptibility_isothermal(sys, field.direction(), field.magnitude(), t);
}

double susceptibility_vanvleck(const SpinSystem& sys, const Vec3& direction, double field, double t,
                               const VanVleckOptions& options) {
  if (!(t > 0.0)) throw DomainError("susceptibility: temperature must be > 0");
  const Vec3 u = direction.normalized();
  LevelSet levels = diagonalize(build_hamiltonian(sys, FieldVector(Vec3(field * u))), true);
  const CMatrix& v = *levels.eigenvectors;
  const CMatrix mu = v.adjoint() * moment_operator(sys, u) * v;
  const Eigen::VectorXd p = populations(levels, t);
  const Eigen::VectorXd& e = levels.energies;
  const Eigen::Index n = e.size();

  // Sum over unordered pairs of 2 |mu_ij|^2 (p_i - p_j) / (E_j - E_i). Pairs inside a
  // degenerate block carry equal populations; rotating the block so that mu is
  // diagonal there removes their coupling without changing any cross-block term,
  // so those pairs contribute nothing.
  double chi = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double gap = e(j) - e(i);
      const double m2 = std::norm(mu(i, j));
      if (gap < options.degenerate_gap) {
        if (!options.resolve_degenerate_blocks && m2 > 1e-18) {
          throw SingularTermError(static_cast<std::size_t>(i), static_cast<std::size_t>(j),
                                  "van Vleck: degenerate levels " + std::to_string(i) + " and " +
                                      std::to_string(j) + " are coupled by the moment operator");
        }
        continue;
      }
      chi += 2.0 * m2 * (p(i) - p(j)) / gap;
    }
  }
  // mu_B^2 / K -> mu_B / T -> cm^3 mol^-1
  return units::kMolarChiPerBohrMagnetonPerTesla * units::kBohrMagnetonKelvinPerTesla * chi;
}

double susceptibility_vanvleck(const SpinSystem& sys, const FieldVector& field, double t,
                               const VanVleckOptions& options) {
  return susceptibility_vanvleck(sys, field.direction(), field.magnitude(), t, options);
}

double debye_specific_heat(double theta_d, double t) {
  if (!(theta_d > 0.0)) throw DomainError("debye: theta_D must be > 0");
  if (!(t > 0.0)) throw DomainError("debye: temperature must be > 0");
  // x^4 e^x / (e^x - 1)^2 = x^4 / (4 sinh^2(x/2)); the tail beyond x = 200 is < 1e-75.
  const double upper = std::min(theta_d / t, 200.0);
  auto integrand = [](double x) {
    if (x < 1e-6) return x * x;
    const double s = std::sinh(0.5 * x);
    return x * x * x * x / (4.0 * s * s);
  };
  double error = 0.0;
  const double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      integrand, 0.0, upper, 15, 1e-12, &error);
  const double r = t / theta_d;
  return 9.0 * r * r * r * integral;
}

ThermoCurve debye_specific_heat(double theta_d, const TemperatureGrid& grid) {
  ThermoCurve curve;
  curve.observable = "debye_specific_heat";
  for (double t : grid.values()) {
    curve.x.push_back(t);
    curve.values.push_back(debye_specific_heat(theta_d, t));
  }
  return curve;
}

ThermoCurve hyperfine_specific_heat_bound(double coupling_kelvin, double spin, double nuclear_spin,
                                          const TemperatureGrid& grid, HyperfineSpectrum mode) {
  if (!is_half_integer_spin(spin) || !is_half_integer_spin(nuclear_spin)) {
    throw InvalidSpinError("hyperfine bound: S and I must be positive half-integers");
  }
  LevelSet levels;
  if (mode == HyperfineSpectrum::kFull) {
    SpinSystem sys;
    sys.spin = spin;
    sys.hyperfine = Hyperfine{coupling_kelvin, nuclear_spin};
    levels = diagonalize(build_hamiltonian(sys, FieldVector{}), false);
  } else {
    const int ni = static_cast<int>(std::lround(2.0 * nuclear_spin)) + 1;
    Eigen::VectorXd e(2 * ni);
    for (int k = 0; k < ni; ++k) {
      const double mi = nuclear_spin - k;
      e(2 * k) = coupling_kelvin * spin * mi;
      e(2 * k + 1) = -coupling_kelvin * spin * mi;
    }
    std::sort(e.data(), e.data() + e.size());
    levels.ground_energy = e(0);
    levels.energies = e.array() - e(0);
  }
  ThermoCurve curve = specific_heat(levels, grid);
  curve.observable = "hyperfine_specific_heat";
  return curve;
}

}  // namespace spinclock
