#include "spinclock/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "spinclock/orientation.hpp"
#include "spinclock/units.hpp"

namespace spinclock {

std::string to_string(ResponseKind kind) {
  switch (kind) {
    case ResponseKind::kMagnetization:
      return "magnetization";
    case ResponseKind::kChiT:
      return "chiT";
    case ResponseKind::kSpecificHeat:
      return "specific_heat";
  }
  return "magnetization";
}

ResponseKind parse_response_kind(const std::string& text) {
  if (text == "magnetization" || text == "M") return ResponseKind::kMagnetization;
  if (text == "chiT") return ResponseKind::kChiT;
  if (text == "specific_heat" || text == "c/R") return ResponseKind::kSpecificHeat;
  throw ConfigError("unknown response kind '" + text + "' (magnetization, chiT, specific_heat)");
}

void Dataset::validate() const {
  if (points.empty()) throw DomainError("dataset has no points");
  for (const DataPoint& p : points) {
    if (!(p.t > 0.0) || !std::isfinite(p.t)) throw DomainError("data point needs T > 0");
    if (!std::isfinite(p.field) || !std::isfinite(p.angle) || !std::isfinite(p.value)) {
      throw DomainError("data point has a non-finite entry");
    }
    if (p.sigma && !(*p.sigma > 0.0)) throw DomainError("sigma must be > 0");
  }
}

bool Dataset::weighted() const {
  return !points.empty() &&
         std::all_of(points.begin(), points.end(), [](const DataPoint& p) { return p.sigma.has_value(); });
}

namespace {

// Builds H(field) for one system without re-deriving spin matrices each call.
class FastHamiltonian {
 public:
  explicit FastHamiltonian(const SpinSystem& sys) : sys_(sys) {
    sys.validate();
    if (!sys.hyperfine) {
      ops_ = spin_operators(sys.spin);
      h0_ = sys.D * ops_.z * ops_.z + sys.E * (ops_.x * ops_.x - ops_.y * ops_.y);
    }
  }

  CMatrix operator()(const Vec3& field) const {
    if (sys_.hyperfine) return build_hamiltonian(sys_, FieldVector(field));
    const double mb = units::kBohrMagnetonKelvinPerTesla;
    return h0_ + mb * (sys_.g[0] * field.x() * ops_.x + sys_.g[1] * field.y() * ops_.y +
                       sys_.g[2] * field.z() * ops_.z);
  }

  /// Energies and diagonal moments along unit vector `u` with field h*u.
  void spectrum(const Vec3& u, double h, Eigen::VectorXd& energies, Eigen::VectorXd& moments) const {
    const CMatrix ham = (*this)(h * u);
    const CMatrix mu = moment(u);
    if (ham.rows() == 3) {
      const Eigen::Matrix3cd h3 = ham;
      const Eigen::Matrix3cd mu3 = mu;
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> es(h3);
      energies = es.eigenvalues();
      const Eigen::Matrix3cd v = es.eigenvectors();
      moments = (v.adjoint() * mu3 * v).diagonal().real();
    } else {
      Eigen::SelfAdjointEigenSolver<CMatrix> es(ham);
      energies = es.eigenvalues();
      const CMatrix& v = es.eigenvectors();
      moments = (v.adjoint() * mu * v).diagonal().real();
    }
    energies.array() -= energies(0);
  }

  CMatrix moment(const Vec3& u) const {
    if (sys_.hyperfine) return moment_operator(sys_, u);
    return -(sys_.g[0] * u.x() * ops_.x + sys_.g[1] * u.y() * ops_.y + sys_.g[2] * u.z() * ops_.z);
  }

 private:
  const SpinSystem& sys_;
  SpinOperators ops_;
  CMatrix h0_;
};

double thermal_average(const Eigen::VectorXd& energies, const Eigen::VectorXd& values, double t) {
  double z = 0.0;
  double acc = 0.0;
  for (Eigen::Index n = 0; n < energies.size(); ++n) {
    const double w = std::exp(-energies(n) / t);
    z += w;
    acc += w * values(n);
  }
  return acc / z;
}

double heat_capacity(const Eigen::VectorXd& energies, double t) {
  double z = 0.0;
  double e1 = 0.0;
  double e2 = 0.0;
  for (Eigen::Index n = 0; n < energies.size(); ++n) {
    const double x = energies(n) / t;
    const double w = std::exp(-x);
    z += w;
    e1 += w * x;
    e2 += w * x * x;
  }
  e1 /= z;
  return std::max(0.0, e2 / z - e1 * e1);
}

std::vector<Orientation> powder_set(const PowderOptions& options) {
  return generate_orientations(RandomPowder{options.n_points, options.fold_octant});
}

template <class Key>
std::map<Key, std::vector<std::size_t>> group_points(const std::vector<DataPoint>& points, Key (*key)(const DataPoint&)) {
  std::map<Key, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < points.size(); ++i) groups[key(points[i])].push_back(i);
  return groups;
}

double field_key(const DataPoint& p) { return p.field; }
std::pair<double, double> field_angle_key(const DataPoint& p) { return {p.field, p.angle}; }

std::vector<double> residual_weights(const Dataset& data) {
  const bool weighted = data.weighted();
  std::vector<double> w(data.points.size(), 1.0);
  if (weighted) {
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = 1.0 / *data.points[i].sigma;
  }
  return w;
}

double relative_rms(double ssr, const Dataset& data, const std::vector<double>& weights) {
  double scale = 0.0;
  for (std::size_t i = 0; i < data.points.size(); ++i) {
    scale = std::max(scale, std::abs(data.points[i].value * weights[i]));
  }
  if (scale == 0.0) return 0.0;
  return std::sqrt(ssr / static_cast<double>(data.points.size())) / scale;
}

}  // namespace

std::vector<double> powder_magnetization(const SpinSystem& sys, double tip,
                                         const std::vector<DataPoint>& points,
                                         const PowderOptions& options) {
  const FastHamiltonian ham(sys);
  const auto orientations = powder_set(options);
  const auto groups = group_points(points, &field_key);
  std::vector<double> out(points.size(), 0.0);
  Eigen::VectorXd energies;
  Eigen::VectorXd moments;
  for (const Orientation& o : orientations) {
    const Vec3 u = o.rotation.col(2);
    for (const auto& [h, idx] : groups) {
      if (h == 0.0) continue;
      ham.spectrum(u, h, energies, moments);
      for (std::size_t i : idx) out[i] += o.weight * thermal_average(energies, moments, points[i].t);
    }
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    out[i] += tip * points[i].field / units::kMolarChiPerBohrMagnetonPerTesla;
  }
  return out;
}

double susceptibility_zero_field(const SpinSystem& sys, const Vec3& direction, double t) {
  if (!(t > 0.0)) throw DomainError("susceptibility: temperature must be > 0");
  const FastHamiltonian ham(sys);
  const Vec3 u = direction.normalized();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(ham(Vec3::Zero()));
  Eigen::VectorXd e = es.eigenvalues();
  e.array() -= e(0);
  const CMatrix mu = es.eigenvectors().adjoint() * ham.moment(u) * es.eigenvectors();
  Eigen::VectorXd p = (-e.array() / t).exp();
  p /= p.sum();
  // Linear response: Curie terms inside degenerate groups, van Vleck terms across.
  double chi = 0.0;
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    for (Eigen::Index j = 0; j < e.size(); ++j) {
      const double m2 = std::norm(mu(i, j));
      const double gap = e(j) - e(i);
      if (std::abs(gap) < 1e-9) {
        chi += m2 * p(i) / t;
      } else {
        chi += m2 * (p(i) - p(j)) / gap;
      }
    }
  }
  return chi * units::kBohrMagnetonKelvinPerTesla * units::kMolarChiPerBohrMagnetonPerTesla;
}

std::vector<double> powder_chi_t(const SpinSystem& sys, double tip, const std::vector<DataPoint>& points,
                                 const PowderOptions& options) {
  std::vector<double> out(points.size(), 0.0);
  std::vector<DataPoint> finite;
  std::vector<std::size_t> finite_index;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].field == 0.0) {
      const double t = points[i].t;
      const double chi = (susceptibility_zero_field(sys, Vec3::UnitX(), t) +
                          susceptibility_zero_field(sys, Vec3::UnitY(), t) +
                          susceptibility_zero_field(sys, Vec3::UnitZ(), t)) /
                         3.0;
      out[i] = (chi + tip) * t;
    } else {
      finite.push_back(points[i]);
      finite_index.push_back(i);
    }
  }
  if (!finite.empty()) {
    const std::vector<double> m = powder_magnetization(sys, tip, finite, options);
    for (std::size_t k = 0; k < finite.size(); ++k) {
      const double chi = units::kMolarChiPerBohrMagnetonPerTesla * m[k] / finite[k].field;
      out[finite_index[k]] = chi * finite[k].t;
    }
  }
  return out;
}

std::vector<double> crystal_specific_heat(const SpinSystem& sys, const std::vector<DataPoint>& points) {
  const FastHamiltonian ham(sys);
  const auto groups = group_points(points, &field_angle_key);
  std::vector<double> out(points.size(), 0.0);
  for (const auto& [key, idx] : groups) {
    const double theta = units::degrees_to_radians(key.second);
    const Vec3 field = key.first * Vec3(std::sin(theta), 0.0, std::cos(theta));
    Eigen::VectorXd e = Eigen::SelfAdjointEigenSolver<CMatrix>(ham(field), Eigen::EigenvaluesOnly).eigenvalues();
    e.array() -= e(0);
    for (std::size_t i : idx) out[i] = heat_capacity(e, points[i].t);
  }
  return out;
}

ZfsFitReport fit_zfs_powder_magnetization(const Dataset& data, const ZfsFitOptions& options) {
  data.validate();
  if (data.kind != ResponseKind::kMagnetization) throw DomainError("ZFS fit needs magnetization data");
  if (!(options.d_min_cm > 0.0 && options.d_max_cm > options.d_min_cm)) {
    throw DomainError("ZFS fit needs 0 < d_min < d_max");
  }
  ZfsFitReport report;
  std::set<double> temperatures;
  for (const DataPoint& p : data.points) temperatures.insert(p.t);
  if (temperatures.size() < 2) {
    report.warnings.emplace_back("single-temperature data: D is nearly unidentifiable");
  }

  const std::vector<double> weights = residual_weights(data);
  auto residuals = [&](std::span<const double> x, std::vector<double>& r) {
    SpinSystem sys;
    sys.spin = options.spin;
    sys.D = units::wavenumber_to_kelvin(x[0]);
    sys.E = units::wavenumber_to_kelvin(x[1] * std::abs(x[0]));
    sys.g = {options.g, options.g, options.g};
    const std::vector<double> model = powder_magnetization(sys, options.tip, data.points, options.powder);
    for (std::size_t i = 0; i < model.size(); ++i) r.push_back((model[i] - data.points[i].value) * weights[i]);
    return true;
  };

  auto run_branch = [&](int sign) {
    FitProblem problem;
    const double lo = sign > 0 ? options.d_min_cm : -options.d_max_cm;
    const double hi = sign > 0 ? options.d_max_cm : -options.d_min_cm;
    problem.parameters = {{"D_cm", sign * 2.0, lo, hi, false, false}, {"eta", 0.05, 0.0, 1.0 / 3.0, false, false}};
    problem.parameters[0].init = std::clamp(problem.parameters[0].init, lo, hi);
    problem.options.starts = options.starts_per_sign;
    problem.options.seed = options.seed + (sign > 0 ? 1u : 0u);
    problem.options.threads = options.threads;
    problem.options.absolute_sigma = data.weighted();
    ZfsBranch branch;
    branch.sign = sign;
    branch.fit = least_squares(problem, residuals);
    if (branch.fit.status == FitStatus::kFailed) return branch;
    const double d = branch.fit.best[0];
    const double eta = branch.fit.best[1];
    branch.D_cm = d;
    branch.E_cm = eta * std::abs(d);
    branch.ssr = branch.fit.ssr;
    branch.relative_rms = relative_rms(branch.ssr, data, weights);
    branch.at_boundary = std::abs(std::abs(d) - options.d_min_cm) <= 1e-6 * (options.d_max_cm - options.d_min_cm);
    if (branch.fit.covariance.rows() == 2) {
      Eigen::Matrix2d jac;
      jac << 1.0, 0.0, eta * (d < 0 ? -1.0 : 1.0), std::abs(d);
      const Eigen::Matrix2d cov = jac * branch.fit.covariance * jac.transpose();
      branch.D_uncertainty = std::sqrt(std::max(0.0, cov(0, 0)));
      branch.E_uncertainty = std::sqrt(std::max(0.0, cov(1, 1)));
    }
    return branch;
  };

  report.negative = run_branch(-1);
  report.positive = run_branch(+1);

  const ZfsBranch& best = report.best();
  report.combined = best.fit;
  report.combined.starts = report.negative.fit.starts;
  report.combined.starts.insert(report.combined.starts.end(), report.positive.fit.starts.begin(),
                                report.positive.fit.starts.end());
  for (const ZfsBranch* b : {&report.negative, &report.positive}) {
    if (b->fit.status == FitStatus::kFailed) {
      report.warnings.emplace_back(std::string(b->sign < 0 ? "negative" : "positive") + "-D branch failed");
    } else if (b->at_boundary) {
      report.warnings.emplace_back(std::string(b->sign < 0 ? "negative" : "positive") +
                                   "-D branch ends on D = 0: no local minimum of that sign");
    }
  }
  report.sign_ambiguous = !report.negative.at_boundary && !report.positive.at_boundary &&
                          report.negative.fit.status != FitStatus::kFailed &&
                          report.positive.fit.status != FitStatus::kFailed &&
                          report.negative.relative_rms < options.quality_threshold &&
                          report.positive.relative_rms < options.quality_threshold;
  if (report.sign_ambiguous) {
    report.warnings.emplace_back("both signs of D fit the powder data: the sign is not determined");
  }
  return report;
}

AxisAngleFit fit_axis_angle_from_heatcap(const Dataset& data, const SpinSystem& sys,
                                         const AxisAngleFitOptions& options) {
  data.validate();
  sys.validate();
  if (data.kind != ResponseKind::kSpecificHeat) throw DomainError("axis-angle fit needs specific-heat data");
  if (options.fit_zfs && !(options.d_lower_cm < options.d_upper_cm && options.d_lower_cm * options.d_upper_cm > 0.0)) {
    throw DomainError("D bounds must be ordered and must not include 0");
  }
  AxisAngleFit out;
  std::set<double> fields;
  for (const DataPoint& p : data.points) fields.insert(std::abs(p.field));
  if (*fields.rbegin() == 0.0) {
    out.angle_identifiable = false;
    out.warnings.emplace_back("all data at zero field: the axis angle is unidentifiable");
  } else if (fields.size() < 3 || *fields.rbegin() < 0.5) {
    out.warnings.emplace_back("fewer than 3 fields or none >= 0.5 T: weak angle leverage");
  }

  const std::vector<double> weights = residual_weights(data);
  FitProblem problem;
  problem.parameters.push_back({"angle_deg", std::clamp(options.angle_init_deg, 0.0, 90.0), 0.0, 90.0, false, false});
  const double d0 = units::kelvin_to_wavenumber(sys.D);
  const double e0 = std::abs(units::kelvin_to_wavenumber(sys.E));
  problem.parameters.push_back({"D_cm", std::clamp(d0, options.d_lower_cm, options.d_upper_cm), options.d_lower_cm,
                                options.d_upper_cm, !options.fit_zfs, false});
  problem.parameters.push_back({"E_cm", std::clamp(e0, 0.0, options.e_max_cm), 0.0, options.e_max_cm,
                                !options.fit_zfs, false});
  if (!options.fit_zfs) {
    problem.parameters[1].init = d0;
    problem.parameters[2].init = e0;
  }
  problem.options.starts = options.starts;
  problem.options.seed = options.seed;
  problem.options.threads = options.threads;
  problem.options.absolute_sigma = data.weighted();

  auto make_system = [&](std::span<const double> x) {
    SpinSystem s = sys;
    s.D = units::wavenumber_to_kelvin(x[1]);
    s.E = units::wavenumber_to_kelvin(x[2]);
    return s;
  };
  auto residuals = [&](std::span<const double> x, std::vector<double>& r) {
    std::vector<DataPoint> pts = data.points;
    for (DataPoint& p : pts) p.angle = x[0];
    const std::vector<double> model = crystal_specific_heat(make_system(x), pts);
    for (std::size_t i = 0; i < model.size(); ++i) r.push_back((model[i] - data.points[i].value) * weights[i]);
    return true;
  };
  out.fit = least_squares(problem, residuals);
  out.warnings.insert(out.warnings.end(), out.fit.warnings.begin(), out.fit.warnings.end());
  if (out.fit.status == FitStatus::kFailed) return out;
  out.angle_deg = out.fit.best[0];
  out.angle_uncertainty_deg = out.fit.uncertainty("angle_deg");
  out.system = make_system(out.fit.best);
  return out;
}

ChiTFit fit_chi_t(const Dataset& data, const SpinSystem& sys, const ChiTFitOptions& options) {
  data.validate();
  sys.validate();
  if (data.kind != ResponseKind::kChiT) throw DomainError("chi*T fit needs chiT data");
  const double g0 = std::clamp((sys.g[0] + sys.g[1] + sys.g[2]) / 3.0, options.g_lower, options.g_upper);
  FitProblem problem;
  problem.parameters = {
      {"g", g0, options.g_lower, options.g_upper, !options.fit_g, false},
      {"tip", std::clamp(options.tip, options.tip_lower, options.tip_upper), options.tip_lower, options.tip_upper,
       !options.fit_tip, false},
  };
  if (!options.fit_tip) problem.parameters[1].init = options.tip;
  problem.options.starts = options.starts;
  problem.options.seed = options.seed;
  problem.options.absolute_sigma = data.weighted();
  const std::vector<double> weights = residual_weights(data);
  auto residuals = [&](std::span<const double> x, std::vector<double>& r) {
    SpinSystem s = sys;
    s.g = {x[0], x[0], x[0]};
    const std::vector<double> model = powder_chi_t(s, x[1], data.points, options.powder);
    for (std::size_t i = 0; i < model.size(); ++i) r.push_back((model[i] - data.points[i].value) * weights[i]);
    return true;
  };
  ChiTFit out;
  out.fit = least_squares(problem, residuals);
  if (out.fit.status != FitStatus::kFailed) {
    out.g = out.fit.best[0];
    out.tip = out.fit.best[1];
  }
  return out;
}

}  // namespace spinclock
