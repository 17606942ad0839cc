#include "spinclock/orientation.hpp"

#include <cmath>

#include "spinclock/units.hpp"

namespace spinclock {

namespace {

constexpr double kGoldenAngle = 2.39996322972865332;  // pi (3 - sqrt 5)

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::vector<Orientation> fibonacci_sphere(int n, bool fold_octant) {
  std::vector<Orientation> out;
  for (int k = 0; k < n; ++k) {
    const double z = 1.0 - (2.0 * k + 1.0) / n;
    const double phi = std::fmod(kGoldenAngle * k, 2.0 * units::kPi);
    const double theta = std::acos(z);
    if (fold_octant) {
      const double x = std::sin(theta) * std::cos(phi);
      const double y = std::sin(theta) * std::sin(phi);
      if (x < 0.0 || y < 0.0 || z < 0.0) continue;
    }
    out.push_back({rotation_to(theta, phi), 1.0});
  }
  if (out.empty()) throw DomainError("random powder: no orientation survived octant folding");
  for (auto& o : out) o.weight = 1.0 / static_cast<double>(out.size());
  return out;
}

std::vector<Orientation> spherical_cap(double aperture, int n) {
  if (aperture == 0.0) return {{Mat3::Identity(), 1.0}};
  std::vector<Orientation> out;
  const double span = 1.0 - std::cos(aperture);
  for (int k = 0; k < n; ++k) {
    // equal-area rings in cos(theta), golden-angle azimuths
    const double z = 1.0 - span * (k + 0.5) / n;
    const double phi = std::fmod(kGoldenAngle * k, 2.0 * units::kPi);
    out.push_back({rotation_to(std::acos(z), phi), 1.0 / n});
  }
  return out;
}

}  // namespace

SymmetryOp SymmetryOp::identity() { return {Mat3::Identity(), "identity"}; }

SymmetryOp SymmetryOp::inversion() { return {-Mat3::Identity(), "inversion"}; }

SymmetryOp SymmetryOp::c2_b() {
  return {Eigen::Vector3d(-1.0, 1.0, -1.0).asDiagonal().toDenseMatrix(), "C2_b"};
}

SymmetryOp SymmetryOp::mirror_ac() {
  return {Eigen::Vector3d(1.0, -1.0, 1.0).asDiagonal().toDenseMatrix(), "mirror_ac"};
}

std::vector<SymmetryOp> SymmetryOp::p21n() { return {identity(), inversion(), c2_b(), mirror_ac()}; }

void SymmetryOp::validate() const {
  const double ortho = (matrix.transpose() * matrix - Mat3::Identity()).cwiseAbs().maxCoeff();
  const double det = matrix.determinant();
  if (ortho > 1e-12 || std::abs(std::abs(det) - 1.0) > 1e-12) {
    throw ContractViolation("symmetry op '" + label + "' is not orthogonal");
  }
}

std::string scheme_name(const OrientationScheme& scheme) {
  return std::visit(overloaded{
                        [](const SingleAngle&) { return std::string("single"); },
                        [](const Cone&) { return std::string("cone"); },
                        [](const RandomPowder&) { return std::string("powder"); },
                        [](const CrystalSites&) { return std::string("crystal"); },
                        [](const RotationSweep&) { return std::string("sweep"); },
                        [](const AlignedPowderMix&) { return std::string("mix"); },
                    },
                    scheme);
}

Mat3 rotation_to(double theta, double phi) {
  return (Eigen::AngleAxisd(phi, Vec3::UnitZ()) * Eigen::AngleAxisd(theta, Vec3::UnitY()))
      .toRotationMatrix();
}

Mat3 axis_angle_rotation(const Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

std::vector<Orientation> generate_orientations(const OrientationScheme& scheme) {
  return std::visit(
      overloaded{
          [](const SingleAngle& s) -> std::vector<Orientation> {
            return {{rotation_to(s.theta, s.phi), 1.0}};
          },
          [](const Cone& c) -> std::vector<Orientation> {
            if (!(c.aperture >= 0.0) || c.aperture > units::kPi / 2 + 1e-15) {
              throw DomainError("cone aperture must lie in [0, pi/2]");
            }
            if (c.n_points < 1) throw DomainError("cone needs n_points >= 1");
            return spherical_cap(c.aperture, c.n_points);
          },
          [](const RandomPowder& p) -> std::vector<Orientation> {
            if (p.n_points < 1) throw DomainError("powder needs n_points >= 1");
            return fibonacci_sphere(p.n_points, p.fold_octant);
          },
          [](const CrystalSites& c) -> std::vector<Orientation> {
            if (c.frames.empty()) throw DomainError("crystal scheme needs at least one site");
            std::vector<Orientation> out;
            for (const Mat3& f : c.frames) out.push_back({f, 1.0 / c.frames.size()});
            return out;
          },
          [](const RotationSweep& r) -> std::vector<Orientation> {
            if (r.angles.empty()) throw DomainError("rotation sweep needs at least one angle");
            std::vector<Orientation> out;
            for (double a : r.angles) {
              out.push_back({axis_angle_rotation(r.axis, a), 1.0 / r.angles.size()});
            }
            return out;
          },
          [](const AlignedPowderMix& m) -> std::vector<Orientation> {
            if (!(m.aligned_fraction >= 0.0 && m.aligned_fraction <= 1.0)) {
              throw DomainError("aligned fraction must lie in [0, 1]");
            }
            if (m.n_points < 1) throw DomainError("mix needs n_points >= 1");
            std::vector<Orientation> out = fibonacci_sphere(m.n_points, false);
            for (auto& o : out) o.weight *= 1.0 - m.aligned_fraction;
            out.insert(out.begin(), {Mat3::Identity(), m.aligned_fraction});
            return out;
          },
      },
      scheme);
}

std::vector<Mat3> crystal_site_frames(double easy_axis_polar_deg, std::span<const SymmetryOp> ops) {
  const double a = units::degrees_to_radians(easy_axis_polar_deg);
  // Rows are the molecular axes in crystal coordinates (a, b, a x b).
  Mat3 reference;
  reference.row(0) << std::cos(a), 0.0, -std::sin(a);
  reference.row(1) << 0.0, 1.0, 0.0;
  reference.row(2) << std::sin(a), 0.0, std::cos(a);
  std::vector<Mat3> frames;
  for (const SymmetryOp& op : ops) {
    op.validate();
    // -(op mu).H = -mu.(op^T H)
    frames.push_back(reference * op.matrix.transpose());
  }
  return frames;
}

OrientationEnsemble::OrientationEnsemble(const SpinSystem& sys,
                                         std::vector<Orientation> orientations,
                                         const Vec3& field_lab) {
  levels_.reserve(orientations.size());
  weights_.reserve(orientations.size());
  for (const Orientation& o : orientations) {
    const Vec3 h_mol = o.rotation * field_lab;
    LevelSet levels = diagonalize(build_hamiltonian(sys, FieldVector(h_mol)), true);
    const Vec3 u = field_lab.norm() > 0.0 ? Vec3(o.rotation * field_lab.normalized())
                                          : Vec3(o.rotation * Vec3::UnitZ());
    const CMatrix& v = *levels.eigenvectors;
    levels.moment = v.adjoint() * moment_operator(sys, u) * v;
    levels.eigenvectors.reset();
    levels_.push_back(std::move(levels));
    weights_.push_back(o.weight);
  }
}

double OrientationEnsemble::specific_heat(double t) const {
  double c = 0.0;
  for (std::size_t i = 0; i < levels_.size(); ++i) c += weights_[i] * spinclock::specific_heat(levels_[i], t);
  return c;
}

double OrientationEnsemble::magnetization(double t) const {
  double m = 0.0;
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    m += weights_[i] * populations(levels_[i], t).dot(levels_[i].moment->diagonal().real());
  }
  return m;
}

Peak OrientationEnsemble::specific_heat_peak(double t_min, double t_max) const {
  return find_peak([this](double t) { return specific_heat(t); }, t_min, t_max);
}

double OrientationEnsemble::effective_gap(double t_min, double t_max) const {
  return gap_from_t0(specific_heat_peak(t_min, t_max).temperature);
}

ThermoCurve averaged_observable(const SpinSystem& sys, const OrientationScheme& scheme,
                                ObservableKind kind, const TemperatureGrid& grid,
                                const Vec3& field_lab) {
  const std::vector<Orientation> orientations = generate_orientations(scheme);
  ThermoCurve curve;
  curve.field_tesla = field_lab.norm();
  curve.scheme = scheme_name(scheme);
  curve.x.assign(grid.values().begin(), grid.values().end());
  curve.values.assign(grid.size(), 0.0);

  switch (kind) {
    case ObservableKind::kSpecificHeat:
    case ObservableKind::kMagnetization: {
      curve.observable = kind == ObservableKind::kSpecificHeat ? "specific_heat" : "magnetization";
      const OrientationEnsemble ensemble(sys, orientations, field_lab);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        curve.values[i] = kind == ObservableKind::kSpecificHeat ? ensemble.specific_heat(grid[i])
                                                                : ensemble.magnetization(grid[i]);
      }
      break;
    }
    case ObservableKind::kSusceptibility: {
      curve.observable = "chi";
      const double h = field_lab.norm();
      const Vec3 u = h > 0.0 ? Vec3(field_lab / h) : Vec3::UnitZ();
      for (const Orientation& o : orientations) {
        const Vec3 dir = o.rotation * u;
        for (std::size_t i = 0; i < grid.size(); ++i) {
          curve.values[i] += o.weight * susceptibility_isothermal(sys, dir, h, grid[i]);
        }
      }
      break;
    }
  }
  return curve;
}

ThermoCurve magnetization_sweep(const SpinSystem& sys, std::span<const Mat3> site_frames,
                                const Vec3& rotation_axis, const Vec3& start_direction,
                                std::span<const double> angles_deg, double field_tesla, double t) {
  if (site_frames.empty()) throw DomainError("magnetization sweep needs at least one site");
  ThermoCurve curve;
  curve.observable = "magnetization";
  curve.field_tesla = field_tesla;
  curve.scheme = "sweep";
  const Vec3 start = start_direction.normalized();
  for (double angle : angles_deg) {
    const Vec3 dir =
        axis_angle_rotation(rotation_axis, units::degrees_to_radians(angle)) * start;
    double m = 0.0;
    for (const Mat3& frame : site_frames) {
      m += moment_along(sys, frame * dir, field_tesla, t);
    }
    curve.x.push_back(angle);
    curve.values.push_back(m / static_cast<double>(site_frames.size()));
  }
  return curve;
}

}  // namespace spinclock
