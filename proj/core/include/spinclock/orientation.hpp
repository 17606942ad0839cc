#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "spinclock/spin_system.hpp"
#include "spinclock/thermo.hpp"

namespace spinclock {

using Mat3 = Eigen::Matrix3d;

/// One molecular orientation: `rotation` maps lab-frame vectors to molecular-frame
/// components (H_mol = rotation * H_lab). It may be improper for sites generated
/// by inversion or mirror operations; Zeeman spectra are invariant under H -> -H.
struct Orientation {
  Mat3 rotation = Mat3::Identity();
  double weight = 1.0;
};

/// Point operation acting on crystal coordinates (a, b, a x b).
struct SymmetryOp {
  Mat3 matrix = Mat3::Identity();
  std::string label = "identity";

  static SymmetryOp identity();
  static SymmetryOp inversion();
  static SymmetryOp c2_b();
  static SymmetryOp mirror_ac();
  /// The four point operations of P2_1/n: {1, i, C2_b, sigma_ac}.
  static std::vector<SymmetryOp> p21n();

  /// Throws ContractViolation unless R^T R = 1 within 1e-12 and det = +-1.
  void validate() const;
};

// Texture/sample descriptions. For powder-like schemes the sample symmetry axis
// (and the default field direction) is lab z.
struct SingleAngle {
  double theta = 0.0;  // polar angle of the lab field from molecular z (radians)
  double phi = 0.0;    // azimuth from molecular x (radians)
};
struct Cone {
  double aperture = 0.0;  // radians, in [0, pi/2]
  int n_points = 350;
};
struct RandomPowder {
  int n_points = 350;
  /// Keep only Fibonacci points in the first octant. Valid for every Hamiltonian in
  /// this library (spectra are even in each field component separately).
  bool fold_octant = false;
};
struct CrystalSites {
  std::vector<Mat3> frames;  // one per site, from crystal_site_frames()
};
struct RotationSweep {
  Vec3 axis = Vec3::UnitZ();
  std::vector<double> angles;  // radians
};
/// Weighted mix of a field-aligned sample and a random powder.
struct AlignedPowderMix {
  double aligned_fraction = 0.5;
  int n_points = 350;
};

using OrientationScheme =
    std::variant<SingleAngle, Cone, RandomPowder, CrystalSites, RotationSweep, AlignedPowderMix>;

std::string scheme_name(const OrientationScheme& scheme);

/// Deterministic orientation set with weights summing to 1.
/// Throws DomainError for invalid apertures, counts or fractions.
std::vector<Orientation> generate_orientations(const OrientationScheme& scheme);

/// R = Rz(phi) Ry(theta), so R * z is the unit vector at polar theta, azimuth phi.
/// Used as an Orientation it places a lab-z field along that molecular direction.
Mat3 rotation_to(double theta, double phi);
/// Right-handed rotation by `angle` about `axis`.
Mat3 axis_angle_rotation(const Vec3& axis, double angle);

/// Molecular frame of the reference site: z in the ac plane at `easy_axis_polar_deg`
/// from the normal to the ab plane, y along b. Site k uses frame * op_k^T.
std::vector<Mat3> crystal_site_frames(double easy_axis_polar_deg, std::span<const SymmetryOp> ops);

enum class ObservableKind { kSpecificHeat, kMagnetization, kSusceptibility };

/// Spectra of one system at a fixed lab field for every orientation of a scheme.
/// Reused across temperatures; specific heat is averaged before any peak search.
class OrientationEnsemble {
 public:
  OrientationEnsemble(const SpinSystem& sys, std::vector<Orientation> orientations,
                      const Vec3& field_lab);

  double specific_heat(double t) const;
  /// Weighted moment along the lab field direction (mu_B).
  double magnetization(double t) const;
  Peak specific_heat_peak(double t_min, double t_max) const;
  /// Effective gap k_B T0 / 0.4168 of the averaged specific heat.
  double effective_gap(double t_min, double t_max) const;

  std::size_t size() const { return levels_.size(); }
  const LevelSet& levels(std::size_t i) const { return levels_[i]; }

 private:
  std::vector<LevelSet> levels_;
  std::vector<double> weights_;
};

/// Weighted average of per-orientation curves of `kind` over the temperature grid.
/// Susceptibility is evaluated along the lab field direction (z when H_lab = 0).
ThermoCurve averaged_observable(const SpinSystem& sys, const OrientationScheme& scheme,
                                ObservableKind kind, const TemperatureGrid& grid,
                                const Vec3& field_lab);

/// Site-averaged magnetization (mu_B) while the crystal rotates: the lab field
/// starts along `start_direction` (crystal coordinates) and is rotated about
/// `rotation_axis` by each angle (degrees). Returns M versus angle.
ThermoCurve magnetization_sweep(const SpinSystem& sys, std::span<const Mat3> site_frames,
                                const Vec3& rotation_axis, const Vec3& start_direction,
                                std::span<const double> angles_deg, double field_tesla, double t);

}  // namespace spinclock
