#pragma once

#include <array>
#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "spinclock/error.hpp"

namespace spinclock {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;
using Vec3 = Eigen::Vector3d;

/// Isotropic contact term A S.I between the electronic and one nuclear spin.
struct Hyperfine {
  double coupling = 0.0;      // A_hf / k_B in kelvin
  double nuclear_spin = 0.5;  // I

  friend bool operator==(const Hyperfine&, const Hyperfine&) = default;
};

/// Single-molecule spin Hamiltonian parameters, energies in kelvin.
///
/// H = mu_B sum_a g_a H_a S_a + D S_z^2 + E (S_x^2 - S_y^2) [+ A S.I]
///
/// The g-tensor is diagonal in the molecular (anisotropy) frame; any field
/// direction is expressed in that frame before building the Hamiltonian.
struct SpinSystem {
  double spin = 1.0;
  double D = 0.0;
  double E = 0.0;
  std::array<double, 3> g{2.0, 2.0, 2.0};
  std::optional<Hyperfine> hyperfine;

  /// Throws InvalidSpinError when S or I are not positive half-integers.
  void validate() const;
  /// Conventional-frame checks that do not invalidate the system (|E| > |D|/3).
  Warnings warnings() const;

  int electron_dimension() const;
  int nuclear_dimension() const;
  int dimension() const { return electron_dimension() * nuclear_dimension(); }

  friend bool operator==(const SpinSystem&, const SpinSystem&) = default;
};

/// Magnetic field in tesla, expressed in the molecular frame.
struct FieldVector {
  Vec3 tesla = Vec3::Zero();

  FieldVector() = default;
  explicit FieldVector(const Vec3& v) : tesla(v) {}
  FieldVector(double hx, double hy, double hz) : tesla(hx, hy, hz) {}

  static FieldVector along_z(double h) { return {0.0, 0.0, h}; }
  /// Field of magnitude `h` at polar angle `theta` and azimuth `phi` (radians) from z.
  static FieldVector polar(double h, double theta, double phi = 0.0);

  double magnitude() const { return tesla.norm(); }
  /// Unit vector along the field; z when the field vanishes.
  Vec3 direction() const;
};

struct SpinOperators {
  CMatrix x;
  CMatrix y;
  CMatrix z;
};

/// Angular-momentum matrices in the |S, m> basis ordered m = S, S-1, ..., -S.
SpinOperators spin_operators(double spin);

/// True when 2*s is a positive integer.
bool is_half_integer_spin(double s);

/// Hamiltonian in kelvin, basis |m_S> (x) |m_I> with the electron index major.
CMatrix build_hamiltonian(const SpinSystem& sys, const FieldVector& field);

/// Moment operator mu.u in units of mu_B (mu = -g mu_B S), identity-extended
/// over the nuclear space when hyperfine is present.
CMatrix moment_operator(const SpinSystem& sys, const Vec3& direction);

/// Eigenvalues (and optionally eigenvectors) of one Hamiltonian.
struct LevelSet {
  Eigen::VectorXd energies;  // ascending, energies[0] == 0
  double ground_energy = 0.0;  // absolute energy removed from every level
  double degeneracy_tolerance = 1e-8;
  std::optional<CMatrix> eigenvectors;  // columns match `energies`
  std::optional<CMatrix> moment;        // <i|mu.u|j> in mu_B, eigenbasis

  std::size_t size() const { return static_cast<std::size_t>(energies.size()); }
  /// Multiplicities of consecutive level groups within `degeneracy_tolerance`.
  std::vector<int> degeneracies() const;
  /// Distinct level values (one per degenerate group).
  std::vector<double> distinct_levels() const;
};

/// Checked Hermitian eigensolve. Throws ContractViolation for non-Hermitian input.
LevelSet diagonalize(const CMatrix& hamiltonian, bool with_vectors = true);
/// Real-symmetric fast path used for large product-basis Hamiltonians.
LevelSet diagonalize(const RMatrix& hamiltonian, bool with_vectors = true);

/// Diagonalizes `build_hamiltonian(sys, field)` and attaches the moment matrix
/// along the field direction (z when the field vanishes).
LevelSet solve(const SpinSystem& sys, const FieldVector& field, bool with_vectors = true);

/// Zero-field tunnel splitting 2|E| of an easy-axis S = 1 system, in kelvin.
/// Throws UnsupportedFormulaError for S != 1; warns when D >= 0.
double clock_gap(const SpinSystem& sys, Warnings* warnings = nullptr);

/// Closed-form gap of the lowest pair near the anti-crossing:
/// sqrt((2 g_z mu_B S H_z)^2 + Delta^2), in kelvin.
double zeeman_gap(const SpinSystem& sys, double field_z_tesla);

/// Largest absolute entry of H - H^dagger relative to max(1, max |H_ij|).
double hermiticity_defect(const CMatrix& m);

}  // namespace spinclock
