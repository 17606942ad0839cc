#include "spinclock/spin_system.hpp"

#include <cmath>
#include <sstream>

#include "spinclock/units.hpp"

namespace spinclock {

namespace {

int multiplicity(double s) { return static_cast<int>(std::lround(2.0 * s)) + 1; }

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

void check_hermitian(double defect) {
  if (!(defect <= 1e-10)) {
    std::ostringstream os;
    os << "diagonalize: input is not Hermitian (relative defect " << defect << ")";
    throw ContractViolation(os.str());
  }
}

LevelSet shift_to_ground(Eigen::VectorXd values) {
  LevelSet out;
  out.ground_energy = values.size() > 0 ? values(0) : 0.0;
  out.energies = values.array() - out.ground_energy;
  if (out.energies.size() > 0) out.energies(0) = 0.0;
  return out;
}

}  // namespace

bool is_half_integer_spin(double s) {
  if (!std::isfinite(s) || s < 0.5) return false;
  const double twice = 2.0 * s;
  return std::abs(twice - std::round(twice)) < 1e-12;
}

void SpinSystem::validate() const {
  if (!is_half_integer_spin(spin)) {
    throw InvalidSpinError("spin S must be a positive half-integer, got " + std::to_string(spin));
  }
  if (hyperfine && !is_half_integer_spin(hyperfine->nuclear_spin)) {
    throw InvalidSpinError("nuclear spin I must be a positive half-integer, got " +
                           std::to_string(hyperfine->nuclear_spin));
  }
  for (double gi : g) {
    if (!std::isfinite(gi)) throw InvalidSpinError("g-tensor entries must be finite");
  }
  if (!std::isfinite(D) || !std::isfinite(E)) throw InvalidSpinError("D and E must be finite");
}

Warnings SpinSystem::warnings() const {
  Warnings w;
  if (std::abs(E) > std::abs(D) / 3.0 + 1e-15) {
    w.emplace_back("|E| > |D|/3: parameters are outside the conventional ZFS frame");
  }
  return w;
}

int SpinSystem::electron_dimension() const { return multiplicity(spin); }

int SpinSystem::nuclear_dimension() const {
  return hyperfine ? multiplicity(hyperfine->nuclear_spin) : 1;
}

FieldVector FieldVector::polar(double h, double theta, double phi) {
  return {h * std::sin(theta) * std::cos(phi), h * std::sin(theta) * std::sin(phi),
          h * std::cos(theta)};
}

Vec3 FieldVector::direction() const {
  const double n = tesla.norm();
  if (n == 0.0) return Vec3::UnitZ();
  return tesla / n;
}

SpinOperators spin_operators(double spin) {
  if (!is_half_integer_spin(spin)) {
    throw InvalidSpinError("spin_operators: S must be a positive half-integer, got " +
                           std::to_string(spin));
  }
  const int dim = multiplicity(spin);
  SpinOperators ops{CMatrix::Zero(dim, dim), CMatrix::Zero(dim, dim), CMatrix::Zero(dim, dim)};
  CMatrix raise = CMatrix::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) {
    const double m = spin - k;
    ops.z(k, k) = m;
    if (k > 0) {
      // <m+1| S+ |m> sits at row k-1, column k.
      raise(k - 1, k) = std::sqrt(spin * (spin + 1.0) - m * (m + 1.0));
    }
  }
  const CMatrix lower = raise.adjoint();
  ops.x = 0.5 * (raise + lower);
  ops.y = Complex(0.0, -0.5) * (raise - lower);
  return ops;
}

CMatrix build_hamiltonian(const SpinSystem& sys, const FieldVector& field) {
  sys.validate();
  if (!field.tesla.allFinite()) throw DomainError("field components must be finite");
  const SpinOperators s = spin_operators(sys.spin);
  const double mub = units::kBohrMagnetonKelvinPerTesla;
  CMatrix h = mub * (sys.g[0] * field.tesla.x() * s.x + sys.g[1] * field.tesla.y() * s.y +
                     sys.g[2] * field.tesla.z() * s.z);
  h += sys.D * s.z * s.z + sys.E * (s.x * s.x - s.y * s.y);
  if (!sys.hyperfine) return h;

  const SpinOperators n = spin_operators(sys.hyperfine->nuclear_spin);
  const CMatrix id_n = CMatrix::Identity(n.z.rows(), n.z.cols());
  CMatrix full = kron(h, id_n);
  full += sys.hyperfine->coupling * (kron(s.x, n.x) + kron(s.y, n.y) + kron(s.z, n.z));
  return full;
}

CMatrix moment_operator(const SpinSystem& sys, const Vec3& direction) {
  const SpinOperators s = spin_operators(sys.spin);
  CMatrix mu = -(sys.g[0] * direction.x() * s.x + sys.g[1] * direction.y() * s.y +
                 sys.g[2] * direction.z() * s.z);
  if (!sys.hyperfine) return mu;
  const int dn = sys.nuclear_dimension();
  return kron(mu, CMatrix::Identity(dn, dn));
}

double hermiticity_defect(const CMatrix& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  if (m.size() == 0) return 0.0;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.adjoint()).cwiseAbs().maxCoeff() / scale;
}

std::vector<int> LevelSet::degeneracies() const {
  std::vector<int> groups;
  for (Eigen::Index i = 0; i < energies.size(); ++i) {
    if (i > 0 && energies(i) - energies(i - 1) <= degeneracy_tolerance) {
      ++groups.back();
    } else {
      groups.push_back(1);
    }
  }
  return groups;
}

std::vector<double> LevelSet::distinct_levels() const {
  std::vector<double> out;
  for (Eigen::Index i = 0; i < energies.size(); ++i) {
    if (i == 0 || energies(i) - energies(i - 1) > degeneracy_tolerance) out.push_back(energies(i));
  }
  return out;
}

LevelSet diagonalize(const CMatrix& hamiltonian, bool with_vectors) {
  check_hermitian(hermiticity_defect(hamiltonian));
  if (hamiltonian.size() == 0) return {};
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(
      hamiltonian, with_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("diagonalize: eigensolver failed");
  LevelSet out = shift_to_ground(solver.eigenvalues());
  if (with_vectors) out.eigenvectors = solver.eigenvectors();
  return out;
}

LevelSet diagonalize(const RMatrix& hamiltonian, bool with_vectors) {
  if (hamiltonian.rows() != hamiltonian.cols()) {
    throw ContractViolation("diagonalize: matrix is not square");
  }
  if (hamiltonian.size() == 0) return {};
  const double scale = std::max(1.0, hamiltonian.cwiseAbs().maxCoeff());
  check_hermitian((hamiltonian - hamiltonian.transpose()).cwiseAbs().maxCoeff() / scale);
  Eigen::SelfAdjointEigenSolver<RMatrix> solver(
      hamiltonian, with_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("diagonalize: eigensolver failed");
  LevelSet out = shift_to_ground(solver.eigenvalues());
  if (with_vectors) out.eigenvectors = solver.eigenvectors().cast<Complex>();
  return out;
}

LevelSet solve(const SpinSystem& sys, const FieldVector& field, bool with_vectors) {
  LevelSet levels = diagonalize(build_hamiltonian(sys, field), true);
  const CMatrix& v = *levels.eigenvectors;
  levels.moment = v.adjoint() * moment_operator(sys, field.direction()) * v;
  if (!with_vectors) levels.eigenvectors.reset();
  return levels;
}

double clock_gap(const SpinSystem& sys, Warnings* warnings) {
  sys.validate();
  if (std::abs(sys.spin - 1.0) > 1e-12) {
    throw UnsupportedFormulaError(
        "clock_gap: Delta = 2|E| only holds for S = 1; diagonalize the Hamiltonian instead");
  }
  if (sys.D >= 0.0 && warnings) {
    warnings->emplace_back("clock_gap: D >= 0, the lowest pair is not the m = +-1 doublet");
  }
  return 2.0 * std::abs(sys.E);
}

double zeeman_gap(const SpinSystem& sys, double field_z_tesla) {
  const double delta = clock_gap(sys);
  const double zeeman =
      2.0 * sys.g[2] * units::kBohrMagnetonKelvinPerTesla * sys.spin * field_z_tesla;
  return std::hypot(zeeman, delta);
}

}  // namespace spinclock
