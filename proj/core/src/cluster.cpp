#include "spinclock/cluster.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <utility>

namespace spinclock {

long ClusterModel::dimension() const {
  long dim = 1;
  for (const SpinSystem& s : sites) {
    dim *= s.dimension();
    if (dim > std::numeric_limits<int>::max() / 64) return dim;
  }
  return dim;
}

void ClusterModel::validate() const {
  if (sites.empty()) throw DomainError("cluster needs at least one site");
  for (const SpinSystem& s : sites) s.validate();
  const long dim = dimension();
  if (dim > kClusterDimensionCap) {
    throw ResourceError("cluster Hilbert dimension " + std::to_string(dim) + " exceeds cap " +
                        std::to_string(kClusterDimensionCap));
  }
  std::set<std::pair<int, int>> seen;
  const int n = static_cast<int>(sites.size());
  for (const Bond& b : bonds) {
    if (b.i < 0 || b.j < 0 || b.i >= n || b.j >= n || b.i == b.j) {
      throw DomainError("bond (" + std::to_string(b.i) + "," + std::to_string(b.j) +
                        ") references an invalid site");
    }
    if (!seen.emplace(std::min(b.i, b.j), std::max(b.i, b.j)).second) {
      throw DomainError("duplicate bond (" + std::to_string(b.i) + "," + std::to_string(b.j) + ")");
    }
  }
}

ClusterModel star_cluster(const SpinSystem& site, double coupling_kelvin, int neighbors,
                          BondTopology topology, const FieldVector& field) {
  ClusterModel model;
  model.sites.assign(static_cast<std::size_t>(neighbors) + 1, site);
  model.field = field;
  for (int k = 1; k <= neighbors; ++k) model.bonds.push_back({0, k, coupling_kelvin});
  if (topology == BondTopology::kStarRing && neighbors > 2) {
    for (int k = 1; k <= neighbors; ++k) model.bonds.push_back({k, k % neighbors + 1, coupling_kelvin});
  }
  return model;
}

bool cluster_is_real(const ClusterModel& model) {
  if (model.field.tesla.y() != 0.0) return false;
  for (const SpinSystem& s : model.sites) {
    if (s.hyperfine) return false;
  }
  return true;
}

namespace {

struct ProductBasis {
  std::vector<long> dims;
  std::vector<long> strides;  // site 0 most significant
  long total = 1;

  explicit ProductBasis(const ClusterModel& model) {
    for (const SpinSystem& s : model.sites) dims.push_back(s.dimension());
    strides.assign(dims.size(), 1);
    for (std::size_t k = dims.size(); k-- > 0;) {
      strides[k] = total;
      total *= dims[k];
    }
  }
  long digit(long state, std::size_t k) const { return (state / strides[k]) % dims[k]; }
};

// m_S of local basis index a (electron index major, nuclear minor).
double local_sz(const SpinSystem& s, long a) {
  return s.spin - static_cast<double>(a / s.nuclear_dimension());
}

template <class Matrix, class Convert>
Matrix assemble(const ClusterModel& model, Convert convert) {
  model.validate();
  const ProductBasis basis(model);
  const long n = basis.total;
  Matrix h = Matrix::Zero(n, n);

  for (std::size_t k = 0; k < model.sites.size(); ++k) {
    const CMatrix local = build_hamiltonian(model.sites[k], model.field);
    const long dk = basis.dims[k];
    const long stride = basis.strides[k];
    for (long s = 0; s < n; ++s) {
      const long a = basis.digit(s, k);
      const long base = s - a * stride;
      for (long b = 0; b < dk; ++b) {
        const Complex v = local(b, a);
        if (v != Complex(0.0, 0.0)) h(base + b * stride, s) += convert(v);
      }
    }
  }
  for (const Bond& bond : model.bonds) {
    const auto& si = model.sites[bond.i];
    const auto& sj = model.sites[bond.j];
    for (long s = 0; s < n; ++s) {
      const double mi = local_sz(si, basis.digit(s, bond.i));
      const double mj = local_sz(sj, basis.digit(s, bond.j));
      h(s, s) += convert(Complex(-bond.coupling * mi * mj, 0.0));
    }
  }
  return h;
}

}  // namespace

CMatrix build_cluster_hamiltonian(const ClusterModel& model) {
  return assemble<CMatrix>(model, [](Complex v) { return v; });
}

RMatrix build_cluster_hamiltonian_real(const ClusterModel& model) {
  if (!cluster_is_real(model)) {
    throw ContractViolation("cluster Hamiltonian is complex (field has a y component or hyperfine)");
  }
  return assemble<RMatrix>(model, [](Complex v) { return v.real(); });
}

LevelSet cluster_levels(const ClusterModel& model, bool with_vectors) {
  if (cluster_is_real(model)) return diagonalize(build_cluster_hamiltonian_real(model), with_vectors);
  return diagonalize(build_cluster_hamiltonian(model), with_vectors);
}

ThermoCurve cluster_specific_heat(const LevelSet& levels, std::size_t sites,
                                  const TemperatureGrid& grid) {
  ThermoCurve curve = specific_heat(levels, grid);
  curve.observable = "cluster_specific_heat";
  for (double& v : curve.values) v /= static_cast<double>(sites);
  return curve;
}

ThermoCurve cluster_specific_heat(const ClusterModel& model, const TemperatureGrid& grid) {
  ThermoCurve curve = cluster_specific_heat(cluster_levels(model, false), model.sites.size(), grid);
  curve.field_tesla = model.field.magnitude();
  return curve;
}

double total_sz(const ClusterModel& model, const LevelSet& levels, std::size_t state) {
  if (!levels.eigenvectors) throw ContractViolation("total_sz needs eigenvectors");
  const ProductBasis basis(model);
  const Eigen::VectorXcd v = levels.eigenvectors->col(static_cast<Eigen::Index>(state));
  double sz = 0.0;
  for (long s = 0; s < basis.total; ++s) {
    double m = 0.0;
    for (std::size_t k = 0; k < model.sites.size(); ++k) m += local_sz(model.sites[k], basis.digit(s, k));
    sz += std::norm(v(s)) * m;
  }
  return sz;
}

DecouplingRatio quantum_decoupling_ratio(double gap_kelvin, int coordination,
                                         double coupling_kelvin, double spin) {
  DecouplingRatio out;
  out.interaction_scale = coordination * std::abs(coupling_kelvin) * spin * spin / 2.0;
  if (out.interaction_scale == 0.0) {
    out.infinite = true;
    out.ratio = std::numeric_limits<double>::infinity();
    return out;
  }
  out.ratio = gap_kelvin / out.interaction_scale;
  return out;
}

}  // namespace spinclock
