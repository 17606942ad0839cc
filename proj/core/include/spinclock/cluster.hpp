#pragma once

#include <vector>

#include "spinclock/spin_system.hpp"
#include "spinclock/thermo.hpp"

namespace spinclock {

/// Ising coupling -J S_iz S_jz between two sites of a cluster. Each unordered pair is
/// listed once and carries the full pair energy, i.e. the same counting as the
/// lattice Hamiltonian -(J/2) sum_i sum_{j in Z(i)} with both (i,j) and (j,i) present.
struct Bond {
  int i = 0;
  int j = 0;
  double coupling = 0.0;  // kelvin
};

enum class BondTopology {
  kStar,      // center to each neighbor
  kStarRing,  // plus nearest-neighbor bonds around the ring
};

inline constexpr long kClusterDimensionCap = 10000;

struct ClusterModel {
  std::vector<SpinSystem> sites;
  std::vector<Bond> bonds;
  FieldVector field;  // applied to every site, molecular frame (all sites share it)

  long dimension() const;
  /// Throws ResourceError above the dimension cap and DomainError for bad bonds.
  void validate() const;
};

/// Central site plus `neighbors` sites on a ring, every bond with coupling J.
ClusterModel star_cluster(const SpinSystem& site, double coupling_kelvin, int neighbors = 6,
                          BondTopology topology = BondTopology::kStarRing,
                          const FieldVector& field = {});

/// True when the product-basis Hamiltonian is real (no y field component,
/// no hyperfine terms).
bool cluster_is_real(const ClusterModel& model);

/// H = sum_k 1 (x) ... h_k ... (x) 1 - sum_bonds J_ij S_iz S_jz, site 0 most significant.
CMatrix build_cluster_hamiltonian(const ClusterModel& model);
RMatrix build_cluster_hamiltonian_real(const ClusterModel& model);

/// Spectrum of the cluster; uses the real-symmetric path when possible.
LevelSet cluster_levels(const ClusterModel& model, bool with_vectors = false);

/// c/R per mole of sites.
ThermoCurve cluster_specific_heat(const ClusterModel& model, const TemperatureGrid& grid);
ThermoCurve cluster_specific_heat(const LevelSet& levels, std::size_t sites,
                                  const TemperatureGrid& grid);

/// Expectation of total S_z in eigenstate `state` (requires eigenvectors).
double total_sz(const ClusterModel& model, const LevelSet& levels, std::size_t state);

struct DecouplingRatio {
  double ratio = 0.0;
  double interaction_scale = 0.0;  // Z |J| S^2 / 2 in kelvin
  bool infinite = false;
  /// ratio > 1: the gap beats the interaction scale.
  bool quantum_paramagnet() const { return infinite || ratio > 1.0; }
};

/// Delta / (Z |J| S^2 / 2). J = 0 yields `infinite`.
DecouplingRatio quantum_decoupling_ratio(double gap_kelvin, int coordination,
                                         double coupling_kelvin, double spin);

}  // namespace spinclock
