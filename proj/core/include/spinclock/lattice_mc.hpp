#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "spinclock/thermo.hpp"

namespace spinclock {

struct Offset {
  int dx = 0;
  int dy = 0;
  int dz = 0;
  friend bool operator==(const Offset&, const Offset&) = default;
};

/// Periodic Ising lattice for H = -(J/2) sum_i sum_{j in Z(i)} S_iz S_jz with
/// S_z = m_eff * sigma, sigma = +-1. Neighbors come from an offset list that is
/// closed under negation; Z = number of offsets.
class IsingLattice {
 public:
  IsingLattice(std::array<int, 3> sizes, std::vector<Offset> offsets, double coupling_kelvin,
               double m_eff);

  /// 12 nearest neighbors of a face-centred arrangement, (+-1,+-1,0) and permutations.
  /// Geometrically frustrated for J < 0.
  static std::vector<Offset> fcc12();
  /// Z = 12 bipartite adjacency: (+-1,0,0), (0,+-1,0) and the eight (+-1,+-1,+-1).
  static std::vector<Offset> bipartite12();
  /// 2D square lattice, Z = 4 (use L_z = 1).
  static std::vector<Offset> square4();
  /// Linear chain along x, Z = 2.
  static std::vector<Offset> chain2();
  /// Preset by name: "fcc12", "bipartite12", "square4", "chain2".
  static std::vector<Offset> preset(const std::string& name);

  std::array<int, 3> sizes() const { return sizes_; }
  std::size_t site_count() const { return spins_.size(); }
  int coordination() const { return static_cast<int>(offsets_.size()); }
  const std::vector<Offset>& offsets() const { return offsets_; }
  double coupling() const { return coupling_; }
  double m_eff() const { return m_eff_; }
  /// J * m_eff^2: energy of one ordered neighbor pair term before the 1/2.
  double pair_energy() const { return coupling_ * m_eff_ * m_eff_; }

  std::span<const std::int8_t> spins() const { return spins_; }
  std::int8_t spin(std::size_t i) const { return spins_[i]; }
  void set_spin(std::size_t i, std::int8_t s) { spins_[i] = s; }
  void set_spins(std::span<const std::int8_t> s);
  void fill(std::int8_t s);

  /// Neighbor of site i through offset k (periodic wrap).
  std::size_t neighbor(std::size_t i, std::size_t k) const { return neighbors_[i * offsets_.size() + k]; }
  /// (-1)^(x+y+z): sublattice sign used for the staggered magnetization.
  int parity(std::size_t i) const { return parity_[i]; }
  /// True when every offset connects opposite parities.
  bool is_bipartite() const;

  /// sum_i sum_k sigma_i sigma_{n(i,k)} (integer bookkeeping of the energy).
  std::int64_t bond_sum() const;

 private:
  std::array<int, 3> sizes_;
  std::vector<Offset> offsets_;
  double coupling_;
  double m_eff_;
  std::vector<std::int8_t> spins_;
  std::vector<std::size_t> neighbors_;
  std::vector<std::int8_t> parity_;
};

/// Energy of the current configuration in kelvin.
double mc_energy(const IsingLattice& lattice);

enum class OrderParameter { kAuto, kUniform, kStaggered };

struct McOptions {
  std::size_t sweeps = 25000;   // total per temperature, including burn-in
  std::size_t burn_in = 5000;
  std::uint64_t seed = 1;
  std::size_t blocks = 32;
  OrderParameter order = OrderParameter::kAuto;  // staggered when J < 0 and bipartite
  /// Random initial configuration from the seed (otherwise the lattice's spins).
  bool random_start = true;
};

struct McPoint {
  double temperature = 0.0;
  double energy = 0.0;      // <E>/N in kelvin
  double specific_heat = 0.0;  // c/R per site
  double specific_heat_error = 0.0;
  double m_uniform = 0.0;   // <|m|>
  double m_staggered = 0.0;  // <|m_s|>
  double binder = 0.0;      // 1 - <m^4>/(3 <m^2>^2) of the selected order parameter

  friend bool operator==(const McPoint&, const McPoint&) = default;
};

struct McResult {
  std::vector<McPoint> points;  // ascending temperature
  std::size_t sweeps = 0;
  std::size_t burn_in = 0;
  std::uint64_t seed = 0;
  std::size_t sites = 0;
  std::array<int, 3> sizes{0, 0, 0};

  friend bool operator==(const McResult&, const McResult&) = default;
};

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Derives the i-th independent stream seed from a master seed (splitmix64).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

/// Single-flip Metropolis chain over a lattice it owns.
class MetropolisChain {
 public:
  MetropolisChain(IsingLattice lattice, std::uint64_t seed);

  void set_temperature(double t);
  double temperature() const { return temperature_; }
  /// Proposes flipping site i; returns true when accepted.
  bool propose(std::size_t i);
  /// One sweep = one proposal per site in lattice order.
  void sweep();

  /// Incrementally tracked energy (kelvin).
  double energy() const { return -0.5 * lattice_.pair_energy() * static_cast<double>(bond_sum_); }
  /// Energy recomputed from the configuration.
  double recompute_energy() const { return mc_energy(lattice_); }
  double uniform_magnetization() const;
  double staggered_magnetization() const;

  const IsingLattice& lattice() const { return lattice_; }
  std::mt19937_64& rng() { return rng_; }

 private:
  IsingLattice lattice_;
  std::mt19937_64 rng_;
  double temperature_ = 1.0;
  std::int64_t bond_sum_ = 0;
  std::vector<double> acceptance_;  // indexed by sigma_i * h_i + Z
};

/// Anneals from the highest to the lowest temperature, reusing configurations.
/// Deterministic for a given seed.
McResult metropolis_run(IsingLattice lattice, const TemperatureGrid& grid, const McOptions& options);

struct TnEstimate {
  double temperature = 0.0;
  double error = 0.0;
  bool inconclusive = false;
  std::optional<double> binder_temperature;
  std::optional<double> binder_error;
};

/// Specific-heat peak by a local quadratic fit; error is the local grid spacing.
TnEstimate estimate_tn(const McResult& result);
/// Adds the Binder-cumulant crossing when two or more sizes share a grid.
TnEstimate estimate_tn(std::span<const McResult> sizes);

}  // namespace spinclock
