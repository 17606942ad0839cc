#include "spinclock/lattice_mc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace spinclock {

namespace {

int wrap(int v, int n) { return ((v % n) + n) % n; }

}  // namespace

IsingLattice::IsingLattice(std::array<int, 3> sizes, std::vector<Offset> offsets,
                           double coupling_kelvin, double m_eff)
    : sizes_(sizes), offsets_(std::move(offsets)), coupling_(coupling_kelvin), m_eff_(m_eff) {
  for (int s : sizes_) {
    if (s < 1) throw DomainError("lattice sizes must be >= 1");
  }
  if (!std::isfinite(coupling_) || !(m_eff_ > 0.0)) {
    throw DomainError("lattice needs finite J and m_eff > 0");
  }
  for (const Offset& o : offsets_) {
    if (o == Offset{}) throw DomainError("lattice offsets must not include (0,0,0)");
    const Offset neg{-o.dx, -o.dy, -o.dz};
    if (std::count(offsets_.begin(), offsets_.end(), o) !=
        std::count(offsets_.begin(), offsets_.end(), neg)) {
      throw DomainError("lattice offsets must be closed under negation");
    }
  }
  const std::size_t n = static_cast<std::size_t>(sizes_[0]) * sizes_[1] * sizes_[2];
  spins_.assign(n, 1);
  parity_.resize(n);
  neighbors_.resize(n * offsets_.size());
  for (int z = 0; z < sizes_[2]; ++z) {
    for (int y = 0; y < sizes_[1]; ++y) {
      for (int x = 0; x < sizes_[0]; ++x) {
        const std::size_t i = (static_cast<std::size_t>(z) * sizes_[1] + y) * sizes_[0] + x;
        parity_[i] = ((x + y + z) % 2 == 0) ? 1 : -1;
        for (std::size_t k = 0; k < offsets_.size(); ++k) {
          const Offset& o = offsets_[k];
          const int nx = wrap(x + o.dx, sizes_[0]);
          const int ny = wrap(y + o.dy, sizes_[1]);
          const int nz = wrap(z + o.dz, sizes_[2]);
          neighbors_[i * offsets_.size() + k] =
              (static_cast<std::size_t>(nz) * sizes_[1] + ny) * sizes_[0] + nx;
        }
      }
    }
  }
}

std::vector<Offset> IsingLattice::fcc12() {
  std::vector<Offset> out;
  for (int a : {-1, 1}) {
    for (int b : {-1, 1}) {
      out.push_back({a, b, 0});
      out.push_back({a, 0, b});
      out.push_back({0, a, b});
    }
  }
  return out;
}

std::vector<Offset> IsingLattice::bipartite12() {
  std::vector<Offset> out{{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}};
  for (int a : {-1, 1}) {
    for (int b : {-1, 1}) {
      for (int c : {-1, 1}) out.push_back({a, b, c});
    }
  }
  return out;
}

std::vector<Offset> IsingLattice::square4() { return {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}}; }

std::vector<Offset> IsingLattice::chain2() { return {{1, 0, 0}, {-1, 0, 0}}; }

std::vector<Offset> IsingLattice::preset(const std::string& name) {
  if (name == "fcc12") return fcc12();
  if (name == "bipartite12") return bipartite12();
  if (name == "square4") return square4();
  if (name == "chain2") return chain2();
  throw DomainError("unknown lattice preset '" + name + "'");
}

void IsingLattice::set_spins(std::span<const std::int8_t> s) {
  if (s.size() != spins_.size()) throw DomainError("set_spins: size mismatch");
  for (std::int8_t v : s) {
    if (v != 1 && v != -1) throw DomainError("set_spins: spins must be +1 or -1");
  }
  std::copy(s.begin(), s.end(), spins_.begin());
}

void IsingLattice::fill(std::int8_t s) { std::fill(spins_.begin(), spins_.end(), s); }

bool IsingLattice::is_bipartite() const {
  return std::all_of(offsets_.begin(), offsets_.end(), [this](const Offset& o) {
    // odd offsets only pair opposite parities when every wrapped size is even
    const bool odd = ((o.dx + o.dy + o.dz) % 2) != 0;
    const bool even_sizes = (sizes_[0] == 1 || sizes_[0] % 2 == 0) &&
                            (sizes_[1] == 1 || sizes_[1] % 2 == 0) &&
                            (sizes_[2] == 1 || sizes_[2] % 2 == 0);
    return odd && even_sizes;
  });
}

std::int64_t IsingLattice::bond_sum() const {
  std::int64_t sum = 0;
  const std::size_t z = offsets_.size();
  for (std::size_t i = 0; i < spins_.size(); ++i) {
    int h = 0;
    for (std::size_t k = 0; k < z; ++k) h += spins_[neighbors_[i * z + k]];
    sum += spins_[i] * h;
  }
  return sum;
}

double mc_energy(const IsingLattice& lattice) {
  return -0.5 * lattice.pair_energy() * static_cast<double>(lattice.bond_sum());
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

MetropolisChain::MetropolisChain(IsingLattice lattice, std::uint64_t seed)
    : lattice_(std::move(lattice)), rng_(seed), bond_sum_(lattice_.bond_sum()) {
  set_temperature(temperature_);
}

void MetropolisChain::set_temperature(double t) {
  if (!(t > 0.0)) throw DomainError("Metropolis: temperature must be > 0");
  temperature_ = t;
  const int z = lattice_.coordination();
  acceptance_.assign(2 * z + 1, 1.0);
  for (int s = -z; s <= z; ++s) {
    const double delta = 2.0 * lattice_.pair_energy() * s;
    acceptance_[s + z] = delta <= 0.0 ? 1.0 : std::exp(-delta / t);
  }
}

bool MetropolisChain::propose(std::size_t i) {
  const std::size_t z = lattice_.offsets().size();
  int h = 0;
  for (std::size_t k = 0; k < z; ++k) {
    const std::size_t j = lattice_.neighbor(i, k);
    if (j != i) h += lattice_.spin(j);
  }
  const int s = lattice_.spin(i);
  const double a = acceptance_[s * h + static_cast<int>(z)];
  if (a < 1.0 && uniform01(rng_) >= a) return false;
  lattice_.set_spin(i, static_cast<std::int8_t>(-s));
  bond_sum_ -= 4 * s * h;
  return true;
}

void MetropolisChain::sweep() {
  const std::size_t n = lattice_.site_count();
  for (std::size_t i = 0; i < n; ++i) propose(i);
}

double MetropolisChain::uniform_magnetization() const {
  const auto s = lattice_.spins();
  return static_cast<double>(std::accumulate(s.begin(), s.end(), 0)) / s.size();
}

double MetropolisChain::staggered_magnetization() const {
  long sum = 0;
  for (std::size_t i = 0; i < lattice_.site_count(); ++i) sum += lattice_.parity(i) * lattice_.spin(i);
  return static_cast<double>(sum) / lattice_.site_count();
}

McResult metropolis_run(IsingLattice lattice, const TemperatureGrid& grid, const McOptions& options) {
  if (!(options.sweeps > options.burn_in)) throw DomainError("Metropolis: need sweeps > burn_in");
  const std::size_t measured = options.sweeps - options.burn_in;
  const std::size_t blocks = std::max<std::size_t>(1, std::min(options.blocks, measured));
  bool staggered = false;
  switch (options.order) {
    case OrderParameter::kUniform:
      break;
    case OrderParameter::kStaggered:
      staggered = true;
      break;
    case OrderParameter::kAuto:
      staggered = lattice.coupling() < 0.0 && lattice.is_bipartite();
      break;
  }

  McResult result;
  result.sweeps = options.sweeps;
  result.burn_in = options.burn_in;
  result.seed = options.seed;
  result.sites = lattice.site_count();
  result.sizes = lattice.sizes();
  const double n = static_cast<double>(lattice.site_count());

  if (options.random_start) {
    std::mt19937_64 init(derive_seed(options.seed, 0));
    for (std::size_t i = 0; i < lattice.site_count(); ++i) {
      lattice.set_spin(i, (init() >> 63) ? 1 : -1);
    }
  }
  MetropolisChain chain(std::move(lattice), derive_seed(options.seed, 1));

  std::vector<double> energies(measured);
  result.points.resize(grid.size());
  for (std::size_t gi = grid.size(); gi-- > 0;) {
    const double t = grid[gi];
    chain.set_temperature(t);
    for (std::size_t s = 0; s < options.burn_in; ++s) chain.sweep();
    double m_abs = 0.0;
    double ms_abs = 0.0;
    double m2 = 0.0;
    double m4 = 0.0;
    for (std::size_t s = 0; s < measured; ++s) {
      chain.sweep();
      energies[s] = chain.energy();
      const double mu = chain.uniform_magnetization();
      const double msg = chain.staggered_magnetization();
      m_abs += std::abs(mu);
      ms_abs += std::abs(msg);
      const double order = staggered ? msg : mu;
      m2 += order * order;
      m4 += order * order * order * order;
    }
    const double inv = 1.0 / static_cast<double>(measured);
    const double mean = std::accumulate(energies.begin(), energies.end(), 0.0) * inv;
    double var = 0.0;
    for (double e : energies) var += (e - mean) * (e - mean);
    var *= inv;

    // Blocking estimate of the error on c.
    const std::size_t per_block = measured / blocks;
    double c_sum = 0.0;
    double c_sq = 0.0;
    for (std::size_t b = 0; b < blocks; ++b) {
      const auto first = energies.begin() + static_cast<std::ptrdiff_t>(b * per_block);
      const auto last = first + static_cast<std::ptrdiff_t>(per_block);
      const double bm = std::accumulate(first, last, 0.0) / per_block;
      double bv = 0.0;
      for (auto it = first; it != last; ++it) bv += (*it - bm) * (*it - bm);
      const double cb = bv / per_block / (n * t * t);
      c_sum += cb;
      c_sq += cb * cb;
    }
    const double c_mean = c_sum / blocks;
    const double c_var = blocks > 1 ? (c_sq / blocks - c_mean * c_mean) * blocks / (blocks - 1) : 0.0;

    McPoint& p = result.points[gi];
    p.temperature = t;
    p.energy = mean / n;
    p.specific_heat = var / (n * t * t);
    p.specific_heat_error = std::sqrt(std::max(0.0, c_var) / blocks);
    p.m_uniform = m_abs * inv;
    p.m_staggered = ms_abs * inv;
    const double m2m = m2 * inv;
    p.binder = m2m > 0.0 ? 1.0 - (m4 * inv) / (3.0 * m2m * m2m) : 0.0;
  }
  return result;
}

namespace {

TnEstimate peak_estimate(const McResult& result) {
  TnEstimate est;
  const auto& pts = result.points;
  if (pts.size() < 3) {
    est.inconclusive = true;
    if (!pts.empty()) est.temperature = pts.front().temperature;
    return est;
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (pts[i].specific_heat > pts[best].specific_heat) best = i;
  }
  est.temperature = pts[best].temperature;
  if (best == 0 || best + 1 == pts.size()) {
    est.inconclusive = true;
    est.error = pts[1].temperature - pts[0].temperature;
    return est;
  }
  est.error = 0.5 * (pts[best + 1].temperature - pts[best - 1].temperature);

  // Least-squares parabola through up to five points around the maximum.
  const std::size_t lo = best >= 2 ? best - 2 : 0;
  const std::size_t hi = std::min(pts.size() - 1, best + 2);
  const double t_ref = pts[best].temperature;
  Eigen::MatrixXd a(hi - lo + 1, 3);
  Eigen::VectorXd y(hi - lo + 1);
  for (std::size_t i = lo; i <= hi; ++i) {
    const double dt = pts[i].temperature - t_ref;
    a.row(i - lo) << 1.0, dt, dt * dt;
    y(i - lo) = pts[i].specific_heat;
  }
  const Eigen::Vector3d coef = a.colPivHouseholderQr().solve(y);
  if (coef(2) < 0.0) {
    const double vertex = t_ref - coef(1) / (2.0 * coef(2));
    if (vertex >= pts[lo].temperature && vertex <= pts[hi].temperature) est.temperature = vertex;
  }
  return est;
}

}  // namespace

TnEstimate estimate_tn(const McResult& result) { return peak_estimate(result); }

TnEstimate estimate_tn(std::span<const McResult> sizes) {
  if (sizes.empty()) throw DomainError("estimate_tn: no results");
  // Peak estimate from the largest system.
  std::size_t largest = 0;
  for (std::size_t i = 1; i < sizes.size(); ++i) {
    if (sizes[i].sites > sizes[largest].sites) largest = i;
  }
  TnEstimate est = peak_estimate(sizes[largest]);

  std::vector<double> crossings;
  for (std::size_t a = 0; a < sizes.size(); ++a) {
    for (std::size_t b = a + 1; b < sizes.size(); ++b) {
      const auto& pa = sizes[a].points;
      const auto& pb = sizes[b].points;
      if (pa.size() != pb.size()) continue;
      // Deep in either phase both cumulants saturate and noise produces spurious
      // sign changes; keep the crossing closest to the specific-heat peak.
      std::optional<double> nearest;
      for (std::size_t i = 0; i + 1 < pa.size(); ++i) {
        const double d0 = pa[i].binder - pb[i].binder;
        const double d1 = pa[i + 1].binder - pb[i + 1].binder;
        if (d0 == 0.0 || d0 * d1 < 0.0) {
          const double f = d0 == 0.0 ? 0.0 : d0 / (d0 - d1);
          const double t = pa[i].temperature + f * (pa[i + 1].temperature - pa[i].temperature);
          if (!nearest || std::abs(t - est.temperature) < std::abs(*nearest - est.temperature)) {
            nearest = t;
          }
        }
      }
      if (nearest) crossings.push_back(*nearest);
    }
  }
  if (!crossings.empty()) {
    const double mean = std::accumulate(crossings.begin(), crossings.end(), 0.0) / crossings.size();
    double spread = 0.0;
    for (double c : crossings) spread = std::max(spread, std::abs(c - mean));
    const auto& pts = sizes[largest].points;
    const double spacing =
        pts.size() > 1 ? (pts.back().temperature - pts.front().temperature) / (pts.size() - 1) : 0.0;
    est.binder_temperature = mean;
    est.binder_error = std::max(spread, 0.5 * spacing);
  }
  return est;
}

}  // namespace spinclock
