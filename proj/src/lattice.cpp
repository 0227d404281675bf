// lattice.cpp - chain Hamiltonians in single-particle and Fock-space form
#include "thermowork/lattice.hpp"

#include <bit>
#include <cmath>
#include <sstream>

#include "thermowork/errors.hpp"

namespace thermowork {

std::string to_string(Boundary b) { return b == Boundary::open ? "open" : "periodic"; }

Boundary boundary_from_string(const std::string& s) {
  if (s == "open") return Boundary::open;
  if (s == "periodic") return Boundary::periodic;
  throw InputError("unknown boundary '" + s + "' (expected open|periodic)");
}

std::string to_string(DriveShape s) {
  return s == DriveShape::sudden ? "sudden" : "linear-ramp";
}

DriveShape drive_shape_from_string(const std::string& s) {
  if (s == "sudden") return DriveShape::sudden;
  if (s == "linear-ramp") return DriveShape::linear_ramp;
  throw InputError("unknown drive shape '" + s + "' (expected linear-ramp|sudden)");
}

std::vector<double> staggered_pattern(std::size_t L) {
  std::vector<double> g(L);
  for (std::size_t i = 0; i < L; ++i) g[i] = (i % 2 == 0) ? -1.0 : 1.0;
  return g;
}

void LatticeSpec::validate() const {
  if (L < 2) throw InputError("lattice needs L >= 2, got " + std::to_string(L));
  if (!(J > 0.0)) throw InputError("hopping J must be positive");
  if (!(U >= 0.0)) throw InputError("interaction U must be nonnegative");
  if (!pattern.empty() && pattern.size() != L) {
    throw InputError("pattern length " + std::to_string(pattern.size()) +
                     " does not match L = " + std::to_string(L));
  }
  for (double g : pattern) {
    if (!std::isfinite(g)) throw InputError("pattern entries must be finite");
  }
}

std::vector<double> LatticeSpec::weights() const {
  return pattern.empty() ? staggered_pattern(L) : pattern;
}

LatticeSpec make_chain(std::size_t L, double U, Boundary boundary, double J) {
  LatticeSpec spec;
  spec.L = L;
  spec.U = U;
  spec.J = J;
  spec.boundary = boundary;
  return spec;
}

void DriveProtocol::validate() const {
  if (!(dv > 0.0)) throw InputError("quench amplitude dv must be positive");
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw InputError("ramp duration tau must be >= 0");
  if (!std::isfinite(v0)) throw InputError("v0 must be finite");
}

bool DriveProtocol::outside_linear_regime() const {
  return v0 == 0.0 ? true : dv / std::abs(v0) > 0.1;
}

std::size_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

std::vector<std::uint32_t> enumerate_strings(std::size_t L, std::size_t n) {
  if (L > 31) throw CapacityError("Fock enumeration supports at most 31 sites");
  std::vector<std::uint32_t> out;
  if (n > L) return out;
  out.reserve(binomial(L, n));
  const std::uint32_t limit = 1u << L;
  if (n == 0) {
    out.push_back(0);
    return out;
  }
  // Gosper's hack walks same-popcount patterns in ascending order.
  std::uint32_t x = (1u << n) - 1u;
  while (x < limit) {
    out.push_back(x);
    const std::uint32_t c = x & (~x + 1u);
    const std::uint32_t r = x + c;
    x = (((r ^ x) >> 2) / c) | r;
  }
  return out;
}

FockSector::FockSector(std::size_t L, std::size_t n_up, std::size_t n_down)
    : L_(L), n_up_(n_up), n_down_(n_down) {
  if (L < 1) throw InputError("sector needs at least one site");
  if (n_up > L || n_down > L) throw InputError("sector particle count exceeds site count");
  up_ = enumerate_strings(L, n_up);
  down_ = enumerate_strings(L, n_down);
}

Eigen::MatrixXd build_single_particle_hamiltonian(const LatticeSpec& spec,
                                                  std::span<const double> site_potentials) {
  spec.validate();
  const std::size_t L = spec.L;
  if (site_potentials.size() != L) {
    throw InputError("site potential length " + std::to_string(site_potentials.size()) +
                     " does not match L = " + std::to_string(L));
  }
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(L, L);
  for (std::size_t i = 0; i < L; ++i) h(i, i) = site_potentials[i];
  for (std::size_t i = 0; i + 1 < L; ++i) {
    h(i, i + 1) = -spec.J;
    h(i + 1, i) = -spec.J;
  }
  if (spec.boundary == Boundary::periodic && L > 2) {
    h(0, L - 1) = -spec.J;
    h(L - 1, 0) = -spec.J;
  }
  return h;
}

std::vector<double> staggered_potential(const LatticeSpec& spec, double amplitude) {
  std::vector<double> v = spec.weights();
  for (double& x : v) x *= amplitude;
  return v;
}

namespace {

// Bonds (i, j) with i < j as they appear in the hopping sum.
std::vector<std::pair<std::size_t, std::size_t>> bonds(const LatticeSpec& spec) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i + 1 < spec.L; ++i) out.emplace_back(i, i + 1);
  if (spec.boundary == Boundary::periodic && spec.L > 2) out.emplace_back(0, spec.L - 1);
  return out;
}

// Applies c^dag_i c_j (i != j) to a single-spin string. Returns false if the
// result vanishes; otherwise writes the new string and the fermionic sign.
bool hop(std::uint32_t bits, std::size_t i, std::size_t j, std::uint32_t& out, int& sign) {
  const std::uint32_t bi = 1u << i, bj = 1u << j;
  if (!(bits & bj) || (bits & bi)) return false;
  const std::size_t lo = std::min(i, j), hi = std::max(i, j);
  const std::uint32_t between = ((1u << hi) - 1u) & ~((1u << (lo + 1)) - 1u);
  sign = (std::popcount(bits & between) % 2 == 0) ? 1 : -1;
  out = (bits & ~bj) | bi;
  return true;
}

std::size_t index_of(const std::vector<std::uint32_t>& strings, std::uint32_t bits) {
  const auto it = std::lower_bound(strings.begin(), strings.end(), bits);
  return static_cast<std::size_t>(it - strings.begin());
}

}  // namespace

Eigen::MatrixXd build_many_body_hamiltonian(const FockSector& sector, const LatticeSpec& spec,
                                            std::span<const double> site_potentials,
                                            std::size_t cap) {
  spec.validate();
  if (sector.sites() != spec.L) throw InputError("sector and lattice disagree on L");
  if (site_potentials.size() != spec.L) throw InputError("site potential length mismatch");
  const std::size_t D = sector.dim();
  if (D > cap) {
    std::ostringstream msg;
    msg << "sector dimension " << D << " exceeds dense cap " << cap;
    throw CapacityError(msg.str());
  }
  const std::size_t L = spec.L;
  const std::size_t nd = sector.down_dim();
  const auto& ups = sector.up_strings();
  const auto& downs = sector.down_strings();
  const auto bond_list = bonds(spec);

  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(D, D);
  for (std::size_t iu = 0; iu < ups.size(); ++iu) {
    for (std::size_t id = 0; id < nd; ++id) {
      const std::size_t s = iu * nd + id;
      const std::uint32_t u = ups[iu], d = downs[id];
      double diag = 0.0;
      for (std::size_t i = 0; i < L; ++i) {
        const int nu = (u >> i) & 1u, ndn = (d >> i) & 1u;
        diag += site_potentials[i] * (nu + ndn) + spec.U * (nu * ndn);
      }
      h(s, s) = diag;
      // Only the lower triangle is generated here; the upper one is mirrored
      // below so the result is exactly symmetric.
      for (const auto& [a, b] : bond_list) {
        for (const auto& [i, j] : {std::pair{a, b}, std::pair{b, a}}) {
          std::uint32_t out;
          int sign;
          if (hop(u, i, j, out, sign)) {
            const std::size_t t = index_of(ups, out) * nd + id;
            if (t < s) h(s, t) += -spec.J * sign;
          }
          if (hop(d, i, j, out, sign)) {
            const std::size_t t = iu * nd + index_of(downs, out);
            if (t < s) h(s, t) += -spec.J * sign;
          }
        }
      }
    }
  }
  for (std::size_t s = 0; s < D; ++s) {
    for (std::size_t t = 0; t < s; ++t) h(t, s) = h(s, t);
  }
  return h;
}

Eigen::VectorXd number_operator_diagonal(const FockSector& sector, std::size_t site) {
  if (site >= sector.sites()) {
    throw InputError("site index " + std::to_string(site) + " out of range");
  }
  Eigen::VectorXd n(sector.dim());
  for (std::size_t s = 0; s < sector.dim(); ++s) {
    n(s) = ((sector.up_bits(s) >> site) & 1u) + ((sector.down_bits(s) >> site) & 1u);
  }
  return n;
}

}  // namespace thermowork
