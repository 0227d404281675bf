// lattice.hpp - inhomogeneous Hubbard chain: geometry, drive, Fock sectors
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace thermowork {

enum class Boundary { open, periodic };

std::string to_string(Boundary b);
Boundary boundary_from_string(const std::string& s);

/// Chain geometry and couplings. Energies are in units of the hopping J.
///
/// Sites are 0-based in code. The staggered pattern follows the 1-based
/// convention g_i = (-1)^i, so site 0 (i = 1) carries -1.
struct LatticeSpec {
  std::size_t L = 2;
  double J = 1.0;
  double U = 0.0;
  Boundary boundary = Boundary::open;
  std::vector<double> pattern;  // empty means staggered (-1)^i

  /// Throws InputError on L < 2, J <= 0, U < 0 or a pattern of wrong length.
  void validate() const;
  /// The per-site weights, materializing the staggered default.
  std::vector<double> weights() const;
};

LatticeSpec make_chain(std::size_t L, double U, Boundary boundary = Boundary::open,
                       double J = 1.0);

/// Staggered default pattern (-1)^i with 1-based i.
std::vector<double> staggered_pattern(std::size_t L);

enum class DriveShape { linear_ramp, sudden };

std::string to_string(DriveShape s);
DriveShape drive_shape_from_string(const std::string& s);

/// Work-parameter protocol v(t) = v0 + dv * t / tau on [0, tau].
struct DriveProtocol {
  double v0 = 0.0;
  double dv = 0.01;
  double tau = 0.0;
  DriveShape shape = DriveShape::linear_ramp;

  void validate() const;
  /// True when dv/v0 > 0.1, where linear response becomes questionable.
  bool outside_linear_regime() const;
  /// Shape actually used: a ramp with tau == 0 is the sudden limit.
  bool is_sudden() const { return shape == DriveShape::sudden || tau == 0.0; }
};

/// Fixed-(Nup, Ndown) Fock sector.
///
/// Each spin string is enumerated as an L-bit occupation pattern in ascending
/// integer order; the basis index is up_index * down_dim + down_index.
/// Creation operators are ordered with the whole spin-up string before the
/// spin-down string, sites ascending within each string.
class FockSector {
 public:
  FockSector(std::size_t L, std::size_t n_up, std::size_t n_down);

  std::size_t sites() const { return L_; }
  std::size_t n_up() const { return n_up_; }
  std::size_t n_down() const { return n_down_; }
  std::size_t dim() const { return up_.size() * down_.size(); }
  std::size_t up_dim() const { return up_.size(); }
  std::size_t down_dim() const { return down_.size(); }

  std::uint32_t up_bits(std::size_t state) const { return up_[state / down_.size()]; }
  std::uint32_t down_bits(std::size_t state) const { return down_[state % down_.size()]; }

  const std::vector<std::uint32_t>& up_strings() const { return up_; }
  const std::vector<std::uint32_t>& down_strings() const { return down_; }

 private:
  std::size_t L_, n_up_, n_down_;
  std::vector<std::uint32_t> up_, down_;
};

/// All L-bit patterns with exactly n bits set, ascending.
std::vector<std::uint32_t> enumerate_strings(std::size_t L, std::size_t n);

std::size_t binomial(std::size_t n, std::size_t k);

inline constexpr std::size_t kDefaultDenseCap = 20000;

/// Single-particle hopping matrix plus diagonal site potentials.
///
/// -J on nearest-neighbour bonds; the wrap bond is added only for periodic
/// chains with L > 2. For L = 2 the periodic wrap would duplicate the single
/// bond, so it is counted once and both boundaries coincide.
Eigen::MatrixXd build_single_particle_hamiltonian(const LatticeSpec& spec,
                                                  std::span<const double> site_potentials);

/// amplitude * g_i per site.
std::vector<double> staggered_potential(const LatticeSpec& spec, double amplitude);

/// Dense T + W + sum_i v_i n_i in the sector basis. Throws CapacityError when
/// the sector dimension exceeds `cap`.
Eigen::MatrixXd build_many_body_hamiltonian(const FockSector& sector, const LatticeSpec& spec,
                                            std::span<const double> site_potentials,
                                            std::size_t cap = kDefaultDenseCap);

/// Diagonal of n_i = n_{i,up} + n_{i,down} in the sector basis (0-based site).
Eigen::VectorXd number_operator_diagonal(const FockSector& sector, std::size_t site);

}  // namespace thermowork
