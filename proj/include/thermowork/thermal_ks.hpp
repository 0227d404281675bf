// thermal_ks.hpp - thermal Kohn-Sham self-consistency with the local thermal
// Hxc functional of the Hubbard chain.
#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "thermowork/lattice.hpp"

namespace thermowork {

enum class EnsembleKind { grand_canonical, canonical };

std::string to_string(EnsembleKind k);
EnsembleKind ensemble_kind_from_string(const std::string& s);

struct EnsembleSpec {
  EnsembleKind kind = EnsembleKind::grand_canonical;
  double beta = 1.0;
  double target_n = 0.0;     // grand-canonical mean particle number
  std::size_t n_up = 0;      // canonical sector
  std::size_t n_down = 0;

  void validate(std::size_t L) const;
  double particle_number() const {
    return kind == EnsembleKind::canonical ? static_cast<double>(n_up + n_down) : target_n;
  }
};

/// Half filling in the requested ensemble (Nup - Ndown <= 1 for odd L).
EnsembleSpec half_filling(std::size_t L, double beta,
                          EnsembleKind kind = EnsembleKind::grand_canonical);

struct HxcEvaluation {
  double v_hxc = 0.0;
  double gamma = 1.0;
  double f_hxc = 0.0;
  bool clamped = false;
};

inline constexpr double kDensityClamp = 1e-12;

/// Local thermal Hxc potential v = U + ln(Gamma)/beta and its density
/// derivative. Densities in [0, eps] or [2 - eps, 2] are clamped to the open
/// interval and flagged; anything outside [0, 2] is a DomainError.
HxcEvaluation hxc_potential(double n, double U, double beta, double clamp = kDensityClamp);

/// Single-spin occupation statistics of the noninteracting reference system.
struct SpinOccupations {
  Eigen::VectorXd f;           // <n_a>
  Eigen::MatrixXd covariance;  // <n_a n_b> - <n_a><n_b>
  Eigen::MatrixXd particle_hole;  // P(a occupied, b empty)
};

struct OccupationResult {
  SpinOccupations up, down;
  Eigen::VectorXd densities;  // n_i summed over spin
};

inline constexpr std::size_t kCanonicalEnumerationCap = 12;

/// Fermi-Dirac occupations at chemical potential mu (grand-canonical) or exact
/// enumeration of the fixed-(Nup, Ndown) determinants (canonical, mu ignored).
OccupationResult thermal_occupations(const Eigen::VectorXd& energies,
                                     const Eigen::MatrixXd& orbitals, double mu,
                                     const EnsembleSpec& ensemble);

double fermi(double x);

struct ChemicalPotential {
  double mu = 0.0;
  bool at_bracket_edge = false;
};

/// Bisection for 2 * sum_a f(beta (e_a - mu)) = target_n.
ChemicalPotential find_mu(const Eigen::VectorXd& energies, double beta, double target_n,
                          double tolerance = 1e-13);

struct ScfOptions {
  double mixing = 0.3;
  double tolerance = 1e-10;
  std::size_t max_iter = 5000;
  double density_clamp = kDensityClamp;
  /// Halve the mixing when the residual grows for several iterations in a row
  /// or stops improving.
  bool adaptive_mixing = true;
  /// When set, receives "iter,residual,mu" CSV lines.
  std::ostream* trace = nullptr;
};

struct ThermalKsState {
  LatticeSpec lattice;
  EnsembleSpec ensemble;
  Eigen::MatrixXd orbitals;  // columns are orthonormal orbitals
  Eigen::VectorXd energies;  // ascending
  std::optional<double> mu;  // grand-canonical only
  SpinOccupations up, down;
  Eigen::VectorXd densities;
  Eigen::VectorXd v_ext;
  Eigen::VectorXd vks;
  std::size_t iterations = 0;
  double residual = 0.0;
  std::size_t clamp_events = 0;
  double final_mixing = 0.0;
  std::vector<std::string> warnings;

  double beta() const { return ensemble.beta; }
  std::size_t sites() const { return lattice.L; }
};

/// Fixed point n = densities(H_KS[v_ext + v_Hxc[n]]) by damped linear mixing.
/// Throws ConvergenceError after max_iter iterations.
ThermalKsState scf_solve(const LatticeSpec& spec, const EnsembleSpec& ensemble,
                         std::span<const double> v_ext, const ScfOptions& options = {});

/// Noninteracting thermal state for fixed KS potential (no self-consistency).
ThermalKsState thermal_state_for_potential(const LatticeSpec& spec, const EnsembleSpec& ensemble,
                                           std::span<const double> vks);

}  // namespace thermowork
