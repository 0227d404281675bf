// ed_oracle.hpp - exact diagonalization reference for small chains
#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "thermowork/lattice.hpp"
#include "thermowork/response.hpp"
#include "thermowork/thermal_ks.hpp"
#include "thermowork/workstats.hpp"

namespace thermowork {

struct EdOptions {
  std::size_t dense_cap = kDefaultDenseCap;  // total Hilbert-space dimension
  double degeneracy_tol = 1e-9;              // eigenvalue blocks for the adiabatic weight
  double weight_floor = 1e-14;               // |p_n - p_m| below this is dropped
  double omega_merge = 1e-9;
};

struct SectorEigen {
  FockSector sector;
  Eigen::VectorXd energies;     // ascending
  Eigen::MatrixXd vectors;      // columns are eigenvectors
  Eigen::VectorXd probability;  // thermal weight of each eigenstate
};

/// Thermal many-body spectrum in one sector (canonical) or across all sectors
/// with the chemical potential fixed by the target particle number.
struct ManyBodySpectrum {
  LatticeSpec lattice;
  EnsembleSpec ensemble;
  std::vector<double> v_ext;
  std::vector<SectorEigen> sectors;
  double log_z = 0.0;
  std::optional<double> mu;

  std::size_t dim() const;
  double beta() const { return ensemble.beta; }
};

ManyBodySpectrum exact_spectrum(const LatticeSpec& spec, std::span<const double> v_ext,
                                const EnsembleSpec& ensemble, const EdOptions& opt = {});

Eigen::VectorXd exact_densities(const ManyBodySpectrum& spectrum);

/// Lehmann poles at w_mn = E_m - E_n > 0 with residues
/// (p_n - p_m) <n|n_i|m><m|n_j|n>, merged over equal frequencies.
ResponsePoles exact_response(const ManyBodySpectrum& spectrum, const EdOptions& opt = {});

/// beta^2 (sum_n p_n V_nn^2 - <V>^2) for V = sum_i g_i n_i. Inside each
/// degenerate block V is diagonalized first so V_nn is well defined.
double exact_psi_ad(const ManyBodySpectrum& spectrum, std::span<const double> pattern,
                    const EdOptions& opt = {});

/// Isothermal susceptibility dn_i/dv_j from the Kubo canonical correlation,
/// summing degenerate pairs directly (no block rotation).
Eigen::MatrixXd exact_static_susceptibility(const ManyBodySpectrum& spectrum,
                                            const EdOptions& opt = {});

RelaxationSpectrum exact_relaxation_spectrum(const ManyBodySpectrum& spectrum,
                                             std::span<const double> pattern,
                                             const EdOptions& opt = {});

CumulantReport exact_cumulants(const ManyBodySpectrum& spectrum, std::span<const double> pattern,
                               const DriveProtocol& protocol, int max_order = 4,
                               const EdOptions& opt = {});

struct DensityMatrixTrajectory {
  std::vector<double> times;
  std::vector<double> trace_error;
  std::vector<double> hermiticity_error;
  std::vector<Eigen::MatrixXcd> final_state;    // rho_tau per sector
  std::vector<Eigen::MatrixXcd> thermal_state;  // rho_tau^th per sector
};

struct EvolutionResult {
  double relative_entropy = 0.0;  // S(rho_tau || rho_tau^th) = beta <W_diss>
  double work_route = 0.0;        // beta (<W> - Delta F)
  std::size_t steps = 0;
  DensityMatrixTrajectory trajectory;
};

struct EvolutionOptions {
  double step_scale = 0.01;  // dt <= step_scale / ||H||
  std::size_t samples = 11;
  double drift_tolerance = 1e-8;
  EdOptions ed;
};

/// Propagates the thermal state of H(v0) under the linear ramp
/// v(t) = v0 + dv t / tau (classic fourth-order Runge-Kutta) and returns the
/// relative entropy to the final thermal state.
EvolutionResult exact_dissipated_work_evolution(const LatticeSpec& spec,
                                                const EnsembleSpec& ensemble,
                                                const DriveProtocol& protocol,
                                                const EvolutionOptions& opt = {});

}  // namespace thermowork
