// response.hpp - density-density response in pole form, thALDA dressing
#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "thermowork/thermal_ks.hpp"

namespace thermowork {

/// One pole pair of chi_ij(w) = R_ij [1/(w - w_k + i0) - 1/(w + w_k + i0)].
struct Pole {
  double omega = 0.0;
  Eigen::MatrixXd residue;
};

/// Discrete pole representation of a real-symmetric response matrix.
/// Poles are strictly ascending in frequency and all above the floor.
struct ResponsePoles {
  std::size_t sites = 0;
  std::vector<Pole> poles;

  std::size_t size() const { return poles.size(); }
  bool empty() const { return poles.empty(); }
};

struct ResponseOptions {
  double df_floor = 1e-14;     // occupation-difference floor
  double omega_floor = 1e-10;  // transitions at or below this are degenerate
  double omega_merge = 1e-9;   // poles closer than this are merged
};

/// Particle-hole transition a -> b of the KS system, spin-summed weight.
struct Transition {
  std::size_t from = 0, to = 0;
  double omega = 0.0;
  double df = 0.0;  // (f_a - f_b) summed over both spins
};

struct TransitionSpace {
  std::size_t sites = 0;
  std::vector<Transition> transitions;
  Eigen::MatrixXd densities;  // column q holds rho_q(i) = phi_a(i) phi_b(i)

  std::size_t size() const { return transitions.size(); }
};

/// Diagonal, frequency-independent thALDA kernel K_ii = dv_Hxc/dn at n_i.
struct KernelMatrix {
  Eigen::VectorXd diagonal;

  Eigen::MatrixXd matrix() const { return diagonal.asDiagonal(); }
  bool is_zero() const { return diagonal.size() == 0 || diagonal.cwiseAbs().maxCoeff() == 0.0; }
};

TransitionSpace transition_space(const ThermalKsState& state, const ResponseOptions& opt = {});

KernelMatrix thalda_kernel(const ThermalKsState& state);

/// Sorts by frequency and merges poles closer than omega_merge.
ResponsePoles merge_poles(std::size_t sites, std::vector<Pole> poles, double omega_merge);

/// KS response: R_q = df_q rho_q rho_q^T per retained transition, then merged.
ResponsePoles ks_response_poles(const TransitionSpace& space, const ResponseOptions& opt = {});
ResponsePoles ks_response_poles(const ThermalKsState& state, const ResponseOptions& opt = {});

/// Dyson dressing chi = chi_KS + chi_KS K chi for a static kernel, solved
/// exactly in transition space. With X_q = sqrt(2 df_q w_q) rho_q the KS
/// response is X (w^2 - W^2)^-1 X^T, so the dressed one is
/// X (w^2 - C)^-1 X^T with C = W^2 + X^T K X. Throws StabilityError if C has a
/// negative eigenvalue.
ResponsePoles dress_response(const ResponsePoles& ks, const KernelMatrix& kernel,
                             const TransitionSpace& space, const ResponseOptions& opt = {});

/// chi(z) of a pole list at complex frequency z.
Eigen::MatrixXcd evaluate_response(const ResponsePoles& poles, std::complex<double> z);

/// Brute-force Dyson solve chi = (1 - chi_KS K)^-1 chi_KS at w + i eta.
/// Samples where the linear system is numerically singular come back empty.
std::vector<std::optional<Eigen::MatrixXcd>> grid_dyson_solve(const ResponsePoles& ks,
                                                              const KernelMatrix& kernel,
                                                              std::span<const double> omegas,
                                                              double eta = 1e-3);

/// Static limit chi(0) = -2 sum_k R_k / w_k of the dynamical response.
Eigen::MatrixXd static_response(const ResponsePoles& poles);

/// Isothermal KS susceptibility dn_i/dv_j. Adds to the pole part the
/// zero-frequency contribution of thermally populated diagonal and degenerate
/// configurations, -beta * Cov. Grand-canonical states are projected onto
/// fixed particle number, matching an SCF that re-solves mu.
Eigen::MatrixXd isothermal_ks_response(const ThermalKsState& state, const TransitionSpace& space);

/// Isothermal interacting susceptibility (1 - chi_KS^iso K)^-1 chi_KS^iso,
/// i.e. the derivative of the self-consistent densities.
Eigen::MatrixXd isothermal_response(const Eigen::MatrixXd& ks_isothermal,
                                    const KernelMatrix& kernel);

/// (w_k, g^T R_k g) per pole.
std::vector<std::pair<double, double>> projected_spectrum(const ResponsePoles& poles,
                                                          std::span<const double> pattern);

/// Double commutator <[n_i, [H_KS, n_i]]> from the KS one-body density matrix;
/// equals sum_k 2 w_k R_k,ii for the unmerged KS poles.
Eigen::VectorXd ks_double_commutator(const ThermalKsState& state);

}  // namespace thermowork
