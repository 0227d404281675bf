// workstats.hpp - relaxation spectrum and dissipated-work cumulants
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "thermowork/lattice.hpp"
#include "thermowork/response.hpp"

namespace thermowork {

/// Model-independent coefficient gamma_n(w) of the n-th cumulant:
/// (1/2)(bw)^(n-1) coth(bw/2) for even n, (1/2)(bw)^(n-1) for odd n.
double gamma_coefficient(int n, double omega, double beta);

/// |int_0^tau dt dv/dt e^{iwt}|^2 for the protocol; (dv)^2 at w = 0 or tau = 0.
double protocol_spectral_weight(double omega, const DriveProtocol& protocol);

struct SpectralWeight {
  double omega = 0.0;
  double weight = 0.0;
};

/// psi(t) = sum_k s_k cos(w_k t) + psi_ad, stored as its w > 0 weights plus
/// the zero-frequency (adiabatic) weight. With this normalization
///   beta^n k^n = sum_k s_k gamma_n(w_k) b(w_k) + psi_ad gamma_n(0) b(0).
struct RelaxationSpectrum {
  double beta = 1.0;
  std::vector<SpectralWeight> nonadiabatic;
  double psi_ad = 0.0;
  std::size_t clipped = 0;  // tiny negative weights set to zero

  double nonadiabatic_total() const;
  /// Total sudden weight psi(0).
  double total() const { return nonadiabatic_total() + psi_ad; }
};

inline constexpr double kNegativeWeightTolerance = 1e-10;

/// Nonadiabatic weights s_k = 2 beta g^T R_k g / w_k of the dressed response;
/// the adiabatic weight is whatever the isothermal susceptibility leaves over,
/// psi_ad = -beta g^T chi_iso g - sum_k s_k.
RelaxationSpectrum relaxation_spectrum(const ResponsePoles& dressed,
                                       const Eigen::MatrixXd& isothermal_static,
                                       std::span<const double> pattern, double beta);

/// Assembles a spectrum from precomputed pieces; used by the exact oracle.
RelaxationSpectrum relaxation_spectrum_from_adiabatic(const ResponsePoles& poles,
                                                      std::span<const double> pattern,
                                                      double beta, double psi_ad);

/// psi(t) reconstructed from the spectrum.
double relaxation_function(const RelaxationSpectrum& spectrum, double t);

struct CumulantValue {
  int order = 1;
  double adiabatic = 0.0;
  double nonadiabatic = 0.0;
  double total() const { return adiabatic + nonadiabatic; }
};

/// beta^n k^n_w split into adiabatic and nonadiabatic parts.
CumulantValue cumulant(int n, const RelaxationSpectrum& spectrum, const DriveProtocol& protocol);

struct CumulantReport {
  double beta = 1.0;
  double U = 0.0;
  DriveProtocol protocol;
  std::vector<CumulantValue> cumulants;  // orders 1..size()
  std::optional<double> beta_fano;       // beta * F_W = beta^2 k^2 / (beta k^1)

  const CumulantValue& order(int n) const { return cumulants.at(static_cast<std::size_t>(n - 1)); }
};

CumulantReport cumulant_report(const RelaxationSpectrum& spectrum, const DriveProtocol& protocol,
                               int max_order = 4, double U = 0.0);

/// beta * F_W, absent when the first cumulant vanishes.
std::optional<double> fano_factor(const CumulantReport& report);

/// beta <W_diss> / (dv)^2 = -(beta/2) sum_ij g_i g_j dn_i/dv_j after a sudden
/// quench along the lattice pattern.
double dissipated_work_sudden(const ThermalKsState& state, const Eigen::MatrixXd& isothermal_static);

/// Same quantity for an arbitrary pattern and temperature.
double dissipated_work_sudden(const Eigen::MatrixXd& isothermal_static,
                              std::span<const double> pattern, double beta);

/// Crossover time: interior grid point with the largest |dk3/dtau| (central
/// differences), ties toward smaller tau. Absent for flat curves.
std::optional<double> crossover_time(std::span<const double> taus, std::span<const double> k3);

/// Log-spaced grid of `count` points in [lo, hi].
std::vector<double> log_grid(double lo, double hi, std::size_t count);

}  // namespace thermowork
