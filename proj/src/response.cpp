// response.cpp - pole-space response functions
#include "thermowork/response.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "thermowork/errors.hpp"

namespace thermowork {

TransitionSpace transition_space(const ThermalKsState& state, const ResponseOptions& opt) {
  const std::size_t L = state.sites();
  TransitionSpace space;
  space.sites = L;
  const Eigen::VectorXd f = state.up.f + state.down.f;
  for (std::size_t a = 0; a < L; ++a) {
    for (std::size_t b = a + 1; b < L; ++b) {
      const double omega = state.energies(b) - state.energies(a);
      const double df = f(a) - f(b);
      if (omega <= opt.omega_floor || df <= opt.df_floor) continue;
      space.transitions.push_back({a, b, omega, df});
    }
  }
  space.densities.resize(L, space.transitions.size());
  for (std::size_t q = 0; q < space.transitions.size(); ++q) {
    const auto& t = space.transitions[q];
    space.densities.col(q) = state.orbitals.col(t.from).cwiseProduct(state.orbitals.col(t.to));
  }
  return space;
}

KernelMatrix thalda_kernel(const ThermalKsState& state) {
  KernelMatrix k;
  k.diagonal.resize(state.sites());
  for (std::size_t i = 0; i < state.sites(); ++i) {
    const double n = std::clamp(state.densities(i), 0.0, 2.0);
    k.diagonal(i) = hxc_potential(n, state.lattice.U, state.beta()).f_hxc;
  }
  return k;
}

ResponsePoles merge_poles(std::size_t sites, std::vector<Pole> poles, double omega_merge) {
  std::stable_sort(poles.begin(), poles.end(),
                   [](const Pole& a, const Pole& b) { return a.omega < b.omega; });
  ResponsePoles out;
  out.sites = sites;
  std::size_t i = 0;
  while (i < poles.size()) {
    Pole merged = std::move(poles[i]);
    const double start = merged.omega;
    double omega_sum = merged.omega;
    std::size_t count = 1;
    std::size_t j = i + 1;
    while (j < poles.size() && poles[j].omega - start <= omega_merge) {
      merged.residue += poles[j].residue;
      omega_sum += poles[j].omega;
      ++count;
      ++j;
    }
    merged.omega = omega_sum / static_cast<double>(count);
    out.poles.push_back(std::move(merged));
    i = j;
  }
  return out;
}

ResponsePoles ks_response_poles(const TransitionSpace& space, const ResponseOptions& opt) {
  std::vector<Pole> poles;
  poles.reserve(space.size());
  for (std::size_t q = 0; q < space.size(); ++q) {
    const Eigen::VectorXd rho = space.densities.col(q);
    poles.push_back({space.transitions[q].omega, space.transitions[q].df * rho * rho.transpose()});
  }
  return merge_poles(space.sites, std::move(poles), opt.omega_merge);
}

ResponsePoles ks_response_poles(const ThermalKsState& state, const ResponseOptions& opt) {
  return ks_response_poles(transition_space(state, opt), opt);
}

ResponsePoles dress_response(const ResponsePoles& ks, const KernelMatrix& kernel,
                             const TransitionSpace& space, const ResponseOptions& opt) {
  if (kernel.is_zero()) return ks;
  const Eigen::Index L = static_cast<Eigen::Index>(space.sites);
  if (kernel.diagonal.size() != L) throw InputError("kernel size does not match the lattice");
  const Eigen::Index nq = static_cast<Eigen::Index>(space.size());
  if (nq == 0) return ResponsePoles{space.sites, {}};

  Eigen::MatrixXd x(L, nq);
  Eigen::VectorXd omega2(nq);
  for (Eigen::Index q = 0; q < nq; ++q) {
    const auto& t = space.transitions[q];
    x.col(q) = std::sqrt(2.0 * t.df * t.omega) * space.densities.col(q);
    omega2(q) = t.omega * t.omega;
  }
  Eigen::MatrixXd c = x.transpose() * kernel.diagonal.asDiagonal() * x;
  c.diagonal() += omega2;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c);
  if (eig.info() != Eigen::Success) throw NumericalError("Casida diagonalization failed");
  const double lowest = eig.eigenvalues()(0);
  if (lowest < 0.0) {
    std::ostringstream msg;
    msg << "dressed response unstable: pole-space eigenvalue " << lowest << " < 0";
    throw StabilityError(msg.str());
  }
  const Eigen::MatrixXd amplitudes = x * eig.eigenvectors();  // column k = X z_k
  std::vector<Pole> poles;
  poles.reserve(nq);
  for (Eigen::Index k = 0; k < nq; ++k) {
    const double big_omega = std::sqrt(eig.eigenvalues()(k));
    if (big_omega <= opt.omega_floor) continue;
    const Eigen::VectorXd a = amplitudes.col(k);
    poles.push_back({big_omega, (a * a.transpose()) / (2.0 * big_omega)});
  }
  return merge_poles(space.sites, std::move(poles), opt.omega_merge);
}

Eigen::MatrixXcd evaluate_response(const ResponsePoles& poles, std::complex<double> z) {
  const Eigen::Index L = static_cast<Eigen::Index>(poles.sites);
  Eigen::MatrixXcd chi = Eigen::MatrixXcd::Zero(L, L);
  for (const auto& p : poles.poles) {
    const std::complex<double> w = 1.0 / (z - p.omega) - 1.0 / (z + p.omega);
    chi += w * p.residue.cast<std::complex<double>>();
  }
  return chi;
}

std::vector<std::optional<Eigen::MatrixXcd>> grid_dyson_solve(const ResponsePoles& ks,
                                                              const KernelMatrix& kernel,
                                                              std::span<const double> omegas,
                                                              double eta) {
  if (!(eta > 0.0)) throw InputError("grid Dyson solve needs eta > 0");
  const Eigen::Index L = static_cast<Eigen::Index>(ks.sites);
  const Eigen::MatrixXcd k = kernel.is_zero()
                                 ? Eigen::MatrixXcd::Zero(L, L)
                                 : Eigen::MatrixXcd(kernel.matrix().cast<std::complex<double>>());
  std::vector<std::optional<Eigen::MatrixXcd>> out;
  out.reserve(omegas.size());
  for (double w : omegas) {
    const Eigen::MatrixXcd chi0 = evaluate_response(ks, {w, eta});
    const Eigen::MatrixXcd a = Eigen::MatrixXcd::Identity(L, L) - chi0 * k;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
    if (!(lu.rcond() > 1e-13)) {
      out.emplace_back(std::nullopt);
      continue;
    }
    out.emplace_back(lu.solve(chi0));
  }
  return out;
}

Eigen::MatrixXd static_response(const ResponsePoles& poles) {
  const Eigen::Index L = static_cast<Eigen::Index>(poles.sites);
  Eigen::MatrixXd chi = Eigen::MatrixXd::Zero(L, L);
  for (const auto& p : poles.poles) chi -= (2.0 / p.omega) * p.residue;
  return chi;
}

Eigen::MatrixXd isothermal_ks_response(const ThermalKsState& state, const TransitionSpace& space) {
  const Eigen::Index L = static_cast<Eigen::Index>(state.sites());
  const double beta = state.beta();

  Eigen::MatrixXd poles = Eigen::MatrixXd::Zero(L, L);
  for (std::size_t q = 0; q < space.size(); ++q) {
    const auto& t = space.transitions[q];
    const Eigen::VectorXd rho = space.densities.col(q);
    poles -= (2.0 * t.df / t.omega) * rho * rho.transpose();
  }

  // Zero-frequency part: fluctuations of the diagonal occupations plus
  // transitions inside degenerate levels.
  const Eigen::MatrixXd phi2 = state.orbitals.cwiseAbs2();
  Eigen::MatrixXd zero_freq =
      phi2 * (state.up.covariance + state.down.covariance) * phi2.transpose();
  const double degenerate_tol = ResponseOptions{}.omega_floor;
  for (Eigen::Index a = 0; a < L; ++a) {
    for (Eigen::Index b = 0; b < L; ++b) {
      if (a == b || std::abs(state.energies(a) - state.energies(b)) > degenerate_tol) continue;
      const double p = state.up.particle_hole(a, b) + state.down.particle_hole(a, b);
      const Eigen::VectorXd rho = state.orbitals.col(a).cwiseProduct(state.orbitals.col(b));
      zero_freq += p * rho * rho.transpose();
    }
  }
  Eigen::MatrixXd intra = -beta * zero_freq;
  if (state.ensemble.kind == EnsembleKind::grand_canonical) {
    const Eigen::VectorXd row = intra.rowwise().sum();
    const double total = row.sum();
    if (std::abs(total) > 1e-300) intra -= row * row.transpose() / total;
  }
  Eigen::MatrixXd chi = poles + intra;
  return 0.5 * (chi + chi.transpose());
}

Eigen::MatrixXd isothermal_response(const Eigen::MatrixXd& ks_isothermal,
                                    const KernelMatrix& kernel) {
  if (kernel.is_zero()) return ks_isothermal;
  const Eigen::Index L = ks_isothermal.rows();
  const Eigen::MatrixXd a =
      Eigen::MatrixXd::Identity(L, L) - ks_isothermal * kernel.diagonal.asDiagonal();
  Eigen::MatrixXd chi = a.partialPivLu().solve(ks_isothermal);
  return 0.5 * (chi + chi.transpose());
}

std::vector<std::pair<double, double>> projected_spectrum(const ResponsePoles& poles,
                                                          std::span<const double> pattern) {
  if (pattern.size() != poles.sites) throw InputError("pattern length mismatch");
  const Eigen::Map<const Eigen::VectorXd> g(pattern.data(), pattern.size());
  std::vector<std::pair<double, double>> out;
  out.reserve(poles.size());
  for (const auto& p : poles.poles) out.emplace_back(p.omega, g.dot(p.residue * g));
  return out;
}

Eigen::VectorXd ks_double_commutator(const ThermalKsState& state) {
  const Eigen::MatrixXd h = build_single_particle_hamiltonian(
      state.lattice,
      std::span<const double>(state.vks.data(), static_cast<std::size_t>(state.vks.size())));
  const Eigen::VectorXd f = state.up.f + state.down.f;
  const Eigen::MatrixXd d = state.orbitals * f.asDiagonal() * state.orbitals.transpose();
  const Eigen::Index L = h.rows();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(L);
  for (Eigen::Index i = 0; i < L; ++i) {
    for (Eigen::Index j = 0; j < L; ++j) {
      if (j != i) out(i) -= 2.0 * h(i, j) * d(i, j);
    }
  }
  return out;
}

}  // namespace thermowork
