// ed_oracle.cpp - exact thermal states, responses and work statistics
#include "thermowork/ed_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <sstream>

#include "thermowork/errors.hpp"

namespace thermowork {

std::size_t ManyBodySpectrum::dim() const {
  std::size_t d = 0;
  for (const auto& s : sectors) d += s.sector.dim();
  return d;
}

namespace {

std::vector<FockSector> sectors_for(const LatticeSpec& spec, const EnsembleSpec& ensemble) {
  std::vector<FockSector> out;
  if (ensemble.kind == EnsembleKind::canonical) {
    out.emplace_back(spec.L, ensemble.n_up, ensemble.n_down);
  } else {
    for (std::size_t nu = 0; nu <= spec.L; ++nu) {
      for (std::size_t nd = 0; nd <= spec.L; ++nd) out.emplace_back(spec.L, nu, nd);
    }
  }
  return out;
}

double particle_count(const FockSector& s) { return static_cast<double>(s.n_up() + s.n_down()); }

// log sum_n exp(-beta (E_n - mu N)) over all sectors.
double log_partition(const std::vector<SectorEigen>& sectors, double beta, double mu) {
  double shift = -std::numeric_limits<double>::infinity();
  for (const auto& s : sectors) {
    const double n = particle_count(s.sector);
    for (Eigen::Index k = 0; k < s.energies.size(); ++k) {
      shift = std::max(shift, -beta * (s.energies(k) - mu * n));
    }
  }
  double z = 0.0;
  for (const auto& s : sectors) {
    const double n = particle_count(s.sector);
    for (Eigen::Index k = 0; k < s.energies.size(); ++k) {
      z += std::exp(-beta * (s.energies(k) - mu * n) - shift);
    }
  }
  return shift + std::log(z);
}

void assign_probabilities(std::vector<SectorEigen>& sectors, double beta, double mu,
                          double log_z) {
  for (auto& s : sectors) {
    const double n = particle_count(s.sector);
    s.probability = (-beta * (s.energies.array() - mu * n) - log_z).exp().matrix();
  }
}

double mean_particles(const std::vector<SectorEigen>& sectors, double beta, double mu) {
  const double log_z = log_partition(sectors, beta, mu);
  double n = 0.0;
  for (const auto& s : sectors) {
    const double ns = particle_count(s.sector);
    n += ns * (-beta * (s.energies.array() - mu * ns) - log_z).exp().sum();
  }
  return n;
}

// Eigenbasis matrix elements of n_i inside one sector.
std::vector<Eigen::MatrixXd> number_operators(const SectorEigen& s) {
  std::vector<Eigen::MatrixXd> out;
  for (std::size_t i = 0; i < s.sector.sites(); ++i) {
    const Eigen::VectorXd n = number_operator_diagonal(s.sector, i);
    out.push_back(s.vectors.transpose() * n.asDiagonal() * s.vectors);
  }
  return out;
}

}  // namespace

ManyBodySpectrum exact_spectrum(const LatticeSpec& spec, std::span<const double> v_ext,
                                const EnsembleSpec& ensemble, const EdOptions& opt) {
  spec.validate();
  ensemble.validate(spec.L);
  if (v_ext.size() != spec.L) throw InputError("external potential length mismatch");
  const auto sectors = sectors_for(spec, ensemble);
  std::size_t total = 0;
  for (const auto& s : sectors) total += s.dim();
  if (total > opt.dense_cap) {
    throw CapacityError("exact diagonalization dimension " + std::to_string(total) +
                        " exceeds cap " + std::to_string(opt.dense_cap));
  }

  ManyBodySpectrum out;
  out.lattice = spec;
  out.ensemble = ensemble;
  out.v_ext.assign(v_ext.begin(), v_ext.end());
  for (const auto& sector : sectors) {
    SectorEigen se{sector, {}, {}, {}};
    const Eigen::MatrixXd h = build_many_body_hamiltonian(sector, spec, v_ext, opt.dense_cap);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
    if (eig.info() != Eigen::Success) throw NumericalError("sector diagonalization failed");
    se.energies = eig.eigenvalues();
    se.vectors = eig.eigenvectors();
    out.sectors.push_back(std::move(se));
  }

  const double beta = ensemble.beta;
  double mu = 0.0;
  if (ensemble.kind == EnsembleKind::grand_canonical) {
    double scale = 1.0;
    for (const auto& s : out.sectors) scale = std::max(scale, s.energies.cwiseAbs().maxCoeff());
    double lo = -2.0 * scale - 50.0 / beta, hi = 2.0 * scale + 50.0 / beta;
    for (int k = 0; k < 16 && mean_particles(out.sectors, beta, lo) > ensemble.target_n; ++k) lo *= 2;
    for (int k = 0; k < 16 && mean_particles(out.sectors, beta, hi) < ensemble.target_n; ++k) hi *= 2;
    for (int it = 0; it < 300; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double n = mean_particles(out.sectors, beta, mid);
      if (std::abs(n - ensemble.target_n) < 1e-13) {
        lo = hi = mid;
        break;
      }
      (n < ensemble.target_n ? lo : hi) = mid;
      if (hi - lo < 1e-15 * std::max(1.0, std::abs(mid))) break;
    }
    mu = 0.5 * (lo + hi);
    out.mu = mu;
  }
  out.log_z = log_partition(out.sectors, beta, mu);
  assign_probabilities(out.sectors, beta, mu, out.log_z);
  return out;
}

Eigen::VectorXd exact_densities(const ManyBodySpectrum& spectrum) {
  const std::size_t L = spectrum.lattice.L;
  Eigen::VectorXd n = Eigen::VectorXd::Zero(L);
  for (const auto& s : spectrum.sectors) {
    const Eigen::VectorXd weight = s.vectors.cwiseAbs2() * s.probability;  // per basis state
    for (std::size_t i = 0; i < L; ++i) n(i) += number_operator_diagonal(s.sector, i).dot(weight);
  }
  return n;
}

ResponsePoles exact_response(const ManyBodySpectrum& spectrum, const EdOptions& opt) {
  const std::size_t L = spectrum.lattice.L;
  struct PairRef {
    double omega;
    std::size_t sector;
    Eigen::Index n, m;
  };
  std::vector<PairRef> pairs;
  std::vector<std::vector<Eigen::MatrixXd>> ops;
  for (std::size_t si = 0; si < spectrum.sectors.size(); ++si) {
    const auto& s = spectrum.sectors[si];
    ops.push_back(number_operators(s));
    const Eigen::Index D = s.energies.size();
    for (Eigen::Index n = 0; n < D; ++n) {
      for (Eigen::Index m = n + 1; m < D; ++m) {
        const double omega = s.energies(m) - s.energies(n);
        if (omega <= opt.degeneracy_tol) continue;
        if (std::abs(s.probability(n) - s.probability(m)) <= opt.weight_floor) continue;
        double largest = 0.0;
        for (std::size_t i = 0; i < L; ++i) largest = std::max(largest, std::abs(ops[si][i](n, m)));
        if (largest < 1e-14) continue;
        pairs.push_back({omega, si, n, m});
      }
    }
  }
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const PairRef& a, const PairRef& b) { return a.omega < b.omega; });
  std::vector<Pole> poles;
  poles.reserve(pairs.size());
  std::size_t i = 0;
  while (i < pairs.size()) {
    const double start = pairs[i].omega;
    Pole p{0.0, Eigen::MatrixXd::Zero(L, L)};
    double omega_sum = 0.0;
    std::size_t count = 0;
    for (; i < pairs.size() && pairs[i].omega - start <= opt.omega_merge; ++i) {
      const auto& pr = pairs[i];
      const auto& s = spectrum.sectors[pr.sector];
      Eigen::VectorXd a(L);
      for (std::size_t k = 0; k < L; ++k) a(k) = ops[pr.sector][k](pr.n, pr.m);
      p.residue += (s.probability(pr.n) - s.probability(pr.m)) * a * a.transpose();
      omega_sum += pr.omega;
      ++count;
    }
    p.omega = omega_sum / static_cast<double>(count);
    poles.push_back(std::move(p));
  }
  ResponsePoles out;
  out.sites = L;
  out.poles = std::move(poles);
  return out;
}

double exact_psi_ad(const ManyBodySpectrum& spectrum, std::span<const double> pattern,
                    const EdOptions& opt) {
  const std::size_t L = spectrum.lattice.L;
  if (pattern.size() != L) throw InputError("pattern length mismatch");
  double mean = 0.0, second = 0.0;
  for (const auto& s : spectrum.sectors) {
    Eigen::VectorXd vdiag = Eigen::VectorXd::Zero(s.sector.dim());
    for (std::size_t i = 0; i < L; ++i) vdiag += pattern[i] * number_operator_diagonal(s.sector, i);
    const Eigen::MatrixXd v = s.vectors.transpose() * vdiag.asDiagonal() * s.vectors;
    const Eigen::Index D = s.energies.size();
    Eigen::Index start = 0;
    while (start < D) {
      Eigen::Index end = start + 1;
      while (end < D && s.energies(end) - s.energies(end - 1) <= opt.degeneracy_tol) ++end;
      const Eigen::Index size = end - start;
      Eigen::VectorXd vnn;
      if (size == 1) {
        vnn = Eigen::VectorXd::Constant(1, v(start, start));
      } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> block(v.block(start, start, size, size),
                                                             Eigen::EigenvaluesOnly);
        vnn = block.eigenvalues();
      }
      for (Eigen::Index k = 0; k < size; ++k) {
        const double p = s.probability(start + k);
        mean += p * vnn(k);
        second += p * vnn(k) * vnn(k);
      }
      start = end;
    }
  }
  const double beta = spectrum.beta();
  return beta * beta * (second - mean * mean);
}

Eigen::MatrixXd exact_static_susceptibility(const ManyBodySpectrum& spectrum,
                                            const EdOptions& opt) {
  const std::size_t L = spectrum.lattice.L;
  const double beta = spectrum.beta();
  Eigen::MatrixXd chi = Eigen::MatrixXd::Zero(L, L);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(L);
  for (const auto& s : spectrum.sectors) {
    const auto ops = number_operators(s);
    const Eigen::Index D = s.energies.size();
    Eigen::MatrixXd w(D, D);
    for (Eigen::Index n = 0; n < D; ++n) {
      for (Eigen::Index m = 0; m < D; ++m) {
        const double de = s.energies(m) - s.energies(n);
        w(n, m) = std::abs(de) <= opt.degeneracy_tol
                      ? beta * s.probability(n)
                      : (s.probability(n) - s.probability(m)) / de;
      }
    }
    for (std::size_t i = 0; i < L; ++i) {
      mean(i) += ops[i].diagonal().dot(s.probability);
      const Eigen::MatrixXd wi = w.cwiseProduct(ops[i]);
      for (std::size_t j = 0; j <= i; ++j) {
        const double c = wi.cwiseProduct(ops[j]).sum();
        chi(i, j) -= c;
        if (j != i) chi(j, i) -= c;
      }
    }
  }
  chi += beta * mean * mean.transpose();
  return chi;
}

RelaxationSpectrum exact_relaxation_spectrum(const ManyBodySpectrum& spectrum,
                                             std::span<const double> pattern,
                                             const EdOptions& opt) {
  return relaxation_spectrum_from_adiabatic(exact_response(spectrum, opt), pattern,
                                            spectrum.beta(), exact_psi_ad(spectrum, pattern, opt));
}

CumulantReport exact_cumulants(const ManyBodySpectrum& spectrum, std::span<const double> pattern,
                               const DriveProtocol& protocol, int max_order,
                               const EdOptions& opt) {
  return cumulant_report(exact_relaxation_spectrum(spectrum, pattern, opt), protocol, max_order,
                         spectrum.lattice.U);
}

namespace {

using cd = std::complex<double>;

double trace_rho_log_rho(const Eigen::MatrixXcd& rho) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(rho, Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (Eigen::Index k = 0; k < eig.eigenvalues().size(); ++k) {
    const double p = eig.eigenvalues()(k);
    if (p > 0.0) s += p * std::log(p);
  }
  return s;
}

}  // namespace

EvolutionResult exact_dissipated_work_evolution(const LatticeSpec& spec,
                                                const EnsembleSpec& ensemble,
                                                const DriveProtocol& protocol,
                                                const EvolutionOptions& opt) {
  spec.validate();
  if (!(protocol.dv >= 0.0) || !(protocol.tau >= 0.0)) throw InputError("invalid protocol");
  const std::size_t L = spec.L;
  const double beta = ensemble.beta;
  const auto g = spec.weights();
  const auto v_initial = staggered_potential(spec, protocol.v0);
  auto v_final = v_initial;
  for (std::size_t i = 0; i < L; ++i) v_final[i] += protocol.dv * g[i];

  const ManyBodySpectrum initial = exact_spectrum(spec, v_initial, ensemble, opt.ed);
  const double mu = initial.mu.value_or(0.0);

  // Final Hamiltonian eigensystem at the same chemical potential.
  std::vector<SectorEigen> final_sectors;
  std::vector<Eigen::MatrixXd> h0, h1;
  std::vector<Eigen::VectorXd> vdiag;
  double norm = 0.0;
  for (const auto& s : initial.sectors) {
    h0.push_back(build_many_body_hamiltonian(s.sector, spec, v_initial, opt.ed.dense_cap));
    h1.push_back(build_many_body_hamiltonian(s.sector, spec, v_final, opt.ed.dense_cap));
    Eigen::VectorXd vd = Eigen::VectorXd::Zero(s.sector.dim());
    for (std::size_t i = 0; i < L; ++i) vd += g[i] * number_operator_diagonal(s.sector, i);
    vdiag.push_back(vd);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h1.back());
    final_sectors.push_back({s.sector, eig.eigenvalues(), eig.eigenvectors(), {}});
    norm = std::max({norm, s.energies.cwiseAbs().maxCoeff(), eig.eigenvalues().cwiseAbs().maxCoeff()});
  }
  const double log_z1 = log_partition(final_sectors, beta, mu);
  assign_probabilities(final_sectors, beta, mu, log_z1);

  std::vector<Eigen::MatrixXcd> rho;
  for (const auto& s : initial.sectors) {
    rho.push_back((s.vectors * s.probability.asDiagonal() * s.vectors.transpose()).cast<cd>());
  }

  EvolutionResult result;
  auto& traj = result.trajectory;
  auto record = [&](double t) {
    double tr = 0.0, herm = 0.0;
    for (const auto& r : rho) {
      tr += r.trace().real();
      herm = std::max(herm, (r - r.adjoint()).cwiseAbs().maxCoeff());
    }
    traj.times.push_back(t);
    traj.trace_error.push_back(std::abs(tr - 1.0));
    traj.hermiticity_error.push_back(herm);
    if (traj.trace_error.back() > opt.drift_tolerance || herm > opt.drift_tolerance) {
      std::ostringstream msg;
      msg << "density-matrix drift at t = " << t << " (trace " << traj.trace_error.back()
          << ", hermiticity " << herm << "); reduce the time step";
      throw NumericalError(msg.str());
    }
  };
  record(0.0);

  if (!protocol.is_sudden() && protocol.dv != 0.0) {
    const double tau = protocol.tau;
    const double dt_max = opt.step_scale / std::max(norm, 1e-12);
    const std::size_t steps = static_cast<std::size_t>(std::ceil(tau / dt_max));
    const double dt = tau / static_cast<double>(steps);
    const std::size_t sample_every =
        std::max<std::size_t>(1, steps / std::max<std::size_t>(1, opt.samples - 1));
    const cd minus_i(0.0, -1.0);
    std::vector<Eigen::MatrixXcd> H0;
    std::vector<Eigen::VectorXcd> V;
    for (std::size_t s = 0; s < rho.size(); ++s) {
      H0.push_back(h0[s].cast<cd>());
      V.push_back(vdiag[s].cast<cd>());
    }
    for (std::size_t k = 0; k < steps; ++k) {
      const double t = static_cast<double>(k) * dt;
      for (std::size_t s = 0; s < rho.size(); ++s) {
        auto rhs = [&](double time, const Eigen::MatrixXcd& r) {
          const double lambda = protocol.dv * time / tau;
          Eigen::MatrixXcd c = H0[s] * r - r * H0[s];
          c += lambda * (V[s].asDiagonal() * r - r * V[s].asDiagonal());
          return Eigen::MatrixXcd(minus_i * c);
        };
        Eigen::MatrixXcd& r = rho[s];
        const Eigen::MatrixXcd k1 = rhs(t, r);
        const Eigen::MatrixXcd k2 = rhs(t + 0.5 * dt, r + 0.5 * dt * k1);
        const Eigen::MatrixXcd k3 = rhs(t + 0.5 * dt, r + 0.5 * dt * k2);
        const Eigen::MatrixXcd k4 = rhs(t + dt, r + dt * k3);
        r += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      }
      if ((k + 1) % sample_every == 0 && k + 1 < steps) record(static_cast<double>(k + 1) * dt);
    }
    result.steps = steps;
  }
  record(protocol.is_sudden() ? 0.0 : protocol.tau);

  // S = Tr rho ln rho - Tr rho ln rho_th with ln rho_th = -beta (H1 - mu N) - ln Z1.
  double s_self = 0.0, s_cross = 0.0, e_final = 0.0, e_initial = 0.0;
  for (std::size_t s = 0; s < rho.size(); ++s) {
    const double n = static_cast<double>(initial.sectors[s].sector.n_up() +
                                         initial.sectors[s].sector.n_down());
    const double p_sector = rho[s].trace().real();
    const double h1_avg = (rho[s] * h1[s].cast<cd>()).trace().real();
    s_self += trace_rho_log_rho(rho[s]);
    s_cross += -beta * (h1_avg - mu * n * p_sector) - log_z1 * p_sector;
    e_final += h1_avg;
    e_initial += initial.sectors[s].probability.dot(initial.sectors[s].energies);
    traj.final_state.push_back(rho[s]);
    const auto& fs = final_sectors[s];
    traj.thermal_state.push_back(
        (fs.vectors * fs.probability.asDiagonal() * fs.vectors.transpose()).cast<cd>());
  }
  result.relative_entropy = s_self - s_cross;
  result.work_route = beta * (e_final - e_initial) + (log_z1 - initial.log_z);
  return result;
}

}  // namespace thermowork
