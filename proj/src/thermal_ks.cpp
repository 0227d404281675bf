// thermal_ks.cpp - thermal Kohn-Sham equilibrium
#include "thermowork/thermal_ks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "thermowork/errors.hpp"

namespace thermowork {

std::string to_string(EnsembleKind k) {
  return k == EnsembleKind::canonical ? "canonical" : "grand-canonical";
}

EnsembleKind ensemble_kind_from_string(const std::string& s) {
  if (s == "canonical") return EnsembleKind::canonical;
  if (s == "grand-canonical") return EnsembleKind::grand_canonical;
  throw InputError("unknown ensemble '" + s + "' (expected canonical|grand-canonical)");
}

void EnsembleSpec::validate(std::size_t L) const {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw InputError("beta must be positive and finite");
  if (kind == EnsembleKind::grand_canonical) {
    if (!(target_n > 0.0 && target_n < 2.0 * static_cast<double>(L))) {
      throw InputError("grand-canonical target N must lie in (0, 2L)");
    }
  } else if (n_up > L || n_down > L) {
    throw InputError("canonical sector counts exceed the site count");
  }
}

EnsembleSpec half_filling(std::size_t L, double beta, EnsembleKind kind) {
  EnsembleSpec e;
  e.kind = kind;
  e.beta = beta;
  e.target_n = static_cast<double>(L);
  e.n_up = (L + 1) / 2;
  e.n_down = L / 2;
  return e;
}

HxcEvaluation hxc_potential(double n, double U, double beta, double clamp) {
  if (!(U >= 0.0)) throw DomainError("Hxc functional needs U >= 0");
  if (!(beta > 0.0)) throw DomainError("Hxc functional needs beta > 0");
  if (!(n >= 0.0 && n <= 2.0)) {
    std::ostringstream msg;
    msg << "density " << n << " outside [0, 2]";
    throw DomainError(msg.str());
  }
  HxcEvaluation out;
  if (n < clamp) {
    n = clamp;
    out.clamped = true;
  } else if (n > 2.0 - clamp) {
    n = 2.0 - clamp;
    out.clamped = true;
  }
  if (U == 0.0) return out;

  const double bu = beta * U;
  const double e = std::exp(-bu);
  const double x = n - 1.0;
  const double s = std::sqrt(x * x * (1.0 - e) + e);
  double log_gamma, dlog_gamma;
  if (x < 0.0) {
    // Gamma = e (1 - x) / (s - x) avoids the cancellation in x + s near n = 0.
    log_gamma = -bu + std::log1p(-x) - std::log(s - x);
    dlog_gamma = -1.0 / (1.0 - x) + (s - x * (1.0 - e)) / (s * (s - x));
  } else {
    log_gamma = std::log(x + s) - std::log1p(x);
    dlog_gamma = (s + x * (1.0 - e)) / (s * (x + s)) - 1.0 / (1.0 + x);
  }
  out.gamma = std::exp(log_gamma);
  out.v_hxc = U + log_gamma / beta;
  out.f_hxc = dlog_gamma / beta;
  return out;
}

double fermi(double x) {
  if (x > 0.0) {
    const double e = std::exp(-x);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(x));
}

namespace {

SpinOccupations grand_canonical_spin(const Eigen::VectorXd& energies, double beta, double mu) {
  const Eigen::Index L = energies.size();
  SpinOccupations s;
  s.f.resize(L);
  for (Eigen::Index a = 0; a < L; ++a) s.f(a) = fermi(beta * (energies(a) - mu));
  s.covariance = Eigen::MatrixXd::Zero(L, L);
  s.particle_hole = Eigen::MatrixXd::Zero(L, L);
  for (Eigen::Index a = 0; a < L; ++a) {
    s.covariance(a, a) = s.f(a) * (1.0 - s.f(a));
    for (Eigen::Index b = 0; b < L; ++b) {
      if (a != b) s.particle_hole(a, b) = s.f(a) * (1.0 - s.f(b));
    }
  }
  return s;
}

// Exact canonical statistics of n noninteracting fermions in the levels.
SpinOccupations canonical_spin(const Eigen::VectorXd& energies, double beta, std::size_t n) {
  const std::size_t L = static_cast<std::size_t>(energies.size());
  const auto configs = enumerate_strings(L, n);
  std::vector<double> logw(configs.size());
  for (std::size_t c = 0; c < configs.size(); ++c) {
    double e = 0.0;
    for (std::size_t a = 0; a < L; ++a) {
      if ((configs[c] >> a) & 1u) e += energies(a);
    }
    logw[c] = -beta * e;
  }
  const double shift = *std::max_element(logw.begin(), logw.end());
  double z = 0.0;
  for (double& w : logw) {
    w = std::exp(w - shift);
    z += w;
  }
  SpinOccupations s;
  s.f = Eigen::VectorXd::Zero(L);
  Eigen::MatrixXd nn = Eigen::MatrixXd::Zero(L, L);
  for (std::size_t c = 0; c < configs.size(); ++c) {
    const double p = logw[c] / z;
    for (std::size_t a = 0; a < L; ++a) {
      if (!((configs[c] >> a) & 1u)) continue;
      s.f(a) += p;
      for (std::size_t b = 0; b < L; ++b) {
        if ((configs[c] >> b) & 1u) nn(a, b) += p;
      }
    }
  }
  s.covariance = nn - s.f * s.f.transpose();
  s.particle_hole.resize(L, L);
  for (std::size_t a = 0; a < L; ++a) {
    for (std::size_t b = 0; b < L; ++b) {
      s.particle_hole(a, b) = a == b ? 0.0 : s.f(a) - nn(a, b);
    }
  }
  return s;
}

}  // namespace

OccupationResult thermal_occupations(const Eigen::VectorXd& energies,
                                     const Eigen::MatrixXd& orbitals, double mu,
                                     const EnsembleSpec& ensemble) {
  const std::size_t L = static_cast<std::size_t>(energies.size());
  if (orbitals.rows() != static_cast<Eigen::Index>(L) ||
      orbitals.cols() != static_cast<Eigen::Index>(L)) {
    throw InputError("orbital matrix does not match the number of levels");
  }
  OccupationResult out;
  if (ensemble.kind == EnsembleKind::grand_canonical) {
    out.up = grand_canonical_spin(energies, ensemble.beta, mu);
    out.down = out.up;
  } else {
    if (L > kCanonicalEnumerationCap) {
      throw CapacityError("canonical enumeration is limited to L <= " +
                          std::to_string(kCanonicalEnumerationCap));
    }
    out.up = canonical_spin(energies, ensemble.beta, ensemble.n_up);
    out.down = ensemble.n_down == ensemble.n_up
                   ? out.up
                   : canonical_spin(energies, ensemble.beta, ensemble.n_down);
  }
  const Eigen::VectorXd f = out.up.f + out.down.f;
  out.densities = orbitals.cwiseAbs2() * f;
  return out;
}

ChemicalPotential find_mu(const Eigen::VectorXd& energies, double beta, double target_n,
                          double tolerance) {
  const double L = static_cast<double>(energies.size());
  if (!(target_n > 0.0 && target_n < 2.0 * L)) {
    throw InputError("target particle number must lie in (0, 2L)");
  }
  auto count = [&](double mu) {
    double n = 0.0;
    for (Eigen::Index a = 0; a < energies.size(); ++a) n += 2.0 * fermi(beta * (energies(a) - mu));
    return n;
  };
  double lo = energies.minCoeff() - 50.0 / beta;
  double hi = energies.maxCoeff() + 50.0 / beta;
  ChemicalPotential out;
  for (int expand = 0; expand < 8 && count(lo) > target_n; ++expand) lo -= (hi - lo);
  for (int expand = 0; expand < 8 && count(hi) < target_n; ++expand) hi += (hi - lo);
  if (count(lo) > target_n) {
    out.mu = lo;
    out.at_bracket_edge = true;
    return out;
  }
  if (count(hi) < target_n) {
    out.mu = hi;
    out.at_bracket_edge = true;
    return out;
  }
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double n = count(mid);
    if (std::abs(n - target_n) < tolerance) {
      out.mu = mid;
      return out;
    }
    (n < target_n ? lo : hi) = mid;
    if (hi - lo <= std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(mid))) break;
  }
  out.mu = 0.5 * (lo + hi);
  if (std::abs(count(out.mu) - target_n) > std::max(1e3 * tolerance, 1e-10)) {
    throw NumericalError("chemical potential bisection stalled");
  }
  return out;
}

namespace {

struct Evaluation {
  Eigen::MatrixXd orbitals;
  Eigen::VectorXd energies;
  std::optional<double> mu;
  bool mu_at_edge = false;
  OccupationResult occ;
};

Evaluation evaluate(const LatticeSpec& spec, const EnsembleSpec& ensemble,
                    const Eigen::VectorXd& vks) {
  const Eigen::MatrixXd h = build_single_particle_hamiltonian(
      spec, std::span<const double>(vks.data(), static_cast<std::size_t>(vks.size())));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
  if (eig.info() != Eigen::Success) throw NumericalError("KS diagonalization failed");
  Evaluation ev;
  ev.orbitals = eig.eigenvectors();
  ev.energies = eig.eigenvalues();
  double mu = 0.0;
  if (ensemble.kind == EnsembleKind::grand_canonical) {
    const auto cp = find_mu(ev.energies, ensemble.beta, ensemble.target_n);
    mu = cp.mu;
    ev.mu = mu;
    ev.mu_at_edge = cp.at_bracket_edge;
  }
  ev.occ = thermal_occupations(ev.energies, ev.orbitals, mu, ensemble);
  return ev;
}

ThermalKsState assemble(const LatticeSpec& spec, const EnsembleSpec& ensemble,
                        const Eigen::VectorXd& v_ext, const Eigen::VectorXd& vks,
                        Evaluation&& ev) {
  ThermalKsState st;
  st.lattice = spec;
  st.ensemble = ensemble;
  st.orbitals = std::move(ev.orbitals);
  st.energies = std::move(ev.energies);
  st.mu = ev.mu;
  st.up = std::move(ev.occ.up);
  st.down = std::move(ev.occ.down);
  st.densities = std::move(ev.occ.densities);
  st.v_ext = v_ext;
  st.vks = vks;
  if (ev.mu_at_edge) st.warnings.emplace_back("chemical potential pinned at bracket edge");
  return st;
}

}  // namespace

ThermalKsState thermal_state_for_potential(const LatticeSpec& spec, const EnsembleSpec& ensemble,
                                           std::span<const double> vks) {
  spec.validate();
  ensemble.validate(spec.L);
  if (vks.size() != spec.L) throw InputError("KS potential length mismatch");
  const Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(vks.data(), vks.size());
  return assemble(spec, ensemble, v, v, evaluate(spec, ensemble, v));
}

ThermalKsState scf_solve(const LatticeSpec& spec, const EnsembleSpec& ensemble,
                         std::span<const double> v_ext_in, const ScfOptions& options) {
  spec.validate();
  ensemble.validate(spec.L);
  if (v_ext_in.size() != spec.L) throw InputError("external potential length mismatch");
  if (!(options.mixing > 0.0 && options.mixing <= 1.0)) {
    throw InputError("mixing parameter must lie in (0, 1]");
  }
  const Eigen::Index L = static_cast<Eigen::Index>(spec.L);
  const Eigen::VectorXd v_ext = Eigen::Map<const Eigen::VectorXd>(v_ext_in.data(), L);

  // Iteration zero: bare densities. The Hxc potential of a noninteracting
  // chain vanishes, so U = 0 converges on the first iteration.
  Eigen::VectorXd n_in = evaluate(spec, ensemble, v_ext).occ.densities;

  double alpha = options.mixing;
  double last_residual = std::numeric_limits<double>::infinity();
  double best_residual = std::numeric_limits<double>::infinity();
  int growth_streak = 0;
  int stall = 0;
  std::size_t clamp_total = 0;

  for (std::size_t iter = 1; iter <= options.max_iter; ++iter) {
    Eigen::VectorXd vks = v_ext;
    std::size_t clamps = 0;
    for (Eigen::Index i = 0; i < L; ++i) {
      const double n = std::clamp(n_in(i), 0.0, 2.0);
      const auto hxc = hxc_potential(n, spec.U, ensemble.beta, options.density_clamp);
      vks(i) += hxc.v_hxc;
      clamps += hxc.clamped ? 1 : 0;
    }
    clamp_total += clamps;
    Evaluation ev = evaluate(spec, ensemble, vks);
    const double residual = (ev.occ.densities - n_in).cwiseAbs().maxCoeff();
    if (!std::isfinite(residual)) throw ConvergenceError("SCF residual is not finite", residual);
    if (options.trace) {
      *options.trace << iter << ',' << residual << ',';
      if (ev.mu) *options.trace << *ev.mu;
      *options.trace << '\n';
    }
    if (residual < options.tolerance) {
      ThermalKsState st = assemble(spec, ensemble, v_ext, vks, std::move(ev));
      st.iterations = iter;
      st.residual = residual;
      st.clamp_events = clamp_total;
      st.final_mixing = alpha;
      if (clamps > 0) {
        st.warnings.emplace_back("density clamp active at convergence (" +
                                 std::to_string(clamps) + " sites)");
      }
      return st;
    }
    if (options.adaptive_mixing) {
      // Halve alpha on sustained growth or when an oscillation stalls progress.
      growth_streak = residual > last_residual ? growth_streak + 1 : 0;
      if (residual < 0.999 * best_residual) {
        best_residual = residual;
        stall = 0;
      } else {
        ++stall;
      }
      if ((growth_streak >= 3 || stall >= 20) && alpha > 1e-4) {
        alpha *= 0.5;
        growth_streak = 0;
        stall = 0;
        best_residual = residual;
      }
    }
    last_residual = residual;
    n_in = (1.0 - alpha) * n_in + alpha * ev.occ.densities;
  }
  std::ostringstream msg;
  msg << "SCF did not converge in " << options.max_iter << " iterations (residual "
      << last_residual << ")";
  throw ConvergenceError(msg.str(), last_residual);
}

}  // namespace thermowork
