#include "doctest.h"

#include <cmath>
#include <sstream>

#include "support.hpp"
#include "thermowork/errors.hpp"
#include "thermowork/thermal_ks.hpp"

using namespace thermowork;
using twtest::Gen;

namespace {

// Brute-force single-spin canonical statistics over all n-subsets of orbitals.
SpinOccupations enumerate_spin(const Eigen::VectorXd& eps, std::size_t n, double beta) {
  const auto L = eps.size();
  SpinOccupations s;
  s.f = Eigen::VectorXd::Zero(L);
  Eigen::MatrixXd nn = Eigen::MatrixXd::Zero(L, L);
  s.particle_hole = Eigen::MatrixXd::Zero(L, L);
  double z = 0.0;
  const double shift = eps.head(static_cast<Eigen::Index>(n)).sum();
  for (auto bits : enumerate_strings(static_cast<std::size_t>(L), n)) {
    double e = 0.0;
    for (Eigen::Index a = 0; a < L; ++a) {
      if (bits >> a & 1u) e += eps(a);
    }
    const double w = std::exp(-beta * (e - shift));
    z += w;
    for (Eigen::Index a = 0; a < L; ++a) {
      if (!(bits >> a & 1u)) continue;
      s.f(a) += w;
      for (Eigen::Index b = 0; b < L; ++b) {
        if (bits >> b & 1u) {
          nn(a, b) += w;
        } else {
          s.particle_hole(a, b) += w;
        }
      }
    }
  }
  s.f /= z;
  nn /= z;
  s.particle_hole /= z;
  s.covariance = nn - s.f * s.f.transpose();
  return s;
}

}  // namespace

TEST_SUITE("thermal_ks") {
  TEST_CASE("Hxc potential at half filling and in the noninteracting limit") {
    for (double U : {0.5, 2.0, 6.0}) {
      for (double beta : {0.3, 1.0, 4.0}) {
        CHECK(hxc_potential(1.0, U, beta).v_hxc == doctest::Approx(U / 2.0).epsilon(1e-13));
      }
    }
    for (double n : {0.1, 0.7, 1.3, 1.9}) {
      const auto h = hxc_potential(n, 0.0, 1.0);
      CHECK(std::abs(h.v_hxc) < 1e-14);
      CHECK(h.gamma == doctest::Approx(1.0));
    }
  }

  TEST_CASE("Hxc potential matches the closed-form Gamma") {
    Gen gen(21);
    for (int t = 0; t < 200; ++t) {
      const double n = gen.uniform(0.02, 1.98), U = gen.uniform(0.0, 6.0), beta = gen.uniform(0.2, 4.0);
      const double x = n - 1.0, e = std::exp(-beta * U);
      const auto h = hxc_potential(n, U, beta);
      // Gamma is the positive root of n G^2 - 2 x G - e (2 - n) = 0.
      const double g = h.gamma;
      CHECK(g > 0.0);
      const double scale = n * g * g + std::abs(2.0 * x * g) + e * (2.0 - n);
      CHECK(std::abs(n * g * g - 2.0 * x * g - e * (2.0 - n)) < 1e-13 * scale);
      CHECK(h.v_hxc == doctest::Approx(U + std::log(g) / beta).epsilon(1e-12));
      if (x >= 0.0) {
        const double closed = (x + std::sqrt(x * x + e * (1.0 - x * x))) / n;
        CHECK(twtest::rel_diff(g, closed) < 1e-12);
      }
    }
  }

  TEST_CASE("Hxc particle-hole identity v(n) + v(2 - n) = U") {
    Gen gen(22);
    for (int t = 0; t < 200; ++t) {
      const double n = gen.uniform(0.01, 1.99), U = gen.uniform(0.0, 6.0), beta = gen.uniform(0.2, 4.0);
      CHECK(hxc_potential(n, U, beta).v_hxc + hxc_potential(2.0 - n, U, beta).v_hxc ==
            doctest::Approx(U).epsilon(1e-11));
    }
  }

  TEST_CASE("Hxc kernel is positive and matches finite differences") {
    Gen gen(23);
    for (int t = 0; t < 300; ++t) {
      const double n = gen.uniform(0.05, 1.95), U = gen.uniform(0.1, 6.0), beta = gen.uniform(0.2, 4.0);
      const double h = 1e-5;
      const double fd = (hxc_potential(n + h, U, beta).v_hxc - hxc_potential(n - h, U, beta).v_hxc) / (2 * h);
      const double f = hxc_potential(n, U, beta).f_hxc;
      CHECK(f > 0.0);
      CHECK(twtest::rel_diff(f, fd) < 1e-6);
    }
  }

  TEST_CASE("Hxc domain and clamp") {
    CHECK_THROWS_AS(hxc_potential(-0.1, 1.0, 1.0), DomainError);
    CHECK_THROWS_AS(hxc_potential(2.1, 1.0, 1.0), DomainError);
    CHECK(hxc_potential(0.0, 1.0, 1.0).clamped);
    CHECK(hxc_potential(2.0, 1.0, 1.0).clamped);
    CHECK_FALSE(hxc_potential(1.0, 1.0, 1.0).clamped);
    CHECK(std::isfinite(hxc_potential(0.0, 4.0, 4.0).v_hxc));
  }

  TEST_CASE("grand-canonical occupations are Fermi functions") {
    Gen gen(24);
    for (int t = 0; t < 20; ++t) {
      const std::size_t L = gen.index(2, 6);
      const auto spec = make_chain(L, 0.0);
      const Eigen::MatrixXd h = build_single_particle_hamiltonian(spec, gen.vector(L, -1.0, 1.0));
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
      const double beta = gen.uniform(0.3, 4.0), mu = gen.uniform(-1.0, 1.0);
      const auto occ = thermal_occupations(eig.eigenvalues(), eig.eigenvectors(), mu,
                                           half_filling(L, beta));
      for (Eigen::Index a = 0; a < static_cast<Eigen::Index>(L); ++a) {
        const double f = 1.0 / (1.0 + std::exp(beta * (eig.eigenvalues()(a) - mu)));
        CHECK(occ.up.f(a) == doctest::Approx(f).epsilon(1e-13));
        CHECK(occ.up.covariance(a, a) == doctest::Approx(f * (1 - f)).epsilon(1e-12));
      }
      Eigen::VectorXd n = 2.0 * eig.eigenvectors().cwiseAbs2() * occ.up.f;
      CHECK((occ.densities - n).norm() < 1e-12);
    }
  }

  TEST_CASE("canonical occupations match brute-force enumeration") {
    Gen gen(25);
    for (int t = 0; t < 20; ++t) {
      const std::size_t L = gen.index(2, 7);
      const Eigen::MatrixXd h = build_single_particle_hamiltonian(make_chain(L, 0.0), gen.vector(L, -1.5, 1.5));
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
      EnsembleSpec ens;
      ens.kind = EnsembleKind::canonical;
      ens.beta = gen.uniform(0.3, 4.0);
      ens.n_up = gen.index(1, L);
      ens.n_down = gen.index(0, L);
      const auto occ = thermal_occupations(eig.eigenvalues(), eig.eigenvectors(), 0.0, ens);
      const auto up = enumerate_spin(eig.eigenvalues(), ens.n_up, ens.beta);
      const auto dn = enumerate_spin(eig.eigenvalues(), ens.n_down, ens.beta);
      CHECK((occ.up.f - up.f).norm() < 1e-12);
      CHECK((occ.down.f - dn.f).norm() < 1e-12);
      CHECK((occ.up.covariance - up.covariance).norm() < 1e-12);
      CHECK((occ.up.particle_hole - up.particle_hole).norm() < 1e-12);
      CHECK(occ.densities.sum() == doctest::Approx(static_cast<double>(ens.n_up + ens.n_down)));
    }
  }

  TEST_CASE("chemical potential hits the target particle number") {
    Gen gen(26);
    for (int t = 0; t < 30; ++t) {
      const std::size_t L = gen.index(2, 10);
      Eigen::VectorXd e(static_cast<Eigen::Index>(L));
      for (auto& x : e) x = gen.uniform(-3.0, 3.0);
      std::sort(e.begin(), e.end());
      const double beta = gen.log_uniform(0.1, 20.0);
      const double target = gen.uniform(0.2, 2.0 * static_cast<double>(L) - 0.2);
      const auto mu = find_mu(e, beta, target);
      double n = 0.0;
      for (double x : e) n += 2.0 * fermi(beta * (x - mu.mu));
      CHECK(n == doctest::Approx(target).epsilon(1e-9));
    }
    // Symmetric spectrum at half filling.
    Eigen::VectorXd e(4);
    e << -1.5, -0.5, 0.5, 1.5;
    CHECK(std::abs(find_mu(e, 1.0, 4.0).mu) < 1e-9);
  }

  TEST_CASE("noninteracting SCF converges in one iteration to bare densities") {
    for (auto kind : {EnsembleKind::grand_canonical, EnsembleKind::canonical}) {
      const auto spec = make_chain(6, 0.0);
      const auto v = staggered_potential(spec, 0.8);
      const auto st = scf_solve(spec, half_filling(6, 1.0, kind), v);
      CHECK(st.iterations == 1);
      const auto bare = thermal_state_for_potential(spec, half_filling(6, 1.0, kind), v);
      CHECK((st.densities - bare.densities).norm() < 1e-14);
    }
  }

  TEST_CASE("SCF self-consistency and particle-number conservation") {
    Gen gen(27);
    for (int t = 0; t < 40; ++t) {
      const auto spec = gen.chain(8, 4.0);
      const auto ens = gen.ensemble(spec.L, 0.3, 3.0);
      const auto v = gen.vector(spec.L, -2.0, 2.0);
      const auto st = scf_solve(spec, ens, v);
      CHECK(st.residual < 1e-10);
      CHECK(st.densities.sum() == doctest::Approx(ens.particle_number()).epsilon(1e-10));
      // Re-evaluating the densities from the returned potential reproduces them.
      const auto again = thermal_state_for_potential(spec, ens, std::vector<double>(st.vks.data(), st.vks.data() + st.vks.size()));
      CHECK((again.densities - st.densities).cwiseAbs().maxCoeff() < 1e-10);
      // The KS potential is v_ext plus the Hxc potential of the converged densities.
      for (Eigen::Index i = 0; i < st.densities.size(); ++i) {
        const auto h = hxc_potential(st.densities(i), spec.U, ens.beta);
        CHECK(std::abs(st.vks(i) - v[static_cast<std::size_t>(i)] - h.v_hxc) < 1e-9 * std::max(1.0, h.f_hxc));
      }
    }
  }

  TEST_CASE("SCF converges for strong coupling at low temperature") {
    Gen gen(28);
    for (int t = 0; t < 40; ++t) {
      const auto spec = gen.chain(6, 4.0);
      const auto ens = gen.ensemble(spec.L, 2.5, 4.0);
      const auto v = staggered_potential(spec, gen.uniform(0.0, 3.0));
      const auto st = scf_solve(spec, ens, v);
      CHECK(st.residual < 1e-10);
    }
  }

  TEST_CASE("zero staggered field at half filling gives uniform density") {
    for (auto kind : {EnsembleKind::grand_canonical, EnsembleKind::canonical}) {
      const auto spec = make_chain(6, 2.0, Boundary::periodic);
      const auto st = scf_solve(spec, half_filling(6, 1.0, kind), std::vector<double>(6, 0.0));
      for (double n : st.densities) CHECK(n == doctest::Approx(1.0).epsilon(1e-10));
    }
  }

  TEST_CASE("reflected potential gives reflected densities") {
    Gen gen(29);
    for (int t = 0; t < 10; ++t) {
      const auto spec = make_chain(gen.index(2, 7), gen.uniform(0.0, 4.0));
      const auto ens = gen.ensemble(spec.L, 0.5, 2.0);
      auto v = gen.vector(spec.L, -1.5, 1.5);
      const auto a = scf_solve(spec, ens, v);
      std::reverse(v.begin(), v.end());
      const auto b = scf_solve(spec, ens, v);
      CHECK((a.densities - b.densities.reverse()).cwiseAbs().maxCoeff() < 1e-9);
    }
  }

  TEST_CASE("SCF trace and convergence failure") {
    const auto spec = make_chain(4, 3.0);
    const auto v = staggered_potential(spec, 1.0);
    std::ostringstream trace;
    ScfOptions opt;
    opt.trace = &trace;
    const auto st = scf_solve(spec, half_filling(4, 1.0), v, opt);
    std::size_t lines = 0;
    for (char c : trace.str()) lines += c == '\n';
    CHECK(lines == st.iterations);

    ScfOptions tight;
    tight.max_iter = 2;
    try {
      scf_solve(spec, half_filling(4, 1.0), v, tight);
      FAIL("expected a convergence error");
    } catch (const ConvergenceError& e) {
      CHECK(e.last_residual() > 0.0);
    }
    ScfOptions bad;
    bad.mixing = 0.0;
    CHECK_THROWS_AS(scf_solve(spec, half_filling(4, 1.0), v, bad), InputError);
  }

  TEST_CASE("ensemble validation") {
    EnsembleSpec e = half_filling(4, 1.0, EnsembleKind::canonical);
    CHECK(e.n_up + e.n_down == 4);
    e.beta = -1.0;
    CHECK_THROWS_AS(e.validate(4), InputError);
    EnsembleSpec g = half_filling(5, 1.0);
    g.target_n = 11.0;
    CHECK_THROWS_AS(g.validate(5), InputError);
    CHECK_THROWS_AS(thermal_state_for_potential(make_chain(14, 0.0), half_filling(14, 1.0, EnsembleKind::canonical),
                                                std::vector<double>(14, 0.0)),
                    CapacityError);
  }
}
