// pipeline.cpp
#include "thermowork/pipeline.hpp"

#include <cmath>

namespace thermowork {

StaticPoint run_static_point(const LatticeSpec& spec, const EnsembleSpec& ensemble, double v0,
                             const LrOptions& opt) {
  StaticPoint p;
  const auto v_ext = staggered_potential(spec, v0);
  p.state = scf_solve(spec, ensemble, v_ext, opt.scf);
  p.space = transition_space(p.state, opt.response);
  p.kernel = thalda_kernel(p.state);
  p.ks_isothermal = isothermal_ks_response(p.state, p.space);
  p.isothermal = isothermal_response(p.ks_isothermal, p.kernel);
  p.sudden_work = dissipated_work_sudden(p.state, p.isothermal);
  return p;
}

LrPoint run_lr_point(const LatticeSpec& spec, const EnsembleSpec& ensemble, double v0,
                     const LrOptions& opt) {
  LrPoint p;
  static_cast<StaticPoint&>(p) = run_static_point(spec, ensemble, v0, opt);
  p.ks = ks_response_poles(p.space, opt.response);
  p.dressed = dress_response(p.ks, p.kernel, p.space, opt.response);
  const auto g = spec.weights();
  p.spectrum = relaxation_spectrum(p.dressed, p.isothermal, g, ensemble.beta);
  return p;
}

ExactPoint run_exact_point(const LatticeSpec& spec, const EnsembleSpec& ensemble, double v0,
                           const EdOptions& opt) {
  ExactPoint p;
  const auto v_ext = staggered_potential(spec, v0);
  p.spectrum = exact_spectrum(spec, v_ext, ensemble, opt);
  const auto g = spec.weights();
  p.relaxation = exact_relaxation_spectrum(p.spectrum, g, opt);
  p.isothermal = exact_static_susceptibility(p.spectrum, opt);
  return p;
}

BenchmarkTable benchmark_dimer(const BenchmarkGrid& grid, EnsembleKind kind, double beta,
                               double dv, const LrOptions& lr, const EdOptions& ed) {
  BenchmarkTable table;
  table.kind = kind;
  table.beta = beta;
  table.dv = dv;
  const EnsembleSpec ensemble = half_filling(2, beta, kind);
  for (double U : grid.U) {
    const LatticeSpec spec = make_chain(2, U);
    for (double v0 : grid.v0) {
      const LrPoint approx = run_lr_point(spec, ensemble, v0, lr);
      const ExactPoint exact = run_exact_point(spec, ensemble, v0, ed);
      for (double tau : grid.tau) {
        DriveProtocol protocol{v0, dv, tau, DriveShape::linear_ramp};
        BenchmarkRow row;
        row.U = U;
        row.v0 = v0;
        row.tau = tau;
        for (int n = 1; n <= 3; ++n) {
          const std::size_t k = static_cast<std::size_t>(n - 1);
          row.lr[k] = cumulant(n, approx.spectrum, protocol).total();
          row.exact[k] = cumulant(n, exact.relaxation, protocol).total();
          row.rel_err[k] = std::abs(row.lr[k] - row.exact[k]) / std::abs(row.exact[k]);
        }
        table.rows.push_back(row);
      }
    }
  }
  for (const auto& row : table.rows) {
    for (std::size_t k = 0; k < 3; ++k) table.mean_rel_err[k] += row.rel_err[k];
  }
  if (!table.rows.empty()) {
    for (auto& m : table.mean_rel_err) m /= static_cast<double>(table.rows.size());
  }
  return table;
}

}  // namespace thermowork
