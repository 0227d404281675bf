// pipeline.hpp - end-to-end evaluation of one (lattice, ensemble, v0) point
#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "thermowork/ed_oracle.hpp"
#include "thermowork/response.hpp"
#include "thermowork/thermal_ks.hpp"
#include "thermowork/workstats.hpp"

namespace thermowork {

struct LrOptions {
  ScfOptions scf;
  ResponseOptions response;
};

/// Equilibrium and static response only; enough for sudden quenches.
struct StaticPoint {
  ThermalKsState state;
  TransitionSpace space;
  KernelMatrix kernel;
  Eigen::MatrixXd ks_isothermal;
  Eigen::MatrixXd isothermal;
  double sudden_work = 0.0;  // beta <W_diss> / dv^2
};

/// Full linear-response point: KS and dressed poles plus relaxation spectrum.
struct LrPoint : StaticPoint {
  ResponsePoles ks;
  ResponsePoles dressed;
  RelaxationSpectrum spectrum;
};

/// External potential v0 * g_i, SCF, thALDA kernel and isothermal response.
StaticPoint run_static_point(const LatticeSpec& spec, const EnsembleSpec& ensemble, double v0,
                             const LrOptions& opt = {});

LrPoint run_lr_point(const LatticeSpec& spec, const EnsembleSpec& ensemble, double v0,
                     const LrOptions& opt = {});

/// Exact counterpart of run_lr_point.
struct ExactPoint {
  ManyBodySpectrum spectrum;
  RelaxationSpectrum relaxation;
  Eigen::MatrixXd isothermal;
};

ExactPoint run_exact_point(const LatticeSpec& spec, const EnsembleSpec& ensemble, double v0,
                           const EdOptions& opt = {});

struct BenchmarkGrid {
  std::vector<double> U{0.5, 1.0, 2.0, 4.0};
  std::vector<double> v0{0.5, 1.0, 2.0};
  std::vector<double> tau{0.1, 1.0, 5.0, 20.0};
};

struct BenchmarkRow {
  double U = 0.0, v0 = 0.0, tau = 0.0;
  std::array<double, 3> lr{};     // beta^n k^n, LR-thTDDFT
  std::array<double, 3> exact{};  // beta^n k^n, exact diagonalization
  std::array<double, 3> rel_err{};
};

struct BenchmarkTable {
  EnsembleKind kind = EnsembleKind::canonical;
  double beta = 1.0, dv = 0.01;
  std::vector<BenchmarkRow> rows;
  std::array<double, 3> mean_rel_err{};
};

/// Two-site chain at half filling: first three cumulants from both routes at
/// every (U, v0, tau) grid point, in grid order.
BenchmarkTable benchmark_dimer(const BenchmarkGrid& grid, EnsembleKind kind, double beta,
                               double dv, const LrOptions& lr = {}, const EdOptions& ed = {});

}  // namespace thermowork
