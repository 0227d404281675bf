// acceptance.cpp - end-to-end acceptance gate, one PASS/FAIL line per criterion
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "thermowork/ed_oracle.hpp"
#include "thermowork/errors.hpp"
#include "thermowork/pipeline.hpp"
#include "thermowork/sweep.hpp"
#include "thermowork/workstats.hpp"

using namespace thermowork;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Every cumulant report computed by the gate goes through here for criterion 6.
struct FanoLedger {
  std::mutex m;
  std::size_t reports = 0;
  double min_fano = std::numeric_limits<double>::infinity();

  void record(const CumulantReport& r) {
    if (!r.beta_fano) return;
    std::lock_guard lock(m);
    ++reports;
    min_fano = std::min(min_fano, *r.beta_fano);
  }
};
FanoLedger g_fano;

Outcome benchmark(EnsembleKind kind, double limit_s) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto table = benchmark_dimer(BenchmarkGrid{}, kind, 1.0, 0.01);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto& m = table.mean_rel_err;
  const bool ok = m[0] < 5e-2 && m[1] < 5e-2 && m[2] < 5e-2 && secs < limit_s;
  return {ok, fmt("%s mean rel err k1=%.3e k2=%.3e k3=%.3e (gate 5e-2), %.2fs", to_string(kind).c_str(), m[0],
                  m[1], m[2], secs)};
}

Outcome noninteracting_exactness() {
  const auto t0 = std::chrono::steady_clock::now();
  BenchmarkGrid grid;
  grid.U = {0.0};
  double worst = 0.0;
  for (auto kind : {EnsembleKind::canonical, EnsembleKind::grand_canonical}) {
    for (const auto& row : benchmark_dimer(grid, kind, 1.0, 0.01).rows) {
      for (double e : row.rel_err) worst = std::max(worst, e);
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {worst < 1e-8 && secs < 10.0, fmt("worst rel err %.3e at U=0 (gate 1e-8), %.2fs", worst, secs)};
}

Outcome phase_ridge() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<double> Us{1.0, 2.0, 3.0, 4.0};
  std::vector<double> v0s;
  for (int k = 0; k <= 58; ++k) v0s.push_back(0.1 + 0.05 * k);
  const auto ens = half_filling(50, 1.0);
  std::vector<double> work(Us.size() * v0s.size(), std::numeric_limits<double>::quiet_NaN());
  run_sweep(
      work.size(),
      [&](std::size_t u) -> UnitRows {
        const auto p = run_static_point(make_chain(50, Us[u / v0s.size()]), ens, v0s[u % v0s.size()]);
        work[u] = p.sudden_work;
        return {};
      },
      [](std::size_t, const std::string&) -> UnitRows { return {}; }, [](std::size_t, const UnitRows&) {});
  bool ok = true;
  std::ostringstream detail;
  for (std::size_t i = 0; i < Us.size(); ++i) {
    const auto first = work.begin() + static_cast<std::ptrdiff_t>(i * v0s.size());
    const auto best = std::max_element(first, first + static_cast<std::ptrdiff_t>(v0s.size()));
    const double v0 = v0s[static_cast<std::size_t>(best - first)];
    const double target = Us[i] / 2.0;
    const bool hit = std::abs(v0 - target) <= 0.25 * target;
    ok = ok && hit && std::isfinite(*best);
    detail << fmt("U=%g argmax v0=%.2f (U/2=%.2f)%s; ", Us[i], v0, target, hit ? "" : " miss");
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  detail << fmt("%.2fs on %zu workers", secs, default_jobs());
  return {ok && secs < 120.0, detail.str()};
}

Outcome gaussianization() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto spec = make_chain(50, 1.0);
  const auto ens = half_filling(50, 1.0);
  const auto taus = log_grid(0.1, 100.0, 40);
  bool ok = true;
  std::ostringstream detail;
  for (double v0 : {0.5, 1.0, 2.0}) {
    const auto p = run_lr_point(spec, ens, v0);
    std::vector<double> k3;
    for (double tau : taus) {
      const auto r = cumulant_report(p.spectrum, DriveProtocol{v0, 0.01, tau}, 4, spec.U);
      g_fano.record(r);
      k3.push_back(r.order(3).total());
    }
    const auto star = crossover_time(taus, k3);
    if (!star) {
      ok = false;
      detail << fmt("v0=%g: no crossover; ", v0);
      continue;
    }
    double worst = 0.0;
    std::size_t checked = 0;
    for (std::size_t i = 0; i < taus.size(); ++i) {
      if (taus[i] <= 10.0 * *star) continue;
      ++checked;
      worst = std::max(worst, std::abs(k3[i] / k3.front()));
    }
    ok = ok && checked > 0 && worst < 1e-2;
    detail << fmt("v0=%g tau*=%.3g worst k3 ratio %.2e over %zu taus; ", v0, *star, worst, checked);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  detail << fmt("%.2fs", secs);
  return {ok && secs < 300.0, detail.str()};
}

Outcome uncertainty_relation() {
  // Adds its own L=50 reports to those gathered by the other criteria.
  double best_saturation = std::numeric_limits<double>::infinity();
  double min_sudden_excess = std::numeric_limits<double>::infinity();
  for (double U : {1.0, 3.0}) {
    for (double v0 : {0.5, 1.0, 2.0}) {
      const auto p = run_lr_point(make_chain(50, U), half_filling(50, 1.0), v0);
      for (double tau : {0.1, 1.0, 10.0, 100.0}) {
        const auto r = cumulant_report(p.spectrum, DriveProtocol{v0, 0.01, tau}, 4, U);
        g_fano.record(r);
        if (!r.beta_fano) continue;
        if (tau == 100.0) best_saturation = std::min(best_saturation, *r.beta_fano - 2.0);
        if (tau == 0.1) min_sudden_excess = std::min(min_sudden_excess, *r.beta_fano - 2.0);
      }
    }
  }
  const bool ok = g_fano.min_fano >= 2.0 - 1e-12 && best_saturation < 1e-3 && min_sudden_excess > 0.0;
  return {ok, fmt("min beta F over %zu reports %.12g; best adiabatic beta F - 2 = %.2e; min at tau=0.1: 2 + %.3g",
                  g_fano.reports, g_fano.min_fano, best_saturation, min_sudden_excess)};
}

Outcome positivity() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(7);
  auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  std::size_t failures = 0, instances = 0, exact_checked = 0;
  double worst = 0.0;
  auto check = [&](const RelaxationSpectrum& s, double v0) {
    bool good = s.psi_ad >= 0.0;
    worst = std::min(worst, s.psi_ad);
    for (const auto& w : s.nonadiabatic) {
      good = good && w.weight >= 0.0;
      worst = std::min(worst, w.weight);
    }
    for (double tau : {0.0, 0.1, 1.0, 10.0, 100.0}) {
      const auto r = cumulant_report(s, DriveProtocol{v0, 0.01, tau}, 4);
      g_fano.record(r);
      for (const auto& c : r.cumulants) {
        good = good && c.total() >= 0.0;
        worst = std::min(worst, c.total());
      }
    }
    return good;
  };
  for (int t = 0; t < 200; ++t) {
    const auto L = std::uniform_int_distribution<std::size_t>(2, 6)(rng);
    const auto spec = make_chain(L, uni(0.0, 4.0), uni(0.0, 1.0) < 0.5 ? Boundary::open : Boundary::periodic);
    const auto ens = half_filling(L, uni(0.1, 4.0), uni(0.0, 1.0) < 0.5 ? EnsembleKind::canonical : EnsembleKind::grand_canonical);
    const double v0 = uni(0.0, 3.0);
    ++instances;
    try {
      if (!check(run_lr_point(spec, ens, v0).spectrum, v0)) ++failures;
      if (L <= 4) {
        ++exact_checked;
        if (!check(run_exact_point(spec, ens, v0).relaxation, v0)) ++failures;
      }
    } catch (const Error&) {
      ++failures;
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {failures == 0 && secs < 120.0,
          fmt("%zu LR instances (+%zu exact), %zu failures, most negative value %.3e, %.2fs", instances,
              exact_checked, failures, worst, secs)};
}

Outcome sudden_limit() {
  std::mt19937_64 rng(8);
  auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const bool big = t % 2 == 0;
    const auto L = big ? std::uniform_int_distribution<std::size_t>(8, 50)(rng)
                       : std::uniform_int_distribution<std::size_t>(2, 5)(rng);
    const auto spec = make_chain(L, uni(0.0, 4.0));
    const auto ens = half_filling(L, uni(0.2, 4.0), big ? EnsembleKind::grand_canonical : EnsembleKind::canonical);
    const double v0 = uni(0.0, 3.0), dv = 0.01;
    const DriveProtocol p{v0, dv, 1e-6};
    const auto g = spec.weights();
    // Small chains also run through the exact oracle.
    const auto lr = run_lr_point(spec, ens, v0);
    const double closed = dissipated_work_sudden(lr.isothermal, g, ens.beta);
    const double glrt = cumulant(1, lr.spectrum, p).total() / (dv * dv);
    worst = std::max(worst, std::abs(glrt - closed) / std::abs(closed));
    if (!big) {
      const auto ex = run_exact_point(spec, ens, v0);
      const double c = dissipated_work_sudden(ex.isothermal, g, ens.beta);
      const double k = cumulant(1, ex.relaxation, p).total() / (dv * dv);
      worst = std::max(worst, std::abs(k - c) / std::abs(c));
    }
  }
  return {worst < 1e-6, fmt("worst relative deviation %.3e over 50 instances (gate 1e-6)", worst)};
}

Outcome relative_entropy_scaling() {
  bool ok = true;
  std::ostringstream detail;
  const auto spec = make_chain(2, 1.0);
  for (auto kind : {EnsembleKind::canonical, EnsembleKind::grand_canonical}) {
    const auto ens = half_filling(2, 1.0, kind);
    const auto exact = run_exact_point(spec, ens, 1.0);
    for (double tau : {0.1, 1.0, 10.0}) {
      auto deviation = [&](double dv) {
        const DriveProtocol p{1.0, dv, tau};
        const double s = exact_dissipated_work_evolution(spec, ens, p).relative_entropy;
        return std::abs(s / cumulant(1, exact.relaxation, p).total() - 1.0);
      };
      const double coarse = deviation(0.02), fine = deviation(0.01);
      const double factor = coarse / fine;
      ok = ok && factor >= 1.5;
      detail << fmt("%s%s tau=%g factor %.3f", detail.tellp() ? "; " : "",
                    kind == EnsembleKind::canonical ? "C" : "GC", tau, factor);
    }
  }
  return {ok, detail.str()};
}

Outcome cross_checks() {
  std::mt19937_64 rng(9);
  auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  double kernel_err = 0.0;
  for (int t = 0; t < 500; ++t) {
    const double n = uni(0.05, 1.95), U = uni(0.1, 6.0), beta = uni(0.2, 4.0), h = 1e-5;
    const double fd = (hxc_potential(n + h, U, beta).v_hxc - hxc_potential(n - h, U, beta).v_hxc) / (2 * h);
    const double f = hxc_potential(n, U, beta).f_hxc;
    kernel_err = std::max(kernel_err, std::abs(f - fd) / std::abs(f));
  }

  double dyson_err = 0.0;
  for (int t = 0; t < 20; ++t) {
    const auto L = std::uniform_int_distribution<std::size_t>(2, 6)(rng);
    const auto spec = make_chain(L, uni(0.0, 4.0));
    const auto ens = half_filling(L, uni(0.3, 3.0), t % 2 ? EnsembleKind::canonical : EnsembleKind::grand_canonical);
    const auto lr = run_lr_point(spec, ens, uni(0.0, 2.0));
    std::vector<double> omegas;
    for (int k = 0; k < 200; ++k) {
      const double w = -6.0 + 0.06 * k + 0.0123;
      // Stay clear of the dressed and KS poles.
      bool clear = true;
      for (const auto* poles : {&lr.dressed, &lr.ks}) {
        for (const auto& p : poles->poles) clear = clear && std::abs(std::abs(w) - p.omega) > 0.05;
      }
      if (clear) omegas.push_back(w);
    }
    const double eta = 1e-3;
    const auto grid = grid_dyson_solve(lr.ks, lr.kernel, omegas, eta);
    for (std::size_t k = 0; k < omegas.size(); ++k) {
      if (!grid[k]) continue;
      const Eigen::MatrixXcd direct = evaluate_response(lr.dressed, {omegas[k], eta});
      dyson_err = std::max(dyson_err, (direct - *grid[k]).norm() / direct.norm());
    }
  }

  double static_err = 0.0;
  ScfOptions tight;
  tight.tolerance = 1e-13;
  LrOptions opt;
  opt.scf = tight;
  for (auto kind : {EnsembleKind::canonical, EnsembleKind::grand_canonical}) {
    for (double U : {0.5, 1.0, 2.0, 4.0}) {
      for (double v0 : {0.5, 1.0, 2.0}) {
        const auto spec = make_chain(2, U);
        const auto ens = half_filling(2, 1.0, kind);
        const auto p = run_static_point(spec, ens, v0, opt);
        const double h = 1e-4;
        Eigen::MatrixXd fd(2, 2);
        for (Eigen::Index j = 0; j < 2; ++j) {
          auto vp = staggered_potential(spec, v0), vm = vp;
          vp[static_cast<std::size_t>(j)] += h;
          vm[static_cast<std::size_t>(j)] -= h;
          fd.col(j) = (scf_solve(spec, ens, vp, tight).densities - scf_solve(spec, ens, vm, tight).densities) / (2 * h);
        }
        static_err = std::max(static_err, (p.isothermal - fd).norm() / fd.norm());
      }
    }
  }
  const bool ok = kernel_err < 1e-6 && dyson_err < 1e-8 && static_err < 1e-5;
  return {ok, fmt("kernel vs FD %.2e (1e-6); dressed poles vs grid Dyson %.2e (1e-8); static response vs SCF FD "
                  "%.2e (1e-5)",
                  kernel_err, dyson_err, static_err)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> expected_fail;
  std::vector<int> only;
  app.add_option("--expect-fail", expected_fail, "Criteria known to fail (recorded in the decisions ledger)")
      ->delimiter(',');
  app.add_option("--only", only, "Run only these criteria")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  // Criterion 6 reads reports gathered by 5 and 7, so it runs after them.
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, [] { return benchmark(EnsembleKind::canonical, 30.0); }},
      {2, [] { return benchmark(EnsembleKind::grand_canonical, 60.0); }},
      {3, noninteracting_exactness},
      {4, phase_ridge},
      {5, gaussianization},
      {7, positivity},
      {6, uncertainty_relation},
      {8, sudden_limit},
      {9, relative_entropy_scaling},
      {10, cross_checks},
  };
  const std::set<int> expected(expected_fail.begin(), expected_fail.end());
  const std::set<int> selected(only.begin(), only.end());
  std::vector<std::pair<int, std::string>> lines;
  bool gate = true;
  for (const auto& [id, run] : criteria) {
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    std::string status;
    if (o.pass) {
      status = expected.count(id) ? "PASS (listed as expected failure)" : "PASS";
      gate = gate && !expected.count(id);
    } else {
      status = expected.count(id) ? "FAIL (expected; see decisions ledger)" : "FAIL";
      gate = gate && expected.count(id);
    }
    lines.emplace_back(id, "criterion " + std::to_string(id) + " " + status + " - " + o.detail);
  }
  std::sort(lines.begin(), lines.end());
  for (const auto& [id, line] : lines) std::printf("%s\n", line.c_str());
  std::printf("acceptance gate %s\n", gate ? "OK" : "BROKEN");
  return gate ? 0 : 1;
}
