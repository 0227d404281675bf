// thermowork - command-line front end for thermal linear-response work statistics
//
//   thermowork scf             --preset phase-point
//   thermowork respond         --preset dimer-point
//   thermowork cumulants       --preset dimer-point --tau 5
//   thermowork phase-diagram   --preset phase-diagram --out pd.csv --contour ridge.csv --jobs 8
//   thermowork cumulant-map    --preset cumulant-map --out map.csv --resume
//   thermowork benchmark-dimer --out bench.csv
//
// Exit codes: 0 success, 2 config error, 3 convergence error, 4 capacity error,
// 1 anything else. Errors are written to stderr as a JSON object.

#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "thermowork/config.hpp"
#include "thermowork/csv.hpp"
#include "thermowork/errors.hpp"
#include "thermowork/pipeline.hpp"
#include "thermowork/sweep.hpp"
#include "thermowork/workstats.hpp"

using nlohmann::json;
using namespace thermowork;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string preset_name;
  std::string out;
  std::string format;
  std::size_t jobs = 0;
  bool resume = false;
  bool dump_config = false;
  std::optional<std::size_t> L;
  std::optional<double> U, v0, tau, beta, dv;
  std::optional<std::string> ensemble;
  std::optional<std::string> boundary;
};

void add_common(CLI::App* sub, CommonArgs& a) {
  sub->add_option("--config", a.config_path, "JSON run configuration");
  sub->add_option("--preset", a.preset_name, "Built-in configuration")
      ->check(CLI::IsMember(preset_names()));
  sub->add_option("--out", a.out, "Output path (default: stdout)");
  sub->add_option("--format", a.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--jobs", a.jobs, "Worker threads for sweeps (0 = all cores)");
  sub->add_flag("--resume", a.resume, "Continue a sweep from an existing CSV output");
  sub->add_flag("--dump-config", a.dump_config, "Print the resolved configuration and exit");
  sub->add_option("--L", a.L, "Chain length");
  sub->add_option("--U", a.U, "On-site interaction");
  sub->add_option("--v0", a.v0, "Initial staggered amplitude");
  sub->add_option("--tau", a.tau, "Ramp duration");
  sub->add_option("--beta", a.beta, "Inverse temperature");
  sub->add_option("--dv", a.dv, "Ramp amplitude");
  sub->add_option("--ensemble", a.ensemble, "canonical or grand-canonical");
  sub->add_option("--boundary", a.boundary, "open or periodic");
}

RunConfig resolve(const CommonArgs& a) {
  if (!a.config_path.empty() && !a.preset_name.empty()) {
    throw InputError("--config and --preset are mutually exclusive");
  }
  RunConfig c = !a.config_path.empty()   ? load_config(a.config_path)
                : !a.preset_name.empty() ? preset(a.preset_name)
                                         : RunConfig{};
  if (a.L) c.L = *a.L;
  if (a.U) c.U = *a.U;
  if (a.v0) c.v0 = *a.v0;
  if (a.tau) c.tau = *a.tau;
  if (a.beta) c.beta = *a.beta;
  if (a.dv) c.dv = *a.dv;
  if (a.ensemble) c.kind = ensemble_kind_from_string(*a.ensemble);
  if (a.boundary) c.boundary = boundary_from_string(*a.boundary);
  if (!a.out.empty()) c.output.path = a.out;
  if (!a.format.empty()) c.output.format = output_format_from_string(a.format);
  c.validate();
  if (a.resume) {
    if (c.output.path.empty()) throw InputError("--resume needs an output file");
    if (c.output.format != OutputFormat::csv) throw InputError("--resume works with CSV output only");
  }
  return c;
}

/// Output stream that is either stdout or a file.
class Output {
 public:
  Output(const std::string& path, bool append) {
    if (path.empty()) return;
    file_ = std::make_unique<std::ofstream>(
        path, append ? std::ios::binary | std::ios::app : std::ios::binary | std::ios::trunc);
    if (!*file_) throw InputError("cannot open output file '" + path + "'");
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

json field_value(const std::string& s) {
  if (s.empty()) return nullptr;
  double x = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec == std::errc() && res.ptr == s.data() + s.size()) return x;
  return s;
}

json rows_to_json(const CsvRow& header, const std::vector<CsvRow>& rows) {
  json arr = json::array();
  for (const auto& row : rows) {
    json obj = json::object();
    for (std::size_t i = 0; i < header.size(); ++i) obj[header[i]] = field_value(row[i]);
    arr.push_back(std::move(obj));
  }
  return arr;
}

void emit_table(const RunConfig& cfg, const CsvRow& header, const std::vector<CsvRow>& rows) {
  Output out(cfg.output.path, false);
  if (cfg.output.format == OutputFormat::json) {
    json doc{{"config", config_to_json(cfg)}, {"records", rows_to_json(header, rows)}};
    out.stream() << doc.dump(2) << '\n';
    return;
  }
  CsvWriter w(out.stream(), header);
  for (const auto& r : rows) w.write(r);
}

std::string num(double x) { return format_number(x); }

CsvRow cumulant_columns(int max_order) {
  CsvRow cols;
  for (int n = 1; n <= max_order; ++n) {
    const std::string k = "k" + std::to_string(n);
    cols.insert(cols.end(), {k, k + "_ad", k + "_na"});
  }
  return cols;
}

void append_cumulants(CsvRow& row, const CumulantReport& r) {
  for (const auto& c : r.cumulants) {
    row.insert(row.end(), {num(c.total()), num(c.adiabatic), num(c.nonadiabatic)});
  }
}

/// Runs a sweep, writing CSV incrementally (resumable) or JSON at the end.
SweepStats run_table_sweep(const RunConfig& cfg, const CommonArgs& a, const CsvRow& header,
                           std::size_t units, std::size_t rows_per_unit, const UnitFn& compute,
                           const UnitErrorFn& on_error, std::vector<CsvRow>* collect = nullptr) {
  SweepOptions opt;
  opt.jobs = a.jobs;
  if (cfg.output.format == OutputFormat::json) {
    std::vector<CsvRow> all;
    const auto stats = run_sweep(
        units, compute, on_error,
        [&](std::size_t, const UnitRows& rows) { all.insert(all.end(), rows.begin(), rows.end()); },
        opt);
    emit_table(cfg, header, all);
    if (collect) *collect = all;
    return stats;
  }
  ResumeState resume;
  if (a.resume) resume = prepare_resume(cfg.output.path, header, rows_per_unit);
  opt.first_unit = resume.completed_units;
  Output out(cfg.output.path, a.resume);
  CsvWriter w(out.stream(), header, resume.header_present);
  return run_sweep(
      units, compute, on_error,
      [&](std::size_t, const UnitRows& rows) {
        for (const auto& r : rows) w.write(r);
        if (collect) collect->insert(collect->end(), rows.begin(), rows.end());
      },
      opt);
}

void report_sweep(const SweepStats& s) {
  json j{{"units", s.units}, {"computed", s.computed}, {"failed", s.failed}};
  std::cerr << json{{"sweep", j}}.dump() << '\n';
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------

int cmd_scf(const CommonArgs& a, const std::string& trace_path) {
  RunConfig cfg = resolve(a);
  if (!trace_path.empty()) cfg.output.trace_path = trace_path;
  if (a.dump_config) return std::cout << serialize_config(cfg) << '\n', 0;
  const auto t0 = std::chrono::steady_clock::now();
  LrOptions opt = cfg.lr_options();
  std::ofstream trace;
  if (!cfg.output.trace_path.empty()) {
    trace.open(cfg.output.trace_path, std::ios::binary | std::ios::trunc);
    if (!trace) throw InputError("cannot open trace file '" + cfg.output.trace_path + "'");
    trace << "iter,residual,mu\n";
    opt.scf.trace = &trace;
  }
  const auto spec = cfg.lattice();
  const auto ens = cfg.ensemble();
  const StaticPoint p = run_static_point(spec, ens, cfg.v0, opt);
  const auto& st = p.state;
  const auto g = spec.weights();

  if (cfg.output.format == OutputFormat::json) {
    json res{{"densities", std::vector<double>(st.densities.data(), st.densities.data() + st.densities.size())},
             {"v_ext", std::vector<double>(st.v_ext.data(), st.v_ext.data() + st.v_ext.size())},
             {"v_ks", std::vector<double>(st.vks.data(), st.vks.data() + st.vks.size())},
             {"mu", st.mu ? json(*st.mu) : json(nullptr)},
             {"particle_number", st.densities.sum()},
             {"iterations", st.iterations},
             {"residual", st.residual},
             {"final_mixing", st.final_mixing},
             {"clamp_events", st.clamp_events},
             {"warnings", st.warnings},
             {"beta_w_diss_sudden", p.sudden_work},
             {"elapsed_s", seconds_since(t0)}};
    Output out(cfg.output.path, false);
    out.stream() << json{{"config", config_to_json(cfg)}, {"result", res}}.dump(2) << '\n';
    return 0;
  }
  const CsvRow header{"L", "U", "beta", "ensemble", "boundary", "v0", "site", "pattern", "density",
                      "v_ext", "v_ks", "mu", "iterations", "residual", "beta_w_diss_sudden"};
  std::vector<CsvRow> rows;
  for (std::size_t i = 0; i < spec.L; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    rows.push_back({std::to_string(spec.L), num(spec.U), num(ens.beta), to_string(ens.kind),
                    to_string(spec.boundary), num(cfg.v0), std::to_string(i), num(g[i]),
                    num(st.densities(k)), num(st.v_ext(k)), num(st.vks(k)), format_number(st.mu),
                    std::to_string(st.iterations), num(st.residual), num(p.sudden_work)});
  }
  emit_table(cfg, header, rows);
  return 0;
}

int cmd_respond(const CommonArgs& a) {
  const RunConfig cfg = resolve(a);
  if (a.dump_config) return std::cout << serialize_config(cfg) << '\n', 0;
  const auto spec = cfg.lattice();
  const auto ens = cfg.ensemble();
  const LrPoint p = run_lr_point(spec, ens, cfg.v0, cfg.lr_options());
  const auto g = spec.weights();
  const CsvRow header{"L", "U", "beta", "ensemble", "v0", "component", "omega", "g_residue", "weight"};
  const CsvRow echo{std::to_string(spec.L), num(spec.U), num(ens.beta), to_string(ens.kind), num(cfg.v0)};
  std::vector<CsvRow> rows;
  auto add = [&](const std::string& comp, double w, const std::string& gr, const std::string& s) {
    CsvRow r = echo;
    r.insert(r.end(), {comp, num(w), gr, s});
    rows.push_back(std::move(r));
  };
  for (const auto& [w, gr] : projected_spectrum(p.ks, g)) add("ks", w, num(gr), "");
  for (const auto& [w, gr] : projected_spectrum(p.dressed, g)) {
    add("dressed", w, num(gr), num(2.0 * ens.beta * gr / w));
  }
  add("adiabatic", 0.0, "", num(p.spectrum.psi_ad));
  emit_table(cfg, header, rows);
  return 0;
}

int cmd_cumulants(const CommonArgs& a) {
  const RunConfig cfg = resolve(a);
  if (a.dump_config) return std::cout << serialize_config(cfg) << '\n', 0;
  const auto spec = cfg.lattice();
  const auto ens = cfg.ensemble();
  const LrPoint p = run_lr_point(spec, ens, cfg.v0, cfg.lr_options());
  const std::vector<double> taus = cfg.sweep.tau.empty() ? std::vector<double>{cfg.tau} : cfg.sweep.tau;
  CsvRow header{"L", "U", "beta", "ensemble", "v0", "dv", "tau", "shape"};
  const auto cols = cumulant_columns(cfg.max_order);
  header.insert(header.end(), cols.begin(), cols.end());
  header.push_back("fano");
  std::vector<CsvRow> rows;
  for (double tau : taus) {
    const auto protocol = cfg.protocol(cfg.v0, tau);
    const auto r = cumulant_report(p.spectrum, protocol, cfg.max_order, spec.U);
    CsvRow row{std::to_string(spec.L), num(spec.U), num(ens.beta), to_string(ens.kind),
               num(cfg.v0), num(cfg.dv), num(tau), to_string(protocol.shape)};
    append_cumulants(row, r);
    row.push_back(format_number(r.beta_fano));
    rows.push_back(std::move(row));
  }
  emit_table(cfg, header, rows);
  return 0;
}

void write_contour(const RunConfig& cfg, const std::vector<CsvRow>& rows) {
  const auto& us = cfg.sweep.U;
  const auto& vs = cfg.sweep.v0;
  Eigen::MatrixXd z = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(us.size()),
                                                static_cast<Eigen::Index>(vs.size()),
                                                std::numeric_limits<double>::quiet_NaN());
  double zmax = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < rows.size() && k < us.size() * vs.size(); ++k) {
    if (rows[k][2].empty()) continue;
    const double val = std::stod(rows[k][2]);
    z(static_cast<Eigen::Index>(k / vs.size()), static_cast<Eigen::Index>(k % vs.size())) = val;
    zmax = std::max(zmax, val);
  }
  const double level = cfg.output.contour_fraction * zmax;
  const auto lines = contour_lines(us, vs, z, level);
  std::ofstream out(cfg.output.contour_path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot open contour file '" + cfg.output.contour_path + "'");
  CsvWriter w(out, {"line", "point", "U", "v0", "level"});
  for (std::size_t l = 0; l < lines.size(); ++l) {
    for (std::size_t p = 0; p < lines[l].size(); ++p) {
      w.write({std::to_string(l), std::to_string(p), num(lines[l][p].x), num(lines[l][p].y), num(level)});
    }
  }
}

int cmd_phase_diagram(const CommonArgs& a, const std::string& contour_path) {
  RunConfig cfg = resolve(a);
  if (!contour_path.empty()) cfg.output.contour_path = contour_path;
  if (cfg.sweep.U.empty()) cfg.sweep.U = {cfg.U};
  if (cfg.sweep.v0.empty()) cfg.sweep.v0 = {cfg.v0};
  if (a.dump_config) return std::cout << serialize_config(cfg) << '\n', 0;
  const auto ens = cfg.ensemble();
  const auto opt = cfg.lr_options();
  const CsvRow header{"U", "v0", "beta_w_diss", "mu", "iterations", "residual", "error"};
  const std::size_t nv = cfg.sweep.v0.size();
  const std::size_t units = cfg.sweep.U.size() * nv;
  auto compute = [&](std::size_t k) -> UnitRows {
    const double U = cfg.sweep.U[k / nv], v0 = cfg.sweep.v0[k % nv];
    const StaticPoint p = run_static_point(cfg.lattice(U), ens, v0, opt);
    return {{num(U), num(v0), num(p.sudden_work), format_number(p.state.mu),
             std::to_string(p.state.iterations), num(p.state.residual), ""}};
  };
  auto on_error = [&](std::size_t k, const std::string& msg) -> UnitRows {
    return {{num(cfg.sweep.U[k / nv]), num(cfg.sweep.v0[k % nv]), "", "", "", "", msg}};
  };
  std::vector<CsvRow> rows;
  const auto stats = run_table_sweep(cfg, a, header, units, 1, compute, on_error, &rows);
  report_sweep(stats);
  if (!cfg.output.contour_path.empty()) {
    if (a.resume) {
      // Resumed cells live only in the journal.
      std::ifstream in(cfg.output.path, std::ios::binary);
      std::ostringstream ss;
      ss << in.rdbuf();
      rows = read_csv(ss.str());
      if (!rows.empty()) rows.erase(rows.begin());
    }
    write_contour(cfg, rows);
  }
  return 0;
}

int cmd_cumulant_map(const CommonArgs& a) {
  RunConfig cfg = resolve(a);
  if (cfg.sweep.v0.empty()) cfg.sweep.v0 = {cfg.v0};
  if (cfg.sweep.tau.empty()) cfg.sweep.tau = {cfg.tau};
  if (a.dump_config) return std::cout << serialize_config(cfg) << '\n', 0;
  const auto spec = cfg.lattice();
  const auto ens = cfg.ensemble();
  const auto opt = cfg.lr_options();
  const auto& taus = cfg.sweep.tau;
  const CsvRow header{"U",     "v0",    "tau",   "k1", "k1_ad", "k1_na", "k2",       "k2_ad",
                      "k2_na", "k3",    "k3_ad", "k3_na", "fano", "tau_star", "error"};
  auto compute = [&](std::size_t k) -> UnitRows {
    const double v0 = cfg.sweep.v0[k];
    const LrPoint p = run_lr_point(spec, ens, v0, opt);
    std::vector<CumulantReport> reports;
    std::vector<double> k3;
    for (double tau : taus) {
      reports.push_back(cumulant_report(p.spectrum, cfg.protocol(v0, tau), 3, spec.U));
      k3.push_back(reports.back().order(3).total());
    }
    const auto tau_star = taus.size() >= 8 ? crossover_time(taus, k3) : std::nullopt;
    UnitRows rows;
    for (std::size_t t = 0; t < taus.size(); ++t) {
      CsvRow row{num(spec.U), num(v0), num(taus[t])};
      append_cumulants(row, reports[t]);
      row.push_back(format_number(reports[t].beta_fano));
      row.push_back(format_number(tau_star));
      row.push_back("");
      rows.push_back(std::move(row));
    }
    return rows;
  };
  auto on_error = [&](std::size_t k, const std::string& msg) -> UnitRows {
    UnitRows rows;
    for (double tau : taus) {
      CsvRow row(header.size());
      row[0] = num(spec.U);
      row[1] = num(cfg.sweep.v0[k]);
      row[2] = num(tau);
      row.back() = msg;
      rows.push_back(std::move(row));
    }
    return rows;
  };
  const auto stats =
      run_table_sweep(cfg, a, header, cfg.sweep.v0.size(), taus.size(), compute, on_error);
  report_sweep(stats);
  return 0;
}

std::string suffixed(const std::string& path, const std::string& tag) {
  const std::filesystem::path p(path);
  auto name = p.stem().string() + "_" + tag + p.extension().string();
  return (p.parent_path() / name).string();
}

int cmd_benchmark(const CommonArgs& a, bool u_zero_only, const std::string& which) {
  CommonArgs b = a;
  if (b.config_path.empty() && b.preset_name.empty()) b.preset_name = "dimer-benchmark";
  RunConfig cfg = resolve(b);
  if (cfg.L != 2) throw InputError("benchmark-dimer needs L = 2");
  BenchmarkGrid grid;
  if (!cfg.sweep.U.empty()) grid.U = cfg.sweep.U;
  if (!cfg.sweep.v0.empty()) grid.v0 = cfg.sweep.v0;
  if (!cfg.sweep.tau.empty()) grid.tau = cfg.sweep.tau;
  if (u_zero_only) grid.U = {0.0};
  cfg.sweep.U = grid.U;
  cfg.sweep.v0 = grid.v0;
  cfg.sweep.tau = grid.tau;
  if (a.dump_config) return std::cout << serialize_config(cfg) << '\n', 0;

  std::vector<EnsembleKind> kinds;
  if (which == "both" || which == "canonical") kinds.push_back(EnsembleKind::canonical);
  if (which == "both" || which == "grand-canonical") kinds.push_back(EnsembleKind::grand_canonical);

  const CsvRow header{"U",     "v0",    "tau",      "k1_dft",   "k1_ed",   "k2_dft",
                      "k2_ed", "k3_dft", "k3_ed", "rel_err1", "rel_err2", "rel_err3"};
  json summary = json::object();
  json tables = json::object();
  bool table_on_stdout = false;
  for (EnsembleKind kind : kinds) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto table = benchmark_dimer(grid, kind, cfg.beta, cfg.dv, cfg.lr_options(), cfg.ed_options());
    std::vector<CsvRow> rows;
    for (const auto& r : table.rows) {
      rows.push_back({num(r.U), num(r.v0), num(r.tau), num(r.lr[0]), num(r.exact[0]), num(r.lr[1]),
                      num(r.exact[1]), num(r.lr[2]), num(r.exact[2]), num(r.rel_err[0]),
                      num(r.rel_err[1]), num(r.rel_err[2])});
    }
    summary[to_string(kind)] = {
        {"mean_rel_err", {table.mean_rel_err[0], table.mean_rel_err[1], table.mean_rel_err[2]}},
        {"rows", table.rows.size()},
        {"elapsed_s", seconds_since(t0)}};
    if (cfg.output.format == OutputFormat::json) {
      tables[to_string(kind)] = rows_to_json(header, rows);
      continue;
    }
    RunConfig out_cfg = cfg;
    if (kinds.size() > 1 && !cfg.output.path.empty()) {
      out_cfg.output.path = suffixed(cfg.output.path, to_string(kind));
    }
    if (kinds.size() > 1 && cfg.output.path.empty()) continue;  // summary only
    table_on_stdout = out_cfg.output.path.empty();
    emit_table(out_cfg, header, rows);
  }
  const json doc{{"benchmark", summary}};
  if (cfg.output.format == OutputFormat::json) {
    Output out(cfg.output.path, false);
    out.stream() << json{{"config", config_to_json(cfg)}, {"summary", summary}, {"tables", tables}}.dump(2)
                 << '\n';
    if (!cfg.output.path.empty()) std::cout << doc.dump() << '\n';
  } else if (table_on_stdout) {
    std::cerr << doc.dump() << '\n';
  } else {
    std::cout << doc.dump() << '\n';
  }
  return 0;
}

int fail(const char* kind, const std::string& message, int code,
         std::optional<double> residual = std::nullopt) {
  json err{{"kind", kind}, {"message", message}, {"exit_code", code}};
  if (residual) err["last_residual"] = *residual;
  std::cerr << json{{"error", err}}.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dissipated-work statistics of driven Hubbard chains from thermal linear response"};
  app.require_subcommand(1);
  CommonArgs args;
  std::string trace_path, contour_path, bench_ensemble = "both";
  bool u_zero_only = false;

  auto* scf = app.add_subcommand("scf", "Self-consistent thermal Kohn-Sham densities");
  add_common(scf, args);
  scf->add_option("--trace", trace_path, "Write the SCF residual history as CSV");
  auto* respond = app.add_subcommand("respond", "KS and dressed response poles projected on the drive");
  add_common(respond, args);
  auto* cumulants = app.add_subcommand("cumulants", "Dissipated-work cumulants for one drive");
  add_common(cumulants, args);
  auto* phase = app.add_subcommand("phase-diagram", "Sudden-quench dissipated work over (U, v0)");
  add_common(phase, args);
  phase->add_option("--contour", contour_path, "Write the iso-line at the configured fraction of the maximum");
  auto* cmap = app.add_subcommand("cumulant-map", "Cumulants over (v0, tau) at fixed U");
  add_common(cmap, args);
  auto* bench = app.add_subcommand("benchmark-dimer", "Linear response against exact diagonalization on the dimer");
  add_common(bench, args);
  bench->add_flag("--u-zero-only", u_zero_only, "Restrict the grid to U = 0");
  bench->add_option("--which", bench_ensemble, "Ensembles to run")
      ->check(CLI::IsMember({"both", "canonical", "grand-canonical"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (scf->parsed()) return cmd_scf(args, trace_path);
    if (respond->parsed()) return cmd_respond(args);
    if (cumulants->parsed()) return cmd_cumulants(args);
    if (phase->parsed()) return cmd_phase_diagram(args, contour_path);
    if (cmap->parsed()) return cmd_cumulant_map(args);
    if (bench->parsed()) return cmd_benchmark(args, u_zero_only, bench_ensemble);
  } catch (const InputError& e) {
    return fail("config", e.what(), 2);
  } catch (const ConvergenceError& e) {
    return fail("convergence", e.what(), 3, e.last_residual());
  } catch (const CapacityError& e) {
    return fail("capacity", e.what(), 4);
  } catch (const Error& e) {
    return fail("numerical", e.what(), 1);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 1);
  }
  return 1;
}
