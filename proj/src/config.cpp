// config.cpp
#include "thermowork/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "thermowork/errors.hpp"
#include "thermowork/workstats.hpp"

namespace thermowork {

using nlohmann::json;

std::string to_string(OutputFormat f) { return f == OutputFormat::csv ? "csv" : "json"; }

OutputFormat output_format_from_string(const std::string& s) {
  if (s == "csv") return OutputFormat::csv;
  if (s == "json") return OutputFormat::json;
  throw InputError("unknown output format '" + s + "' (expected csv or json)");
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw InputError(what);
}

bool finite(double x) { return std::isfinite(x); }

void check_keys(const json& j, const std::string& section, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw InputError("section '" + section + "' must be an object");
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) {
      throw InputError("unknown key '" + item.key() + "' in section '" + section + "'");
    }
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

std::vector<double> parse_grid(const json& j) {
  if (j.is_number()) return {j.get<double>()};
  if (j.is_array()) {
    std::vector<double> out;
    for (const auto& x : j) {
      if (!x.is_number()) throw InputError("grid entries must be numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }
  if (!j.is_object()) throw InputError("grid must be a number, an array or a range object");
  check_keys(j, "grid", {"start", "stop", "num", "step", "log"});
  require(j.contains("start") && j.contains("stop"), "grid range needs start and stop");
  const double start = j.at("start").get<double>();
  const double stop = j.at("stop").get<double>();
  const bool log = j.value("log", false);
  require(finite(start) && finite(stop), "grid bounds must be finite");
  if (log) {
    require(j.contains("num"), "log grid needs num");
    const auto num = j.at("num").get<std::size_t>();
    require(start > 0.0 && stop > 0.0, "log grid bounds must be positive");
    require(num >= 1, "grid num must be positive");
    return log_grid(start, stop, num);
  }
  if (j.contains("num")) {
    require(!j.contains("step"), "grid takes num or step, not both");
    const auto num = j.at("num").get<std::size_t>();
    require(num >= 1, "grid num must be positive");
    if (num == 1) return {start};
    std::vector<double> out(num);
    for (std::size_t i = 0; i < num; ++i) {
      out[i] = start + (stop - start) * static_cast<double>(i) / static_cast<double>(num - 1);
    }
    out.back() = stop;
    return out;
  }
  require(j.contains("step"), "grid range needs num or step");
  const double step = j.at("step").get<double>();
  require(step > 0.0 && finite(step), "grid step must be positive");
  require(stop >= start, "grid stop must not precede start");
  const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = start + step * static_cast<double>(i);
  return out;
}

void RunConfig::validate() const {
  require(schema_version == kSchemaVersion,
          "unsupported schema_version " + std::to_string(schema_version));
  require(L >= 2, "L must be at least 2");
  require(J > 0.0 && finite(J), "J must be positive");
  require(U >= 0.0 && finite(U), "U must be non-negative");
  require(beta > 0.0 && finite(beta), "beta must be positive");
  if (target_n) {
    require(*target_n > 0.0 && *target_n < 2.0 * static_cast<double>(L),
            "target_n must lie in (0, 2L)");
  }
  require(finite(v0), "v0 must be finite");
  require(finite(dv) && dv != 0.0, "dv must be finite and nonzero");
  require(tau >= 0.0 && finite(tau), "tau must be non-negative");
  require(max_order >= 1 && max_order <= 8, "max_order must lie in [1, 8]");
  for (double u : sweep.U) require(u >= 0.0 && finite(u), "sweep U values must be non-negative");
  for (double v : sweep.v0) require(finite(v), "sweep v0 values must be finite");
  for (double t : sweep.tau) require(t >= 0.0 && finite(t), "sweep tau values must be non-negative");
  const auto& n = numerics;
  require(n.scf_tolerance > 0.0, "scf_tolerance must be positive");
  require(n.mixing > 0.0 && n.mixing <= 1.0, "mixing must lie in (0, 1]");
  require(n.max_iter >= 1, "max_iter must be positive");
  require(n.density_clamp >= 0.0 && n.density_clamp < 0.5, "density_clamp must lie in [0, 0.5)");
  require(n.df_floor >= 0.0 && n.omega_floor >= 0.0 && n.omega_merge >= 0.0,
          "floors must be non-negative");
  require(n.eta > 0.0, "eta must be positive");
  require(n.dense_cap >= 1, "dense_cap must be positive");
  require(n.degeneracy_tol >= 0.0, "degeneracy_tol must be non-negative");
  require(output.contour_fraction > 0.0 && output.contour_fraction < 1.0,
          "contour_fraction must lie in (0, 1)");
}

LatticeSpec RunConfig::lattice() const { return lattice(U); }

LatticeSpec RunConfig::lattice(double U_override) const {
  LatticeSpec spec = make_chain(L, U_override, boundary, J);
  spec.validate();
  return spec;
}

EnsembleSpec RunConfig::ensemble() const {
  EnsembleSpec e = half_filling(L, beta, kind);
  if (target_n) {
    if (kind == EnsembleKind::canonical) {
      const double rounded = std::round(*target_n);
      require(std::abs(rounded - *target_n) < 1e-12, "canonical target_n must be an integer");
      const auto total = static_cast<std::size_t>(rounded);
      e.n_up = (total + 1) / 2;
      e.n_down = total / 2;
    } else {
      e.target_n = *target_n;
    }
  }
  e.validate(L);
  return e;
}

DriveProtocol RunConfig::protocol() const { return protocol(v0, tau); }

DriveProtocol RunConfig::protocol(double v0_override, double tau_override) const {
  DriveProtocol p{v0_override, dv, tau_override, shape};
  p.validate();
  return p;
}

LrOptions RunConfig::lr_options() const {
  LrOptions o;
  o.scf.mixing = numerics.mixing;
  o.scf.tolerance = numerics.scf_tolerance;
  o.scf.max_iter = numerics.max_iter;
  o.scf.adaptive_mixing = numerics.adaptive_mixing;
  o.scf.density_clamp = numerics.density_clamp;
  o.response.df_floor = numerics.df_floor;
  o.response.omega_floor = numerics.omega_floor;
  o.response.omega_merge = numerics.omega_merge;
  return o;
}

EdOptions RunConfig::ed_options() const {
  EdOptions o;
  o.dense_cap = numerics.dense_cap;
  o.degeneracy_tol = numerics.degeneracy_tol;
  o.weight_floor = numerics.df_floor;
  o.omega_merge = numerics.omega_merge;
  return o;
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  try {
    check_keys(j, "config", {"schema_version", "name", "lattice", "ensemble", "drive", "sweep",
                             "numerics", "output", "seed"});
    read(j, "schema_version", c.schema_version);
    read(j, "name", c.name);
    read(j, "seed", c.seed);
    if (j.contains("lattice")) {
      const auto& s = j.at("lattice");
      check_keys(s, "lattice", {"L", "J", "U", "boundary"});
      read(s, "L", c.L);
      read(s, "J", c.J);
      read(s, "U", c.U);
      if (s.contains("boundary")) c.boundary = boundary_from_string(s.at("boundary").get<std::string>());
    }
    if (j.contains("ensemble")) {
      const auto& s = j.at("ensemble");
      check_keys(s, "ensemble", {"kind", "beta", "target_n"});
      if (s.contains("kind")) c.kind = ensemble_kind_from_string(s.at("kind").get<std::string>());
      read(s, "beta", c.beta);
      if (s.contains("target_n") && !s.at("target_n").is_null()) {
        c.target_n = s.at("target_n").get<double>();
      }
    }
    if (j.contains("drive")) {
      const auto& s = j.at("drive");
      check_keys(s, "drive", {"v0", "dv", "tau", "shape", "max_order"});
      read(s, "v0", c.v0);
      read(s, "dv", c.dv);
      read(s, "tau", c.tau);
      read(s, "max_order", c.max_order);
      if (s.contains("shape")) c.shape = drive_shape_from_string(s.at("shape").get<std::string>());
    }
    if (j.contains("sweep")) {
      const auto& s = j.at("sweep");
      check_keys(s, "sweep", {"U", "v0", "tau"});
      if (s.contains("U")) c.sweep.U = parse_grid(s.at("U"));
      if (s.contains("v0")) c.sweep.v0 = parse_grid(s.at("v0"));
      if (s.contains("tau")) c.sweep.tau = parse_grid(s.at("tau"));
    }
    if (j.contains("numerics")) {
      const auto& s = j.at("numerics");
      check_keys(s, "numerics",
                 {"scf_tolerance", "mixing", "max_iter", "adaptive_mixing", "density_clamp",
                  "df_floor", "omega_floor", "omega_merge", "eta", "dense_cap",
                  "degeneracy_tol"});
      auto& n = c.numerics;
      read(s, "scf_tolerance", n.scf_tolerance);
      read(s, "mixing", n.mixing);
      read(s, "max_iter", n.max_iter);
      read(s, "adaptive_mixing", n.adaptive_mixing);
      read(s, "density_clamp", n.density_clamp);
      read(s, "df_floor", n.df_floor);
      read(s, "omega_floor", n.omega_floor);
      read(s, "omega_merge", n.omega_merge);
      read(s, "eta", n.eta);
      read(s, "dense_cap", n.dense_cap);
      read(s, "degeneracy_tol", n.degeneracy_tol);
    }
    if (j.contains("output")) {
      const auto& s = j.at("output");
      check_keys(s, "output", {"path", "format", "contour_path", "contour_fraction", "trace_path"});
      read(s, "path", c.output.path);
      if (s.contains("format")) c.output.format = output_format_from_string(s.at("format").get<std::string>());
      read(s, "contour_path", c.output.contour_path);
      read(s, "contour_fraction", c.output.contour_fraction);
      read(s, "trace_path", c.output.trace_path);
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed config: ") + e.what());
  }
  c.validate();
  return c;
}

json config_to_json(const RunConfig& c) {
  json j;
  j["schema_version"] = c.schema_version;
  j["name"] = c.name;
  j["lattice"] = {{"L", c.L}, {"J", c.J}, {"U", c.U}, {"boundary", to_string(c.boundary)}};
  j["ensemble"] = {{"kind", to_string(c.kind)}, {"beta", c.beta}};
  j["ensemble"]["target_n"] = c.target_n ? json(*c.target_n) : json(nullptr);
  j["drive"] = {{"v0", c.v0},
                {"dv", c.dv},
                {"tau", c.tau},
                {"shape", to_string(c.shape)},
                {"max_order", c.max_order}};
  j["sweep"] = {{"U", c.sweep.U}, {"v0", c.sweep.v0}, {"tau", c.sweep.tau}};
  const auto& n = c.numerics;
  j["numerics"] = {{"scf_tolerance", n.scf_tolerance}, {"mixing", n.mixing},
                   {"max_iter", n.max_iter},           {"adaptive_mixing", n.adaptive_mixing},
                   {"density_clamp", n.density_clamp}, {"df_floor", n.df_floor},
                   {"omega_floor", n.omega_floor},     {"omega_merge", n.omega_merge},
                   {"eta", n.eta},                     {"dense_cap", n.dense_cap},
                   {"degeneracy_tol", n.degeneracy_tol}};
  j["output"] = {{"path", c.output.path},
                 {"format", to_string(c.output.format)},
                 {"contour_path", c.output.contour_path},
                 {"contour_fraction", c.output.contour_fraction},
                 {"trace_path", c.output.trace_path}};
  j["seed"] = c.seed;
  return j;
}

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& cfg) { return config_to_json(cfg).dump(2); }

std::vector<std::string> preset_names() {
  return {"phase-point", "phase-diagram", "cumulant-map", "dimer-point", "dimer-benchmark"};
}

RunConfig preset(const std::string& name) {
  RunConfig c;
  c.name = name;
  if (name == "phase-point") {
    c.L = 50;
    c.U = 3.0;
    c.v0 = 1.5;
    c.tau = 0.0;
    c.shape = DriveShape::sudden;
  } else if (name == "phase-diagram") {
    c.L = 50;
    c.tau = 0.0;
    c.shape = DriveShape::sudden;
    c.sweep.U = parse_grid(json{{"start", 0.0}, {"stop", 6.0}, {"num", 61}});
    c.sweep.v0 = parse_grid(json{{"start", 0.0}, {"stop", 3.0}, {"num", 61}});
  } else if (name == "cumulant-map") {
    c.L = 50;
    c.U = 1.0;
    c.sweep.v0 = parse_grid(json{{"start", 0.1}, {"stop", 3.0}, {"num", 30}});
    c.sweep.tau = log_grid(0.1, 100.0, 40);
  } else if (name == "dimer-point") {
    c.L = 2;
    c.U = 1.0;
    c.v0 = 1.0;
    c.kind = EnsembleKind::canonical;
  } else if (name == "dimer-benchmark") {
    const BenchmarkGrid grid;
    c.L = 2;
    c.kind = EnsembleKind::canonical;
    c.sweep.U = grid.U;
    c.sweep.v0 = grid.v0;
    c.sweep.tau = grid.tau;
  } else {
    std::string known;
    for (const auto& p : preset_names()) known += (known.empty() ? "" : ", ") + p;
    throw InputError("unknown preset '" + name + "' (known: " + known + ")");
  }
  c.validate();
  return c;
}

}  // namespace thermowork
