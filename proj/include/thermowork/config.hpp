// config.hpp - run configuration, JSON schema and shipped presets
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "thermowork/ed_oracle.hpp"
#include "thermowork/lattice.hpp"
#include "thermowork/pipeline.hpp"
#include "thermowork/thermal_ks.hpp"

namespace thermowork {

inline constexpr int kSchemaVersion = 1;

enum class OutputFormat { csv, json };

std::string to_string(OutputFormat f);
OutputFormat output_format_from_string(const std::string& s);

struct NumericsConfig {
  double scf_tolerance = 1e-10;
  double mixing = 0.3;
  std::size_t max_iter = 5000;
  bool adaptive_mixing = true;
  double density_clamp = kDensityClamp;
  double df_floor = 1e-14;
  double omega_floor = 1e-10;
  double omega_merge = 1e-9;
  double eta = 1e-3;
  std::size_t dense_cap = kDefaultDenseCap;
  double degeneracy_tol = 1e-9;
};

struct OutputConfig {
  std::string path;  // empty means stdout
  OutputFormat format = OutputFormat::csv;
  std::string contour_path;  // phase diagram polylines; empty disables
  double contour_fraction = 0.45;
  std::string trace_path;  // SCF trace; empty disables
};

struct SweepConfig {
  std::vector<double> U;
  std::vector<double> v0;
  std::vector<double> tau;
};

/// Everything a subcommand needs. Grids are stored expanded so that a
/// serialized config reproduces the run exactly.
struct RunConfig {
  int schema_version = kSchemaVersion;
  std::string name;

  std::size_t L = 50;
  double J = 1.0;
  double U = 1.0;
  Boundary boundary = Boundary::open;

  EnsembleKind kind = EnsembleKind::grand_canonical;
  double beta = 1.0;
  std::optional<double> target_n;  // half filling when absent

  double v0 = 1.0;
  double dv = 0.01;
  double tau = 1.0;
  DriveShape shape = DriveShape::linear_ramp;
  int max_order = 4;

  SweepConfig sweep;
  NumericsConfig numerics;
  OutputConfig output;
  std::uint64_t seed = 1;

  /// Throws InputError when a parameter is out of range.
  void validate() const;

  LatticeSpec lattice() const;
  LatticeSpec lattice(double U_override) const;
  EnsembleSpec ensemble() const;
  DriveProtocol protocol() const;
  DriveProtocol protocol(double v0_override, double tau_override) const;
  LrOptions lr_options() const;
  EdOptions ed_options() const;
};

/// Expands a grid given as an array or as {start, stop, num | step, log}.
std::vector<double> parse_grid(const nlohmann::json& j);

RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& cfg);

RunConfig load_config(const std::string& path);
/// Parses `text` as a JSON config document.
RunConfig parse_config(const std::string& text);
std::string serialize_config(const RunConfig& cfg);

std::vector<std::string> preset_names();
/// Throws InputError for an unknown name.
RunConfig preset(const std::string& name);

}  // namespace thermowork
