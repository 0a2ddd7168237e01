#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pmlbie/geometry.hpp"
#include "pmlbie/solve.hpp"

namespace pmlbie::cli {

enum class Experiment { solve, convergence, pml_sweep, field, selftest };

Experiment experiment_from_string(const std::string& s);
std::string to_string(Experiment e);

enum class ReferenceMode { none, manufactured, self };

struct FieldGrid {
  std::array<double, 3> lo{0.0, 0.0, 0.0};
  std::array<double, 3> hi{0.0, 0.0, 0.0};
  std::array<int, 3> n{1, 1, 1};
  bool total = true;  // physical data: total field; manufactured: always scattered
};

struct RunConfig {
  geometry::SceneKind scene = geometry::SceneKind::disc2d;
  geometry::BoundaryCondition bc = geometry::BoundaryCondition::dirichlet;
  double k = kPi;
  double k2 = 2.0 * kPi;
  solve::DataMode mode = solve::DataMode::manufactured;
  kernels::Incidence incidence;
  std::optional<Vec3> source;
  std::optional<Vec3> source_upper, source_lower;

  std::array<double, 3> a{4.0, 1000.0, 1000.0};
  std::optional<std::array<double, 3>> thickness;  // absolute; overrides T_over_lambda
  double t_over_lambda = 2.0;
  double strength = 6.0;
  int order = 6;

  geometry::SceneParams geometry;
  operators::DiscretizationParams disc;
  solve::GmresOptions gmres;
  bool parallel = true;

  ReferenceMode reference = ReferenceMode::manufactured;
  bool reference_set = false;  // physical data without an explicit mode: self for sweeps, none otherwise
  int n_ref = 96;
  std::vector<int> n_list{16, 32, 64};
  std::vector<double> sweep{0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
  FieldGrid field;
  bool table_timings = false;

  nlohmann::ordered_json resolved;  // echo of every setting after defaults
};

int dimension(geometry::SceneKind kind);

// Throws ConfigError naming the offending field.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

// Wavelength used for PML thicknesses (the shorter one for two layers).
double wavelength(const RunConfig& cfg);
pml::PmlProfile make_profile(const RunConfig& cfg, double t_over_lambda);
solve::ProblemSpec make_problem(const RunConfig& cfg, int n, double t_over_lambda);

struct TableRow {
  double k = 0.0;
  int n = 0;
  int n_dof = 0;
  int n_iter = 0;
  double residual = 0.0;
  std::optional<double> eps_inf;
  double t_precompute_s = 0.0;
  double t_iter_s = 0.0;
  double t_over_lambda = 0.0;
  bool converged = true;
  std::vector<std::string> warnings;
};

// Rows as CSV text with 17 significant digits; timing columns are left
// blank unless with_timings is set.
std::string table_csv(const std::vector<TableRow>& rows, bool with_timings);
std::string format_double(double v);

struct RunResult {
  int status = 0;  // 0 ok, 1 validation error, 2 solver failure
  std::vector<TableRow> rows;
  std::string message;
};

// Runs one experiment and writes its artifacts into out_dir.
RunResult run(Experiment e, const RunConfig& cfg, const std::string& out_dir, int threads, std::ostream& log);

struct SelfCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};
std::vector<SelfCheck> selftest();

}  // namespace pmlbie::cli
