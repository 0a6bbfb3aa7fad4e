#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "dsslab/galerkin.hpp"

namespace dsslab {

enum ExitCode { kPass = 0, kCriterionFailure = 1, kConfigError = 2, kNonConvergence = 3 };

constexpr int kReportVersion = 1;

enum class Mode { SS, DSS };
std::string to_string(Mode m);
Mode mode_from_string(const std::string& s);

struct RunConfig {
  System system = System::MHD;
  Mode mode = Mode::SS;
  double lambda = 2.0;
  double L = 6.0;
  int N = 48;
  int k = 12;
  BasisLayout layout = BasisLayout::Lattice;
  double sigma = 0.75;
  double spacing = 0.875;
  double epsilon = 0.5;
  double delta = 0.25;
  // canonical | homogeneous | dss
  std::string data = "canonical";
  double amplitude = 0.05;
  double aux_amplitude = 0.04;
  unsigned long data_seed = 3;
  int slices = 16;  // background slices per period (dss)
  int steps = 256;
  double tol = 1e-10;         // Poincare fixed point
  double newton_tol = 1e-10;  // stationary Newton
  unsigned long seed = 20240601;
  int cubic_samples = 100;
  int trap_starts = 100;
  int sphere_samples = 200;
  int pressure_slices = 4;
  int pad = 2;
  int heat_quad = 48;
  int lei_nodes = 24;
  bool physical = true;
  bool cross_check = true;
  bool embeddings = true;
  bool cache = true;
  std::string output = "dsslab_out";

  // Throws ConfigError.
  void validate() const;
  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
  // Key of everything upstream of the coefficient tables.
  std::string table_key() const;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Failure inside a pipeline stage.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& msg, int code)
      : std::runtime_error(stage + ": " + msg), stage_name(std::move(stage)), exit_code(code) {}
  std::string stage_name;
  int exit_code;
};

// 64-bit FNV-1a digest as 16 hex digits.
std::string content_hash(const std::string& text);

struct PipelineResult {
  nlohmann::json report;
  int exit_code = kPass;
};

// Runs data, background, basis, tables, solve, pressure, reconstruction and audits. Writes report.json and
// orbit.csv into cfg.output when write_files is set. log may be null.
PipelineResult run_pipeline(const RunConfig& cfg, std::ostream* log = nullptr, bool write_files = true);

struct CriterionResult {
  int id = 0;
  std::string name;
  std::string status;  // pass | fail | n/a
  std::string detail;
};

// Re-evaluates the pinned acceptance thresholds against a report.
std::vector<CriterionResult> evaluate_criteria(const nlohmann::json& report);
// 0 when every evaluated criterion passes, 1 otherwise.
int criteria_exit_code(const std::vector<CriterionResult>& results);
void print_criteria(std::ostream& os, const std::vector<CriterionResult>& results);

// Rebuilds background and basis from cfg and writes u = U + W at s = 0 on the plane y_axis = 0 as CSV
// (y1, y2, y3, u1, u2, u3). x is the stored Galerkin state.
void write_profile_slice(const RunConfig& cfg, const std::vector<double>& x, int axis, const std::string& path);

}  // namespace dsslab
