#pragma once

#include "dbalign/align.hpp"
#include "dbalign/model.hpp"
#include "dbalign/theory.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace dbalign {

enum class Algorithm { Map, Bht, Both };
enum class TauPolicy { WindowMidpoint, Explicit, Grid };

std::string_view to_string(Algorithm a);
std::string_view to_string(TauPolicy p);

/// One correlation model swept over: constant rho with a list of d values,
/// an explicit rho vector, or a general model file (canonicalized on load).
struct RhoSpec {
  std::optional<double> constant;
  std::vector<std::size_t> d_values;
  std::vector<double> explicit_rho;
  std::string model_path;
};

struct SweepConfig {
  std::vector<std::size_t> n_values;
  RhoSpec rho;
  Algorithm algorithm = Algorithm::Map;
  TauPolicy tau_policy = TauPolicy::WindowMidpoint;
  std::vector<double> tau_values;  // one value for Explicit, the grid for Grid
  double eps_fn = 1.0;
  double eps_fp = 1.0;
  std::size_t trials = 1;
  std::uint64_t master_seed = 0;
  std::string output_dir;
  std::size_t threads = 1;
  bool write_reports = true;

  /// Throws InvalidArgument when an invariant fails.
  void validate() const;
};

SweepConfig sweep_config_from_json(const nlohmann::json& j);
nlohmann::json sweep_config_to_json(const SweepConfig& c);

/// Everything needed to run trials of one (n, model) combination.
struct CellSpec {
  std::size_t n = 1;
  CanonicalModel model;
  Algorithm algorithm = Algorithm::Map;
  /// BHT thresholds evaluated on every trial; empty for MAP-only cells.
  std::vector<double> taus;
  std::uint64_t master_seed = 0;
  /// When false, reports carry counts only (predicted/truth left empty).
  bool keep_matchings = true;
};

struct TrialOutcome {
  std::size_t trial_index = 0;
  std::optional<AlignmentReport> map;
  std::vector<AlignmentReport> bht;  // one per CellSpec::taus entry
  std::optional<std::string> error;
};

/// Samples one planted instance, runs the selected algorithms and scores
/// them. Fully determined by (master_seed, trial_index, cell).
TrialOutcome run_trial(const CellSpec& cell, std::size_t trial_index);

/// Aggregate row of cells.csv; field names are the CSV column names.
struct SweepCell {
  std::size_t n = 0;
  std::size_t d = 0;
  std::string rho;  // single value for constant models, ';'-joined otherwise
  double mutual_information = 0.0;
  double sigma = 0.0;
  double info_ratio = 0.0;  // I / ln n
  double tau = 0.0;         // NaN for MAP-only cells or infeasible windows
  std::size_t trials = 0;
  std::size_t failed_trials = 0;
  double map_success_rate = 0.0;
  double map_success_halfwidth = 0.0;
  double map_mean_errors = 0.0;
  double bht_mean_fn = 0.0;
  double bht_fn_stderr = 0.0;
  double bht_fn_halfwidth = 0.0;
  double bht_mean_fp = 0.0;
  double bht_fp_stderr = 0.0;
  double bht_fp_halfwidth = 0.0;
  double bht_total_stderr = 0.0;
  std::string map_verdict;
  double map_margin = 0.0;
  std::string converse_verdict;
  double converse_margin = 0.0;
  bool bht_feasible = false;
  double bht_window_lower = 0.0;
  double bht_window_upper = 0.0;
  double bht_converse_bound = 0.0;
};

struct SweepResult {
  std::vector<SweepCell> cells;
  /// Outcomes per (n, model) group, sorted by trial index.
  std::vector<std::vector<TrialOutcome>> outcomes;
};

/// Runs all trials (parallel across trials) and aggregates. Nothing is
/// written to disk.
SweepResult run_sweep(const SweepConfig& config);

/// run_sweep plus cells.csv, sweep.json, reports/*.json and plot.svg under
/// config.output_dir.
SweepResult sweep(const SweepConfig& config);

std::string cells_to_csv(const std::vector<SweepCell>& cells);
std::vector<SweepCell> cells_from_csv(const std::string& text);

enum class PlotKind { SuccessVsInformation, ErrorsVsInformation };

/// Self-contained SVG: x = I / ln n, reference lines at 1 and 2, points with
/// confidence bars, and the cell table embedded as CSV in <metadata>.
std::string render_plot(const std::vector<SweepCell>& cells, PlotKind kind);
void emit_plot(const std::vector<SweepCell>& cells, PlotKind kind, const std::filesystem::path& path);

/// 1.96 sqrt(p (1 - p) / trials).
double rate_halfwidth(double p, std::size_t trials);
/// Two-sided 95% Student-t quantile with `dof` degrees of freedom.
double t_quantile_975(std::size_t dof);

}  // namespace dbalign
