#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "chebgsee/config.hpp"
#include "chebgsee/diagnostics.hpp"
#include "chebgsee/gsee.hpp"

namespace chebgsee {

/// Largest system for which a run computes the exact oracle quantities.
inline constexpr std::size_t kPipelineOracleSites = 16;

struct RunSummary {
  std::filesystem::path dir;
  std::string config_hash;
  double init_energy = 0.0;
  std::optional<double> lambda0;  // oracle ground energy, normalized units
  double chi = 0.0;
  MomentSequence moments;  // extended when LP ran
  GseeResult gsee;
};

struct PipelineOptions {
  bool resume = false;  // continue from checkpoints in <dir>/checkpoints
  /// Oracle size limit; defaults to the environment override or kPipelineOracleSites.
  std::optional<std::size_t> oracle_limit;
};

/// Runs model -> init -> oracle -> moments -> extrapolate -> gsee and writes
/// manifest.json, init.mps, init.json, moments.csv, extrapolated.csv (LP only),
/// oracle_moments.csv (oracle only), gsee.json, cumulative.csv, diagnostics.csv.
/// A failing stage is recorded in the manifest and the error rethrown.
RunSummary run_pipeline(const RunConfig& cfg, const PipelineOptions& opts = {});

struct CompareReport {
  std::size_t common_moments = 0;
  double max_moment_diff = 0.0;
  double median_moment_diff = 0.0;
  std::optional<double> median_oracle_diff_a;
  std::optional<double> median_oracle_diff_b;
  double max_cumulative_diff = 0.0;
  std::vector<std::size_t> degrees;
  std::vector<double> energy_a, energy_b;  // NaN where the scan found no crossing
};

/// Writes moment_diff.csv, cumulative_overlay.csv, energy_vs_degree.csv and
/// compare.json into `out_dir`. Throws ParameterError when the runs' scan grids differ.
CompareReport compare_runs(const std::filesystem::path& run_a, const std::filesystem::path& run_b,
                           const std::filesystem::path& out_dir);

double median(std::vector<double> v);

}  // namespace chebgsee
