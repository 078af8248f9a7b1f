#pragma once

// Reproducible Monte-Carlo experiments over the precoding solver: feasibility
// maps of the reachable receive set on a complex-plane grid, and feasibility
// probability sweeps over the element count n with percentile crossings.
// Every trial draws from its own (seed, substream) so results are identical
// for any thread count, and CSV output is byte-stable.

#include "ris/optimizer.hpp"
#include "ris/precoding.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace ris {

enum class ExperimentKind { kFeasGrid, kTransition, kPercentiles };
const char* to_string(ExperimentKind k);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kTransition;
  int m = 2;
  int k = 4;                     // feasgrid receiver count
  std::vector<int> k_list = {4}; // transition receiver counts
  int n = 4;                     // feasgrid element count
  int n_min = 1;
  int n_max = 8;
  bool direct = false;
  double p = 1.0;
  double sigma2 = 1.0;
  int trials = 200;
  int grid_res = 81;
  double grid_extent = 1.5;
  double delta = 1e-3;
  int restarts = 4;
  std::uint64_t seed = 0;
  int threads = 0;               // 0 = one worker per hardware thread
  AlmParams alm;

  void validate() const;
};

nlohmann::json config_to_json(const ExperimentConfig& cfg);
// Starts from defaults; unknown keys are rejected, missing keys keep defaults.
ExperimentConfig config_from_json(const nlohmann::json& j);

struct FeasPoint {
  double re = 0.0;
  double im = 0.0;
  double residual = 0.0;
  bool feasible = false;
};

struct FeasGridResult {
  ExperimentConfig config;
  std::vector<FeasPoint> points;  // row-major: re index outer, im inner
  int stalled_trials = 0;
  int total_trials = 0;

  // Fraction of feasible grid points among those with |y| >= min_radius.
  double feasible_fraction(double min_radius = 0.0) const;
};

struct TransitionRow {
  int m = 0;
  int k = 0;
  int n = 0;
  bool direct = false;
  int trials = 0;
  int successes = 0;
  double prob = 0.0;
};

struct PercentileRow {
  int k = 0;
  double level = 0.0;
  int n_first = 0;       // smallest n with success probability >= level
  double n_interp = 0.0; // linear interpolation of the crossing
};

struct TransitionResult {
  ExperimentConfig config;
  std::vector<TransitionRow> rows;            // ordered by (k, n)
  std::vector<PercentileRow> percentiles;     // 0.2/0.5/0.8 where bracketed
  int stalled_trials = 0;
  int total_trials = 0;
};

// One channel realization; each grid point is targeted at every receiver
// simultaneously (target vector with k identical entries).
FeasGridResult run_feasgrid(const ExperimentConfig& cfg);

// Independent channel and unit-modulus target per (k, n, trial).
TransitionResult run_transition(const ExperimentConfig& cfg);

// Per (k, level): first n whose success probability reaches the level, plus
// the linearly interpolated crossing. Throws std::range_error when a level
// is not bracketed inside the n-range (including a first-n probability
// already at or above the level).
std::vector<PercentileRow> percentile_table(const TransitionResult& result,
                                            const std::vector<double>& levels);

// CSV writers; headers and number formatting are fixed so identical configs
// give byte-identical files.
void write_feasgrid_csv(const FeasGridResult& result, std::ostream& out);
void write_transition_csv(const TransitionResult& result, std::ostream& out);
void write_percentiles_csv(const std::vector<PercentileRow>& rows,
                           std::ostream& out);

std::string feasgrid_svg(const FeasGridResult& result);
std::string transition_svg(const TransitionResult& result);

nlohmann::json metadata_json(const ExperimentConfig& cfg, int stalled_trials,
                             int total_trials, double wall_time_s);

}  // namespace ris
