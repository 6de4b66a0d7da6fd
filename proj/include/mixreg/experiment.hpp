#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mixreg/bounds.hpp"
#include "mixreg/core.hpp"
#include "mixreg/datagen.hpp"
#include "mixreg/wealth.hpp"

// Monte Carlo harness. Paths are simulated with per-path RNG streams
// (stream_id = path_id), so results are independent of thread scheduling.
//
// In the default summary mode the runner tracks only (t, S, V) and evaluates
// the mixture wealth exactly at a filtered set of steps; the filter is sound
// because ln Z_t <= L*_t holds for any probability prior, so a step whose
// L*_t does not exceed the best exact value seen so far cannot raise the
// running supremum. A coarse screening quadrature discards most of the
// remaining candidates before the full-resolution evaluation runs. With
// --full-eval (or when a trace is requested) every step is evaluated through
// the incremental engine instead.

namespace mixreg {

std::string version_string();
std::string describe_prior(const PriorSpec& prior);

struct ExperimentConfig {
  DataModel model = GaussianIID{};
  PriorSpec prior = RobbinsSpec{};
  double alpha = 0.05;
  double rho = 0.1;
  std::int64_t n_paths = 1;
  std::int64_t horizon = 1000;
  std::uint64_t seed = 0;
  double tolerance = kDefaultTolerance;
  std::string out_dir;  // empty: compute only, persist nothing
  QuadratureConfig quadrature{};
  int threads = 1;  // 0: one worker per hardware thread
  bool full_eval = false;
  bool trace = false;  // collect per-step rows for path 0 (implies full eval there)
};

void validate(const ExperimentConfig& config);

struct VilleOutcome {
  std::int64_t path_id = 0;
  bool in_E_alpha = true;
  double sup_ln_Z = 0.0;
  std::optional<std::int64_t> first_crossing_t;  // set iff not in_E_alpha
};

struct TraceRow {
  std::int64_t t = 0;
  double S = 0.0;
  double V = 0.0;
  double ln_Z = 0.0;
  double regret = 0.0;
  BranchId branch = BranchId::B1_interior;
  double bound = 0.0;       // pathwise bound (Robbins) or exact regret (Gaussian)
  double cond_bound = 0.0;  // NaN when not defined at this step
  double cs_lo = 0.0;
  double cs_hi = 0.0;
  bool covered = true;
};

struct PathResult {
  VilleOutcome ville;
  std::int64_t evaluated_steps = 0;
  std::int64_t bound_violations = 0;
  double max_violation_margin = -std::numeric_limits<double>::infinity();
  std::int64_t conditional_violations = 0;  // counted before first crossing only
  std::int64_t prop1_violations = 0;        // |eta*| > 1 with V >= V_alpha, pre-crossing
  bool cs_applicable = false;
  bool cs_covered_all = true;
  bool unverified = false;
  double max_err_bound = 0.0;
  double final_S = 0.0;
  double final_V = 0.0;
  double final_ln_Z = 0.0;
  double final_regret = 0.0;
  double max_lil_stat = 0.0;  // running max taken over V >= e^e only
  double final_slln_stat = 0.0;
  std::int64_t fine_evals = 0;
  std::int64_t screen_evals = 0;
};

PathResult run_path(const ExperimentConfig& config, std::int64_t path_id,
                    std::vector<TraceRow>* trace_out = nullptr);

// Exact binomial (Clopper-Pearson) 95% interval.
struct CountWithCI {
  std::int64_t count = 0;
  std::int64_t out_of = 0;
  double frequency = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 1.0;
};
CountWithCI clopper_pearson(std::int64_t count, std::int64_t out_of);

struct Quantiles {
  double min = 0.0;
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
  double max = 0.0;
  std::int64_t n = 0;
};
Quantiles summarize(std::vector<double> values);

struct CrossingBin {
  std::int64_t t_lo = 0;  // inclusive
  std::int64_t t_hi = 0;  // inclusive
  std::int64_t count = 0;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<PathResult> paths;
  std::vector<TraceRow> trace;  // path 0 only, when config.trace

  CountWithCI ville_frequency;
  std::vector<CrossingBin> first_crossing_histogram;  // power-of-two bins
  std::int64_t evaluated_steps = 0;
  std::int64_t bound_violations = 0;
  double worst_margin = -std::numeric_limits<double>::infinity();
  std::int64_t conditional_violations_on_E_alpha = 0;
  std::int64_t prop1_violations_on_E_alpha = 0;
  bool cs_applicable = false;
  CountWithCI cs_coverage;
  Quantiles max_lil_stat_distribution;
  Quantiles final_regret_distribution;
  std::int64_t unverified_paths = 0;

  double wall_seconds = 0.0;
  std::int64_t fine_evals = 0;
  std::int64_t screen_evals = 0;
  int threads_used = 1;
};

ExperimentReport run_experiment(const ExperimentConfig& config);

// report.json bytes; the "results" subtree and the CSV files are a pure
// function of (config, seed), while "runtime" carries wall-clock data.
std::string report_json_text(const ExperimentReport& report);
void write_report(const ExperimentReport& report, const std::string& out_dir);

// Long-horizon diagnostics at logarithmically spaced checkpoints. Nothing
// here is asserted; the final-checkpoint ratio is compared against a report
// threshold and flagged, not failed.
struct LilConfig {
  DataModel model = GaussianIID{};
  double c = kDefaultRobbinsC;
  double sigma0_sq = 1.0;  // prior scale for the Gaussian-mixture gap column
  double alpha = 0.05;
  std::int64_t n_paths = 100;
  std::int64_t horizon = 1000000;
  std::uint64_t seed = 0;
  int checkpoints_per_decade = 8;
  double report_threshold = 2.0;
  QuadratureConfig quadrature{};
  int threads = 1;
  std::string out_dir;
};

void validate(const LilConfig& config);

struct LilCheckpoint {
  std::int64_t t = 0;
  double V = 0.0;
  double ln_Z = 0.0;
  double regret = 0.0;
  double regret_over_llv = 0.0;  // NaN while V <= e
  double slln_stat = 0.0;
  double lil_stat = 0.0;      // NaN while V <= e
  double gaussian_gap = 0.0;  // Gaussian-prior regret minus ln(1 + sigma0^2 V)
};

struct LilPathResult {
  std::int64_t path_id = 0;
  bool in_E_alpha = true;
  double sup_ln_Z = 0.0;
  std::vector<LilCheckpoint> checkpoints;
  double max_lil_stat = 0.0;  // running max taken over V >= e^e only
  bool flagged = false;  // in E_alpha and final ratio above report_threshold
  bool unverified = false;
  std::int64_t fine_evals = 0;
  std::int64_t screen_evals = 0;
};

struct LilReport {
  LilConfig config;
  std::vector<LilPathResult> paths;
  std::int64_t e_alpha_count = 0;
  std::int64_t flagged_count = 0;
  Quantiles final_ratio_distribution;     // R/lnln V at the last checkpoint, E_alpha paths
  Quantiles max_lil_stat_distribution;    // running max, E_alpha paths
  Quantiles final_gaussian_gap_distribution;
  std::int64_t unverified_paths = 0;
  double wall_seconds = 0.0;
  std::int64_t fine_evals = 0;
  std::int64_t screen_evals = 0;
};

std::vector<std::int64_t> lil_checkpoints(std::int64_t horizon, int per_decade);
LilReport lil_longrun(const LilConfig& config);
std::string lil_json_text(const LilReport& report);
void write_lil_report(const LilReport& report, const std::string& out_dir);

}  // namespace mixreg
