#ifndef BDI_EXPERIMENT_HPP
#define BDI_EXPERIMENT_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bdi/dataset.hpp"
#include "bdi/report.hpp"

namespace bdi {

// One layer of experiment settings: every field optional, absent fields fall
// through to the layer below (command line over config file over defaults).
struct OptionOverlay {
  std::optional<std::string> task;
  std::optional<int> dim;
  std::optional<int> n;
  std::optional<double> keep_fraction;
  std::optional<std::string> kernel;
  std::optional<int> depth;
  std::optional<double> weight_variance;
  std::optional<double> bias_variance;
  std::optional<double> bandwidth;
  std::optional<std::string> mode;
  std::optional<double> yh;
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<double> lambda;
  std::optional<int> steps;
  std::optional<double> lr;
  std::optional<int> m;
  std::optional<std::string> m_mode;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> grad;
  std::optional<int> top_k;
  std::optional<int> trials;
  std::optional<std::string> out;
  std::optional<std::string> data;
};

// Flat `key = value` lines with `#` comments; keys match the long flag names
// without the leading dashes. Unknown keys are an error.
OptionOverlay parse_config_text(const std::string& text);
OptionOverlay parse_config_file(const std::string& path);

// Fields set in `high` win over `low`.
OptionOverlay merge_overlays(OptionOverlay low, const OptionOverlay& high);

// Fully resolved experiment settings.
struct RunOptions {
  TaskKind task = TaskKind::QuadBowl;
  int dim = 10;
  int n = 1000;
  double keep_fraction = 0.5;
  KernelSpec kernel;
  bool bandwidth_from_data = true;  // RBF bandwidth from the 1/(D var) heuristic
  BdiConfig bdi;
  int top_k = 1;
  int trials = 5;
  std::string out;
  std::string data_csv;
};

// Applies defaults (alpha / learning rate depend on whether the task is
// discrete), validates every field, and rejects unknown names before any
// computation.
RunOptions resolve_options(const OptionOverlay& overlay);

// Task landscape and dataset sample streams derived from the run seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// Builds the task and dataset, initializes the design block, optimizes, and
// scores the outcome with the exact oracle.
RunReport run_experiment(const RunOptions& options);

// The four-variant ablation (full, forward only, backward only, RBF kernel)
// over options.trials seeds sharing datasets and initializations. Returns the
// comparison document as deterministic JSON bytes.
std::string run_ablate_json(const RunOptions& options);

// Grid sweep of one hyperparameter {yh, alpha, lambda, steps} over shared
// seeds; reports each grid point's mean score and its ratio to the reference
// (the base configuration's value of the parameter).
std::string run_sweep_json(const RunOptions& options,
                           const std::string& parameter,
                           const std::vector<double>& grid);

struct ConsolidatedReport {
  std::string table_text;    // ranking table, one row per setting
  std::string summary_json;  // mean / stderr per setting
  std::string traces_csv;    // long-format per-step losses from run reports
  std::string ratios_csv;    // long-format sweep ratios
};

// Aggregates previously written result files (run, ablate, or sweep
// documents). Rejects documents whose schema or kind does not match.
ConsolidatedReport consolidate_reports(const std::vector<std::string>& paths);

}  // namespace bdi

#endif  // BDI_EXPERIMENT_HPP
