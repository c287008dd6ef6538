// Command-line driver: configure and run experiments, ablation matrices,
// hyperparameter sweeps, and result aggregation on top of the core library.
#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bdi/experiment.hpp"
#include "bdi/optimize.hpp"

namespace {

// One std::optional per flag so unset flags fall through to the config file
// and then to the defaults.
struct CliFlags {
  bdi::OptionOverlay overlay;
  std::optional<std::string> config;
  // sweep only
  std::optional<std::string> param;
  std::optional<std::string> grid;
};

void add_common_flags(CLI::App* cmd, CliFlags& flags) {
  cmd->add_option("--task", flags.overlay.task,
                  "Task name: quadbowl|negackley|negstyblinskitang|discrete8");
  cmd->add_option("--dim", flags.overlay.dim, "Design dimension (continuous)");
  cmd->add_option("--n", flags.overlay.n, "Offline dataset size");
  cmd->add_option("--keep-fraction", flags.overlay.keep_fraction,
                  "Bottom fraction of sampled candidates kept");
  cmd->add_option("--kernel", flags.overlay.kernel, "Kernel: ntk|rbf");
  cmd->add_option("--depth", flags.overlay.depth, "Hidden layers of the NTK");
  cmd->add_option("--weight-variance", flags.overlay.weight_variance,
                  "NTK weight variance");
  cmd->add_option("--bias-variance", flags.overlay.bias_variance,
                  "NTK bias variance");
  cmd->add_option("--bandwidth", flags.overlay.bandwidth,
                  "RBF bandwidth (default: 1/(D var) heuristic)");
  cmd->add_option("--mode", flags.overlay.mode,
                  "Loss mode: full|forward|backward");
  cmd->add_option("--yh", flags.overlay.yh, "Target score for sought designs");
  cmd->add_option("--alpha", flags.overlay.alpha, "Score-softmax weight");
  cmd->add_option("--beta", flags.overlay.beta, "Ridge regularization");
  cmd->add_option("--lambda", flags.overlay.lambda, "Backward loss weight");
  cmd->add_option("--steps", flags.overlay.steps, "Optimization steps");
  cmd->add_option("--lr", flags.overlay.lr, "Adam learning rate");
  cmd->add_option("--m", flags.overlay.m, "Number of sought designs");
  cmd->add_option("--m-mode", flags.overlay.m_mode,
                  "Multi-design handling: all|one");
  cmd->add_option("--seed", flags.overlay.seed, "Random seed");
  cmd->add_option("--grad", flags.overlay.grad,
                  "Gradient path: analytic|fd");
  cmd->add_option("--top-k", flags.overlay.top_k,
                  "Designs evaluated from a multi-design block");
  cmd->add_option("--trials", flags.overlay.trials,
                  "Seeds per cell for ablate/sweep");
  cmd->add_option("--out", flags.overlay.out, "Output path");
  cmd->add_option("--data", flags.overlay.data,
                  "Dataset CSV (with .meta.json sidecar) instead of sampling");
  cmd->add_option("--config", flags.config,
                  "Config file with key = value lines");
}

bdi::RunOptions resolve(const CliFlags& flags) {
  bdi::OptionOverlay from_file;
  if (flags.config.has_value()) {
    from_file = bdi::parse_config_file(*flags.config);
  }
  return bdi::resolve_options(bdi::merge_overlays(from_file, flags.overlay));
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream ss(text);
  std::string field;
  while (std::getline(ss, field, ',')) {
    std::size_t pos = 0;
    const double v = std::stod(field, &pos);
    if (pos != field.size()) {
      throw std::invalid_argument("bad grid entry '" + field + "'");
    }
    grid.push_back(v);
  }
  if (grid.empty()) throw std::invalid_argument("empty grid");
  return grid;
}

int cmd_run(const CliFlags& flags) {
  const bdi::RunOptions options = resolve(flags);
  const bdi::RunReport report = bdi::run_experiment(options);
  const std::string text = bdi::serialize_run_report(report);
  if (!options.out.empty()) {
    bdi::write_file_atomic(options.out, text);
  }
  std::printf(
      "task=%s mode=%s kernel=%s seed=%llu  score=%.6f (raw %.6f)  "
      "dataset_best=%.6f  steps=%d\n",
      report.task.c_str(), bdi::mode_name(report.config.mode).c_str(),
      bdi::kernel_kind_name(report.kernel.kind).c_str(),
      static_cast<unsigned long long>(report.seed), report.normalized_score,
      report.raw_score, report.dataset_best, report.config.steps);
  if (options.out.empty()) {
    std::fputs(text.c_str(), stdout);
  }
  return 0;
}

int cmd_ablate(const CliFlags& flags) {
  const bdi::RunOptions options = resolve(flags);
  const std::string text = bdi::run_ablate_json(options);
  if (!options.out.empty()) {
    bdi::write_file_atomic(options.out, text);
    std::printf("wrote %s\n", options.out.c_str());
  } else {
    std::fputs(text.c_str(), stdout);
  }
  return 0;
}

int cmd_sweep(const CliFlags& flags) {
  if (!flags.param.has_value()) {
    throw std::invalid_argument("sweep requires --param {yh|alpha|lambda|steps}");
  }
  if (!flags.grid.has_value()) {
    throw std::invalid_argument("sweep requires --grid v1,v2,...");
  }
  const bdi::RunOptions options = resolve(flags);
  const std::string text =
      bdi::run_sweep_json(options, *flags.param, parse_grid(*flags.grid));
  if (!options.out.empty()) {
    bdi::write_file_atomic(options.out, text);
    std::printf("wrote %s\n", options.out.c_str());
  } else {
    std::fputs(text.c_str(), stdout);
  }
  return 0;
}

int cmd_report(const std::vector<std::string>& paths,
               const std::optional<std::string>& out) {
  const bdi::ConsolidatedReport report = bdi::consolidate_reports(paths);
  std::fputs(report.table_text.c_str(), stdout);
  if (out.has_value()) {
    std::string base = *out;
    const std::string suffix = ".json";
    if (base.size() > suffix.size() &&
        base.compare(base.size() - suffix.size(), suffix.size(), suffix) == 0) {
      base.resize(base.size() - suffix.size());
    }
    bdi::write_file_atomic(base + ".json", report.summary_json);
    bdi::write_file_atomic(base + "_traces.csv", report.traces_csv);
    bdi::write_file_atomic(base + "_ratios.csv", report.ratios_csv);
    std::printf("wrote %s.json, %s_traces.csv, %s_ratios.csv\n", base.c_str(),
                base.c_str(), base.c_str());
  }
  return 0;
}

int cmd_gen_data(const CliFlags& flags) {
  const bdi::RunOptions options = resolve(flags);
  if (options.out.empty()) {
    throw std::invalid_argument("gen-data requires --out <csv path>");
  }
  const bdi::TaskSpec task = bdi::make_task(
      options.task, options.dim, bdi::derive_seed(options.bdi.seed, 1));
  const bdi::OfflineDataset dataset = bdi::generate_offline(
      task, options.n, options.keep_fraction, bdi::derive_seed(options.bdi.seed, 2));
  bdi::save_dataset(dataset, options.out);
  std::printf("wrote %s (+.meta.json): n=%lld d=%lld best_normalized=%.6f\n",
              options.out.c_str(), static_cast<long long>(dataset.size()),
              static_cast<long long>(dataset.dim()),
              dataset.best_normalized());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Offline design optimization via bidirectional infinite-width "
               "kernel regression"};
  app.require_subcommand(1);

  CliFlags run_flags, ablate_flags, sweep_flags, gen_flags;
  std::vector<std::string> report_paths;
  std::optional<std::string> report_out;

  CLI::App* run = app.add_subcommand("run", "Run one experiment");
  add_common_flags(run, run_flags);

  CLI::App* ablate = app.add_subcommand(
      "ablate", "Run the full/forward/backward/rbf comparison");
  add_common_flags(ablate, ablate_flags);

  CLI::App* sweep =
      app.add_subcommand("sweep", "Sweep one hyperparameter over a grid");
  add_common_flags(sweep, sweep_flags);
  sweep->add_option("--param", sweep_flags.param,
                    "Swept parameter: yh|alpha|lambda|steps");
  sweep->add_option("--grid", sweep_flags.grid, "Comma-separated grid values");

  CLI::App* report =
      app.add_subcommand("report", "Aggregate previously written results");
  report->add_option("paths", report_paths, "Result JSON files")->required();
  report->add_option("--out", report_out, "Summary output base path");

  CLI::App* gen = app.add_subcommand("gen-data", "Write a dataset CSV");
  add_common_flags(gen, gen_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_flags);
    if (ablate->parsed()) return cmd_ablate(ablate_flags);
    if (sweep->parsed()) return cmd_sweep(sweep_flags);
    if (report->parsed()) return cmd_report(report_paths, report_out);
    if (gen->parsed()) return cmd_gen_data(gen_flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
