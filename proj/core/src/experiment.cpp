#include "bdi/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "bdi/optimize.hpp"
#include "json_util.hpp"

namespace bdi {

using detail::ordered_json;

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

int parse_int(const std::string& value, const std::string& key) {
  std::size_t pos = 0;
  int out = 0;
  try {
    out = std::stoi(value, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad integer for '" + key + "'");
  }
  if (pos != value.size()) {
    throw std::invalid_argument("config: bad integer for '" + key + "'");
  }
  return out;
}

double parse_real(const std::string& value, const std::string& key) {
  std::size_t pos = 0;
  double out = 0.0;
  try {
    out = std::stod(value, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad number for '" + key + "'");
  }
  if (pos != value.size()) {
    throw std::invalid_argument("config: bad number for '" + key + "'");
  }
  return out;
}

std::uint64_t parse_seed(const std::string& value, const std::string& key) {
  std::size_t pos = 0;
  unsigned long long out = 0;
  try {
    out = std::stoull(value, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad seed for '" + key + "'");
  }
  if (pos != value.size()) {
    throw std::invalid_argument("config: bad seed for '" + key + "'");
  }
  return static_cast<std::uint64_t>(out);
}

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
};

MeanStderr mean_stderr(const std::vector<double>& values) {
  MeanStderr out;
  const double n = static_cast<double>(values.size());
  if (values.empty()) return out;
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.stderr_ = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return out;
}

// Rows of the offline set whose normalized score is in the top decile.
Eigen::MatrixXd top_decile_designs(const OfflineDataset& dataset) {
  const Eigen::Index n = dataset.size();
  const Eigen::Index count = std::max<Eigen::Index>(1, n / 10);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) {
                     return dataset.scores(a) > dataset.scores(b);
                   });
  Eigen::MatrixXd top(count, dataset.dim());
  for (Eigen::Index i = 0; i < count; ++i) {
    top.row(i) = dataset.designs.row(order[static_cast<std::size_t>(i)]);
  }
  return top;
}

Eigen::VectorXd clamp_to_box(const TaskSpec& task, Eigen::VectorXd x) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    x(i) = std::clamp(x(i), task.lower(i), task.upper(i));
  }
  return x;
}

}  // namespace

OptionOverlay parse_config_text(const std::string& text) {
  OptionOverlay overlay;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": empty key or value");
    }

    if (key == "task") overlay.task = value;
    else if (key == "dim") overlay.dim = parse_int(value, key);
    else if (key == "n") overlay.n = parse_int(value, key);
    else if (key == "keep-fraction") overlay.keep_fraction = parse_real(value, key);
    else if (key == "kernel") overlay.kernel = value;
    else if (key == "depth") overlay.depth = parse_int(value, key);
    else if (key == "weight-variance") overlay.weight_variance = parse_real(value, key);
    else if (key == "bias-variance") overlay.bias_variance = parse_real(value, key);
    else if (key == "bandwidth") overlay.bandwidth = parse_real(value, key);
    else if (key == "mode") overlay.mode = value;
    else if (key == "yh") overlay.yh = parse_real(value, key);
    else if (key == "alpha") overlay.alpha = parse_real(value, key);
    else if (key == "beta") overlay.beta = parse_real(value, key);
    else if (key == "lambda") overlay.lambda = parse_real(value, key);
    else if (key == "steps") overlay.steps = parse_int(value, key);
    else if (key == "lr") overlay.lr = parse_real(value, key);
    else if (key == "m") overlay.m = parse_int(value, key);
    else if (key == "m-mode") overlay.m_mode = value;
    else if (key == "seed") overlay.seed = parse_seed(value, key);
    else if (key == "grad") overlay.grad = value;
    else if (key == "top-k") overlay.top_k = parse_int(value, key);
    else if (key == "trials") overlay.trials = parse_int(value, key);
    else if (key == "out") overlay.out = value;
    else if (key == "data") overlay.data = value;
    else {
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": unknown key '" + key + "'");
    }
  }
  return overlay;
}

OptionOverlay parse_config_file(const std::string& path) {
  return parse_config_text(read_file(path));
}

OptionOverlay merge_overlays(OptionOverlay low, const OptionOverlay& high) {
  auto take = [](auto& dst, const auto& src) {
    if (src.has_value()) dst = src;
  };
  take(low.task, high.task);
  take(low.dim, high.dim);
  take(low.n, high.n);
  take(low.keep_fraction, high.keep_fraction);
  take(low.kernel, high.kernel);
  take(low.depth, high.depth);
  take(low.weight_variance, high.weight_variance);
  take(low.bias_variance, high.bias_variance);
  take(low.bandwidth, high.bandwidth);
  take(low.mode, high.mode);
  take(low.yh, high.yh);
  take(low.alpha, high.alpha);
  take(low.beta, high.beta);
  take(low.lambda, high.lambda);
  take(low.steps, high.steps);
  take(low.lr, high.lr);
  take(low.m, high.m);
  take(low.m_mode, high.m_mode);
  take(low.seed, high.seed);
  take(low.grad, high.grad);
  take(low.top_k, high.top_k);
  take(low.trials, high.trials);
  take(low.out, high.out);
  take(low.data, high.data);
  return low;
}

RunOptions resolve_options(const OptionOverlay& overlay) {
  RunOptions opts;
  opts.task = task_kind_from_name(overlay.task.value_or("quadbowl"));
  const bool discrete = task_is_discrete(opts.task);

  opts.dim = overlay.dim.value_or(10);
  opts.n = overlay.n.value_or(1000);
  opts.keep_fraction = overlay.keep_fraction.value_or(0.5);

  opts.kernel.kind = kernel_kind_from_name(overlay.kernel.value_or("ntk"));
  opts.kernel.depth = overlay.depth.value_or(6);
  opts.kernel.weight_variance = overlay.weight_variance.value_or(2.0);
  opts.kernel.bias_variance = overlay.bias_variance.value_or(0.1);
  if (overlay.bandwidth.has_value()) {
    opts.kernel.bandwidth = *overlay.bandwidth;
    opts.bandwidth_from_data = false;
  } else {
    opts.bandwidth_from_data = true;
  }

  opts.bdi = discrete ? BdiConfig::discrete_defaults()
                      : BdiConfig::continuous_defaults();
  opts.bdi.target_score = overlay.yh.value_or(opts.bdi.target_score);
  opts.bdi.weight_param = overlay.alpha.value_or(opts.bdi.weight_param);
  opts.bdi.regularization = overlay.beta.value_or(opts.bdi.regularization);
  opts.bdi.backward_weight = overlay.lambda.value_or(opts.bdi.backward_weight);
  opts.bdi.steps = overlay.steps.value_or(opts.bdi.steps);
  opts.bdi.learning_rate = overlay.lr.value_or(opts.bdi.learning_rate);
  opts.bdi.num_designs = overlay.m.value_or(opts.bdi.num_designs);
  opts.bdi.mode = mode_from_name(overlay.mode.value_or("full"));
  opts.bdi.multi_mode = multi_mode_from_name(overlay.m_mode.value_or("all"));
  opts.bdi.grad_mode = grad_mode_from_name(overlay.grad.value_or("analytic"));
  opts.bdi.seed = overlay.seed.value_or(0);

  opts.top_k = overlay.top_k.value_or(1);
  opts.trials = overlay.trials.value_or(5);
  opts.out = overlay.out.value_or("");
  opts.data_csv = overlay.data.value_or("");

  if (opts.dim < 1) throw std::invalid_argument("options: dim < 1");
  if (opts.n < 10) throw std::invalid_argument("options: n < 10");
  if (!(opts.keep_fraction > 0.0 && opts.keep_fraction <= 1.0)) {
    throw std::invalid_argument("options: keep-fraction outside (0,1]");
  }
  if (opts.top_k < 1) throw std::invalid_argument("options: top-k < 1");
  if (opts.trials < 1) throw std::invalid_argument("options: trials < 1");
  opts.kernel.validate();
  opts.bdi.validate();
  return opts;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the (seed, stream) pair.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

RunReport run_experiment(const RunOptions& options) {
  const auto started = std::chrono::steady_clock::now();

  const TaskSpec task =
      make_task(options.task, options.dim, derive_seed(options.bdi.seed, 1));
  OfflineDataset dataset =
      options.data_csv.empty()
          ? generate_offline(task, options.n, options.keep_fraction,
                             derive_seed(options.bdi.seed, 2))
          : load_dataset(options.data_csv);
  if (dataset.dim() != task.dim) {
    throw std::invalid_argument("run: dataset dimension does not match task");
  }

  KernelSpec kernel = options.kernel;
  if (kernel.kind == KernelKind::Rbf && options.bandwidth_from_data) {
    // 1 / (D * mean per-coordinate variance), the usual scale heuristic.
    const Eigen::VectorXd col_mean = dataset.designs.colwise().mean();
    const double var =
        (dataset.designs.rowwise() - col_mean.transpose()).squaredNorm() /
        static_cast<double>(dataset.designs.size());
    kernel.bandwidth =
        var > 0.0 ? 1.0 / (static_cast<double>(task.dim) * var)
                  : 1.0 / static_cast<double>(task.dim);
  }

  const BdiProblem problem(kernel, dataset.designs, dataset.scores,
                           options.bdi);
  const HighScoringDesigns init = initialize_designs(problem);
  HighScoringDesigns start = init;
  OptimizeResult opt = optimize(problem, std::move(start));

  RunReport report;
  report.task = task_name(options.task);
  report.dim = task.dim;
  report.n = static_cast<int>(dataset.size());
  report.keep_fraction = options.keep_fraction;
  report.seed = options.bdi.seed;
  report.kernel = kernel;
  report.config = options.bdi;
  report.top_k = options.top_k;
  report.norm_mean = dataset.norm_mean;
  report.norm_std = dataset.norm_std;
  report.y_min = dataset.y_min;
  report.y_max = dataset.y_max;
  report.dataset_best = dataset.best_normalized();
  report.final_designs = opt.final_designs;
  report.trace = std::move(opt.trace);

  // Rank rows by the forward proxy (single learnable row in OneLearnable
  // mode), evaluate the oracle on the top-k, report the best.
  std::vector<Eigen::Index> candidates;
  if (options.bdi.multi_mode == MultiDesignMode::OneLearnable) {
    candidates.push_back(select_best_row(problem, init, report.final_designs));
  } else {
    std::vector<Eigen::Index> order(
        static_cast<std::size_t>(report.final_designs.rows()));
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> preds(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      preds[i] = problem.proxy_predict(
          report.final_designs.row(static_cast<Eigen::Index>(i)).transpose());
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) {
                       return preds[static_cast<std::size_t>(a)] >
                              preds[static_cast<std::size_t>(b)];
                     });
    const std::size_t keep = std::min<std::size_t>(
        order.size(), static_cast<std::size_t>(options.top_k));
    candidates.assign(order.begin(), order.begin() + static_cast<long>(keep));
  }

  double best_raw = -std::numeric_limits<double>::infinity();
  Eigen::Index best_row = candidates.front();
  for (Eigen::Index row : candidates) {
    const Eigen::VectorXd design =
        report.final_designs.row(row).transpose();
    double raw = 0.0;
    if (task.discrete()) {
      raw = oracle_tokens(task, decode_flat(task, design));
    } else {
      raw = oracle(task, clamp_to_box(task, design));
    }
    const double normalized = normalized_ground_truth(dataset, raw);
    report.evaluated.push_back(
        {static_cast<int>(row), raw, normalized});
    if (raw > best_raw) {
      best_raw = raw;
      best_row = row;
    }
  }
  report.chosen_row = static_cast<int>(best_row);
  report.raw_score = best_raw;
  report.normalized_score = normalized_ground_truth(dataset, best_raw);
  if (task.discrete()) {
    report.tokens = decode_flat(
        task, report.final_designs.row(best_row).transpose());
  }

  report.similarity_top_decile =
      similarity(kernel, report.final_designs.row(best_row).transpose(),
                 top_decile_designs(dataset));

  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();
  return report;
}

namespace {

struct AblateVariant {
  const char* name;
  Mode mode;
  KernelKind kernel;
};

constexpr AblateVariant kAblateVariants[] = {
    {"full", Mode::Full, KernelKind::Ntk},
    {"forward_only", Mode::ForwardOnly, KernelKind::Ntk},
    {"backward_only", Mode::BackwardOnly, KernelKind::Ntk},
    {"ntk2rbf", Mode::Full, KernelKind::Rbf},
};

ordered_json options_to_json(const RunOptions& options) {
  ordered_json j;
  j["task"] = task_name(options.task);
  j["dim"] = options.dim;
  j["n"] = options.n;
  j["keep_fraction"] = options.keep_fraction;
  j["kernel"] = detail::kernel_to_json(options.kernel);
  j["config"] = detail::config_to_json(options.bdi);
  j["config"]["top_k"] = options.top_k;
  j["trials"] = options.trials;
  return j;
}

}  // namespace

std::string run_ablate_json(const RunOptions& options) {
  const auto started = std::chrono::steady_clock::now();

  ordered_json doc;
  doc["schema"] = 1;
  doc["kind"] = "ablate";
  doc["base"] = options_to_json(options);

  ordered_json cells = ordered_json::array();
  std::map<std::string, std::vector<double>> scores;
  std::map<std::string, std::vector<double>> sims;
  for (const AblateVariant& variant : kAblateVariants) {
    for (int trial = 0; trial < options.trials; ++trial) {
      RunOptions cell = options;
      cell.bdi.mode = variant.mode;
      cell.kernel.kind = variant.kernel;
      cell.bdi.seed = options.bdi.seed + static_cast<std::uint64_t>(trial);
      cell.out.clear();
      const RunReport report = run_experiment(cell);
      cells.push_back({{"variant", variant.name},
                       {"seed", cell.bdi.seed},
                       {"raw_score", report.raw_score},
                       {"normalized_score", report.normalized_score},
                       {"similarity_top_decile", report.similarity_top_decile},
                       {"dataset_best", report.dataset_best}});
      scores[variant.name].push_back(report.normalized_score);
      sims[variant.name].push_back(report.similarity_top_decile);
    }
  }
  doc["cells"] = std::move(cells);

  ordered_json summary = ordered_json::array();
  for (const AblateVariant& variant : kAblateVariants) {
    const MeanStderr score = mean_stderr(scores[variant.name]);
    const MeanStderr sim = mean_stderr(sims[variant.name]);
    summary.push_back({{"variant", variant.name},
                       {"mean_normalized", score.mean},
                       {"stderr_normalized", score.stderr_},
                       {"mean_similarity", sim.mean}});
  }
  doc["summary"] = std::move(summary);
  doc["wall_clock_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();
  return doc.dump(2) + "\n";
}

std::string run_sweep_json(const RunOptions& options,
                           const std::string& parameter,
                           const std::vector<double>& grid) {
  if (grid.empty()) throw std::invalid_argument("sweep: empty grid");
  double reference = 0.0;
  if (parameter == "yh") reference = options.bdi.target_score;
  else if (parameter == "alpha") reference = options.bdi.weight_param;
  else if (parameter == "lambda") reference = options.bdi.backward_weight;
  else if (parameter == "steps") reference = options.bdi.steps;
  else throw std::invalid_argument("sweep: unknown parameter '" + parameter + "'");

  std::vector<double> values = grid;
  if (std::find(values.begin(), values.end(), reference) == values.end()) {
    values.insert(values.begin(), reference);
  }

  const auto started = std::chrono::steady_clock::now();
  ordered_json doc;
  doc["schema"] = 1;
  doc["kind"] = "sweep";
  doc["parameter"] = parameter;
  doc["reference"] = reference;
  doc["grid"] = grid;
  doc["base"] = options_to_json(options);

  ordered_json cells = ordered_json::array();
  std::map<double, std::vector<double>> scores;
  for (double value : values) {
    for (int trial = 0; trial < options.trials; ++trial) {
      RunOptions cell = options;
      if (parameter == "yh") cell.bdi.target_score = value;
      else if (parameter == "alpha") cell.bdi.weight_param = value;
      else if (parameter == "lambda") cell.bdi.backward_weight = value;
      else cell.bdi.steps = static_cast<int>(std::llround(value));
      cell.bdi.seed = options.bdi.seed + static_cast<std::uint64_t>(trial);
      cell.out.clear();
      const RunReport report = run_experiment(cell);
      cells.push_back({{"value", value},
                       {"seed", cell.bdi.seed},
                       {"raw_score", report.raw_score},
                       {"normalized_score", report.normalized_score}});
      scores[value].push_back(report.normalized_score);
    }
  }
  doc["cells"] = std::move(cells);

  const double reference_mean = mean_stderr(scores[reference]).mean;
  ordered_json summary = ordered_json::array();
  for (double value : values) {
    const MeanStderr stats = mean_stderr(scores[value]);
    ordered_json row = {{"value", value},
                        {"mean_normalized", stats.mean},
                        {"stderr_normalized", stats.stderr_}};
    if (reference_mean != 0.0) {
      row["ratio_to_reference"] = stats.mean / reference_mean;
    } else {
      row["ratio_to_reference"] = nullptr;
    }
    summary.push_back(std::move(row));
  }
  doc["summary"] = std::move(summary);
  doc["wall_clock_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();
  return doc.dump(2) + "\n";
}

ConsolidatedReport consolidate_reports(const std::vector<std::string>& paths) {
  if (paths.empty()) {
    throw std::invalid_argument("report: at least one input file required");
  }

  struct Group {
    std::vector<double> scores;
  };
  std::map<std::string, Group> groups;
  std::ostringstream traces;
  std::ostringstream ratios;
  traces << "source,task,mode,kernel,seed,step,l2h,h2l,total\n";
  ratios << "source,parameter,value,mean_normalized,ratio_to_reference\n";

  for (const std::string& path : paths) {
    const std::string text = read_file(path);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument("report: " + path + " is not JSON: " +
                                  e.what());
    }
    if (j.value("schema", -1) != 1) {
      throw std::invalid_argument("report: " + path +
                                  ": schema mismatch (want 1)");
    }
    const std::string kind = j.value("kind", "");
    if (kind == "run") {
      validate_run_report(text);
      const RunReport report = parse_run_report(text);
      const std::string key = report.task + "/d" + std::to_string(report.dim) +
                              "/" + mode_name(report.config.mode) + "/" +
                              kernel_kind_name(report.kernel.kind);
      groups[key].scores.push_back(report.normalized_score);
      for (const LossBreakdown& entry : report.trace) {
        traces << path << ',' << report.task << ','
               << mode_name(report.config.mode) << ','
               << kernel_kind_name(report.kernel.kind) << ',' << report.seed
               << ',' << entry.step << ',' << entry.l2h << ',' << entry.h2l
               << ',' << entry.total << '\n';
      }
    } else if (kind == "ablate") {
      const std::string task = j.at("base").at("task").get<std::string>();
      for (const auto& cell : j.at("cells")) {
        const std::string key =
            task + "/ablate/" + cell.at("variant").get<std::string>();
        groups[key].scores.push_back(
            cell.at("normalized_score").get<double>());
      }
    } else if (kind == "sweep") {
      const std::string parameter = j.at("parameter").get<std::string>();
      const std::string task = j.at("base").at("task").get<std::string>();
      for (const auto& row : j.at("summary")) {
        ratios << path << ',' << parameter << ','
               << row.at("value").get<double>() << ','
               << row.at("mean_normalized").get<double>() << ',';
        if (row.at("ratio_to_reference").is_null()) {
          ratios << "nan";
        } else {
          ratios << row.at("ratio_to_reference").get<double>();
        }
        ratios << '\n';
      }
      (void)task;
    } else {
      throw std::invalid_argument("report: " + path + ": unknown kind '" +
                                  kind + "'");
    }
  }

  struct Row {
    std::string key;
    std::size_t count;
    MeanStderr stats;
  };
  std::vector<Row> rows;
  for (const auto& [key, group] : groups) {
    rows.push_back({key, group.scores.size(), mean_stderr(group.scores)});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return a.stats.mean > b.stats.mean;
  });

  std::ostringstream table;
  table << "rank  setting                                            n   "
           "mean      stderr\n";
  ordered_json summary_settings = ordered_json::array();
  int rank = 1;
  for (const Row& row : rows) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-5d %-50s %-3zu %-9.4f %-9.4f\n", rank,
                  row.key.c_str(), row.count, row.stats.mean,
                  row.stats.stderr_);
    table << buf;
    summary_settings.push_back({{"rank", rank},
                                {"setting", row.key},
                                {"n", row.count},
                                {"mean_normalized", row.stats.mean},
                                {"stderr_normalized", row.stats.stderr_}});
    ++rank;
  }

  ordered_json summary;
  summary["schema"] = 1;
  summary["kind"] = "report";
  summary["settings"] = std::move(summary_settings);

  ConsolidatedReport out;
  out.table_text = table.str();
  out.summary_json = summary.dump(2) + "\n";
  out.traces_csv = traces.str();
  out.ratios_csv = ratios.str();
  return out;
}

}  // namespace bdi
