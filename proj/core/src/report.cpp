#include "bdi/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json_util.hpp"

namespace bdi {

using detail::ordered_json;

std::string mode_name(Mode mode) {
  switch (mode) {
    case Mode::Full: return "full";
    case Mode::ForwardOnly: return "forward";
    case Mode::BackwardOnly: return "backward";
  }
  throw std::logic_error("mode_name: bad mode");
}

Mode mode_from_name(const std::string& name) {
  if (name == "full") return Mode::Full;
  if (name == "forward") return Mode::ForwardOnly;
  if (name == "backward") return Mode::BackwardOnly;
  throw std::invalid_argument("unknown mode: " + name);
}

std::string kernel_kind_name(KernelKind kind) {
  return kind == KernelKind::Ntk ? "ntk" : "rbf";
}

KernelKind kernel_kind_from_name(const std::string& name) {
  if (name == "ntk") return KernelKind::Ntk;
  if (name == "rbf") return KernelKind::Rbf;
  throw std::invalid_argument("unknown kernel: " + name);
}

std::string multi_mode_name(MultiDesignMode mode) {
  return mode == MultiDesignMode::AllLearnable ? "all" : "one";
}

MultiDesignMode multi_mode_from_name(const std::string& name) {
  if (name == "all") return MultiDesignMode::AllLearnable;
  if (name == "one") return MultiDesignMode::OneLearnable;
  throw std::invalid_argument("unknown m-mode: " + name);
}

std::string grad_mode_name(GradMode mode) {
  return mode == GradMode::Analytic ? "analytic" : "fd";
}

GradMode grad_mode_from_name(const std::string& name) {
  if (name == "analytic") return GradMode::Analytic;
  if (name == "fd") return GradMode::FiniteDifference;
  throw std::invalid_argument("unknown grad mode: " + name);
}

std::string serialize_run_report(const RunReport& report) {
  ordered_json j;
  j["schema"] = report.schema;
  j["kind"] = "run";
  j["task"] = {{"name", report.task},
               {"dim", report.dim},
               {"n", report.n},
               {"keep_fraction", report.keep_fraction},
               {"seed", report.seed}};
  j["kernel"] = detail::kernel_to_json(report.kernel);
  j["config"] = detail::config_to_json(report.config);
  j["config"]["top_k"] = report.top_k;
  j["dataset"] = {{"norm_mean", report.norm_mean},
                  {"norm_std", report.norm_std},
                  {"y_min", report.y_min},
                  {"y_max", report.y_max},
                  {"best_normalized", report.dataset_best}};

  ordered_json result;
  ordered_json designs = ordered_json::array();
  for (Eigen::Index r = 0; r < report.final_designs.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index c = 0; c < report.final_designs.cols(); ++c) {
      row.push_back(report.final_designs(r, c));
    }
    designs.push_back(std::move(row));
  }
  result["final_designs"] = std::move(designs);
  result["chosen_row"] = report.chosen_row;
  result["raw_score"] = report.raw_score;
  result["normalized_score"] = report.normalized_score;
  ordered_json evaluated = ordered_json::array();
  for (const EvaluatedDesign& e : report.evaluated) {
    evaluated.push_back({{"row", e.row},
                         {"raw", e.raw},
                         {"normalized", e.normalized}});
  }
  result["evaluated"] = std::move(evaluated);
  if (!report.tokens.empty()) {
    result["tokens"] = report.tokens;
  }
  j["result"] = std::move(result);

  j["similarity"] = {{"top_decile", report.similarity_top_decile}};

  ordered_json trace = ordered_json::array();
  for (const LossBreakdown& entry : report.trace) {
    trace.push_back({{"step", entry.step},
                     {"l2h", entry.l2h},
                     {"h2l", entry.h2l},
                     {"total", entry.total}});
  }
  j["trace"] = std::move(trace);
  j["wall_clock_seconds"] = report.wall_clock_seconds;
  j["seed"] = report.seed;
  return j.dump(2) + "\n";
}

RunReport parse_run_report(const std::string& json_text) {
  const nlohmann::json j = nlohmann::json::parse(json_text);
  RunReport report;
  report.schema = j.at("schema").get<int>();
  const auto& task = j.at("task");
  report.task = task.at("name").get<std::string>();
  report.dim = task.at("dim").get<int>();
  report.n = task.at("n").get<int>();
  report.keep_fraction = task.at("keep_fraction").get<double>();
  report.seed = task.at("seed").get<std::uint64_t>();
  report.kernel = detail::kernel_from_json(j.at("kernel"));
  report.config = detail::config_from_json(j.at("config"));
  report.config.seed = report.seed;
  report.top_k = j.at("config").at("top_k").get<int>();
  const auto& dataset = j.at("dataset");
  report.norm_mean = dataset.at("norm_mean").get<double>();
  report.norm_std = dataset.at("norm_std").get<double>();
  report.y_min = dataset.at("y_min").get<double>();
  report.y_max = dataset.at("y_max").get<double>();
  report.dataset_best = dataset.at("best_normalized").get<double>();
  const auto& result = j.at("result");
  const auto& designs = result.at("final_designs");
  const Eigen::Index rows = static_cast<Eigen::Index>(designs.size());
  const Eigen::Index cols =
      rows > 0 ? static_cast<Eigen::Index>(designs.at(0).size()) : 0;
  report.final_designs.resize(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      report.final_designs(r, c) =
          designs.at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c)).get<double>();
    }
  }
  report.chosen_row = result.at("chosen_row").get<int>();
  report.raw_score = result.at("raw_score").get<double>();
  report.normalized_score = result.at("normalized_score").get<double>();
  for (const auto& e : result.at("evaluated")) {
    report.evaluated.push_back({e.at("row").get<int>(),
                                e.at("raw").get<double>(),
                                e.at("normalized").get<double>()});
  }
  if (result.contains("tokens")) {
    report.tokens = result.at("tokens").get<std::vector<int>>();
  }
  report.similarity_top_decile =
      j.at("similarity").at("top_decile").get<double>();
  for (const auto& t : j.at("trace")) {
    LossBreakdown entry;
    entry.step = t.at("step").get<int>();
    entry.l2h = t.at("l2h").get<double>();
    entry.h2l = t.at("h2l").get<double>();
    entry.total = t.at("total").get<double>();
    report.trace.push_back(entry);
  }
  report.wall_clock_seconds = j.at("wall_clock_seconds").get<double>();
  return report;
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("run report: " + what);
}

void require_number(const nlohmann::json& j, const char* key) {
  require(j.contains(key) && j.at(key).is_number(),
          std::string(key) + " must be a number");
}

}  // namespace

void validate_run_report(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("run report: not JSON: ") +
                                e.what());
  }
  require(j.is_object(), "document must be an object");
  require(j.value("schema", -1) == 1, "schema must be 1");
  require(j.value("kind", "") == "run", "kind must be 'run'");

  require(j.contains("task") && j["task"].is_object(), "missing task object");
  const auto& task = j["task"];
  require(task.contains("name") && task["name"].is_string(),
          "task.name must be a string");
  require(task.contains("dim") && task["dim"].is_number_integer(),
          "task.dim must be an integer");
  require(task.contains("n") && task["n"].is_number_integer(),
          "task.n must be an integer");
  require_number(task, "keep_fraction");
  require(task.contains("seed") && task["seed"].is_number(),
          "task.seed must be a number");

  require(j.contains("kernel") && j["kernel"].is_object(),
          "missing kernel object");
  const std::string kind = j["kernel"].value("kind", "");
  require(kind == "ntk" || kind == "rbf", "kernel.kind must be ntk or rbf");
  if (kind == "ntk") {
    require(j["kernel"].contains("depth"), "ntk kernel needs depth");
    require_number(j["kernel"], "weight_variance");
    require_number(j["kernel"], "bias_variance");
  } else {
    require_number(j["kernel"], "bandwidth");
  }

  require(j.contains("config") && j["config"].is_object(),
          "missing config object");
  const auto& cfg = j["config"];
  for (const char* key : {"target_score", "weight_param", "regularization",
                          "learning_rate", "backward_weight"}) {
    require_number(cfg, key);
  }
  require(cfg.contains("steps") && cfg["steps"].is_number_integer(),
          "config.steps must be an integer");
  require(cfg.contains("num_designs") && cfg["num_designs"].is_number_integer(),
          "config.num_designs must be an integer");
  mode_from_name(cfg.value("mode", ""));
  multi_mode_from_name(cfg.value("multi_design_mode", ""));
  grad_mode_from_name(cfg.value("grad", ""));
  require(cfg.contains("top_k") && cfg["top_k"].is_number_integer(),
          "config.top_k must be an integer");

  require(j.contains("dataset") && j["dataset"].is_object(),
          "missing dataset object");
  for (const char* key :
       {"norm_mean", "norm_std", "y_min", "y_max", "best_normalized"}) {
    require_number(j["dataset"], key);
  }

  require(j.contains("result") && j["result"].is_object(),
          "missing result object");
  const auto& result = j["result"];
  require(result.contains("final_designs") &&
              result["final_designs"].is_array() &&
              !result["final_designs"].empty(),
          "result.final_designs must be a nonempty array");
  const int m = cfg["num_designs"].get<int>();
  require(static_cast<int>(result["final_designs"].size()) == m,
          "result.final_designs row count must equal num_designs");
  const int dim = task["dim"].get<int>();
  for (const auto& row : result["final_designs"]) {
    require(row.is_array() && static_cast<int>(row.size()) == dim,
            "result.final_designs rows must have task.dim entries");
    for (const auto& v : row) {
      require(v.is_number(), "result.final_designs entries must be numbers");
    }
  }
  require(result.contains("chosen_row") &&
              result["chosen_row"].is_number_integer(),
          "result.chosen_row must be an integer");
  const int chosen = result["chosen_row"].get<int>();
  require(chosen >= 0 && chosen < m, "result.chosen_row out of range");
  require_number(result, "raw_score");
  require_number(result, "normalized_score");
  require(result.contains("evaluated") && result["evaluated"].is_array() &&
              !result["evaluated"].empty(),
          "result.evaluated must be a nonempty array");

  require(j.contains("similarity") && j["similarity"].is_object(),
          "missing similarity object");
  require_number(j["similarity"], "top_decile");

  require(j.contains("trace") && j["trace"].is_array(), "missing trace array");
  const auto& trace = j["trace"];
  require(static_cast<int>(trace.size()) == cfg["steps"].get<int>(),
          "trace length must equal config.steps");
  int expected_step = 0;
  for (const auto& entry : trace) {
    require(entry.is_object(), "trace entries must be objects");
    require(entry.value("step", -1) == expected_step,
            "trace steps must be consecutive from 0");
    for (const char* key : {"l2h", "h2l", "total"}) {
      require_number(entry, key);
    }
    ++expected_step;
  }

  require_number(j, "wall_clock_seconds");
  require(j.contains("seed") && j["seed"].is_number(),
          "seed must be a number");

  // Cross-field invariant: the normalized score is recomputable from the raw
  // score and the dataset range.
  const double y_min = j["dataset"]["y_min"].get<double>();
  const double y_max = j["dataset"]["y_max"].get<double>();
  require(y_max > y_min, "dataset range must be nondegenerate");
  const double recomputed =
      (result["raw_score"].get<double>() - y_min) / (y_max - y_min);
  const double stated = result["normalized_score"].get<double>();
  require(std::abs(recomputed - stated) <=
              1e-12 * std::max(1.0, std::abs(stated)),
          "normalized_score does not match (raw - y_min)/(y_max - y_min)");
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp);
    out << content;
    if (!out) throw std::runtime_error("write failed on " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace bdi
