#include "bdi/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

#include "bdi/rng.hpp"

namespace bdi {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& field, const char* what) {
  const char* begin = field.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || (end != nullptr && *end != '\0')) {
    throw std::invalid_argument(std::string("dataset CSV: bad ") + what +
                                " value '" + field + "'");
  }
  return v;
}

}  // namespace

double OfflineDataset::best_normalized() const {
  return normalized_ground_truth(*this, raw_scores.maxCoeff());
}

double normalized_ground_truth(const OfflineDataset& dataset, double y_raw) {
  if (!(dataset.y_max > dataset.y_min)) {
    throw std::invalid_argument("normalized_ground_truth: degenerate range");
  }
  return (y_raw - dataset.y_min) / (dataset.y_max - dataset.y_min);
}

OfflineDataset generate_offline(const TaskSpec& task, int n,
                                double keep_fraction, std::uint64_t seed) {
  if (n < 10) throw std::invalid_argument("generate_offline: n < 10");
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) {
    throw std::invalid_argument("generate_offline: keep_fraction outside (0,1]");
  }
  const Eigen::Index pool = std::max<Eigen::Index>(
      n, static_cast<Eigen::Index>(
             std::llround(static_cast<double>(n) / keep_fraction)));
  const int dim = task.dim;

  Rng rng(seed);
  Eigen::MatrixXd candidates(pool, dim);
  Eigen::VectorXd raw(pool);
  if (task.discrete()) {
    std::vector<int> tokens(static_cast<std::size_t>(task.length));
    for (Eigen::Index i = 0; i < pool; ++i) {
      for (int j = 0; j < task.length; ++j) {
        tokens[static_cast<std::size_t>(j)] = static_cast<int>(
            rng.integer(static_cast<std::uint64_t>(task.alphabet)));
      }
      candidates.row(i) = encode_flat(task, tokens).transpose();
      raw(i) = oracle_tokens(task, tokens);
    }
  } else {
    for (Eigen::Index i = 0; i < pool; ++i) {
      for (int j = 0; j < dim; ++j) {
        candidates(i, j) = rng.uniform(task.lower(j), task.upper(j));
      }
      raw(i) = oracle(task, candidates.row(i).transpose());
    }
  }

  // Bottom n by raw score; stable on ties, then back to sampling order.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(pool));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) {
                     return raw(a) < raw(b);
                   });
  order.resize(static_cast<std::size_t>(n));
  std::sort(order.begin(), order.end());

  OfflineDataset out;
  out.designs.resize(n, dim);
  out.raw_scores.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.designs.row(i) = candidates.row(order[static_cast<std::size_t>(i)]);
    out.raw_scores(i) = raw(order[static_cast<std::size_t>(i)]);
  }

  out.norm_mean = out.raw_scores.mean();
  const double variance =
      (out.raw_scores.array() - out.norm_mean).square().sum() /
      static_cast<double>(n);
  out.norm_std = std::sqrt(variance);
  if (!(out.norm_std > 0.0)) {
    throw std::runtime_error("generate_offline: degenerate score spread");
  }
  out.scores = (out.raw_scores.array() - out.norm_mean) / out.norm_std;

  out.y_min = raw.minCoeff();
  out.y_max = std::max(raw.maxCoeff(), global_max_score(task));
  return out;
}

void export_csv(const OfflineDataset& dataset, std::ostream& out) {
  const Eigen::Index d = dataset.dim();
  for (Eigen::Index j = 0; j < d; ++j) {
    out << 'x' << j << ',';
  }
  out << "score_raw,score_norm\n";
  for (Eigen::Index i = 0; i < dataset.size(); ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      out << format_double(dataset.designs(i, j)) << ',';
    }
    out << format_double(dataset.raw_scores(i)) << ','
        << format_double(dataset.scores(i)) << '\n';
  }
}

void export_csv(const OfflineDataset& dataset, const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // LF endings on all platforms
  if (!out) throw std::runtime_error("export_csv: cannot open " + path);
  export_csv(dataset, out);
  if (!out) throw std::runtime_error("export_csv: write failed on " + path);
}

OfflineDataset import_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw std::invalid_argument("dataset CSV: missing header");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) header.push_back(field);
  }
  if (header.size() < 3 || header[header.size() - 2] != "score_raw" ||
      header.back() != "score_norm") {
    throw std::invalid_argument("dataset CSV: unexpected header");
  }
  const Eigen::Index d = static_cast<Eigen::Index>(header.size()) - 2;
  for (Eigen::Index j = 0; j < d; ++j) {
    if (header[static_cast<std::size_t>(j)] != "x" + std::to_string(j)) {
      throw std::invalid_argument("dataset CSV: unexpected header column " +
                                  header[static_cast<std::size_t>(j)]);
    }
  }

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    row.reserve(static_cast<std::size_t>(d) + 2);
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
      row.push_back(parse_double(field, "numeric"));
    }
    if (row.size() != static_cast<std::size_t>(d) + 2) {
      throw std::invalid_argument("dataset CSV: wrong column count on row " +
                                  std::to_string(rows.size() + 1));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument("dataset CSV: no data rows");

  OfflineDataset out;
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  out.designs.resize(n, d);
  out.raw_scores.resize(n);
  out.scores.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < d; ++j) {
      out.designs(i, j) = row[static_cast<std::size_t>(j)];
    }
    out.raw_scores(i) = row[static_cast<std::size_t>(d)];
    out.scores(i) = row[static_cast<std::size_t>(d) + 1];
  }
  out.norm_mean = out.raw_scores.mean();
  const double variance =
      (out.raw_scores.array() - out.norm_mean).square().sum() /
      static_cast<double>(n);
  out.norm_std = std::sqrt(variance);
  out.y_min = out.raw_scores.minCoeff();
  out.y_max = out.raw_scores.maxCoeff();
  return out;
}

OfflineDataset import_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("import_csv: cannot open " + path);
  return import_csv(in);
}

void save_dataset(const OfflineDataset& dataset, const std::string& csv_path) {
  export_csv(dataset, csv_path);
  nlohmann::ordered_json meta;
  meta["norm_mean"] = dataset.norm_mean;
  meta["norm_std"] = dataset.norm_std;
  meta["y_min"] = dataset.y_min;
  meta["y_max"] = dataset.y_max;
  std::ofstream out(csv_path + ".meta.json", std::ios::binary);
  if (!out) {
    throw std::runtime_error("save_dataset: cannot open " + csv_path +
                             ".meta.json");
  }
  out << meta.dump(2) << '\n';
}

OfflineDataset load_dataset(const std::string& csv_path) {
  OfflineDataset out = import_csv(csv_path);
  std::ifstream meta_in(csv_path + ".meta.json", std::ios::binary);
  if (!meta_in) {
    throw std::runtime_error("load_dataset: missing sidecar " + csv_path +
                             ".meta.json");
  }
  const nlohmann::json meta = nlohmann::json::parse(meta_in);
  out.norm_mean = meta.at("norm_mean").get<double>();
  out.norm_std = meta.at("norm_std").get<double>();
  out.y_min = meta.at("y_min").get<double>();
  out.y_max = meta.at("y_max").get<double>();
  return out;
}

}  // namespace bdi
