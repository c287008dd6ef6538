#ifndef BDI_DATASET_HPP
#define BDI_DATASET_HPP

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <string>

#include "bdi/tasks.hpp"

namespace bdi {

// The static dataset: censored low-scoring designs with normalized scores and
// the score range used for reporting.
struct OfflineDataset {
  Eigen::MatrixXd designs;     // X_l, N x D
  Eigen::VectorXd raw_scores;  // y_l before normalization
  Eigen::VectorXd scores;      // y_l, normalized to mean 0 / std 1
  double norm_mean = 0.0;
  double norm_std = 1.0;
  double y_min = 0.0;  // lowest score of the full pre-censoring sample
  double y_max = 1.0;  // global maximum (analytic or enumerated)

  Eigen::Index size() const { return designs.rows(); }
  Eigen::Index dim() const { return designs.cols(); }

  // Highest normalized ground-truth score present in the dataset.
  double best_normalized() const;
};

// (y_raw - y_min) / (y_max - y_min).
double normalized_ground_truth(const OfflineDataset& dataset, double y_raw);

// Samples ceil(n / keep_fraction) designs uniformly (box for continuous
// tasks, tokens for the discrete one), keeps the bottom n by raw score, and
// normalizes the kept scores to unit Gaussian statistics. y_min comes from
// the full pre-censoring sample, y_max additionally includes the known or
// enumerated global maximum.
OfflineDataset generate_offline(const TaskSpec& task, int n,
                                double keep_fraction, std::uint64_t seed);

// Dataset CSV: header x0,...,x{D-1},score_raw,score_norm; one row per design;
// decimal floats at 17 significant digits so import round-trips export
// bit-exactly.
void export_csv(const OfflineDataset& dataset, std::ostream& out);
void export_csv(const OfflineDataset& dataset, const std::string& path);

// Parses the CSV columns back. Normalization metadata and the score range are
// not part of the CSV; the returned fields are recomputed from the raw column
// (mean/std) and left as the raw min/max unless restored from a sidecar.
OfflineDataset import_csv(std::istream& in);
OfflineDataset import_csv(const std::string& path);

// Full-fidelity save/load: the CSV per the interface above plus a
// `<path>.meta.json` sidecar carrying norm_mean/norm_std/y_min/y_max.
void save_dataset(const OfflineDataset& dataset, const std::string& csv_path);
OfflineDataset load_dataset(const std::string& csv_path);

}  // namespace bdi

#endif  // BDI_DATASET_HPP
