#ifndef BDI_REPORT_HPP
#define BDI_REPORT_HPP

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "bdi/kernel.hpp"
#include "bdi/losses.hpp"

namespace bdi {

std::string mode_name(Mode mode);
Mode mode_from_name(const std::string& name);
std::string kernel_kind_name(KernelKind kind);
KernelKind kernel_kind_from_name(const std::string& name);
std::string multi_mode_name(MultiDesignMode mode);
MultiDesignMode multi_mode_from_name(const std::string& name);
std::string grad_mode_name(GradMode mode);
GradMode grad_mode_from_name(const std::string& name);

struct EvaluatedDesign {
  int row = 0;
  double raw = 0.0;
  double normalized = 0.0;
};

// Everything one experiment produces. Serialized as a single JSON document
// with `schema: 1`; two runs with the same configuration and seed produce
// byte-identical documents apart from wall_clock_seconds.
struct RunReport {
  int schema = 1;
  // task identity
  std::string task;
  int dim = 0;
  int n = 0;
  double keep_fraction = 0.5;
  std::uint64_t seed = 0;
  // configuration snapshot
  KernelSpec kernel;
  BdiConfig config;
  int top_k = 1;
  // dataset metadata
  double norm_mean = 0.0;
  double norm_std = 1.0;
  double y_min = 0.0;
  double y_max = 1.0;
  double dataset_best = 0.0;  // best normalized score present in the dataset
  // result
  Eigen::MatrixXd final_designs;  // M x D
  int chosen_row = 0;
  std::vector<int> tokens;  // discrete tasks only
  double raw_score = 0.0;
  double normalized_score = 0.0;
  std::vector<EvaluatedDesign> evaluated;
  double similarity_top_decile = 0.0;
  std::vector<LossBreakdown> trace;  // length == config.steps
  double wall_clock_seconds = 0.0;
};

std::string serialize_run_report(const RunReport& report);
RunReport parse_run_report(const std::string& json_text);

// Structural check mirroring schemas/run_report.schema.json plus the
// cross-field invariants (trace length, recomputable normalized score).
// Throws std::invalid_argument with a description on the first violation.
void validate_run_report(const std::string& json_text);

// Write-temp-then-rename.
void write_file_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace bdi

#endif  // BDI_REPORT_HPP
