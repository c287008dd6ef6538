#ifndef BDI_LOSSES_HPP
#define BDI_LOSSES_HPP

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "bdi/kernel.hpp"
#include "bdi/ridge.hpp"

namespace bdi {

// Which prediction losses drive the design update. Full keeps both
// directions; the other two are the single-direction ablations.
enum class Mode { Full, ForwardOnly, BackwardOnly };

// Multi-design handling: either every row of the design block is learnable,
// or a single row is learnable and the rest stay fixed.
enum class MultiDesignMode { AllLearnable, OneLearnable };

enum class GradMode { Analytic, FiniteDifference };

struct BdiConfig {
  double target_score = 10.0;     // y_h, assigned to every sought design
  double weight_param = 1e-3;     // alpha in the score-softmax weighting
  double regularization = 1e-6;   // beta
  int steps = 200;                // T
  double learning_rate = 1e-3;    // eta
  int num_designs = 1;            // M
  Mode mode = Mode::Full;
  double backward_weight = 1.0;   // lambda on the backward loss
  MultiDesignMode multi_mode = MultiDesignMode::AllLearnable;
  GradMode grad_mode = GradMode::Analytic;
  std::uint64_t seed = 0;

  void validate() const;  // throws std::invalid_argument

  // Per-task-type defaults: alpha 1e-3 / lr 1e-3 for continuous designs,
  // alpha 0 / lr 1e-1 for discrete (logit) designs.
  static BdiConfig continuous_defaults();
  static BdiConfig discrete_defaults();
};

// The learnable design block plus its constant target score.
struct HighScoringDesigns {
  Eigen::MatrixXd designs;      // M x D
  double target_score = 10.0;
  std::vector<bool> learnable;  // empty means all rows learnable

  Eigen::Index count() const { return designs.rows(); }
  bool row_learnable(Eigen::Index row) const {
    return learnable.empty() || learnable[static_cast<std::size_t>(row)];
  }
  // target_score replicated M times.
  Eigen::VectorXd target_vector() const;
};

struct LossBreakdown {
  double l2h = 0.0;   // forward: dataset model scoring the sought designs
  double h2l = 0.0;   // backward: design model scoring the dataset
  double total = 0.0; // (l2h + lambda * h2l) / 2, mode flags zero a branch
  int step = 0;
};

// sqrt(softmax(alpha * y)); squared entries sum to one.
Eigen::VectorXd weights_low(const Eigen::Ref<const Eigen::VectorXd>& y,
                            double alpha);

// Constant 1/sqrt(m); squared entries sum to one.
Eigen::VectorXd weights_high(int m);

// A dataset bound to a kernel and configuration. The dataset-side ridge
// solution (K_ll + beta I)^{-1} y_l does not depend on the sought designs and
// is computed once here.
class BdiProblem {
 public:
  BdiProblem(KernelSpec spec, Eigen::MatrixXd dataset_designs,
             Eigen::VectorXd dataset_scores, BdiConfig config);

  // || omega_l . (y_l - K_lh (K_hh + beta I)^{-1} y_h) ||^2
  double loss_h2l(const Eigen::Ref<const Eigen::MatrixXd>& designs) const;

  // || omega_h . (y_h - K_hl (K_ll + beta I)^{-1} y_l) ||^2
  double loss_l2h(const Eigen::Ref<const Eigen::MatrixXd>& designs) const;

  LossBreakdown loss_total(const Eigen::Ref<const Eigen::MatrixXd>& designs,
                           int step = 0) const;

  // Exact gradient of loss_total with respect to the design block; rows
  // marked non-learnable get a zero row. Dispatches to the central-difference
  // fallback when the configuration selects it.
  Eigen::MatrixXd grad_total(const Eigen::Ref<const Eigen::MatrixXd>& designs,
                             const std::vector<bool>& learnable = {}) const;
  Eigen::MatrixXd grad_total_analytic(
      const Eigen::Ref<const Eigen::MatrixXd>& designs,
      const std::vector<bool>& learnable = {}) const;
  Eigen::MatrixXd grad_total_fd(
      const Eigen::Ref<const Eigen::MatrixXd>& designs,
      const std::vector<bool>& learnable = {}) const;

  // Ridge prediction of the dataset model at one design, and its gradient.
  double proxy_predict(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Eigen::VectorXd proxy_grad(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  const KernelSpec& spec() const { return spec_; }
  const BdiConfig& config() const { return config_; }
  const Eigen::MatrixXd& dataset_designs() const { return designs_; }
  const Eigen::VectorXd& dataset_scores() const { return scores_; }
  const RidgeSolution& dataset_ridge() const { return dataset_ridge_; }
  const Eigen::VectorXd& dataset_weights() const { return omega_; }
  Eigen::Index dim() const { return designs_.cols(); }

 private:
  bool forward_active() const { return config_.mode != Mode::BackwardOnly; }
  bool backward_active() const {
    return config_.mode != Mode::ForwardOnly && config_.backward_weight > 0.0;
  }

  KernelSpec spec_;
  Eigen::MatrixXd designs_;   // X_l, N x D
  Eigen::VectorXd scores_;    // y_l
  BdiConfig config_;
  Eigen::VectorXd omega_;     // weights_low(y_l, alpha)
  RidgeSolution dataset_ridge_;
};

}  // namespace bdi

#endif  // BDI_LOSSES_HPP
