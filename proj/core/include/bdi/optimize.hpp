#ifndef BDI_OPTIMIZE_HPP
#define BDI_OPTIMIZE_HPP

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "bdi/losses.hpp"

namespace bdi {

// Adam accumulators. Hyperparameters beyond the learning rate are the
// conventional beta1 = 0.9, beta2 = 0.999, eps = 1e-8 with bias correction.
struct AdamState {
  Eigen::MatrixXd first_moment;
  Eigen::MatrixXd second_moment;
  long step = 0;

  static AdamState zero(Eigen::Index rows, Eigen::Index cols);
};

// One in-place Adam update of x.
void adam_step(AdamState& state, Eigen::MatrixXd& x,
               const Eigen::Ref<const Eigen::MatrixXd>& grad,
               double learning_rate);

struct OptimizeResult {
  Eigen::MatrixXd final_designs;
  std::vector<LossBreakdown> trace;  // one entry per step, length T
};

// Called after each step with the step index, the updated design block and
// the loss measured before the update.
using StepObserver = std::function<void(
    int step, const Eigen::Ref<const Eigen::MatrixXd>& designs,
    const LossBreakdown& loss)>;

// Runs config.steps Adam steps on loss_total starting from init. Deterministic
// for fixed inputs; throws with the step index if the loss or the designs stop
// being finite.
OptimizeResult optimize(const BdiProblem& problem, HighScoringDesigns init,
                        const StepObserver& observer = {});

// Plain gradient-ascent baseline on the dataset-side ridge prediction:
// x <- x + eta * d proxy / d x, for config.steps steps.
Eigen::VectorXd grad_ascent_baseline(
    const BdiProblem& problem, const Eigen::Ref<const Eigen::VectorXd>& init);

// Mean kernel value between one design and the rows of a design set.
double similarity(const KernelSpec& spec,
                  const Eigen::Ref<const Eigen::VectorXd>& design,
                  const Eigen::Ref<const Eigen::MatrixXd>& design_set);

// Initial design block: the top-scoring dataset row. With more than one
// learnable design each further row is one more proxy gradient-ascent step
// from the previous row; in OneLearnable mode the extra rows are the
// next-best dataset rows held fixed.
HighScoringDesigns initialize_designs(const BdiProblem& problem);

// Row proposed for evaluation: the learnable row in OneLearnable mode,
// otherwise the row with the maximal proxy prediction.
Eigen::Index select_best_row(const BdiProblem& problem,
                             const HighScoringDesigns& init,
                             const Eigen::Ref<const Eigen::MatrixXd>& designs);

}  // namespace bdi

#endif  // BDI_OPTIMIZE_HPP
