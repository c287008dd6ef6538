#include "bdi/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

namespace bdi {

namespace {
constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kEps = 1e-8;
}  // namespace

AdamState AdamState::zero(Eigen::Index rows, Eigen::Index cols) {
  AdamState state;
  state.first_moment = Eigen::MatrixXd::Zero(rows, cols);
  state.second_moment = Eigen::MatrixXd::Zero(rows, cols);
  state.step = 0;
  return state;
}

void adam_step(AdamState& state, Eigen::MatrixXd& x,
               const Eigen::Ref<const Eigen::MatrixXd>& grad,
               double learning_rate) {
  if (grad.rows() != x.rows() || grad.cols() != x.cols())
    throw std::invalid_argument("adam_step: gradient shape mismatch");
  state.step += 1;
  state.first_moment = kBeta1 * state.first_moment + (1.0 - kBeta1) * grad;
  state.second_moment = kBeta2 * state.second_moment +
                        (1.0 - kBeta2) * grad.array().square().matrix();
  const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(state.step));
  x.array() -= learning_rate * (state.first_moment.array() / c1) /
               ((state.second_moment.array() / c2).sqrt() + kEps);
}

OptimizeResult optimize(const BdiProblem& problem, HighScoringDesigns init,
                        const StepObserver& observer) {
  const BdiConfig& cfg = problem.config();
  cfg.validate();
  if (!init.designs.allFinite())
    throw std::invalid_argument("optimize: non-finite initial design");
  if (init.designs.cols() != problem.dim())
    throw std::invalid_argument("optimize: design dimension mismatch");

  OptimizeResult out;
  out.trace.reserve(static_cast<std::size_t>(cfg.steps));
  Eigen::MatrixXd designs = std::move(init.designs);
  AdamState state = AdamState::zero(designs.rows(), designs.cols());

  for (int step = 0; step < cfg.steps; ++step) {
    const LossBreakdown loss = problem.loss_total(designs, step);
    if (!std::isfinite(loss.total)) {
      throw std::runtime_error("optimize: non-finite loss at step " +
                               std::to_string(step));
    }
    out.trace.push_back(loss);
    const Eigen::MatrixXd grad = problem.grad_total(designs, init.learnable);
    adam_step(state, designs, grad, cfg.learning_rate);
    if (!designs.allFinite()) {
      throw std::runtime_error("optimize: non-finite design at step " +
                               std::to_string(step));
    }
    if (observer) observer(step, designs, loss);
  }
  out.final_designs = std::move(designs);
  return out;
}

Eigen::VectorXd grad_ascent_baseline(
    const BdiProblem& problem, const Eigen::Ref<const Eigen::VectorXd>& init) {
  const BdiConfig& cfg = problem.config();
  cfg.validate();
  if (!init.allFinite())
    throw std::invalid_argument("grad_ascent_baseline: non-finite init");
  Eigen::VectorXd x = init;
  for (int step = 0; step < cfg.steps; ++step) {
    x += cfg.learning_rate * problem.proxy_grad(x);
    if (!x.allFinite()) {
      throw std::runtime_error("grad_ascent_baseline: non-finite design at "
                               "step " +
                               std::to_string(step));
    }
  }
  return x;
}

double similarity(const KernelSpec& spec,
                  const Eigen::Ref<const Eigen::VectorXd>& design,
                  const Eigen::Ref<const Eigen::MatrixXd>& design_set) {
  if (design_set.rows() == 0)
    throw std::invalid_argument("similarity: empty design set");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < design_set.rows(); ++i) {
    acc += kernel_pair(spec, design, design_set.row(i).transpose());
  }
  return acc / static_cast<double>(design_set.rows());
}

HighScoringDesigns initialize_designs(const BdiProblem& problem) {
  const BdiConfig& cfg = problem.config();
  const Eigen::VectorXd& scores = problem.dataset_scores();
  const Eigen::Index n = scores.size();
  const Eigen::Index m = cfg.num_designs;

  // Dataset rows ranked by score, best first; first occurrence wins ties.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) {
                     return scores(a) > scores(b);
                   });

  HighScoringDesigns out;
  out.target_score = cfg.target_score;
  out.designs.resize(m, problem.dim());
  out.designs.row(0) = problem.dataset_designs().row(order[0]);

  if (cfg.multi_mode == MultiDesignMode::AllLearnable) {
    // Each extra row is one more proxy ascent step from the previous one.
    for (Eigen::Index p = 1; p < m; ++p) {
      Eigen::VectorXd prev = out.designs.row(p - 1).transpose();
      out.designs.row(p) =
          (prev + cfg.learning_rate * problem.proxy_grad(prev)).transpose();
    }
  } else {
    out.learnable.assign(static_cast<std::size_t>(m), false);
    out.learnable[0] = true;
    for (Eigen::Index p = 1; p < m; ++p) {
      const Eigen::Index pick = order[static_cast<std::size_t>(p) % order.size()];
      out.designs.row(p) = problem.dataset_designs().row(pick);
    }
  }
  return out;
}

Eigen::Index select_best_row(const BdiProblem& problem,
                             const HighScoringDesigns& init,
                             const Eigen::Ref<const Eigen::MatrixXd>& designs) {
  if (problem.config().multi_mode == MultiDesignMode::OneLearnable) {
    for (Eigen::Index p = 0; p < designs.rows(); ++p) {
      if (init.row_learnable(p)) return p;
    }
    return 0;
  }
  Eigen::Index best = 0;
  double best_pred = -std::numeric_limits<double>::infinity();
  for (Eigen::Index p = 0; p < designs.rows(); ++p) {
    const double pred = problem.proxy_predict(designs.row(p).transpose());
    if (pred > best_pred) {
      best_pred = pred;
      best = p;
    }
  }
  return best;
}

}  // namespace bdi
