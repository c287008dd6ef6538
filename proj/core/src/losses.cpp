#include "bdi/losses.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace bdi {

void BdiConfig::validate() const {
  if (!(target_score == target_score))
    throw std::invalid_argument("BdiConfig: target_score is NaN");
  if (!(weight_param >= 0.0))
    throw std::invalid_argument("BdiConfig: weight_param < 0");
  if (!(regularization > 0.0))
    throw std::invalid_argument("BdiConfig: regularization <= 0");
  if (steps < 0) throw std::invalid_argument("BdiConfig: steps < 0");
  if (!(learning_rate >= 0.0))
    throw std::invalid_argument("BdiConfig: learning_rate < 0");
  if (num_designs < 1) throw std::invalid_argument("BdiConfig: num_designs < 1");
  if (!(backward_weight >= 0.0))
    throw std::invalid_argument("BdiConfig: backward_weight < 0");
}

BdiConfig BdiConfig::continuous_defaults() {
  BdiConfig cfg;
  cfg.weight_param = 1e-3;
  cfg.learning_rate = 1e-3;
  return cfg;
}

BdiConfig BdiConfig::discrete_defaults() {
  BdiConfig cfg;
  cfg.weight_param = 0.0;
  cfg.learning_rate = 1e-1;
  return cfg;
}

Eigen::VectorXd HighScoringDesigns::target_vector() const {
  return Eigen::VectorXd::Constant(designs.rows(), target_score);
}

Eigen::VectorXd weights_low(const Eigen::Ref<const Eigen::VectorXd>& y,
                            double alpha) {
  if (y.size() == 0) throw std::invalid_argument("weights_low: empty scores");
  if (!y.allFinite())
    throw std::invalid_argument("weights_low: non-finite score");
  if (!(alpha >= 0.0)) throw std::invalid_argument("weights_low: alpha < 0");

  // Stable softmax of alpha * y, then elementwise square root.
  Eigen::VectorXd scaled = alpha * y;
  const double shift = scaled.maxCoeff();
  Eigen::VectorXd w = (scaled.array() - shift).exp();
  w /= w.sum();
  return w.array().sqrt();
}

Eigen::VectorXd weights_high(int m) {
  if (m < 1) throw std::invalid_argument("weights_high: m < 1");
  return Eigen::VectorXd::Constant(m, 1.0 / std::sqrt(static_cast<double>(m)));
}

BdiProblem::BdiProblem(KernelSpec spec, Eigen::MatrixXd dataset_designs,
                       Eigen::VectorXd dataset_scores, BdiConfig config)
    : spec_(spec),
      designs_(std::move(dataset_designs)),
      scores_(std::move(dataset_scores)),
      config_(config) {
  spec_.validate();
  config_.validate();
  if (designs_.rows() == 0)
    throw std::invalid_argument("BdiProblem: empty dataset");
  if (designs_.rows() != scores_.size())
    throw std::invalid_argument("BdiProblem: designs/scores length mismatch");
  omega_ = weights_low(scores_, config_.weight_param);
  dataset_ridge_ = fit(gram(spec_, designs_, designs_, "dataset", "dataset"),
                       scores_, config_.regularization);
}

double BdiProblem::loss_h2l(
    const Eigen::Ref<const Eigen::MatrixXd>& designs) const {
  const Eigen::VectorXd targets =
      Eigen::VectorXd::Constant(designs.rows(), config_.target_score);
  const RidgeSolution design_ridge =
      fit(gram(spec_, designs, designs, "designs", "designs"), targets,
          config_.regularization);
  const KernelMatrix cross =
      gram(spec_, designs_, designs, "dataset", "designs");
  const Eigen::VectorXd residual = scores_ - predict(cross, design_ridge);
  return (omega_.array() * residual.array()).square().sum();
}

double BdiProblem::loss_l2h(
    const Eigen::Ref<const Eigen::MatrixXd>& designs) const {
  const KernelMatrix cross =
      gram(spec_, designs, designs_, "designs", "dataset");
  const Eigen::VectorXd residual =
      Eigen::VectorXd::Constant(designs.rows(), config_.target_score) -
      predict(cross, dataset_ridge_);
  return residual.squaredNorm() / static_cast<double>(designs.rows());
}

LossBreakdown BdiProblem::loss_total(
    const Eigen::Ref<const Eigen::MatrixXd>& designs, int step) const {
  LossBreakdown out;
  out.step = step;
  if (forward_active()) out.l2h = loss_l2h(designs);
  if (backward_active()) out.h2l = loss_h2l(designs);
  out.total = 0.5 * (out.l2h + config_.backward_weight * out.h2l);
  return out;
}

Eigen::MatrixXd BdiProblem::grad_total(
    const Eigen::Ref<const Eigen::MatrixXd>& designs,
    const std::vector<bool>& learnable) const {
  return config_.grad_mode == GradMode::Analytic
             ? grad_total_analytic(designs, learnable)
             : grad_total_fd(designs, learnable);
}

Eigen::MatrixXd BdiProblem::grad_total_analytic(
    const Eigen::Ref<const Eigen::MatrixXd>& designs,
    const std::vector<bool>& learnable) const {
  const Eigen::Index m = designs.rows();
  const Eigen::Index n = designs_.rows();
  const Eigen::Index d = designs.cols();
  if (d != designs_.cols())
    throw std::invalid_argument("grad_total: design dimension mismatch");
  if (!learnable.empty() && static_cast<Eigen::Index>(learnable.size()) != m)
    throw std::invalid_argument("grad_total: learnable mask length mismatch");

  const bool fwd = forward_active();
  const bool bwd = backward_active();
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(m, d);

  // Forward branch: residual of the dataset model at each sought design.
  Eigen::VectorXd fwd_residual;
  if (fwd) {
    const KernelMatrix cross =
        gram(spec_, designs, designs_, "designs", "dataset");
    fwd_residual = Eigen::VectorXd::Constant(m, config_.target_score) -
                   predict(cross, dataset_ridge_);
  }

  // Backward branch: v = (K_hh + beta I)^{-1} y_h and the adjoint
  // s = (K_hh + beta I)^{-1} K_lh^T g, with g the residual sensitivities.
  Eigen::VectorXd v, s, g;
  if (bwd) {
    const Eigen::VectorXd targets =
        Eigen::VectorXd::Constant(m, config_.target_score);
    const RidgeSolution design_ridge =
        fit(gram(spec_, designs, designs, "designs", "designs"), targets,
            config_.regularization);
    const KernelMatrix cross =
        gram(spec_, designs_, designs, "dataset", "designs");
    v = design_ridge.coefficients;
    const Eigen::VectorXd residual = scores_ - cross.values * v;
    g = -2.0 * (omega_.array().square() * residual.array()).matrix();
    s = design_ridge.solve(Eigen::VectorXd(cross.values.transpose() * g));
  }

  const Eigen::VectorXd& coeffs = dataset_ridge_.coefficients;
  for (Eigen::Index p = 0; p < m; ++p) {
    if (!learnable.empty() && !learnable[static_cast<std::size_t>(p)]) {
      continue;  // masked rows keep a zero gradient row
    }
    Eigen::VectorXd acc_fwd = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd acc_bwd = Eigen::VectorXd::Zero(d);
    for (Eigen::Index j = 0; j < n; ++j) {
      const Eigen::VectorXd kg = kernel_grad_second(
          spec_, designs_.row(j).transpose(), designs.row(p).transpose());
      if (fwd) acc_fwd += coeffs(j) * kg;
      if (bwd) acc_bwd += g(j) * kg;
    }
    Eigen::VectorXd row = Eigen::VectorXd::Zero(d);
    if (fwd) {
      row += (-2.0 / static_cast<double>(m)) * fwd_residual(p) * acc_fwd;
    }
    if (bwd) {
      Eigen::VectorXd bwd_row = v(p) * acc_bwd;
      // Derivative of (K_hh + beta I)^{-1} via -A^{-1} (dA) A^{-1}.
      for (Eigen::Index q = 0; q < m; ++q) {
        const Eigen::VectorXd kg_hh = kernel_grad_second(
            spec_, designs.row(q).transpose(), designs.row(p).transpose());
        bwd_row -= (s(p) * v(q) + s(q) * v(p)) * kg_hh;
      }
      row += config_.backward_weight * bwd_row;
    }
    grad.row(p) = 0.5 * row.transpose();
  }
  return grad;
}

Eigen::MatrixXd BdiProblem::grad_total_fd(
    const Eigen::Ref<const Eigen::MatrixXd>& designs,
    const std::vector<bool>& learnable) const {
  constexpr double kStep = 1e-4;
  const Eigen::Index m = designs.rows();
  const Eigen::Index d = designs.cols();
  if (!learnable.empty() && static_cast<Eigen::Index>(learnable.size()) != m)
    throw std::invalid_argument("grad_total_fd: learnable mask length mismatch");

  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(m, d);
  Eigen::MatrixXd probe = designs;
  for (Eigen::Index p = 0; p < m; ++p) {
    if (!learnable.empty() && !learnable[static_cast<std::size_t>(p)]) continue;
    for (Eigen::Index k = 0; k < d; ++k) {
      const double saved = probe(p, k);
      probe(p, k) = saved + kStep;
      const double up = loss_total(probe).total;
      probe(p, k) = saved - kStep;
      const double down = loss_total(probe).total;
      probe(p, k) = saved;
      grad(p, k) = (up - down) / (2.0 * kStep);
    }
  }
  return grad;
}

double BdiProblem::proxy_predict(
    const Eigen::Ref<const Eigen::VectorXd>& x) const {
  double acc = 0.0;
  for (Eigen::Index j = 0; j < designs_.rows(); ++j) {
    acc += dataset_ridge_.coefficients(j) *
           kernel_pair(spec_, designs_.row(j).transpose(), x);
  }
  return acc;
}

Eigen::VectorXd BdiProblem::proxy_grad(
    const Eigen::Ref<const Eigen::VectorXd>& x) const {
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(x.size());
  for (Eigen::Index j = 0; j < designs_.rows(); ++j) {
    acc += dataset_ridge_.coefficients(j) *
           kernel_grad_second(spec_, designs_.row(j).transpose(), x);
  }
  return acc;
}

}  // namespace bdi
