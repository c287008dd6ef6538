#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "bdi/losses.hpp"
#include "bdi/rng.hpp"
#include "support/oracles.hpp"

using bdi::BdiConfig;
using bdi::BdiProblem;
using bdi::KernelSpec;
using bdi::Mode;

namespace {

Eigen::MatrixXd random_matrix(bdi::Rng& rng, int rows, int cols) {
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = rng.normal();
  }
  return m;
}

Eigen::VectorXd random_vector(bdi::Rng& rng, int n) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

// The backward loss written out one term at a time, straight from the
// single-design closed form.
double scalar_backward_loss(const KernelSpec& spec,
                            const Eigen::MatrixXd& dataset,
                            const Eigen::VectorXd& scores,
                            const Eigen::VectorXd& design, double target,
                            double beta, double alpha) {
  const std::vector<double> raw(scores.data(), scores.data() + scores.size());
  std::vector<double> scaled(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) scaled[i] = alpha * raw[i];
  const std::vector<double> soft = oracles::softmax_reference(scaled);
  const double k_hh = bdi::kernel_pair(spec, design, design);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < dataset.rows(); ++i) {
    const double k_i =
        bdi::kernel_pair(spec, dataset.row(i).transpose(), design);
    const double resid = scores(i) - k_i / (k_hh + beta) * target;
    loss += soft[static_cast<std::size_t>(i)] * resid * resid;
  }
  return loss;
}

}  // namespace

TEST_CASE("weights_low basics") {
  Eigen::VectorXd y(4);
  y << 0.3, -1.2, 0.8, 2.0;

  const Eigen::VectorXd uniform = bdi::weights_low(y, 0.0);
  for (int i = 0; i < 4; ++i) CHECK(uniform(i) == doctest::Approx(0.5).epsilon(1e-14));

  const Eigen::VectorXd peaked = bdi::weights_low(y, 200.0);
  CHECK(peaked(3) * peaked(3) > 0.999999);

  Eigen::VectorXd two(2);
  two << 0.0, 1.0;
  const Eigen::VectorXd w = bdi::weights_low(two, 1e-3);
  const std::vector<double> ref = oracles::softmax_reference({0.0, 1e-3});
  CHECK(w(0) == doctest::Approx(std::sqrt(ref[0])).epsilon(1e-13));
  CHECK(w(1) == doctest::Approx(std::sqrt(ref[1])).epsilon(1e-13));
  CHECK(std::abs(w.squaredNorm() - 1.0) <= 1e-12);
  CHECK((w.array() > 0.0).all());
}

TEST_CASE("weight normalization holds over random inputs") {
  bdi::Rng rng(61);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + static_cast<int>(rng.integer(40));
    const Eigen::VectorXd y = 3.0 * random_vector(rng, n);
    const double alpha = rng.uniform(0.0, 2.0);
    CHECK(std::abs(bdi::weights_low(y, alpha).squaredNorm() - 1.0) <= 1e-12);
  }
  for (int m : {1, 4, 9}) {
    CHECK(std::abs(bdi::weights_high(m).squaredNorm() - 1.0) <= 1e-12);
  }
  CHECK(bdi::weights_high(1)(0) == 1.0);
  CHECK(bdi::weights_high(4)(0) == 0.5);
}

TEST_CASE("single-design backward loss equals its scalar form") {
  bdi::Rng rng(67);
  const KernelSpec spec = KernelSpec::ntk(6, 2.0, 0.1);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 3 + static_cast<int>(rng.integer(12));
    const int dim = 2 + static_cast<int>(rng.integer(8));
    const Eigen::MatrixXd dataset = random_matrix(rng, n, dim);
    const Eigen::VectorXd scores = random_vector(rng, n);
    BdiConfig cfg;
    cfg.weight_param = rng.uniform(0.0, 0.1);
    const BdiProblem problem(spec, dataset, scores, cfg);
    const Eigen::MatrixXd design = random_matrix(rng, 1, dim);

    const double matrix_form = problem.loss_h2l(design);
    const double scalar_form = scalar_backward_loss(
        spec, dataset, scores, design.row(0).transpose(), cfg.target_score,
        cfg.regularization, cfg.weight_param);
    CHECK(std::abs(matrix_form - scalar_form) <=
          1e-10 * std::max(1.0, std::abs(scalar_form)));
  }
}

TEST_CASE("backward loss vanishes on a constructed zero-residual instance") {
  bdi::Rng rng(71);
  const KernelSpec spec = KernelSpec::ntk(4, 2.0, 0.1);
  const int n = 6, dim = 5;
  const Eigen::MatrixXd dataset = random_matrix(rng, n, dim);
  const Eigen::MatrixXd design = random_matrix(rng, 1, dim);
  BdiConfig cfg;

  // Solve the design-side system by hand and make the dataset scores equal
  // the backward predictions exactly.
  const double k_hh = bdi::kernel_pair(spec, design.row(0).transpose(),
                                       design.row(0).transpose());
  Eigen::VectorXd scores(n);
  for (int i = 0; i < n; ++i) {
    const double k_i = bdi::kernel_pair(spec, dataset.row(i).transpose(),
                                        design.row(0).transpose());
    scores(i) = k_i / (k_hh + cfg.regularization) * cfg.target_score;
  }
  const BdiProblem problem(spec, dataset, scores, cfg);
  CHECK(problem.loss_h2l(design) <= 1e-18);
}

TEST_CASE("single-pair backward loss against the one-line formula") {
  const KernelSpec spec = KernelSpec::ntk(6, 2.0, 0.1);
  Eigen::MatrixXd dataset(1, 2);
  dataset << 1.0, 0.0;
  Eigen::MatrixXd design(1, 2);
  design << 0.0, 1.0;
  Eigen::VectorXd scores(1);
  scores << 0.5;
  BdiConfig cfg;
  const BdiProblem problem(spec, dataset, scores, cfg);

  const double k_lh = bdi::kernel_pair(spec, dataset.row(0).transpose(),
                                       design.row(0).transpose());
  const double k_hh = bdi::kernel_pair(spec, design.row(0).transpose(),
                                       design.row(0).transpose());
  const double expected = std::pow(
      0.5 - k_lh / (k_hh + cfg.regularization) * cfg.target_score, 2);
  CHECK(problem.loss_h2l(design) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("forward loss at a dataset row matches the proxy prediction") {
  bdi::Rng rng(73);
  const KernelSpec spec = KernelSpec::ntk(6, 2.0, 0.1);
  const int n = 12, dim = 6;
  const Eigen::MatrixXd dataset = random_matrix(rng, n, dim);
  const Eigen::VectorXd scores = random_vector(rng, n);
  BdiConfig cfg;
  const BdiProblem problem(spec, dataset, scores, cfg);

  const Eigen::MatrixXd design = dataset.topRows(1);
  const double predicted = problem.proxy_predict(design.row(0).transpose());
  const double expected = std::pow(cfg.target_score - predicted, 2);
  CHECK(problem.loss_l2h(design) ==
        doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("forward loss vanishes when the prediction equals the target") {
  bdi::Rng rng(79);
  const KernelSpec spec = KernelSpec::ntk(4, 2.0, 0.1);
  const int n = 8, dim = 4;
  const Eigen::MatrixXd dataset = random_matrix(rng, n, dim);
  Eigen::VectorXd scores = random_vector(rng, n);
  BdiConfig cfg;
  const Eigen::MatrixXd design = random_matrix(rng, 1, dim);

  // Predictions are linear in the scores: rescale them so the design's
  // prediction lands exactly on the target.
  {
    const BdiProblem pilot(spec, dataset, scores, cfg);
    const double predicted = pilot.proxy_predict(design.row(0).transpose());
    REQUIRE(std::abs(predicted) > 1e-12);
    scores *= cfg.target_score / predicted;
  }
  const BdiProblem problem(spec, dataset, scores, cfg);
  CHECK(problem.loss_l2h(design) <= 1e-18);
}

TEST_CASE("forward loss against an independent dense-solve evaluation") {
  bdi::Rng rng(83);
  const KernelSpec spec = KernelSpec::ntk(6, 2.0, 0.1);
  const int n = 15, dim = 7, m = 2;
  const Eigen::MatrixXd dataset = random_matrix(rng, n, dim);
  const Eigen::VectorXd scores = random_vector(rng, n);
  BdiConfig cfg;
  cfg.num_designs = m;
  const BdiProblem problem(spec, dataset, scores, cfg);
  const Eigen::MatrixXd designs = random_matrix(rng, m, dim);

  // Generic LU route, no shared code with the ridge module.
  Eigen::MatrixXd gram(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      gram(i, j) = bdi::kernel_pair(spec, dataset.row(i).transpose(),
                                    dataset.row(j).transpose());
    }
  }
  gram.diagonal().array() += cfg.regularization;
  const Eigen::VectorXd coef = gram.fullPivLu().solve(scores);
  double expected = 0.0;
  for (int p = 0; p < m; ++p) {
    double pred = 0.0;
    for (int j = 0; j < n; ++j) {
      pred += coef(j) * bdi::kernel_pair(spec, designs.row(p).transpose(),
                                         dataset.row(j).transpose());
    }
    expected += std::pow(cfg.target_score - pred, 2) / m;
  }
  CHECK(problem.loss_l2h(designs) ==
        doctest::Approx(expected).epsilon(1e-8));
}

TEST_CASE("loss_total composition and mode flags") {
  bdi::Rng rng(89);
  const KernelSpec spec = KernelSpec::ntk(3, 2.0, 0.1);
  const int n = 10, dim = 5;
  const Eigen::MatrixXd dataset = random_matrix(rng, n, dim);
  const Eigen::VectorXd scores = random_vector(rng, n);
  const Eigen::MatrixXd design = random_matrix(rng, 1, dim);

  BdiConfig full;
  const BdiProblem problem(spec, dataset, scores, full);
  const bdi::LossBreakdown both = problem.loss_total(design, 3);
  CHECK(both.step == 3);
  CHECK(both.l2h >= 0.0);
  CHECK(both.h2l >= 0.0);
  CHECK(both.total ==
        doctest::Approx(0.5 * (both.l2h + both.h2l)).epsilon(1e-14));

  BdiConfig forward = full;
  forward.mode = Mode::ForwardOnly;
  const BdiProblem fwd(spec, dataset, scores, forward);
  const bdi::LossBreakdown f = fwd.loss_total(design);
  CHECK(f.h2l == 0.0);
  CHECK(f.total == 0.5 * f.l2h);
  CHECK(f.l2h == both.l2h);

  BdiConfig backward = full;
  backward.mode = Mode::BackwardOnly;
  const BdiProblem bwd(spec, dataset, scores, backward);
  const bdi::LossBreakdown b = bwd.loss_total(design);
  CHECK(b.l2h == 0.0);
  CHECK(b.total == 0.5 * b.h2l);
  CHECK(b.h2l == both.h2l);

  // Doubling lambda moves the total by exactly half the backward loss.
  BdiConfig heavier = full;
  heavier.backward_weight = 2.0;
  const BdiProblem heavy(spec, dataset, scores, heavier);
  const bdi::LossBreakdown h = heavy.loss_total(design);
  CHECK(h.total - both.total ==
        doctest::Approx(0.5 * both.h2l).epsilon(1e-12));
}

TEST_CASE("full mode with zero lambda is bitwise forward-only") {
  bdi::Rng rng(97);
  const KernelSpec spec = KernelSpec::ntk(6, 2.0, 0.1);
  const Eigen::MatrixXd dataset = random_matrix(rng, 9, 4);
  const Eigen::VectorXd scores = random_vector(rng, 9);
  const Eigen::MatrixXd design = random_matrix(rng, 2, 4);

  BdiConfig zero_lambda;
  zero_lambda.num_designs = 2;
  zero_lambda.backward_weight = 0.0;
  BdiConfig forward_only = zero_lambda;
  forward_only.backward_weight = 1.0;
  forward_only.mode = Mode::ForwardOnly;

  const BdiProblem a(spec, dataset, scores, zero_lambda);
  const BdiProblem b(spec, dataset, scores, forward_only);
  const bdi::LossBreakdown la = a.loss_total(design);
  const bdi::LossBreakdown lb = b.loss_total(design);
  CHECK(la.l2h == lb.l2h);
  CHECK(la.h2l == lb.h2l);
  CHECK(la.total == lb.total);

  const Eigen::MatrixXd ga = a.grad_total(design);
  const Eigen::MatrixXd gb = b.grad_total(design);
  CHECK((ga.array() == gb.array()).all());
}

TEST_CASE("analytic gradient matches central finite differences") {
  bdi::Rng rng(101);
  const KernelSpec spec = KernelSpec::ntk(6, 2.0, 0.1);
  for (int m : {1, 3}) {
    for (int trial = 0; trial < 6; ++trial) {
      const int n = 5 + static_cast<int>(rng.integer(10));
      const int dim = 10;
      const Eigen::MatrixXd dataset = random_matrix(rng, n, dim);
      const Eigen::VectorXd scores = random_vector(rng, n);
      BdiConfig cfg;
      cfg.num_designs = m;
      cfg.weight_param = 0.05;
      const BdiProblem problem(spec, dataset, scores, cfg);
      const Eigen::MatrixXd designs = random_matrix(rng, m, dim);

      const Eigen::MatrixXd analytic = problem.grad_total_analytic(designs);
      const Eigen::MatrixXd fd = problem.grad_total_fd(designs);
      for (int p = 0; p < m; ++p) {
        for (int k = 0; k < dim; ++k) {
          const double f = fd(p, k);
          const double a = analytic(p, k);
          if (std::abs(f) < 1e-8) {
            CHECK(std::abs(a - f) <= 1e-6);
          } else {
            CHECK(std::abs(a - f) / std::abs(f) <= 1e-3);
          }
        }
      }
    }
  }
}

TEST_CASE("non-learnable rows receive zero gradient") {
  bdi::Rng rng(103);
  const KernelSpec spec = KernelSpec::ntk(3, 2.0, 0.1);
  const Eigen::MatrixXd dataset = random_matrix(rng, 8, 5);
  const Eigen::VectorXd scores = random_vector(rng, 8);
  BdiConfig cfg;
  cfg.num_designs = 3;
  cfg.multi_mode = bdi::MultiDesignMode::OneLearnable;
  const BdiProblem problem(spec, dataset, scores, cfg);
  const Eigen::MatrixXd designs = random_matrix(rng, 3, 5);

  const std::vector<bool> mask{true, false, false};
  const Eigen::MatrixXd grad = problem.grad_total(designs, mask);
  CHECK(grad.row(1).cwiseAbs().maxCoeff() == 0.0);
  CHECK(grad.row(2).cwiseAbs().maxCoeff() == 0.0);
  CHECK(grad.row(0).cwiseAbs().maxCoeff() > 0.0);

  const Eigen::MatrixXd fd = problem.grad_total_fd(designs, mask);
  CHECK(fd.row(1).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gradient is stationary at a one-dimensional forward minimum") {
  // RBF proxy: predictions decay away from the data, so the forward loss has
  // an interior minimum wherever the prediction peaks.
  const KernelSpec spec = KernelSpec::rbf(0.5);
  Eigen::MatrixXd dataset(3, 1);
  dataset << -1.0, 0.2, 1.4;
  Eigen::VectorXd scores(3);
  scores << -0.5, 1.0, 0.3;
  BdiConfig cfg;
  cfg.mode = Mode::ForwardOnly;
  const BdiProblem problem(spec, dataset, scores, cfg);

  auto value = [&](double x) {
    Eigen::MatrixXd d(1, 1);
    d << x;
    return problem.loss_total(d).total;
  };
  // Coarse scan for a bracketed interior minimum, then ternary refinement.
  double best_x = 0.0, best_v = std::numeric_limits<double>::infinity();
  for (double x = -3.0; x <= 3.0; x += 1e-3) {
    const double v = value(x);
    if (v < best_v) {
      best_v = v;
      best_x = x;
    }
  }
  double lo = best_x - 2e-3, hi = best_x + 2e-3;
  for (int it = 0; it < 200; ++it) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (value(m1) < value(m2)) hi = m2; else lo = m1;
  }
  Eigen::MatrixXd at_min(1, 1);
  at_min << 0.5 * (lo + hi);
  CHECK(std::abs(problem.grad_total(at_min)(0, 0)) <= 1e-6);
}
