#include "bdi/ridge.hpp"

#include <cmath>
#include <iostream>

namespace bdi {

namespace {

// Unblocked Cholesky sweep locating the first nonpositive pivot. Only run on
// the error path; the fast path is Eigen's LLT.
Eigen::Index find_failing_pivot(const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = a(j, j) - l.row(j).head(j).squaredNorm();
    if (!(d > 0.0) || !std::isfinite(d)) {
      return j;
    }
    l(j, j) = std::sqrt(d);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      l(i, j) =
          (a(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / l(j, j);
    }
  }
  return -1;
}

}  // namespace

Eigen::VectorXd RidgeSolution::solve(
    const Eigen::Ref<const Eigen::VectorXd>& rhs) const {
  return factor.solve(rhs);
}

RidgeSolution fit(const KernelMatrix& gram_matrix,
                  const Eigen::Ref<const Eigen::VectorXd>& y, double beta) {
  const Eigen::MatrixXd& k = gram_matrix.values;
  if (k.rows() != k.cols()) {
    throw std::invalid_argument("ridge::fit: gram matrix is not square");
  }
  if (k.rows() != y.size()) {
    throw std::invalid_argument("ridge::fit: length of y does not match K");
  }
  if (!(beta > 0.0)) {
    throw std::invalid_argument("ridge::fit: beta must be positive");
  }

  RidgeSolution out;
  out.regularization = beta;

  Eigen::MatrixXd shifted = k;
  shifted.diagonal().array() += beta;
  out.factor.compute(shifted);
  if (out.factor.info() != Eigen::Success) {
    // Near-duplicate rows can push (K + beta I) below numerical PD at tiny
    // beta; escalate once instead of aborting.
    const double escalated_beta = beta * 100.0;
    std::cerr << "[bdi::ridge] warning: factorization of (K + " << beta
              << " I) failed; retrying with beta = " << escalated_beta
              << "\n";
    shifted = k;
    shifted.diagonal().array() += escalated_beta;
    out.factor.compute(shifted);
    if (out.factor.info() != Eigen::Success) {
      const Eigen::Index pivot = find_failing_pivot(shifted);
      throw RidgeError("ridge::fit: (K + beta I) is not positive definite "
                       "(pivot " +
                           std::to_string(pivot) + ")",
                       pivot);
    }
    out.regularization = escalated_beta;
    out.escalated = true;
  }
  out.coefficients = out.factor.solve(y);
  return out;
}

Eigen::VectorXd predict(const KernelMatrix& cross,
                        const RidgeSolution& solution) {
  if (cross.cols() != solution.size()) {
    throw std::invalid_argument(
        "ridge::predict: cross-gram columns do not match coefficients");
  }
  return cross.values * solution.coefficients;
}

}  // namespace bdi
