#ifndef BDI_RIDGE_HPP
#define BDI_RIDGE_HPP

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <stdexcept>
#include <string>

#include "bdi/kernel.hpp"

namespace bdi {

// Symmetric positive-definite factorization of (K + beta I) failed even
// after the beta escalation retry.
class RidgeError : public std::runtime_error {
 public:
  RidgeError(const std::string& what, Eigen::Index pivot)
      : std::runtime_error(what), pivot_(pivot) {}
  // First pivot of the Cholesky sweep that was not strictly positive.
  Eigen::Index pivot() const { return pivot_; }

 private:
  Eigen::Index pivot_;
};

// Closed-form kernel ridge regression coefficients (K + beta I)^{-1} y with
// the Cholesky factor cached for further solves. Immutable once built.
struct RidgeSolution {
  Eigen::VectorXd coefficients;
  double regularization = 1e-6;  // beta actually applied (may be escalated)
  bool escalated = false;
  Eigen::LLT<Eigen::MatrixXd> factor;  // factorization of (K + beta I)

  Eigen::Index size() const { return coefficients.size(); }

  // (K + beta I)^{-1} rhs using the cached factor.
  Eigen::VectorXd solve(const Eigen::Ref<const Eigen::VectorXd>& rhs) const;
};

// Solves (K + beta I) c = y. If the Cholesky factorization fails at
// beta (near-duplicate designs can make K numerically singular), retries
// once with beta * 100 and a warning on stderr; throws RidgeError with the
// offending pivot index if the retry also fails.
RidgeSolution fit(const KernelMatrix& gram_matrix,
                  const Eigen::Ref<const Eigen::VectorXd>& y, double beta);

// K_cross (m x n) times the coefficient vector: ridge predictions for the
// m left-hand designs of the cross-Gram.
Eigen::VectorXd predict(const KernelMatrix& cross,
                        const RidgeSolution& solution);

}  // namespace bdi

#endif  // BDI_RIDGE_HPP
