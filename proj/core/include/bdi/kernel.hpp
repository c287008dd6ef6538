#ifndef BDI_KERNEL_HPP
#define BDI_KERNEL_HPP

#include <Eigen/Core>
#include <string>

namespace bdi {

enum class KernelKind { Ntk, Rbf };

// Architecture of the infinite-width kernel: a fully-connected ReLU network
// with `depth` hidden layers, or an RBF kernel exp(-gamma * |x - z|^2) as a
// drop-in replacement.
struct KernelSpec {
  KernelKind kind = KernelKind::Ntk;
  int depth = 6;                  // hidden ReLU layers (NTK only)
  double weight_variance = 2.0;   // sigma_w^2 (NTK only)
  double bias_variance = 0.1;     // sigma_b^2 (NTK only)
  double bandwidth = 1.0;         // gamma (RBF only)

  // Throws std::invalid_argument on an out-of-range field.
  void validate() const;

  static KernelSpec ntk(int depth = 6, double weight_variance = 2.0,
                        double bias_variance = 0.1);
  static KernelSpec rbf(double bandwidth);
};

// Dense matrix of pairwise kernel values, with labels recording which design
// sets produced it.
struct KernelMatrix {
  Eigen::MatrixXd values;
  std::string left_id;
  std::string right_id;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
};

// Kernel value for a single pair of designs. For the NTK this evaluates the
// depth recursion over the ReLU arc-cosine expectations; the inputs are used
// as-is (no internal normalization).
double kernel_pair(const KernelSpec& spec,
                   const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& z);

// Pairwise kernel matrix between the rows of `left` (n x D) and `right`
// (m x D). Entry (i, j) is bitwise equal to kernel_pair(spec, left_i, right_j).
KernelMatrix gram(const KernelSpec& spec,
                  const Eigen::Ref<const Eigen::MatrixXd>& left,
                  const Eigen::Ref<const Eigen::MatrixXd>& right,
                  std::string left_id = {}, std::string right_id = {});

// Partial derivative of kernel_pair(spec, x, z) with respect to z.
// At parallel inputs the arc-cosine derivative uses its analytic limit
// instead of the 0/0 form.
Eigen::VectorXd kernel_grad_second(const KernelSpec& spec,
                                   const Eigen::Ref<const Eigen::VectorXd>& x,
                                   const Eigen::Ref<const Eigen::VectorXd>& z);

}  // namespace bdi

#endif  // BDI_KERNEL_HPP
