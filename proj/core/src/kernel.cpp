#include "bdi/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace bdi {

namespace {

constexpr double kPi = std::numbers::pi;

// Below this distance from |cos(theta)| = 1 the arc-cosine derivative is
// replaced by its analytic limit (zero); the direct formula divides by
// sin(theta).
constexpr double kParallelTol = 1e-12;

void check_pair(const Eigen::Ref<const Eigen::VectorXd>& x,
                const Eigen::Ref<const Eigen::VectorXd>& z) {
  if (x.size() == 0) {
    throw std::invalid_argument("kernel: empty design vector");
  }
  if (x.size() != z.size()) {
    throw std::invalid_argument("kernel: dimension mismatch (" +
                                std::to_string(x.size()) + " vs " +
                                std::to_string(z.size()) + ")");
  }
  if (!x.allFinite() || !z.allFinite()) {
    throw std::invalid_argument("kernel: non-finite input coordinate");
  }
}

double ntk_pair(const KernelSpec& spec,
                const Eigen::Ref<const Eigen::VectorXd>& x,
                const Eigen::Ref<const Eigen::VectorXd>& z) {
  const double inv_d = 1.0 / static_cast<double>(x.size());
  const double sw = spec.weight_variance;
  const double sb = spec.bias_variance;

  double sxx = sb + sw * x.dot(x) * inv_d;
  double szz = sb + sw * z.dot(z) * inv_d;
  double sxz = sb + sw * x.dot(z) * inv_d;
  double ntk = sxz;

  for (int layer = 0; layer < spec.depth; ++layer) {
    const double norm = std::sqrt(sxx * szz);
    const double u = norm > 0.0 ? std::clamp(sxz / norm, -1.0, 1.0) : 0.0;
    const double theta = std::acos(u);
    const double next_sxz =
        sb + sw / (2.0 * kPi) * norm * (std::sin(theta) + (kPi - theta) * u);
    const double sdot = sw / (2.0 * kPi) * (kPi - theta);

    ntk = next_sxz + sdot * ntk;
    sxz = next_sxz;
    sxx = sb + 0.5 * sw * sxx;
    szz = sb + 0.5 * sw * szz;
  }
  return ntk;
}

double rbf_pair(const KernelSpec& spec,
                const Eigen::Ref<const Eigen::VectorXd>& x,
                const Eigen::Ref<const Eigen::VectorXd>& z) {
  return std::exp(-spec.bandwidth * (x - z).squaredNorm());
}

Eigen::VectorXd ntk_grad_second(const KernelSpec& spec,
                                const Eigen::Ref<const Eigen::VectorXd>& x,
                                const Eigen::Ref<const Eigen::VectorXd>& z) {
  const double inv_d = 1.0 / static_cast<double>(x.size());
  const double sw = spec.weight_variance;
  const double sb = spec.bias_variance;
  const double c = sw / (2.0 * kPi);

  double sxx = sb + sw * x.dot(x) * inv_d;
  double szz = sb + sw * z.dot(z) * inv_d;
  double sxz = sb + sw * x.dot(z) * inv_d;
  double ntk = sxz;

  // Derivatives with respect to z, propagated layer by layer. The x-side
  // diagonal is constant in z so it carries no derivative.
  Eigen::VectorXd g_szz = 2.0 * sw * inv_d * z;
  Eigen::VectorXd g_sxz = sw * inv_d * x;
  Eigen::VectorXd g_ntk = g_sxz;

  for (int layer = 0; layer < spec.depth; ++layer) {
    const double norm = std::sqrt(sxx * szz);
    const double u = norm > 0.0 ? std::clamp(sxz / norm, -1.0, 1.0) : 0.0;
    const double theta = std::acos(u);
    const double j = std::sin(theta) + (kPi - theta) * u;
    const double next_sxz = sb + c * norm * j;
    const double sdot = c * (kPi - theta);

    // d norm = sxx / (2 norm) * d szz; d u = (d sxz - sxz/(2 szz) d szz)/norm.
    Eigen::VectorXd g_norm(x.size());
    Eigen::VectorXd g_u(x.size());
    if (norm > 0.0) {
      g_norm = (sxx / (2.0 * norm)) * g_szz;
      g_u = (g_sxz - (sxz / (2.0 * szz)) * g_szz) / norm;
    } else {
      g_norm.setZero();
      g_u.setZero();
    }

    // d[sin t + (pi - t) cos t] = (pi - t) du: smooth through u.
    Eigen::VectorXd g_next_sxz = c * (j * g_norm + norm * (kPi - theta) * g_u);

    // d sdot = c * du / sin(theta); analytic limit 0 at parallel or
    // antipodal inputs.
    Eigen::VectorXd g_sdot(x.size());
    if (1.0 - std::abs(u) < kParallelTol) {
      g_sdot.setZero();
    } else {
      g_sdot = (c / std::sqrt(1.0 - u * u)) * g_u;
    }

    g_ntk = g_next_sxz + g_sdot * ntk + sdot * g_ntk;
    ntk = next_sxz + sdot * ntk;
    sxz = next_sxz;
    g_sxz = std::move(g_next_sxz);
    sxx = sb + 0.5 * sw * sxx;
    szz = sb + 0.5 * sw * szz;
    g_szz *= 0.5 * sw;
  }
  return g_ntk;
}

Eigen::VectorXd rbf_grad_second(const KernelSpec& spec,
                                const Eigen::Ref<const Eigen::VectorXd>& x,
                                const Eigen::Ref<const Eigen::VectorXd>& z) {
  const double k = std::exp(-spec.bandwidth * (x - z).squaredNorm());
  return 2.0 * spec.bandwidth * k * (x - z);
}

}  // namespace

void KernelSpec::validate() const {
  if (kind == KernelKind::Ntk) {
    if (depth < 0) throw std::invalid_argument("KernelSpec: depth < 0");
    if (!(weight_variance > 0.0))
      throw std::invalid_argument("KernelSpec: weight_variance <= 0");
    if (!(bias_variance >= 0.0))
      throw std::invalid_argument("KernelSpec: bias_variance < 0");
  } else {
    if (!(bandwidth > 0.0))
      throw std::invalid_argument("KernelSpec: bandwidth <= 0");
  }
}

KernelSpec KernelSpec::ntk(int depth, double weight_variance,
                           double bias_variance) {
  KernelSpec spec;
  spec.kind = KernelKind::Ntk;
  spec.depth = depth;
  spec.weight_variance = weight_variance;
  spec.bias_variance = bias_variance;
  return spec;
}

KernelSpec KernelSpec::rbf(double bandwidth) {
  KernelSpec spec;
  spec.kind = KernelKind::Rbf;
  spec.bandwidth = bandwidth;
  return spec;
}

double kernel_pair(const KernelSpec& spec,
                   const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& z) {
  spec.validate();
  check_pair(x, z);
  return spec.kind == KernelKind::Ntk ? ntk_pair(spec, x, z)
                                      : rbf_pair(spec, x, z);
}

KernelMatrix gram(const KernelSpec& spec,
                  const Eigen::Ref<const Eigen::MatrixXd>& left,
                  const Eigen::Ref<const Eigen::MatrixXd>& right,
                  std::string left_id, std::string right_id) {
  spec.validate();
  if (left.rows() == 0 || right.rows() == 0) {
    throw std::invalid_argument("gram: empty design set");
  }
  if (left.cols() != right.cols()) {
    throw std::invalid_argument("gram: dimension mismatch");
  }
  KernelMatrix out;
  out.left_id = std::move(left_id);
  out.right_id = std::move(right_id);
  out.values.resize(left.rows(), right.rows());
  for (Eigen::Index i = 0; i < left.rows(); ++i) {
    for (Eigen::Index j = 0; j < right.rows(); ++j) {
      out.values(i, j) =
          kernel_pair(spec, left.row(i).transpose(), right.row(j).transpose());
    }
  }
  return out;
}

Eigen::VectorXd kernel_grad_second(const KernelSpec& spec,
                                   const Eigen::Ref<const Eigen::VectorXd>& x,
                                   const Eigen::Ref<const Eigen::VectorXd>& z) {
  spec.validate();
  check_pair(x, z);
  return spec.kind == KernelKind::Ntk ? ntk_grad_second(spec, x, z)
                                      : rbf_grad_second(spec, x, z);
}

}  // namespace bdi
