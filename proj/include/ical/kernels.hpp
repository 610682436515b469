#pragma once

// Rational-quadratic mixture kernels over Monte Carlo prediction samples.
//
// Each pool point carries m sampled predictive distributions (rows of an
// m x c matrix). The kernel matrix over those rows is the unit consumed by the
// dependence statistics in dhsic.hpp.

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <span>
#include <vector>

#include "ical/errors.hpp"

namespace ical {

template <typename Scalar>
using KernelMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using KernelMatrixd = KernelMatrix<double>;

enum class KernelFamily { RationalQuadraticMixture };

struct KernelSpec {
  KernelFamily family = KernelFamily::RationalQuadraticMixture;
  // Mixture exponents `a` of (1 + r^2 / (2a))^(-a); unit amplitude and length scale.
  std::vector<double> scales{0.2, 0.5, 1.0, 2.0, 5.0};

  void validate() const {
    if (scales.empty()) throw InvalidInput("kernel spec: scales must be non-empty");
    for (double a : scales)
      if (!(a > 0.0) || !std::isfinite(a)) throw InvalidInput("kernel spec: scales must be finite and > 0");
  }
};

/// Mixture value for a squared distance.
template <typename Scalar>
Scalar rq_mixture(Scalar sq_dist, const KernelSpec& spec) {
  Scalar v(0);
  for (double a : spec.scales) {
    const Scalar as = static_cast<Scalar>(a);
    v += std::pow(Scalar(1) + sq_dist / (Scalar(2) * as), -as);
  }
  return v;
}

/// Kernel matrix over the rows of `samples` (m x c). Only the upper triangle is
/// evaluated and mirrored, so the result is exactly symmetric and its diagonal
/// is exactly |scales|.
template <typename Derived>
KernelMatrix<typename Derived::Scalar> kernel_matrix(const Eigen::MatrixBase<Derived>& samples,
                                                     const KernelSpec& spec = {}) {
  using Scalar = typename Derived::Scalar;
  spec.validate();
  const Eigen::Index m = samples.rows();
  if (m < 2) throw InvalidInput("kernel_matrix: need at least 2 samples");
  if (!samples.allFinite()) throw InvalidInput("kernel_matrix: non-finite sample row");

  KernelMatrix<Scalar> k(m, m);
  const Scalar diag = rq_mixture<Scalar>(Scalar(0), spec);
  for (Eigen::Index i = 0; i < m; ++i) {
    k(i, i) = diag;
    for (Eigen::Index j = i + 1; j < m; ++j) {
      const Scalar d2 = (samples.row(i) - samples.row(j)).squaredNorm();
      k(i, j) = k(j, i) = rq_mixture<Scalar>(d2, spec);
    }
  }
  return k;
}

namespace detail {
template <typename Scalar>
void check_same_size(std::span<const KernelMatrix<Scalar>> ks, const char* who) {
  if (ks.empty()) throw InvalidInput(std::string(who) + ": empty kernel list");
  const Eigen::Index m = ks.front().rows();
  for (const auto& k : ks)
    if (k.rows() != m || k.cols() != m) throw InvalidInput(std::string(who) + ": kernel sizes differ");
}
}  // namespace detail

template <typename Scalar>
KernelMatrix<Scalar> sum_kernels(std::span<const KernelMatrix<Scalar>> ks) {
  detail::check_same_size(ks, "sum_kernels");
  KernelMatrix<Scalar> out = ks.front();
  for (std::size_t i = 1; i < ks.size(); ++i) out += ks[i];
  return out;
}

template <typename Scalar>
KernelMatrix<Scalar> sum_kernels(const std::vector<KernelMatrix<Scalar>>& ks) {
  return sum_kernels(std::span<const KernelMatrix<Scalar>>(ks));
}

template <typename Scalar>
KernelMatrix<Scalar> mean_kernels(std::span<const KernelMatrix<Scalar>> ks) {
  KernelMatrix<Scalar> out = sum_kernels(ks);
  out /= static_cast<Scalar>(ks.size());
  return out;
}

template <typename Scalar>
KernelMatrix<Scalar> mean_kernels(const std::vector<KernelMatrix<Scalar>>& ks) {
  return mean_kernels(std::span<const KernelMatrix<Scalar>>(ks));
}

/// Smallest and largest eigenvalue of a symmetric matrix.
template <typename Derived>
std::pair<typename Derived::Scalar, typename Derived::Scalar> eigen_range(const Eigen::MatrixBase<Derived>& k) {
  using Mat = KernelMatrix<typename Derived::Scalar>;
  Eigen::SelfAdjointEigenSolver<Mat> es(Mat(k), Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return {ev.minCoeff(), ev.maxCoeff()};
}

/// Checks the kernel-matrix invariants: square, finite, exactly symmetric and
/// PSD up to `rel_tol` times the largest eigenvalue.
template <typename Derived>
bool is_valid_kernel(const Eigen::MatrixBase<Derived>& k, double rel_tol = 1e-8) {
  if (k.rows() != k.cols() || !k.allFinite()) return false;
  if (k != k.transpose()) return false;
  const auto [lo, hi] = eigen_range(k);
  return lo >= -rel_tol * std::max<double>(hi, 0.0);
}

/// Kernels of every point flattened into the columns of one (m*m) x n matrix.
/// Column-major storage makes `bank.col(i)` the vec of point i's kernel.
struct KernelBank {
  Eigen::Index m = 0;
  Eigen::MatrixXd columns;

  Eigen::Index size() const { return columns.cols(); }
  Eigen::Map<const Eigen::MatrixXd> kernel(Eigen::Index i) const {
    return Eigen::Map<const Eigen::MatrixXd>(columns.col(i).data(), m, m);
  }
};

}  // namespace ical
