#pragma once

#include <Eigen/Core>

#include <span>
#include <vector>

#include "ical/kernels.hpp"

namespace ical {

/// Monte Carlo predictive samples: n points x m samples x c classes.
/// Stored as an (n*m) x c matrix, point-major, so point i is a contiguous
/// block of m rows.
class PredictionTensor {
 public:
  PredictionTensor() = default;
  PredictionTensor(Eigen::Index n_points, Eigen::Index n_samples, Eigen::Index n_classes);
  PredictionTensor(Eigen::Index n_points, Eigen::Index n_samples, Eigen::MatrixXd values);

  Eigen::Index points() const { return n_; }
  Eigen::Index samples() const { return m_; }
  Eigen::Index classes() const { return values_.cols(); }

  auto point(Eigen::Index i) { return values_.middleRows(i * m_, m_); }
  auto point(Eigen::Index i) const { return values_.middleRows(i * m_, m_); }

  const Eigen::MatrixXd& values() const { return values_; }
  Eigen::MatrixXd& values() { return values_; }

  /// Per-point mean over samples, n x c.
  Eigen::MatrixXd mean_predictive() const;

  PredictionTensor select(std::span<const Eigen::Index> indices) const;

  /// Throws InvalidInput unless every slice lies on the simplex (tol 1e-6).
  void validate() const;

 private:
  Eigen::Index n_ = 0;
  Eigen::Index m_ = 0;
  Eigen::MatrixXd values_;
};

/// Kernel of every point's sample block, flattened column-wise.
KernelBank build_kernel_bank(const PredictionTensor& preds, const KernelSpec& spec = {});

}  // namespace ical
