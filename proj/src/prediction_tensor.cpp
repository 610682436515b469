#include "ical/prediction_tensor.hpp"

#include <cmath>
#include <string>

#include "ical/errors.hpp"

namespace ical {

PredictionTensor::PredictionTensor(Eigen::Index n_points, Eigen::Index n_samples, Eigen::Index n_classes)
    : n_(n_points), m_(n_samples), values_(Eigen::MatrixXd::Zero(n_points * n_samples, n_classes)) {
  if (n_points < 0 || n_samples < 1 || n_classes < 1) throw InvalidInput("PredictionTensor: bad shape");
}

PredictionTensor::PredictionTensor(Eigen::Index n_points, Eigen::Index n_samples, Eigen::MatrixXd values)
    : n_(n_points), m_(n_samples), values_(std::move(values)) {
  if (n_points < 0 || n_samples < 1 || values_.rows() != n_points * n_samples || values_.cols() < 1)
    throw InvalidInput("PredictionTensor: values do not match shape");
}

Eigen::MatrixXd PredictionTensor::mean_predictive() const {
  Eigen::MatrixXd out(n_, classes());
  for (Eigen::Index i = 0; i < n_; ++i) out.row(i) = point(i).colwise().mean();
  return out;
}

PredictionTensor PredictionTensor::select(std::span<const Eigen::Index> indices) const {
  PredictionTensor out(static_cast<Eigen::Index>(indices.size()), m_, classes());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const Eigen::Index i = indices[k];
    if (i < 0 || i >= n_) throw InvalidInput("PredictionTensor::select: index out of range");
    out.point(static_cast<Eigen::Index>(k)) = point(i);
  }
  return out;
}

void PredictionTensor::validate() const {
  if (!values_.allFinite()) throw InvalidInput("PredictionTensor: non-finite value");
  if ((values_.array() < 0.0).any() || (values_.array() > 1.0).any())
    throw InvalidInput("PredictionTensor: value outside [0, 1]");
  const Eigen::VectorXd sums = values_.rowwise().sum();
  for (Eigen::Index r = 0; r < sums.size(); ++r)
    if (std::abs(sums(r) - 1.0) > 1e-6)
      throw InvalidInput("PredictionTensor: slice " + std::to_string(r) + " does not sum to 1");
}

KernelBank build_kernel_bank(const PredictionTensor& preds, const KernelSpec& spec) {
  const Eigen::Index m = preds.samples();
  KernelBank bank{m, Eigen::MatrixXd(m * m, preds.points())};
  for (Eigen::Index i = 0; i < preds.points(); ++i) {
    const KernelMatrixd k = kernel_matrix(preds.point(i), spec);
    bank.columns.col(i) = Eigen::Map<const Eigen::VectorXd>(k.data(), m * m);
  }
  return bank;
}

}  // namespace ical
