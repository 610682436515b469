#include "ical/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "ical/entropy.hpp"
#include "ical/errors.hpp"

namespace ical {

namespace {
void check_labels(const PredictionTensor& preds, std::span<const Eigen::Index> labels) {
  if (static_cast<Eigen::Index>(labels.size()) != preds.points())
    throw InvalidInput("metrics: label count does not match point count");
  for (Eigen::Index y : labels)
    if (y < 0 || y >= preds.classes()) throw InvalidInput("metrics: label out of range");
}
}  // namespace

double accuracy(const PredictionTensor& preds, std::span<const Eigen::Index> labels) {
  check_labels(preds, labels);
  if (labels.empty()) return 1.0;
  const Eigen::MatrixXd mean = preds.mean_predictive();
  Eigen::Index correct = 0;
  for (Eigen::Index i = 0; i < mean.rows(); ++i)
    if (argmax_first(mean.row(i)) == labels[static_cast<std::size_t>(i)]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

double nll(const PredictionTensor& preds, std::span<const Eigen::Index> labels) {
  check_labels(preds, labels);
  if (labels.empty()) return 0.0;
  const Eigen::MatrixXd mean = preds.mean_predictive();
  double total = 0.0;
  for (Eigen::Index i = 0; i < mean.rows(); ++i)
    total -= std::log(std::max(mean(i, labels[static_cast<std::size_t>(i)]), 1e-12));
  return total / static_cast<double>(labels.size());
}

double mean_predictive_entropy(const PredictionTensor& preds) {
  if (preds.points() == 0) return 0.0;
  const Eigen::MatrixXd mean = preds.mean_predictive();
  double total = 0.0;
  for (Eigen::Index i = 0; i < mean.rows(); ++i) total += entropy(mean.row(i));
  return total / static_cast<double>(mean.rows());
}

std::vector<Eigen::Index> label_histogram(std::span<const Eigen::Index> labels, Eigen::Index classes) {
  if (classes < 1) throw InvalidInput("label_histogram: need at least one class");
  std::vector<Eigen::Index> counts(static_cast<std::size_t>(classes), 0);
  for (Eigen::Index y : labels) {
    if (y < 0 || y >= classes) throw InvalidInput("label_histogram: label out of range");
    ++counts[static_cast<std::size_t>(y)];
  }
  return counts;
}

}  // namespace ical
