#pragma once

#include <Eigen/Core>

#include <span>
#include <vector>

#include "ical/prediction_tensor.hpp"

namespace ical {

/// Fraction of points whose mean-predictive argmax (lowest class on ties)
/// equals the label. An empty set scores 1.
double accuracy(const PredictionTensor& preds, std::span<const Eigen::Index> labels);

/// Mean of -ln max(p(y_true), 1e-12) under the mean predictive, in nats.
/// An empty set scores 0.
double nll(const PredictionTensor& preds, std::span<const Eigen::Index> labels);

/// Mean over points of the entropy of the mean predictive; 0 for no points.
double mean_predictive_entropy(const PredictionTensor& preds);

std::vector<Eigen::Index> label_histogram(std::span<const Eigen::Index> labels, Eigen::Index classes);

}  // namespace ical
