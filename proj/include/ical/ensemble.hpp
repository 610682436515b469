#pragma once

// Bootstrap ensemble of linear softmax classifiers. Member outputs stand in for
// MC-dropout forward passes: member t supplies sample t of each point.

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ical/prediction_tensor.hpp"

namespace ical {

struct Dataset {
  Eigen::MatrixXd features;          // n x dim
  std::vector<Eigen::Index> labels;  // n, values in [0, classes)
  Eigen::Index classes = 0;

  Eigen::Index size() const { return features.rows(); }
  Dataset subset(std::span<const Eigen::Index> rows) const;
};

/// CSV with a header row; feature columns followed by an integer label column.
/// The class count is 1 + the largest label seen unless `classes` is larger.
Dataset load_dataset_csv(const std::string& path, Eigen::Index classes = 0);

/// Isotropic Gaussian blobs with class centers on a circle of `radius`.
Dataset gaussian_blobs(Eigen::Index classes, Eigen::Index per_class, double radius, double spread,
                       std::uint64_t seed);

struct LinearSoftmax {
  Eigen::MatrixXd weights;  // c x dim
  Eigen::VectorXd bias;     // c

  Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& x) const;
};

struct EnsembleHyper {
  double learning_rate = 0.5;
  int epochs = 200;
  double bootstrap_fraction = 1.0;
  double weight_decay = 1e-3;
  double init_scale = 0.1;
};

struct EnsembleModel {
  std::vector<LinearSoftmax> members;
  EnsembleHyper hyper;
};

/// Full-batch gradient descent on softmax cross-entropy, one bootstrap resample
/// and one random initialization per member. Member seeds derive from `rng_seed`.
EnsembleModel ensemble_train(const Dataset& data, int n_members, const EnsembleHyper& hyper, std::uint64_t rng_seed);

/// n x members x c tensor; sample t is member t's softmax output.
PredictionTensor ensemble_predict_samples(const EnsembleModel& model, const Eigen::MatrixXd& inputs);

}  // namespace ical
