#pragma once

// Finite hypothesis set with an exact posterior. Each hypothesis assigns every
// point a categorical predictive distribution; observing a label reweights the
// hypotheses by Bayes' rule.

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <vector>

#include "ical/prediction_tensor.hpp"

namespace ical {

class DiscreteHypothesisModel {
 public:
  /// `likelihoods[i]` is K x c: row k is p(y | x_i, w_k).
  DiscreteHypothesisModel(std::vector<Eigen::MatrixXd> likelihoods, Eigen::VectorXd posterior);

  Eigen::Index points() const { return static_cast<Eigen::Index>(likelihoods_.size()); }
  Eigen::Index hypotheses() const { return posterior_.size(); }
  Eigen::Index classes() const { return likelihoods_.front().cols(); }

  const Eigen::MatrixXd& likelihood(Eigen::Index point) const { return likelihoods_.at(point); }
  const Eigen::VectorXd& posterior() const { return posterior_; }

  /// Exact marginal predictive of one point (length c).
  Eigen::RowVectorXd marginal(Eigen::Index point) const;

  /// Exact marginals of several points packed as an n x 1 x c tensor.
  PredictionTensor marginal_tensor(std::span<const Eigen::Index> points) const;

 private:
  std::vector<Eigen::MatrixXd> likelihoods_;
  Eigen::VectorXd posterior_;
};

/// The four-class, ten-hypothesis model with one high-disagreement point x_1
/// followed by `n_points - 1` copies of a point that only hypothesis 10
/// labels differently. Point 0 is x_1. Class indices are zero-based.
DiscreteHypothesisModel example1_model(Eigen::Index n_points);

/// Random task with balanced classes: each hypothesis is a linear softmax
/// classifier whose class directions are a randomly rotated regular star
/// (plus Gaussian `jitter`), over isotropic random point features. Uniform
/// prior. `temperature` scales the logits.
struct RandomTaskSpec {
  Eigen::Index hypotheses = 64;
  Eigen::Index points = 200;
  Eigen::Index classes = 4;
  Eigen::Index dim = 2;
  double temperature = 12.0;
  double jitter = 0.05;
};
DiscreteHypothesisModel random_task_model(const RandomTaskSpec& spec, std::uint64_t seed);

/// Bayes update on observing `label` at `point`. Throws InconsistentEvidence
/// when the label has zero marginal probability.
DiscreteHypothesisModel posterior_update(const DiscreteHypothesisModel& model, Eigen::Index point,
                                         Eigen::Index label);

/// m hypotheses drawn i.i.d. from the posterior; sample t of point i is the
/// drawn hypothesis's likelihood row for that point.
PredictionTensor sample_predictions(const DiscreteHypothesisModel& model, std::span<const Eigen::Index> points,
                                    Eigen::Index m, std::uint64_t rng_seed);

struct ExactStats {
  double mutual_information;
  double predictive_entropy;
};
ExactStats exact_stats(const DiscreteHypothesisModel& model, Eigen::Index point);

/// Mean predictive entropy over `eval` after observing `label` at `acquire`.
double posterior_entropy_given(const DiscreteHypothesisModel& model, Eigen::Index acquire, Eigen::Index label,
                               std::span<const Eigen::Index> eval);

/// Expectation of posterior_entropy_given over the current marginal of the
/// acquired label. Zero-probability labels contribute nothing.
double expected_posterior_entropy(const DiscreteHypothesisModel& model, Eigen::Index acquire,
                                  std::span<const Eigen::Index> eval);

}  // namespace ical
