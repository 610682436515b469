#include "ical/discrete_model.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "ical/entropy.hpp"
#include "ical/errors.hpp"

namespace ical {

DiscreteHypothesisModel::DiscreteHypothesisModel(std::vector<Eigen::MatrixXd> likelihoods, Eigen::VectorXd posterior)
    : likelihoods_(std::move(likelihoods)), posterior_(std::move(posterior)) {
  if (likelihoods_.empty()) throw InvalidInput("discrete model: no points");
  const Eigen::Index k = posterior_.size();
  const Eigen::Index c = likelihoods_.front().cols();
  if (k < 1 || c < 1) throw InvalidInput("discrete model: empty hypothesis or class set");
  for (const auto& lik : likelihoods_) {
    if (lik.rows() != k || lik.cols() != c) throw InvalidInput("discrete model: likelihood shape mismatch");
    if ((lik.array() < 0.0).any() || !lik.allFinite()) throw InvalidInput("discrete model: bad likelihood entry");
    if (((lik.rowwise().sum().array() - 1.0).abs() > 1e-9).any())
      throw InvalidInput("discrete model: likelihood row does not sum to 1");
  }
  if ((posterior_.array() < 0.0).any() || std::abs(posterior_.sum() - 1.0) > 1e-12)
    throw InvalidInput("discrete model: posterior must be a distribution");
}

Eigen::RowVectorXd DiscreteHypothesisModel::marginal(Eigen::Index point) const {
  return posterior_.transpose() * likelihood(point);
}

PredictionTensor DiscreteHypothesisModel::marginal_tensor(std::span<const Eigen::Index> points) const {
  PredictionTensor out(static_cast<Eigen::Index>(points.size()), 1, classes());
  for (std::size_t i = 0; i < points.size(); ++i) out.point(static_cast<Eigen::Index>(i)) = marginal(points[i]);
  return out;
}

DiscreteHypothesisModel example1_model(Eigen::Index n_points) {
  if (n_points < 2) throw InvalidInput("example1_model: need at least 2 points");
  constexpr Eigen::Index kHyp = 10;
  constexpr Eigen::Index kClasses = 4;

  Eigen::MatrixXd x1 = Eigen::MatrixXd::Zero(kHyp, kClasses);
  for (Eigen::Index k = 0; k < kHyp; ++k) x1(k, k < 3 ? k : 3) = 1.0;

  Eigen::MatrixXd rest = Eigen::MatrixXd::Zero(kHyp, kClasses);
  for (Eigen::Index k = 0; k < kHyp; ++k) rest(k, k < 9 ? 0 : 1) = 1.0;

  std::vector<Eigen::MatrixXd> liks(static_cast<std::size_t>(n_points), rest);
  liks.front() = x1;
  return {std::move(liks), Eigen::VectorXd::Constant(kHyp, 1.0 / kHyp)};
}

DiscreteHypothesisModel random_task_model(const RandomTaskSpec& spec, std::uint64_t seed) {
  if (spec.hypotheses < 1 || spec.points < 1 || spec.classes < 2 || spec.dim < 2 || !(spec.jitter >= 0.0))
    throw InvalidInput("random_task_model: bad task shape");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);

  // Isotropic features plus a constant bias column.
  Eigen::MatrixXd features(spec.points, spec.dim + 1);
  for (Eigen::Index i = 0; i < spec.points; ++i) {
    for (Eigen::Index j = 0; j < spec.dim; ++j) features(i, j) = normal(rng);
    features(i, spec.dim) = 1.0;
  }
  // Class weight vectors sit evenly spaced on a circle in the first two feature
  // coordinates, rotated by a random angle per hypothesis. Isotropic features
  // then give every class the same share of points in expectation; the jitter
  // breaks the one-parameter symmetry.
  const double step = 2.0 * std::numbers::pi / static_cast<double>(spec.classes);
  std::vector<Eigen::MatrixXd> weights;
  for (Eigen::Index k = 0; k < spec.hypotheses; ++k) {
    const double theta = angle(rng);
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(spec.classes, spec.dim + 1);
    for (Eigen::Index c = 0; c < spec.classes; ++c) {
      w(c, 0) = std::cos(theta + step * static_cast<double>(c));
      w(c, 1) = std::sin(theta + step * static_cast<double>(c));
      for (Eigen::Index j = 0; j <= spec.dim; ++j) w(c, j) += spec.jitter * normal(rng);
    }
    weights.push_back(std::move(w));
  }

  std::vector<Eigen::MatrixXd> liks;
  liks.reserve(static_cast<std::size_t>(spec.points));
  for (Eigen::Index i = 0; i < spec.points; ++i) {
    Eigen::MatrixXd lik(spec.hypotheses, spec.classes);
    for (Eigen::Index k = 0; k < spec.hypotheses; ++k) {
      Eigen::VectorXd logits = spec.temperature * (weights[k] * features.row(i).transpose());
      logits.array() -= logits.maxCoeff();
      Eigen::VectorXd p = logits.array().exp();
      lik.row(k) = (p / p.sum()).transpose();
    }
    liks.push_back(std::move(lik));
  }
  return {std::move(liks), Eigen::VectorXd::Constant(spec.hypotheses, 1.0 / spec.hypotheses)};
}

DiscreteHypothesisModel posterior_update(const DiscreteHypothesisModel& model, Eigen::Index point,
                                         Eigen::Index label) {
  if (point < 0 || point >= model.points()) throw InvalidInput("posterior_update: point out of range");
  if (label < 0 || label >= model.classes()) throw InvalidInput("posterior_update: label out of range");
  Eigen::VectorXd w = model.posterior().cwiseProduct(model.likelihood(point).col(label));
  const double z = w.sum();
  if (!(z > 0.0))
    throw InconsistentEvidence("label " + std::to_string(label) + " at point " + std::to_string(point) +
                               " has zero probability under the posterior");
  w /= z;
  std::vector<Eigen::MatrixXd> liks;
  liks.reserve(static_cast<std::size_t>(model.points()));
  for (Eigen::Index i = 0; i < model.points(); ++i) liks.push_back(model.likelihood(i));
  return {std::move(liks), std::move(w)};
}

PredictionTensor sample_predictions(const DiscreteHypothesisModel& model, std::span<const Eigen::Index> points,
                                    Eigen::Index m, std::uint64_t rng_seed) {
  if (m < 1) throw InvalidInput("sample_predictions: m must be >= 1");
  std::mt19937_64 rng(rng_seed);
  const Eigen::VectorXd& w = model.posterior();
  std::discrete_distribution<Eigen::Index> pick(w.data(), w.data() + w.size());
  std::vector<Eigen::Index> drawn(static_cast<std::size_t>(m));
  for (auto& k : drawn) k = pick(rng);

  PredictionTensor out(static_cast<Eigen::Index>(points.size()), m, model.classes());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Eigen::MatrixXd& lik = model.likelihood(points[i]);
    auto block = out.point(static_cast<Eigen::Index>(i));
    for (Eigen::Index t = 0; t < m; ++t) block.row(t) = lik.row(drawn[static_cast<std::size_t>(t)]);
  }
  return out;
}

ExactStats exact_stats(const DiscreteHypothesisModel& model, Eigen::Index point) {
  const Eigen::MatrixXd& lik = model.likelihood(point);
  const Eigen::VectorXd& w = model.posterior();
  double conditional = 0.0;
  for (Eigen::Index k = 0; k < w.size(); ++k)
    if (w(k) > 0.0) conditional += w(k) * entropy(lik.row(k));
  const double h = entropy(model.marginal(point));
  return {h - conditional, h};
}

double posterior_entropy_given(const DiscreteHypothesisModel& model, Eigen::Index acquire, Eigen::Index label,
                               std::span<const Eigen::Index> eval) {
  if (eval.empty()) return 0.0;
  const DiscreteHypothesisModel updated = posterior_update(model, acquire, label);
  double total = 0.0;
  for (Eigen::Index e : eval) total += entropy(updated.marginal(e));
  return total / static_cast<double>(eval.size());
}

double expected_posterior_entropy(const DiscreteHypothesisModel& model, Eigen::Index acquire,
                                  std::span<const Eigen::Index> eval) {
  const Eigen::RowVectorXd p = model.marginal(acquire);
  double expected = 0.0;
  for (Eigen::Index y = 0; y < p.size(); ++y)
    if (p(y) > 0.0) expected += p(y) * posterior_entropy_given(model, acquire, y, eval);
  return expected;
}

}  // namespace ical
