#include "ical/ensemble.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "ical/errors.hpp"
#include "ical/seeding.hpp"

namespace ical {

Dataset Dataset::subset(std::span<const Eigen::Index> rows) const {
  Dataset out;
  out.classes = classes;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
  out.labels.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.features.row(static_cast<Eigen::Index>(i)) = features.row(rows[i]);
    out.labels.push_back(labels.at(static_cast<std::size_t>(rows[i])));
  }
  return out;
}

Dataset load_dataset_csv(const std::string& path, Eigen::Index classes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open dataset " + path, 0);
  std::string line;
  std::uint64_t offset = 0;
  if (!std::getline(in, line)) throw FormatError("dataset " + path + " is empty", 0);
  offset += line.size() + 1;

  std::vector<std::vector<double>> rows;
  std::vector<Eigen::Index> labels;
  while (std::getline(in, line)) {
    const std::uint64_t row_offset = offset;
    offset += line.size() + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> values;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(cell, &used));
        if (used != cell.size() && cell.find_first_not_of(" \t", used) != std::string::npos)
          throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw FormatError("dataset " + path + ": bad number '" + cell + "'", row_offset);
      }
      if (!std::isfinite(values.back())) throw FormatError("dataset " + path + ": non-finite value", row_offset);
    }
    if (values.size() < 2) throw FormatError("dataset " + path + ": need features and a label", row_offset);
    if (!rows.empty() && values.size() != rows.front().size() + 1)
      throw FormatError("dataset " + path + ": ragged row", row_offset);
    const double label = values.back();
    if (label < 0 || label != std::floor(label)) throw FormatError("dataset " + path + ": bad label", row_offset);
    labels.push_back(static_cast<Eigen::Index>(label));
    values.pop_back();
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw FormatError("dataset " + path + " has no rows", offset);

  Dataset data;
  data.features.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      data.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  data.labels = std::move(labels);
  Eigen::Index max_label = 0;
  for (Eigen::Index l : data.labels) max_label = std::max(max_label, l);
  data.classes = std::max(classes, max_label + 1);
  return data;
}

Dataset gaussian_blobs(Eigen::Index classes, Eigen::Index per_class, double radius, double spread,
                       std::uint64_t seed) {
  if (classes < 2 || per_class < 1) throw InvalidInput("gaussian_blobs: need >= 2 classes and >= 1 point each");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, spread);
  Dataset data;
  data.classes = classes;
  data.features.resize(classes * per_class, 2);
  // Interleave classes so any prefix of the rows is roughly balanced.
  for (Eigen::Index i = 0; i < per_class; ++i) {
    for (Eigen::Index c = 0; c < classes; ++c) {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(c) / static_cast<double>(classes);
      const Eigen::Index row = i * classes + c;
      data.features(row, 0) = radius * std::cos(angle) + normal(rng);
      data.features(row, 1) = radius * std::sin(angle) + normal(rng);
      data.labels.push_back(c);
    }
  }
  return data;
}

Eigen::MatrixXd LinearSoftmax::predict_proba(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd logits = x * weights.transpose();
  logits.rowwise() += bias.transpose();
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    logits.row(i).array() -= logits.row(i).maxCoeff();
    logits.row(i) = logits.row(i).array().exp();
    logits.row(i) /= logits.row(i).sum();
  }
  return logits;
}

namespace {

LinearSoftmax train_member(const Dataset& data, const EnsembleHyper& hyper, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Eigen::Index n = data.size();
  const Eigen::Index dim = data.features.cols();
  const Eigen::Index c = data.classes;

  const auto draws = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::lround(hyper.bootstrap_fraction * n)));
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  Eigen::MatrixXd x(draws, dim);
  Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(draws, c);
  for (Eigen::Index i = 0; i < draws; ++i) {
    const Eigen::Index r = pick(rng);
    x.row(i) = data.features.row(r);
    onehot(i, data.labels[static_cast<std::size_t>(r)]) = 1.0;
  }

  std::normal_distribution<double> init(0.0, hyper.init_scale);
  LinearSoftmax model{Eigen::MatrixXd(c, dim), Eigen::VectorXd(c)};
  for (Eigen::Index r = 0; r < c; ++r) {
    for (Eigen::Index j = 0; j < dim; ++j) model.weights(r, j) = init(rng);
    model.bias(r) = init(rng);
  }

  const double scale = 1.0 / static_cast<double>(draws);
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    const Eigen::MatrixXd residual = model.predict_proba(x) - onehot;  // d loss / d logits
    const Eigen::MatrixXd grad_w = scale * residual.transpose() * x + hyper.weight_decay * model.weights;
    const Eigen::VectorXd grad_b = scale * residual.colwise().sum().transpose();
    model.weights -= hyper.learning_rate * grad_w;
    model.bias -= hyper.learning_rate * grad_b;
  }
  return model;
}

}  // namespace

EnsembleModel ensemble_train(const Dataset& data, int n_members, const EnsembleHyper& hyper, std::uint64_t rng_seed) {
  if (n_members < 2) throw InvalidInput("ensemble_train: need at least 2 members");
  if (data.size() == 0) throw InvalidInput("ensemble_train: empty dataset");
  if (static_cast<Eigen::Index>(data.labels.size()) != data.size())
    throw InvalidInput("ensemble_train: label count does not match feature rows");
  if (!data.features.allFinite()) throw InvalidInput("ensemble_train: non-finite feature");
  std::set<Eigen::Index> seen(data.labels.begin(), data.labels.end());
  if (seen.size() < 2) throw InvalidInput("ensemble_train: need at least 2 classes represented");
  if (*seen.rbegin() >= data.classes) throw InvalidInput("ensemble_train: label exceeds class count");
  if (hyper.epochs < 0 || !(hyper.bootstrap_fraction > 0.0) || !(hyper.learning_rate > 0.0))
    throw InvalidInput("ensemble_train: bad hyperparameters");

  EnsembleModel model{{}, hyper};
  model.members.reserve(static_cast<std::size_t>(n_members));
  for (int t = 0; t < n_members; ++t)
    model.members.push_back(train_member(data, hyper, derive_seed(rng_seed, static_cast<std::uint64_t>(t))));
  return model;
}

PredictionTensor ensemble_predict_samples(const EnsembleModel& model, const Eigen::MatrixXd& inputs) {
  if (model.members.empty()) throw InvalidInput("ensemble_predict_samples: empty ensemble");
  const auto m = static_cast<Eigen::Index>(model.members.size());
  const Eigen::Index c = model.members.front().bias.size();
  PredictionTensor out(inputs.rows(), m, c);
  for (Eigen::Index t = 0; t < m; ++t) {
    const Eigen::MatrixXd p = model.members[static_cast<std::size_t>(t)].predict_proba(inputs);
    for (Eigen::Index i = 0; i < inputs.rows(); ++i) out.point(i).row(t) = p.row(i);
  }
  return out;
}

}  // namespace ical
