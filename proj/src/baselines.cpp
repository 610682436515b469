#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "ical/acquisition.hpp"
#include "ical/entropy.hpp"
#include "ical/errors.hpp"

namespace ical {

using Eigen::Index;

std::string_view policy_name(Policy p) {
  switch (p) {
    case Policy::Ical: return "ical";
    case Policy::IcalPointwise: return "ical-pointwise";
    case Policy::Random: return "random";
    case Policy::MaxEnt: return "maxent";
    case Policy::Bald: return "bald";
    case Policy::BatchBald: return "batchbald";
    case Policy::Fass: return "fass";
  }
  return "unknown";
}

std::optional<Policy> parse_policy(std::string_view name) {
  for (Policy p : {Policy::Ical, Policy::IcalPointwise, Policy::Random, Policy::MaxEnt, Policy::Bald,
                   Policy::BatchBald, Policy::Fass})
    if (policy_name(p) == name) return p;
  return std::nullopt;
}

void AcquisitionConfig::validate() const {
  if (batch_size < 1) throw InvalidInput("acquisition: batch size must be >= 1");
  if (minibatch < 1 || minibatch > batch_size) throw InvalidInput("acquisition: need 1 <= L <= B");
  if (subsample < 1) throw InvalidInput("acquisition: subsample size must be >= 1");
  if (!(beta >= 1.0)) throw InvalidInput("acquisition: beta must be >= 1");
  if (mc_samples < 1) throw InvalidInput("acquisition: mc_samples must be >= 1");
  if (batchbald_exact_limit < 1 || batchbald_samples < 1) throw InvalidInput("acquisition: bad BatchBALD limits");
  kernel.validate();
}

std::vector<Index> rank_descending(const Eigen::VectorXd& scores) {
  std::vector<Index> order(static_cast<std::size_t>(scores.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return scores(a) > scores(b); });
  return order;
}

namespace {

void check_pool(Index pool_size, const AcquisitionConfig& cfg, const char* who) {
  cfg.validate();
  if (pool_size < cfg.batch_size) throw InvalidInput(std::string(who) + ": pool smaller than batch size");
}

AcquisitionBatch top_b(const Eigen::VectorXd& scores, Index b) {
  AcquisitionBatch out;
  const auto order = rank_descending(scores);
  for (Index j = 0; j < b; ++j) {
    out.indices.push_back(order[static_cast<std::size_t>(j)]);
    out.scores.push_back(scores(out.indices.back()));
  }
  return out;
}

}  // namespace

AcquisitionBatch select_random(Index pool_size, const AcquisitionConfig& cfg) {
  check_pool(pool_size, cfg, "random");
  std::mt19937_64 rng(cfg.rng_seed);
  std::vector<Index> all(static_cast<std::size_t>(pool_size));
  std::iota(all.begin(), all.end(), Index{0});
  AcquisitionBatch out;
  for (Index k = 0; k < cfg.batch_size; ++k) {
    std::uniform_int_distribution<Index> pick(k, pool_size - 1);
    std::swap(all[static_cast<std::size_t>(k)], all[static_cast<std::size_t>(pick(rng))]);
    out.indices.push_back(all[static_cast<std::size_t>(k)]);
  }
  return out;
}

Eigen::VectorXd predictive_entropies(const PredictionTensor& preds) {
  const Eigen::MatrixXd mean = preds.mean_predictive();
  Eigen::VectorXd h(mean.rows());
  for (Index i = 0; i < mean.rows(); ++i) h(i) = entropy(mean.row(i));
  return h;
}

AcquisitionBatch select_maxent(const PredictionTensor& preds, const AcquisitionConfig& cfg) {
  check_pool(preds.points(), cfg, "maxent");
  return top_b(predictive_entropies(preds), cfg.batch_size);
}

double score_bald(const Eigen::Ref<const Eigen::MatrixXd>& samples) {
  if (samples.rows() < 1) throw InvalidInput("score_bald: need at least one sample");
  double conditional = 0.0;
  for (Index t = 0; t < samples.rows(); ++t) conditional += entropy(samples.row(t));
  conditional /= static_cast<double>(samples.rows());
  const Eigen::RowVectorXd mean = samples.colwise().mean();
  return entropy(mean) - conditional;
}

AcquisitionBatch select_bald(const PredictionTensor& preds, const AcquisitionConfig& cfg) {
  check_pool(preds.points(), cfg, "bald");
  Eigen::VectorXd s(preds.points());
  for (Index i = 0; i < preds.points(); ++i) s(i) = score_bald(preds.point(i));
  return top_b(s, cfg.batch_size);
}

// ---- BatchBALD -------------------------------------------------------------

namespace {

// Joint distribution of a growing set of labels, represented per MC sample.
// Exact mode: column k of `configs_` holds p_t(config k) for every sample t.
// Sampled mode: columns are configurations drawn from the mean predictive and
// `proposal_` holds their mixture probability.
class JointConfigs {
 public:
  JointConfigs(Index m, const AcquisitionConfig& cfg)
      : cfg_(cfg), rng_(cfg.rng_seed), configs_(Eigen::MatrixXd::Ones(m, 1)) {}

  /// Switches to sampling if scoring one more variable with c classes would
  /// exceed the exact enumeration limit.
  void reserve_for(Index classes) {
    if (exact_ && configs_.cols() * classes > cfg_.batchbald_exact_limit) {
      exact_ = false;
      resample();
    }
  }

  double entropy_with(const Eigen::Ref<const Eigen::MatrixXd>& block) const {
    const double m = static_cast<double>(configs_.rows());
    const Eigen::MatrixXd joint = configs_.transpose() * block / m;
    if (exact_) return entropy(joint.reshaped());
    double h = 0.0;
    for (Index s = 0; s < joint.rows(); ++s)
      for (Index y = 0; y < joint.cols(); ++y) {
        const double q = joint(s, y);
        if (q > 0.0) h -= q / proposal_(s) * std::log(q);
      }
    return h / static_cast<double>(joint.rows());
  }

  void add(const Eigen::Ref<const Eigen::MatrixXd>& block) {
    members_.emplace_back(block);
    if (!exact_) {
      resample();
      return;
    }
    const Index k = configs_.cols();
    const Index c = block.cols();
    Eigen::MatrixXd next(configs_.rows(), k * c);
    for (Index a = 0; a < k; ++a)
      for (Index y = 0; y < c; ++y) next.col(a * c + y) = configs_.col(a).cwiseProduct(block.col(y));
    configs_ = std::move(next);
  }

 private:
  void resample() {
    const Index m = configs_.rows();
    const Index n = cfg_.batchbald_samples;
    configs_.setOnes(m, n);
    proposal_.resize(n);
    std::uniform_int_distribution<Index> pick_sample(0, m - 1);
    for (Index s = 0; s < n; ++s) {
      const Index t = pick_sample(rng_);
      for (const auto& block : members_) {
        const Eigen::RowVectorXd row = block.row(t);
        std::discrete_distribution<Index> pick_label(row.data(), row.data() + row.size());
        configs_.col(s).array() *= block.col(pick_label(rng_)).array();
      }
      proposal_(s) = configs_.col(s).mean();
    }
  }

  const AcquisitionConfig& cfg_;
  std::mt19937_64 rng_;
  bool exact_ = true;
  Eigen::MatrixXd configs_;
  Eigen::VectorXd proposal_;
  std::vector<Eigen::MatrixXd> members_;
};

double expected_conditional_entropy(const Eigen::Ref<const Eigen::MatrixXd>& block) {
  double h = 0.0;
  for (Index t = 0; t < block.rows(); ++t) h += entropy(block.row(t));
  return h / static_cast<double>(block.rows());
}

}  // namespace

double score_batchbald(const PredictionTensor& preds, std::span<const Index> points, const AcquisitionConfig& cfg) {
  if (points.empty()) return 0.0;
  JointConfigs joint(preds.samples(), cfg);
  double conditional = 0.0;
  for (std::size_t k = 0; k + 1 < points.size(); ++k) {
    joint.reserve_for(preds.classes());
    joint.add(preds.point(points[k]));
    conditional += expected_conditional_entropy(preds.point(points[k]));
  }
  joint.reserve_for(preds.classes());
  const auto last = preds.point(points.back());
  return joint.entropy_with(last) - conditional - expected_conditional_entropy(last);
}

AcquisitionBatch select_batchbald(const PredictionTensor& preds, const AcquisitionConfig& cfg) {
  check_pool(preds.points(), cfg, "batchbald");
  const Index n = preds.points();
  Eigen::VectorXd cond(n);
  for (Index i = 0; i < n; ++i) cond(i) = expected_conditional_entropy(preds.point(i));

  JointConfigs joint(preds.samples(), cfg);
  std::vector<bool> taken(static_cast<std::size_t>(n), false);
  double batch_cond = 0.0;
  AcquisitionBatch out;
  while (static_cast<Index>(out.indices.size()) < cfg.batch_size) {
    joint.reserve_for(preds.classes());
    Index best = -1;
    double best_score = 0.0;
    for (Index x = 0; x < n; ++x) {
      if (taken[static_cast<std::size_t>(x)]) continue;
      const double s = joint.entropy_with(preds.point(x)) - batch_cond - cond(x);
      if (best < 0 || s > best_score) {
        best = x;
        best_score = s;
      }
    }
    taken[static_cast<std::size_t>(best)] = true;
    joint.add(preds.point(best));
    batch_cond += cond(best);
    out.indices.push_back(best);
    out.scores.push_back(best_score);
  }
  return out;
}

// ---- FASS ------------------------------------------------------------------

namespace {

double max_pairwise_sq_distance(std::span<const Index> set, const Eigen::MatrixXd& features) {
  double d = 0.0;
  for (std::size_t a = 0; a < set.size(); ++a)
    for (std::size_t b = a + 1; b < set.size(); ++b)
      d = std::max(d, (features.row(set[a]) - features.row(set[b])).squaredNorm());
  return d;
}

std::vector<Index> predicted_labels(const PredictionTensor& preds) {
  const Eigen::MatrixXd mean = preds.mean_predictive();
  std::vector<Index> labels(static_cast<std::size_t>(mean.rows()));
  for (Index i = 0; i < mean.rows(); ++i) labels[static_cast<std::size_t>(i)] = argmax_first(mean.row(i));
  return labels;
}

}  // namespace

double fass_objective(std::span<const Index> filtered, std::span<const Index> batch, const Eigen::MatrixXd& features,
                      std::span<const Index> labels) {
  const double d = max_pairwise_sq_distance(filtered, features);
  double f = 0.0;
  for (Index i : filtered) {
    double best = 0.0;  // max over an empty set
    bool any = false;
    for (Index s : batch) {
      if (labels[static_cast<std::size_t>(s)] != labels[static_cast<std::size_t>(i)]) continue;
      const double w = d - (features.row(i) - features.row(s)).squaredNorm();
      best = any ? std::max(best, w) : w;
      any = true;
    }
    f += best;
  }
  return f;
}

AcquisitionBatch select_fass(const PredictionTensor& preds, const Eigen::MatrixXd& features,
                             const AcquisitionConfig& cfg) {
  check_pool(preds.points(), cfg, "fass");
  if (features.rows() != preds.points()) throw InvalidInput("fass: feature rows do not match pool size");
  if (!features.allFinite()) throw InvalidInput("fass: non-finite feature");

  const Eigen::VectorXd h = predictive_entropies(preds);
  const auto ranked = rank_descending(h);
  const auto n_filtered = std::min<Index>(
      preds.points(), static_cast<Index>(std::ceil(cfg.beta * static_cast<double>(cfg.batch_size))));
  std::vector<Index> filtered(ranked.begin(), ranked.begin() + n_filtered);

  AcquisitionBatch out;
  if (n_filtered == cfg.batch_size) {
    // Nothing to subselect: the filter already is the batch.
    for (Index i : filtered) {
      out.indices.push_back(i);
      out.scores.push_back(h(i));
    }
    return out;
  }

  const auto labels = predicted_labels(preds);
  const double d = max_pairwise_sq_distance(filtered, features);
  // Candidates are scanned in filter order (entropy descending, then lowest
  // index), so equal gains go to the more uncertain point.
  const std::vector<Index>& candidates = filtered;
  std::vector<double> coverage(filtered.size(), 0.0);
  std::vector<bool> chosen(filtered.size(), false);
  auto label_of = [&](Index i) { return labels[static_cast<std::size_t>(i)]; };

  while (static_cast<Index>(out.indices.size()) < cfg.batch_size) {
    std::size_t best = candidates.size();
    double best_gain = -1.0;
    for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
      if (chosen[ci]) continue;
      const Index s = candidates[ci];
      double gain = 0.0;
      for (std::size_t k = 0; k < candidates.size(); ++k) {
        const Index i = candidates[k];
        if (label_of(i) != label_of(s)) continue;
        const double w = d - (features.row(i) - features.row(s)).squaredNorm();
        gain += std::max(0.0, w - coverage[k]);
      }
      if (gain > best_gain) {
        best_gain = gain;
        best = ci;
      }
    }
    chosen[best] = true;
    const Index s = candidates[best];
    for (std::size_t k = 0; k < candidates.size(); ++k) {
      const Index i = candidates[k];
      if (label_of(i) != label_of(s)) continue;
      coverage[k] = std::max(coverage[k], d - (features.row(i) - features.row(s)).squaredNorm());
    }
    out.indices.push_back(s);
    out.scores.push_back(best_gain);
  }
  return out;
}

AcquisitionBatch acquire(const PredictionTensor& preds, const Eigen::MatrixXd* features, const AcquisitionConfig& cfg) {
  switch (cfg.policy) {
    case Policy::Ical: return select_ical(preds, cfg);
    case Policy::IcalPointwise: return select_ical_pointwise(preds, cfg);
    case Policy::Random: return select_random(preds.points(), cfg);
    case Policy::MaxEnt: return select_maxent(preds, cfg);
    case Policy::Bald: return select_bald(preds, cfg);
    case Policy::BatchBald: return select_batchbald(preds, cfg);
    case Policy::Fass:
      if (features == nullptr) throw InvalidInput("fass: features required");
      return select_fass(preds, *features, cfg);
  }
  throw InvalidInput("acquire: unknown policy");
}

}  // namespace ical
