#include "ical/harness.hpp"

#include <algorithm>
#include <chrono>
#include <memory>
#include <random>
#include <set>

#include "ical/errors.hpp"
#include "ical/metrics.hpp"
#include "ical/seeding.hpp"
#include "ical/tensor_io.hpp"

namespace ical {

using Eigen::Index;

namespace {

// Streams of the master seed.
enum SeedStream : std::uint64_t {
  kTaskStream = 1,
  kTruthStream = 2,
  kSplitStream = 3,
  kRoundStream = 4,
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual Index points() const = 0;
  virtual Index classes() const = 0;
  virtual Index label(Index i) const = 0;
  virtual const Eigen::MatrixXd* features() const { return nullptr; }
  /// Predictions handed to the acquisition policy.
  virtual PredictionTensor sample(std::span<const Index> ids, Index m, std::uint64_t seed) const = 0;
  /// Predictions used for metrics.
  virtual PredictionTensor predictive(std::span<const Index> ids) const = 0;
  virtual void fit(std::span<const Index> train, std::uint64_t seed) = 0;
};

class DiscreteBackend final : public Backend {
 public:
  DiscreteBackend(DiscreteHypothesisModel prior, std::optional<Index> truth, std::uint64_t seed)
      : prior_(std::move(prior)), current_(prior_) {
    std::mt19937_64 rng(derive_seed(seed, kTruthStream));
    if (truth) {
      if (*truth < 0 || *truth >= prior_.hypotheses()) throw ConfigError("true_hypothesis", "out of range");
      truth_ = *truth;
    } else {
      const Eigen::VectorXd& w = prior_.posterior();
      truth_ = std::discrete_distribution<Index>(w.data(), w.data() + w.size())(rng);
    }
    for (Index i = 0; i < prior_.points(); ++i) {
      const Eigen::RowVectorXd row = prior_.likelihood(i).row(truth_);
      labels_.push_back(std::discrete_distribution<Index>(row.data(), row.data() + row.size())(rng));
    }
  }

  Index points() const override { return prior_.points(); }
  Index classes() const override { return prior_.classes(); }
  Index label(Index i) const override { return labels_.at(static_cast<std::size_t>(i)); }

  PredictionTensor sample(std::span<const Index> ids, Index m, std::uint64_t seed) const override {
    return sample_predictions(current_, ids, m, seed);
  }
  PredictionTensor predictive(std::span<const Index> ids) const override { return current_.marginal_tensor(ids); }

  void fit(std::span<const Index> train, std::uint64_t) override {
    current_ = prior_;
    for (Index i : train) current_ = posterior_update(current_, i, label(i));
  }

 private:
  DiscreteHypothesisModel prior_;
  DiscreteHypothesisModel current_;
  Index truth_ = 0;
  std::vector<Index> labels_;
};

class EnsembleBackend final : public Backend {
 public:
  EnsembleBackend(Dataset data, int members, EnsembleHyper hyper)
      : data_(std::move(data)), members_(members), hyper_(hyper) {}

  Index points() const override { return data_.size(); }
  Index classes() const override { return data_.classes; }
  Index label(Index i) const override { return data_.labels.at(static_cast<std::size_t>(i)); }
  const Eigen::MatrixXd* features() const override { return &data_.features; }

  PredictionTensor sample(std::span<const Index> ids, Index, std::uint64_t) const override { return predictive(ids); }
  PredictionTensor predictive(std::span<const Index> ids) const override {
    return ensemble_predict_samples(model_, data_.subset(ids).features);
  }

  void fit(std::span<const Index> train, std::uint64_t seed) override {
    model_ = ensemble_train(data_.subset(train), members_, hyper_, seed);
  }

 private:
  Dataset data_;
  int members_;
  EnsembleHyper hyper_;
  EnsembleModel model_;
};

class ExternalBackend final : public Backend {
 public:
  ExternalBackend(PredictionTensor preds, Dataset data) : preds_(std::move(preds)), data_(std::move(data)) {
    if (preds_.points() != data_.size())
      throw ConfigError("tensor", "point count does not match the dataset row count");
    if (preds_.classes() < data_.classes) throw ConfigError("tensor", "fewer classes than the dataset labels");
    data_.classes = preds_.classes();
    preds_.validate();
  }

  Index points() const override { return preds_.points(); }
  Index classes() const override { return preds_.classes(); }
  Index label(Index i) const override { return data_.labels.at(static_cast<std::size_t>(i)); }
  const Eigen::MatrixXd* features() const override { return &data_.features; }
  PredictionTensor sample(std::span<const Index> ids, Index, std::uint64_t) const override { return predictive(ids); }
  PredictionTensor predictive(std::span<const Index> ids) const override { return preds_.select(ids); }
  void fit(std::span<const Index>, std::uint64_t) override {}

 private:
  PredictionTensor preds_;
  Dataset data_;
};

std::unique_ptr<Backend> make_backend(const ExperimentConfig& cfg) {
  const std::uint64_t task_seed = derive_seed(cfg.seed, kTaskStream);
  switch (cfg.backend) {
    case BackendKind::Discrete: {
      if (cfg.task == TaskKind::Example1)
        return std::make_unique<DiscreteBackend>(example1_model(cfg.example1_points), cfg.true_hypothesis, cfg.seed);
      if (cfg.task == TaskKind::RandomHypotheses)
        return std::make_unique<DiscreteBackend>(random_task_model(cfg.random_task, task_seed), cfg.true_hypothesis,
                                                 cfg.seed);
      throw ConfigError("task", "discrete backend supports example1 and random tasks");
    }
    case BackendKind::Ensemble: {
      if (cfg.task == TaskKind::Blobs)
        return std::make_unique<EnsembleBackend>(
            gaussian_blobs(cfg.blob_classes, cfg.blob_points_per_class, cfg.blob_radius, cfg.blob_spread, task_seed),
            cfg.members, cfg.hyper);
      if (cfg.task == TaskKind::Csv) return std::make_unique<EnsembleBackend>(load_dataset_csv(cfg.dataset_path), cfg.members, cfg.hyper);
      throw ConfigError("task", "ensemble backend supports blobs and csv tasks");
    }
    case BackendKind::External:
      if (cfg.tensor_path.empty()) throw ConfigError("tensor", "required for the external backend");
      if (cfg.dataset_path.empty()) throw ConfigError("dataset", "required for the external backend");
      return std::make_unique<ExternalBackend>(load_predictions(cfg.tensor_path), load_dataset_csv(cfg.dataset_path));
  }
  throw ConfigError("backend", "unknown backend");
}

struct IndexSets {
  std::vector<Index> initial, pool, test;
};

void check_ids(const std::vector<Index>& ids, Index n, const char* field) {
  std::set<Index> seen;
  for (Index i : ids) {
    if (i < 0 || i >= n) throw ConfigError(field, "index " + std::to_string(i) + " out of range [0, " + std::to_string(n) + ")");
    if (!seen.insert(i).second) throw ConfigError(field, "duplicate index " + std::to_string(i));
  }
}

IndexSets resolve_indices(const ExperimentConfig& cfg, const Backend& backend) {
  const Index n = backend.points();
  IndexSets s{cfg.initial_indices, cfg.pool_indices, cfg.test_indices};
  check_ids(s.initial, n, "initial_indices");
  check_ids(s.pool, n, "pool_indices");
  check_ids(s.test, n, "test_indices");

  std::mt19937_64 rng(derive_seed(cfg.seed, kSplitStream));
  std::set<Index> used(s.initial.begin(), s.initial.end());
  used.insert(s.pool.begin(), s.pool.end());
  used.insert(s.test.begin(), s.test.end());
  auto unused = [&] {
    std::vector<Index> out;
    for (Index i = 0; i < n; ++i)
      if (!used.contains(i)) out.push_back(i);
    std::shuffle(out.begin(), out.end(), rng);
    return out;
  };

  if (s.test.empty() && cfg.test_size > 0) {
    auto free = unused();
    if (static_cast<Index>(free.size()) < cfg.test_size) throw ConfigError("test_size", "not enough points");
    s.test.assign(free.begin(), free.begin() + cfg.test_size);
    std::sort(s.test.begin(), s.test.end());
    used.insert(s.test.begin(), s.test.end());
  }
  if (s.initial.empty() && cfg.initial_per_class > 0) {
    std::vector<Index> per_class(static_cast<std::size_t>(backend.classes()), 0);
    for (Index i : unused()) {
      auto& count = per_class[static_cast<std::size_t>(backend.label(i))];
      if (count < cfg.initial_per_class) {
        ++count;
        s.initial.push_back(i);
      }
    }
    for (Index count : per_class)
      if (count < cfg.initial_per_class) throw ConfigError("initial_per_class", "a class has too few points");
    std::sort(s.initial.begin(), s.initial.end());
    used.insert(s.initial.begin(), s.initial.end());
  }
  if (s.pool.empty()) {
    auto free = unused();
    if (cfg.pool_size > 0) {
      if (static_cast<Index>(free.size()) < cfg.pool_size) throw ConfigError("pool_size", "not enough points");
      free.resize(static_cast<std::size_t>(cfg.pool_size));
    }
    s.pool = std::move(free);
    std::sort(s.pool.begin(), s.pool.end());
  }

  std::set<Index> seen;
  for (const auto* set : {&s.initial, &s.pool, &s.test})
    for (Index i : *set)
      if (!seen.insert(i).second)
        throw ConfigError("indices", "initial, pool and test sets must be disjoint (index " + std::to_string(i) + ")");
  return s;
}

}  // namespace

std::vector<MetricsRecord> run_experiment(const ExperimentConfig& cfg) {
  if (cfg.rounds < 1) throw ConfigError("rounds", "must be >= 1");
  try {
    cfg.acquisition.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError("acquisition", e.what());
  }
  auto backend = make_backend(cfg);
  auto sets = resolve_indices(cfg, *backend);
  if (static_cast<Index>(sets.pool.size()) < cfg.rounds * cfg.acquisition.batch_size)
    throw ConfigError("rounds", "pool of " + std::to_string(sets.pool.size()) + " points cannot supply " +
                                    std::to_string(cfg.rounds) + " rounds of " +
                                    std::to_string(cfg.acquisition.batch_size));
  if (cfg.acquisition.policy == Policy::Fass && backend->features() == nullptr)
    throw ConfigError("policy", "fass needs feature vectors, which the discrete backend does not have");
  if (cfg.backend == BackendKind::Ensemble) {
    std::set<Index> cls;
    for (Index i : sets.initial) cls.insert(backend->label(i));
    if (cls.size() < 2) throw ConfigError("initial_indices", "ensemble backend needs at least 2 labeled classes");
  }

  std::vector<Index> train = sets.initial;
  std::vector<Index> pool = sets.pool;
  std::vector<Index> acquired_labels;
  auto labels_of = [&](std::span<const Index> ids) {
    std::vector<Index> out;
    out.reserve(ids.size());
    for (Index i : ids) out.push_back(backend->label(i));
    return out;
  };

  auto record = [&](Index round, double seconds, std::vector<Index> acquired) {
    MetricsRecord r;
    r.round = round;
    r.train_size = static_cast<Index>(train.size());
    const std::vector<Index>& eval = sets.test.empty() ? pool : sets.test;
    const PredictionTensor eval_preds = backend->predictive(eval);
    const auto eval_labels = labels_of(eval);
    r.accuracy = accuracy(eval_preds, eval_labels);
    r.nll = nll(eval_preds, eval_labels);
    r.pool_entropy = pool.empty() ? 0.0 : mean_predictive_entropy(backend->predictive(pool));
    r.label_histogram = label_histogram(acquired_labels, backend->classes());
    r.seconds = cfg.record_timing ? seconds : 0.0;
    r.acquired = std::move(acquired);
    return r;
  };

  std::vector<MetricsRecord> records;
  backend->fit(train, derive_seed(cfg.seed, {kRoundStream, 0, 3}));
  records.push_back(record(0, 0.0, {}));

  for (Index t = 1; t <= cfg.rounds; ++t) {
    const auto round = static_cast<std::uint64_t>(t);
    AcquisitionConfig acq = cfg.acquisition;
    acq.rng_seed = derive_seed(cfg.seed, {kRoundStream, round, 2});
    const PredictionTensor preds = backend->sample(pool, acq.mc_samples, derive_seed(cfg.seed, {kRoundStream, round, 1}));
    Eigen::MatrixXd pool_features;
    if (const Eigen::MatrixXd* f = backend->features()) {
      pool_features.resize(static_cast<Index>(pool.size()), f->cols());
      for (std::size_t k = 0; k < pool.size(); ++k) pool_features.row(static_cast<Index>(k)) = f->row(pool[k]);
    }

    const auto start = std::chrono::steady_clock::now();
    const AcquisitionBatch batch = acquire(preds, backend->features() ? &pool_features : nullptr, acq);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::vector<Index> acquired;
    std::vector<bool> taken(pool.size(), false);
    for (Index pos : batch.indices) {
      taken[static_cast<std::size_t>(pos)] = true;
      acquired.push_back(pool[static_cast<std::size_t>(pos)]);
    }
    std::vector<Index> remaining;
    for (std::size_t k = 0; k < pool.size(); ++k)
      if (!taken[k]) remaining.push_back(pool[k]);
    pool = std::move(remaining);
    for (Index id : acquired) {
      train.push_back(id);
      acquired_labels.push_back(backend->label(id));
    }
    backend->fit(train, derive_seed(cfg.seed, {kRoundStream, round, 3}));
    records.push_back(record(t, seconds, std::move(acquired)));
  }
  return records;
}

std::vector<TimingRow> timing_profile(const KernelBank& bank, const AcquisitionConfig& base,
                                      std::span<const Index> minibatches, int repeats) {
  std::vector<TimingRow> rows;
  for (Index l : minibatches) {
    AcquisitionConfig cfg = base;
    cfg.minibatch = l;
    double best = 0.0;
    for (int rep = 0; rep < std::max(1, repeats); ++rep) {
      const auto start = std::chrono::steady_clock::now();
      const AcquisitionBatch batch = select_ical(bank, cfg);
      const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (static_cast<Index>(batch.indices.size()) != cfg.batch_size) throw std::logic_error("timing_profile: short batch");
      best = rep == 0 ? s : std::min(best, s);
    }
    rows.push_back({l, best});
  }
  return rows;
}

std::vector<TimingRow> timing_profile(const PredictionTensor& pool, const AcquisitionConfig& base,
                                      std::span<const Index> minibatches, int repeats) {
  return timing_profile(build_kernel_bank(pool, base.kernel), base, minibatches, repeats);
}

}  // namespace ical
