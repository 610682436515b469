#include <algorithm>
#include <numeric>
#include <random>

#include "ical/acquisition.hpp"
#include "ical/dhsic.hpp"
#include "ical/errors.hpp"

namespace ical {

double score_ical(std::span<const KernelMatrixd> candidate_batch_kernels, const KernelMatrixd& pool_kernel_sum) {
  return hsic2(mean_kernels(candidate_batch_kernels), pool_kernel_sum).value;
}

namespace {

using Eigen::Index;

// Shared greedy bookkeeping for both ICAL variants. Scores against a pool sum
// L use tr(K H L H) = <K, HLH>, so one GEMV scores every candidate.
class GreedyBatch {
 public:
  GreedyBatch(const KernelBank& bank, const AcquisitionConfig& cfg)
      : bank_(bank),
        cfg_(cfg),
        rng_(cfg.rng_seed),
        in_batch_(static_cast<std::size_t>(bank.size()), false),
        batch_sum_(Eigen::VectorXd::Zero(bank.m * bank.m)) {}

  Index size() const { return static_cast<Index>(batch_.indices.size()); }
  bool done() const { return size() >= cfg_.batch_size; }
  Index remaining() const { return std::min(cfg_.minibatch, cfg_.batch_size - size()); }
  bool contains(Index i) const { return in_batch_[static_cast<std::size_t>(i)]; }

  /// Uniform subsample of at most r pool points not yet in the batch.
  std::vector<Index> draw_subsample() {
    std::vector<Index> avail;
    avail.reserve(static_cast<std::size_t>(bank_.size() - size()));
    for (Index i = 0; i < bank_.size(); ++i)
      if (!contains(i)) avail.push_back(i);
    const auto r = static_cast<std::size_t>(std::min<Index>(cfg_.subsample, static_cast<Index>(avail.size())));
    for (std::size_t k = 0; k < r; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, avail.size() - 1);
      std::swap(avail[k], avail[pick(rng_)]);
    }
    avail.resize(r);
    return avail;
  }

  /// vec(H L H) for L the sum of kernels over `subset`.
  Eigen::VectorXd centered_pool_sum(const std::vector<Index>& subset) const {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(bank_.m * bank_.m);
    for (Index i : subset) sum += bank_.columns.col(i);
    const KernelMatrixd c = center(Eigen::Map<const Eigen::MatrixXd>(sum.data(), bank_.m, bank_.m));
    return Eigen::Map<const Eigen::VectorXd>(c.data(), c.size());
  }

  /// score_ical(batch + {x}, L) for every pool point x.
  Eigen::VectorXd ical_scores(const Eigen::VectorXd& centered_pool) const {
    const double norm = static_cast<double>((size() + 1) * bank_.m * bank_.m);
    const double base = batch_sum_.dot(centered_pool);
    Eigen::VectorXd s = bank_.columns.transpose() * centered_pool;
    for (Index x = 0; x < s.size(); ++x) {
      double v = (base + s(x)) / norm;
      if (v < 0.0 && v > -1e-10) v = 0.0;
      s(x) = v;
    }
    return s;
  }

  /// Adds the top `remaining()` candidates outside the batch.
  void add_best(const Eigen::VectorXd& scores) {
    std::vector<Index> order;
    for (Index i : rank_descending(scores))
      if (!contains(i)) order.push_back(i);
    const Index k = remaining();
    for (Index j = 0; j < k; ++j) {
      const Index x = order[static_cast<std::size_t>(j)];
      in_batch_[static_cast<std::size_t>(x)] = true;
      batch_sum_ += bank_.columns.col(x);
      batch_.indices.push_back(x);
      batch_.scores.push_back(scores(x));
    }
  }

  const Eigen::VectorXd& batch_sum() const { return batch_sum_; }
  AcquisitionBatch take() { return std::move(batch_); }
  AcquisitionBatch& batch() { return batch_; }

 private:
  const KernelBank& bank_;
  const AcquisitionConfig& cfg_;
  std::mt19937_64 rng_;
  std::vector<bool> in_batch_;
  Eigen::VectorXd batch_sum_;  // vec of the summed batch kernels
  AcquisitionBatch batch_;
};

void check_ical_inputs(const KernelBank& bank, const AcquisitionConfig& cfg) {
  cfg.validate();
  if (bank.size() < cfg.batch_size) throw InvalidInput("ICAL: pool smaller than batch size");
  if (bank.m < 4) throw InvalidInput("ICAL: need at least 4 MC samples");
  if (bank.columns.rows() != bank.m * bank.m) throw InvalidInput("ICAL: malformed kernel bank");
}

}  // namespace

AcquisitionBatch select_ical(const KernelBank& bank, const AcquisitionConfig& cfg) {
  check_ical_inputs(bank, cfg);
  GreedyBatch greedy(bank, cfg);
  while (!greedy.done()) {
    const auto subset = greedy.draw_subsample();
    greedy.add_best(greedy.ical_scores(greedy.centered_pool_sum(subset)));
  }
  return greedy.take();
}

AcquisitionBatch select_ical(const PredictionTensor& preds, const AcquisitionConfig& cfg) {
  return select_ical(build_kernel_bank(preds, cfg.kernel), cfg);
}

AcquisitionBatch select_ical_pointwise(const KernelBank& bank, const AcquisitionConfig& cfg) {
  check_ical_inputs(bank, cfg);
  if (cfg.subsample < 2) throw InvalidInput("ICAL-pointwise: subsample size must be >= 2");
  constexpr double kFloor = 1e-12;
  const Index mm = bank.m * bank.m;
  const double norm = static_cast<double>(mm);

  GreedyBatch greedy(bank, cfg);
  while (!greedy.done()) {
    const auto subset = greedy.draw_subsample();
    const Eigen::VectorXd ical = greedy.ical_scores(greedy.centered_pool_sum(subset));
    const Index b = greedy.size();
    if (b == 0) {
      greedy.add_best(ical);
      continue;
    }

    // Columns of `centered` are vec(H K_i H) for each i in R.
    const auto nr = static_cast<Index>(subset.size());
    Eigen::MatrixXd centered(mm, nr);
    for (Index j = 0; j < nr; ++j) {
      const KernelMatrixd c = center(bank.kernel(subset[static_cast<std::size_t>(j)]));
      centered.col(j) = Eigen::Map<const Eigen::VectorXd>(c.data(), mm);
    }
    const Eigen::RowVectorXd base = greedy.batch_sum().transpose() * centered;
    const Eigen::MatrixXd cross = bank.columns.transpose() * centered;  // pool x |R|
    const Eigen::RowVectorXd before = (base / (static_cast<double>(b) * norm)).cwiseMax(kFloor);

    Eigen::VectorXd alpha(bank.size());
    for (Index x = 0; x < bank.size(); ++x) {
      const Eigen::RowVectorXd after = (base + cross.row(x)) / (static_cast<double>(b + 1) * norm);
      const double mx = after.cwiseQuotient(before).cwiseMax(1.0).mean();
      alpha(x) = ical(x) * (mx - 1.0);
    }
    greedy.add_best(alpha);
  }
  return greedy.take();
}

AcquisitionBatch select_ical_pointwise(const PredictionTensor& preds, const AcquisitionConfig& cfg) {
  AcquisitionBatch out = select_ical_pointwise(build_kernel_bank(preds, cfg.kernel), cfg);
  const Index r = std::min(cfg.subsample, preds.points());
  if (r < preds.classes())
    out.warnings.push_back("ICAL-pointwise: subsample size " + std::to_string(r) + " is below the class count " +
                           std::to_string(preds.classes()));
  return out;
}

}  // namespace ical
