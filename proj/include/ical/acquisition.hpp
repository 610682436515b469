#pragma once

// Batch acquisition policies. Every policy maps the pool's prediction tensor
// (plus features for FASS) to B distinct pool positions. Ties are broken by the
// lowest pool position everywhere.

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ical/kernels.hpp"
#include "ical/prediction_tensor.hpp"

namespace ical {

enum class Policy { Ical, IcalPointwise, Random, MaxEnt, Bald, BatchBald, Fass };

std::string_view policy_name(Policy p);
std::optional<Policy> parse_policy(std::string_view name);

struct AcquisitionConfig {
  Eigen::Index batch_size = 1;     // B
  Eigen::Index subsample = 200;    // r
  Eigen::Index minibatch = 1;      // L, additions per greedy step
  Eigen::Index mc_samples = 32;    // m drawn by sampling backends
  double beta = 10.0;              // FASS filter multiplier
  std::uint64_t rng_seed = 0;
  Policy policy = Policy::Ical;
  KernelSpec kernel;
  Eigen::Index batchbald_exact_limit = 1'000'000;
  Eigen::Index batchbald_samples = 10'000;

  void validate() const;
};

struct AcquisitionBatch {
  std::vector<Eigen::Index> indices;
  std::vector<double> scores;  // score of each addition, in order
  std::vector<std::string> warnings;
};

// ---- ICAL ------------------------------------------------------------------

/// hsic2(mean of candidate kernels, pool kernel sum).
double score_ical(std::span<const KernelMatrixd> candidate_batch_kernels, const KernelMatrixd& pool_kernel_sum);

/// Greedy forward selection: each step redraws a subsample R of at most r
/// unacquired points outside the batch, sums their kernels, and adds the
/// top-L candidates by score_ical(batch + {x}, sum).
AcquisitionBatch select_ical(const PredictionTensor& preds, const AcquisitionConfig& cfg);
AcquisitionBatch select_ical(const KernelBank& bank, const AcquisitionConfig& cfg);

/// As select_ical, scoring candidates by score_ical * (M_x - 1) where M_x is
/// the mean over R of max(d_i(B + x) / d_i(B), 1).
AcquisitionBatch select_ical_pointwise(const PredictionTensor& preds, const AcquisitionConfig& cfg);
AcquisitionBatch select_ical_pointwise(const KernelBank& bank, const AcquisitionConfig& cfg);

// ---- baselines -------------------------------------------------------------

AcquisitionBatch select_random(Eigen::Index pool_size, const AcquisitionConfig& cfg);

/// Entropy of each point's mean predictive, natural log.
Eigen::VectorXd predictive_entropies(const PredictionTensor& preds);
AcquisitionBatch select_maxent(const PredictionTensor& preds, const AcquisitionConfig& cfg);

/// H(mean predictive) - mean of per-sample entropies, for one m x c block.
double score_bald(const Eigen::Ref<const Eigen::MatrixXd>& samples);
AcquisitionBatch select_bald(const PredictionTensor& preds, const AcquisitionConfig& cfg);

/// Joint mutual information of a set of points with the model, exact when the
/// configuration count c^|set| is within cfg.batchbald_exact_limit, otherwise
/// importance-sampled from the mean predictive.
double score_batchbald(const PredictionTensor& preds, std::span<const Eigen::Index> points,
                       const AcquisitionConfig& cfg);
AcquisitionBatch select_batchbald(const PredictionTensor& preds, const AcquisitionConfig& cfg);

/// Facility-location subset value of `batch` within the filtered set.
double fass_objective(std::span<const Eigen::Index> filtered, std::span<const Eigen::Index> batch,
                      const Eigen::MatrixXd& features, std::span<const Eigen::Index> predicted_labels);
AcquisitionBatch select_fass(const PredictionTensor& preds, const Eigen::MatrixXd& features,
                             const AcquisitionConfig& cfg);

/// Dispatch on cfg.policy. `features` is required only for FASS.
AcquisitionBatch acquire(const PredictionTensor& preds, const Eigen::MatrixXd* features, const AcquisitionConfig& cfg);

/// Positions sorted by descending score; equal scores keep ascending position.
std::vector<Eigen::Index> rank_descending(const Eigen::VectorXd& scores);

}  // namespace ical
