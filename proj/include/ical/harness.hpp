#pragma once

// Pool-based active-learning loop: predict on the pool, acquire a batch, move
// it to the training set with its true labels, refit the backend, record
// metrics. Round 0 records the initial model.

#include <Eigen/Core>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ical/acquisition.hpp"
#include "ical/discrete_model.hpp"
#include "ical/ensemble.hpp"

namespace ical {

inline constexpr int kResultsFormatVersion = 1;

enum class BackendKind { Discrete, Ensemble, External };
enum class TaskKind { Example1, RandomHypotheses, Blobs, Csv };

struct ExperimentConfig {
  BackendKind backend = BackendKind::Discrete;
  TaskKind task = TaskKind::Example1;

  // discrete backend
  Eigen::Index example1_points = 50;
  RandomTaskSpec random_task;
  std::optional<Eigen::Index> true_hypothesis;  // drawn from the prior when unset

  // ensemble backend
  Eigen::Index blob_classes = 4;
  Eigen::Index blob_points_per_class = 175;
  double blob_radius = 2.0;
  double blob_spread = 1.0;
  std::string dataset_path;
  int members = 20;
  EnsembleHyper hyper;

  // external backend (predictions fixed, labels and features from dataset_path)
  std::string tensor_path;

  AcquisitionConfig acquisition;
  Eigen::Index rounds = 1;  // T

  // Index sets. Empty lists are resolved from the counts below.
  std::vector<Eigen::Index> initial_indices;
  std::vector<Eigen::Index> pool_indices;
  std::vector<Eigen::Index> test_indices;
  Eigen::Index initial_per_class = 0;
  Eigen::Index test_size = 0;
  Eigen::Index pool_size = 0;  // 0: every remaining point

  bool record_timing = true;
  std::uint64_t seed = 0;
};

struct MetricsRecord {
  Eigen::Index round = 0;
  Eigen::Index train_size = 0;
  double accuracy = 0.0;
  double nll = 0.0;
  double pool_entropy = 0.0;
  std::vector<Eigen::Index> label_histogram;  // cumulative over acquisitions
  double seconds = 0.0;                       // batch construction wall time
  std::vector<Eigen::Index> acquired;         // dataset ids acquired this round
};

/// Throws ConfigError on invalid or exhausted index sets before any work.
std::vector<MetricsRecord> run_experiment(const ExperimentConfig& cfg);

struct TimingRow {
  Eigen::Index minibatch;
  double seconds;
};

/// Wall time of ICAL batch construction per minibatch size L, best of
/// `repeats`. Kernels are built once up front and excluded from the timing.
std::vector<TimingRow> timing_profile(const PredictionTensor& pool, const AcquisitionConfig& base,
                                      std::span<const Eigen::Index> minibatches, int repeats = 3);
std::vector<TimingRow> timing_profile(const KernelBank& bank, const AcquisitionConfig& base,
                                      std::span<const Eigen::Index> minibatches, int repeats = 3);

// ---- configuration file ----------------------------------------------------

/// Flat `key = value` text, `#` comments. Lists are comma separated and may
/// contain inclusive ranges `a-b`. Unknown keys are rejected.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Normalized key/value echo of a config (inverse of parse_config).
std::map<std::string, std::string> config_echo(const ExperimentConfig& cfg);

// ---- result files ----------------------------------------------------------

void write_results_csv(const std::vector<MetricsRecord>& records, const std::string& path, bool include_timing);
void write_summary_json(const ExperimentConfig& cfg, const std::vector<MetricsRecord>& records,
                        const std::string& path, bool include_timing);

}  // namespace ical
