// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion with
// its measured values and runtime; exits nonzero if any criterion fails.

#include <Eigen/Core>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ical/acquisition.hpp"
#include "ical/cli.hpp"
#include "ical/dhsic.hpp"
#include "ical/discrete_model.hpp"
#include "ical/harness.hpp"
#include "ical/kernels.hpp"
#include "oracles.hpp"

using namespace ical;
using Eigen::Index;
using Eigen::MatrixXd;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---- 1 ---------------------------------------------------------------------

Outcome example1_exactness() {
  std::ostringstream out, err;
  const char* argv[] = {"ical", "example1", "--L", "50"};
  if (run_cli(4, argv, out, err) != 0) return {false, "example1 exited nonzero: " + err.str()};
  std::map<std::string, double> v;
  std::istringstream in(out.str());
  for (std::string key; in >> key;) in >> v[key];
  const double mi1 = v["mi_x1"], mi2 = v["mi_x2"], h1 = v["expected_entropy_after_x1"],
               h2 = v["expected_entropy_after_x2"];
  const bool ok = std::abs(mi1 - 0.940) < 1e-3 && std::abs(mi2 - 0.325) < 1e-3 && std::abs(h1 - 0.287) < 1e-3 &&
                  std::abs(h2) < 1e-3;
  return {ok, fmt("MI(x1)=%.6f MI(x2)=%.6f E[H|x1]=%.6f E[H|x2]=%.6f", mi1, mi2, h1, h2)};
}

// ---- 2 ---------------------------------------------------------------------

Outcome additivity() {
  std::mt19937_64 rng(2);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Index m = std::uniform_int_distribution<Index>(6, 20)(rng);
    const int len = std::uniform_int_distribution<int>(1, 10)(rng);
    const Index c = std::uniform_int_distribution<Index>(2, 6)(rng);
    std::vector<MatrixXd> pool;
    for (int i = 0; i < len; ++i) pool.push_back(oracle::random_rq_kernel(m, c, rng));
    const MatrixXd kb = oracle::random_rq_kernel(m, c, rng);
    double lhs = 0.0;
    for (const auto& k : pool) lhs += dhsic(std::vector<MatrixXd>{k, kb}).value;
    const double rhs = dhsic(std::vector<MatrixXd>{sum_kernels(pool), kb}).value;
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(std::abs(rhs), 1e-300));
  }
  return {worst <= 1e-9, fmt("100 trials, worst relative gap %.3e", worst)};
}

// ---- 3 ---------------------------------------------------------------------

Outcome kernel_sum_psd() {
  std::mt19937_64 rng(3);
  double worst = -1.0;  // most negative min/max eigenvalue ratio
  for (int trial = 0; trial < 100; ++trial) {
    const Index m = std::uniform_int_distribution<Index>(2, 40)(rng);
    const Index c = std::uniform_int_distribution<Index>(2, 10)(rng);
    const int terms = std::uniform_int_distribution<int>(1, 8)(rng);
    std::uniform_real_distribution<double> weight(0.0, 3.0);
    MatrixXd sum = MatrixXd::Zero(m, m);
    for (int t = 0; t < terms; ++t) sum += weight(rng) * oracle::random_rq_kernel(m, c, rng);
    const auto [lo, hi] = eigen_range(sum);
    const double ratio = hi > 0 ? lo / hi : lo;
    worst = trial == 0 ? ratio : std::min(worst, ratio);
  }
  return {worst >= -1e-8, fmt("100 weighted RQ sums, min(lambda_min/lambda_max)=%.3e", worst)};
}

// ---- 4 ---------------------------------------------------------------------

Outcome estimator_oracle() {
  std::mt19937_64 rng(4);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto d = static_cast<std::size_t>(std::uniform_int_distribution<int>(2, 3)(rng));
    const Index m = std::uniform_int_distribution<Index>(4, 10)(rng);
    std::vector<MatrixXd> ks;
    for (std::size_t j = 0; j < d; ++j) ks.push_back(oracle::random_rq_kernel(m, 3, rng));
    const double fast = dhsic(ks).value;
    const double slow = m < static_cast<Index>(2 * d) ? 0.0 : oracle::dhsic_nested(ks);
    worst = std::max(worst, std::abs(fast - slow));
  }
  return {worst <= 1e-12, fmt("50 instances, worst absolute gap %.3e", worst)};
}

// ---- 5 ---------------------------------------------------------------------

ExperimentConfig example1_config(Policy policy, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.backend = BackendKind::Discrete;
  cfg.task = TaskKind::Example1;
  cfg.example1_points = 50;
  cfg.rounds = 1;
  cfg.acquisition.batch_size = 1;
  cfg.acquisition.mc_samples = 256;
  cfg.acquisition.policy = policy;
  cfg.record_timing = false;
  cfg.seed = seed;
  return cfg;
}

Outcome motivating_example(Policy policy) {
  int good = 0;
  std::string bald_detail;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto recs = run_experiment(example1_config(policy, s));
    const Index pick = recs.back().acquired.front();
    if (pick != 0 && recs.back().pool_entropy < 0.287) ++good;
  }
  bool bald_ok = true;
  for (std::uint64_t s = 0; s < 10; ++s)
    bald_ok = bald_ok && run_experiment(example1_config(Policy::Bald, s)).back().acquired.front() == 0;
  return {good >= 9 && bald_ok, fmt("%s picked x2..x50 with pool entropy < 0.287 in %d/10 seeds; BALD picked x1 in %s",
                                    std::string(policy_name(policy)).c_str(), good, bald_ok ? "10/10" : "<10/10")};
}

// ---- 6 and 9 ---------------------------------------------------------------

ExperimentConfig random_task_config(Policy policy, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.backend = BackendKind::Discrete;
  cfg.task = TaskKind::RandomHypotheses;
  cfg.random_task = RandomTaskSpec{};  // 64 hypotheses, 200 points, 4 classes
  cfg.rounds = 10;
  cfg.acquisition.batch_size = 5;
  cfg.acquisition.mc_samples = 64;
  cfg.acquisition.policy = policy;
  cfg.record_timing = false;
  cfg.seed = seed;
  return cfg;
}

struct RandomTaskRuns {
  double ical_entropy = 0.0, random_entropy = 0.0;
  int covering = 0;
};

RandomTaskRuns random_task_runs() {
  RandomTaskRuns r;
  for (std::uint64_t s = 0; s < 6; ++s) {
    const auto ical_recs = run_experiment(random_task_config(Policy::Ical, s));
    const auto rand_recs = run_experiment(random_task_config(Policy::Random, s));
    r.ical_entropy += ical_recs.back().pool_entropy / 6.0;
    r.random_entropy += rand_recs.back().pool_entropy / 6.0;
    const auto& h = ical_recs.back().label_histogram;
    if (std::all_of(h.begin(), h.end(), [](Index x) { return x > 0; })) ++r.covering;
  }
  return r;
}

// ---- 7 ---------------------------------------------------------------------

ExperimentConfig blobs_config(Policy policy, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.backend = BackendKind::Ensemble;
  cfg.task = TaskKind::Blobs;
  cfg.blob_classes = 4;
  cfg.blob_points_per_class = 175;
  cfg.members = 20;
  cfg.initial_per_class = 1;
  cfg.test_size = 196;
  cfg.pool_size = 500;
  cfg.rounds = 10;
  cfg.acquisition.batch_size = 5;
  cfg.acquisition.policy = policy;
  cfg.record_timing = false;
  cfg.seed = seed;
  return cfg;
}

Outcome blobs_accuracy() {
  double ical_acc = 0.0, rand_acc = 0.0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    ical_acc += run_experiment(blobs_config(Policy::Ical, 200 + s)).back().accuracy / 10.0;
    rand_acc += run_experiment(blobs_config(Policy::Random, 200 + s)).back().accuracy / 10.0;
  }
  return {ical_acc >= rand_acc, fmt("final accuracy ICAL %.4f vs Random %.4f (10 seeds)", ical_acc, rand_acc)};
}

// ---- 8 ---------------------------------------------------------------------

Outcome scaling() {
  const Index n = 2000, m = 32, c = 10;
  std::mt19937_64 rng(8);
  PredictionTensor preds(n, m, c);
  for (Index i = 0; i < n; ++i) preds.point(i) = oracle::random_simplex_rows(m, c, rng);
  AcquisitionConfig cfg;
  cfg.batch_size = 100;
  cfg.rng_seed = 8;
  const KernelBank bank = build_kernel_bank(preds, cfg.kernel);
  const std::vector<Index> ls{1, 2, 5, 10, 20, 50, 100};
  const auto rows = timing_profile(bank, cfg, ls, 3);

  bool monotone = true;
  for (std::size_t k = 1; k < rows.size(); ++k) monotone = monotone && rows[k].seconds <= 1.2 * rows[k - 1].seconds;
  const double ratio = rows[0].seconds / rows[3].seconds;
  std::string table;
  for (const auto& r : rows) table += fmt(" L=%ld:%.3fs", static_cast<long>(r.minibatch), r.seconds);
  return {ratio >= 5.0 && ratio <= 15.0 && monotone,
          fmt("t(L=1)/t(L=10)=%.2f, monotone within 20%%: %s;", ratio, monotone ? "yes" : "no") + table};
}

// ---- 10 --------------------------------------------------------------------

// Points 0 and 1 are exact twins, point 2 is an independent informative point,
// the rest carry weaker, mutually independent signals.
PredictionTensor twin_pool(std::uint64_t seed) {
  const Index m = 32, c = 3, n = 6;
  std::mt19937_64 rng(seed);
  PredictionTensor p(n, m, c);
  p.point(0) = oracle::random_simplex_rows(m, c, rng);
  p.point(1) = p.point(0);
  p.point(2) = oracle::random_simplex_rows(m, c, rng);
  for (Index i = 3; i < n; ++i) {
    MatrixXd s = oracle::random_simplex_rows(m, c, rng);
    // Shrink towards uniform so these carry less dependence than the twins.
    p.point(i) = (0.3 * s.array() + 0.7 / static_cast<double>(c)).matrix();
  }
  return p;
}

Outcome pointwise_duplicates() {
  int both = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const PredictionTensor p = twin_pool(1000 + s);
    AcquisitionConfig cfg;
    cfg.batch_size = 2;
    cfg.rng_seed = s;
    const auto batch = select_ical_pointwise(p, cfg);
    const bool has0 = std::find(batch.indices.begin(), batch.indices.end(), 0) != batch.indices.end();
    const bool has1 = std::find(batch.indices.begin(), batch.indices.end(), 1) != batch.indices.end();
    if (has0 && has1) ++both;
  }
  int agree = 0;
  for (std::uint64_t s = 0; s < 10; ++s)
    if (run_experiment(example1_config(Policy::IcalPointwise, s)).back().acquired.front() != 0) ++agree;
  return {both == 0 && agree >= 9,
          fmt("both twins in %d/20 batches; Example 1 first pick in x2..x50 for %d/10 seeds", both, agree)};
}

// ---- 11 --------------------------------------------------------------------

Outcome property_suite() {
#ifdef ICAL_PROPERTY_BINARY
  const std::string cmd = std::string("\"") + ICAL_PROPERTY_BINARY + "\" --minimal > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return {rc == 0, fmt("property binary exit status %d", rc)};
#else
  return {false, "property binary path not configured"};
#endif
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, double limit_s, const std::function<Outcome()>& fn) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool pass = o.pass && secs < limit_s;
    if (!pass) ++failures;
    std::printf("criterion %2d: %s  [%.2fs / limit %.0fs]  %s\n", id, pass ? "PASS" : "FAIL", secs, limit_s,
                o.detail.c_str());
    std::fflush(stdout);
  };

  report(1, 1, example1_exactness);
  report(2, 10, additivity);
  report(3, 10, kernel_sum_psd);
  report(4, 10, estimator_oracle);
  report(5, 30, [] { return motivating_example(Policy::Ical); });

  // Criteria 6 and 9 share the same runs; 9 reports the shared runtime.
  RandomTaskRuns shared;
  double shared_secs = 0.0;
  report(6, 120, [&] {
    const auto start = std::chrono::steady_clock::now();
    shared = random_task_runs();
    shared_secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return Outcome{shared.ical_entropy < shared.random_entropy,
                   fmt("mean pool entropy after 10 rounds: ICAL %.4f vs Random %.4f (6 seeds)", shared.ical_entropy,
                       shared.random_entropy)};
  });
  report(7, 300, blobs_accuracy);
  report(8, 300, scaling);
  report(9, 120, [&] {
    return Outcome{shared.covering >= 5 && shared_secs < 120,
                   fmt("ICAL histogram covered all 4 classes in %d/6 seeds", shared.covering)};
  });
  report(10, 30, pointwise_duplicates);
  report(11, 300, property_suite);

  std::printf("%d criterion failure(s)\n", failures);
  return failures == 0 ? 0 : 1;
}
