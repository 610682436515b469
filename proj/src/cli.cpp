#include "ical/cli.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <sstream>

#include "ical/dhsic.hpp"
#include "ical/discrete_model.hpp"
#include "ical/errors.hpp"
#include "ical/harness.hpp"
#include "ical/tensor_io.hpp"

namespace ical {

namespace fs = std::filesystem;
using Eigen::Index;

namespace {

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

// ---- run -------------------------------------------------------------------

struct RunArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::vector<std::uint64_t> seeds;
  std::string out;
  bool no_timing = false;
};

std::vector<MetricsRecord> run_one(ExperimentConfig cfg, const fs::path& dir, bool timing) {
  cfg.record_timing = cfg.record_timing && timing;
  auto records = run_experiment(cfg);
  fs::create_directories(dir);
  write_results_csv(records, (dir / "results.csv").string(), cfg.record_timing);
  write_summary_json(cfg, records, (dir / "summary.json").string(), cfg.record_timing);
  return records;
}

int cmd_run(const RunArgs& args, std::ostream& out) {
  const ExperimentConfig base = load_config(args.config);
  const bool timing = !args.no_timing;
  if (args.seeds.empty()) {
    ExperimentConfig cfg = base;
    if (args.seed) cfg.seed = *args.seed;
    const auto records = run_one(cfg, args.out, timing);
    out << "final accuracy=" << fixed(records.back().accuracy, 6) << " nll=" << fixed(records.back().nll, 6)
        << " pool_entropy=" << fixed(records.back().pool_entropy, 6) << '\n';
    return kExitOk;
  }

  // One worker per seed, each writing only to its own subdirectory.
  std::vector<std::future<std::vector<MetricsRecord>>> jobs;
  for (std::uint64_t s : args.seeds) {
    ExperimentConfig cfg = base;
    cfg.seed = s;
    jobs.push_back(std::async(std::launch::async, run_one, cfg, fs::path(args.out) / ("seed_" + std::to_string(s)), timing));
  }
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    const auto records = jobs[k].get();
    out << "seed " << args.seeds[k] << " final accuracy=" << fixed(records.back().accuracy, 6)
        << " nll=" << fixed(records.back().nll, 6) << " pool_entropy=" << fixed(records.back().pool_entropy, 6)
        << '\n';
  }
  return kExitOk;
}

// ---- dhsic -----------------------------------------------------------------

struct DhsicArgs {
  std::vector<std::string> tensors;
  std::vector<Index> points;
  std::vector<double> scales;
};

int cmd_dhsic(const DhsicArgs& args, std::ostream& out, std::ostream& err) {
  KernelSpec spec;
  if (!args.scales.empty()) spec.scales = args.scales;
  spec.validate();

  std::vector<KernelMatrixd> kernels;
  std::optional<std::pair<Index, Index>> shape;
  for (const auto& path : args.tensors) {
    const PredictionTensor t = load_predictions(path);
    if (shape && *shape != std::pair{t.samples(), t.classes()})
      throw InvalidInput("tensor " + path + " has shape (m=" + std::to_string(t.samples()) + ", c=" +
                         std::to_string(t.classes()) + "), expected (m=" + std::to_string(shape->first) +
                         ", c=" + std::to_string(shape->second) + ")");
    shape = std::pair{t.samples(), t.classes()};
    for (Index i : args.points) {
      if (i < 0 || i >= t.points()) throw InvalidInput("point index " + std::to_string(i) + " out of range in " + path);
      kernels.push_back(kernel_matrix(t.point(i), spec));
    }
  }
  const auto stat = dhsic(kernels);
  if (stat.degenerate)
    err << "note: m=" << stat.m << " < 2d=" << 2 * stat.d << ", statistic defined as 0\n";
  out << fixed(stat.value, 12) << '\n';
  return kExitOk;
}

// ---- example1 --------------------------------------------------------------

int cmd_example1(Index points, std::ostream& out) {
  const DiscreteHypothesisModel model = example1_model(points);
  std::vector<Index> rest;  // x_2 .. x_L
  for (Index i = 1; i < points; ++i) rest.push_back(i);
  const std::span<const Index> after_x2(rest.data() + 1, rest.size() - 1);

  const ExactStats x1 = exact_stats(model, 0);
  const ExactStats x2 = exact_stats(model, 1);
  out << "mi_x1                      " << fixed(x1.mutual_information, 6) << '\n'
      << "mi_x2                      " << fixed(x2.mutual_information, 6) << '\n'
      << "expected_entropy_after_x1  " << fixed(expected_posterior_entropy(model, 0, rest), 6) << '\n'
      << "  given_y1_class4          " << fixed(posterior_entropy_given(model, 0, 3, rest), 6) << '\n'
      << "expected_entropy_after_x2  " << fixed(expected_posterior_entropy(model, 1, after_x2), 6) << '\n';
  return kExitOk;
}

// ---- report ----------------------------------------------------------------

struct Run {
  std::string policy;
  nlohmann::json records;
};

Run read_run(const fs::path& dir) {
  const fs::path file = fs::is_directory(dir) ? dir / "summary.json" : dir;
  std::ifstream in(file);
  if (!in) throw ConfigError("results", "cannot open " + file.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("results", file.string() + ": " + e.what());
  }
  if (!j.contains("format_version") || j["format_version"] != kResultsFormatVersion)
    throw ConfigError("format_version", file.string() + " has an incompatible format_version");
  return {j.at("policy").get<std::string>(), j.at("records")};
}

int cmd_report(const std::vector<std::string>& dirs, const std::string& out_path, std::ostream& out) {
  std::map<std::string, std::vector<nlohmann::json>> groups;
  for (const auto& d : dirs) {
    Run r = read_run(d);
    groups[r.policy].push_back(std::move(r.records));
  }

  std::size_t classes = 0;
  for (const auto& [policy, runs] : groups)
    for (const auto& recs : runs)
      if (!recs.empty()) classes = std::max(classes, recs.front().at("label_histogram").size());

  std::ofstream csv(out_path, std::ios::binary | std::ios::trunc);
  if (!csv) throw std::runtime_error("cannot write " + out_path);
  csv << "# format_version=" << kResultsFormatVersion
      << "; *_std columns are population standard deviations (divide by n)\n";
  csv << "policy,round,n_runs,train_size_mean";
  for (const char* f : {"accuracy", "nll", "pool_entropy"}) csv << ',' << f << "_mean," << f << "_std";
  for (std::size_t c = 0; c < classes; ++c) csv << ",hist_" << c << "_mean";
  csv << '\n';

  auto stats = [](const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    return std::pair{mean, std::sqrt(var / static_cast<double>(v.size()))};
  };
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return std::string(buf);
  };

  for (const auto& [policy, runs] : groups) {
    std::size_t rounds = runs.front().size();
    for (const auto& recs : runs) rounds = std::min(rounds, recs.size());
    for (std::size_t t = 0; t < rounds; ++t) {
      csv << policy << ',' << runs.front()[t].at("round").get<Index>() << ',' << runs.size();
      std::vector<double> train;
      for (const auto& recs : runs) train.push_back(recs[t].at("train_size").get<double>());
      csv << ',' << num(stats(train).first);
      for (const char* f : {"accuracy", "nll", "pool_entropy"}) {
        std::vector<double> v;
        for (const auto& recs : runs) v.push_back(recs[t].at(f).get<double>());
        const auto [mean, sd] = stats(v);
        csv << ',' << num(mean) << ',' << num(sd);
      }
      for (std::size_t c = 0; c < classes; ++c) {
        std::vector<double> v;
        for (const auto& recs : runs) {
          const auto& h = recs[t].at("label_histogram");
          v.push_back(c < h.size() ? h[c].get<double>() : 0.0);
        }
        csv << ',' << num(stats(v).first);
      }
      csv << '\n';
    }
  }
  if (!csv) throw std::runtime_error("failed writing " + out_path);
  out << "wrote " << groups.size() << " policy group(s) to " << out_path << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Batch active learning with kernel dependence (dHSIC) acquisition", "ical"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run an active-learning experiment from a config file");
  run_cmd->add_option("--config", run.config, "Experiment config file (key = value lines)")->required()->check(CLI::ExistingFile);
  auto* seed_opt = run_cmd->add_option("--seed", run.seed, "Override the config seed");
  run_cmd->add_option("--seeds", run.seeds, "Run several seeds in parallel into <out>/seed_<n>/")
      ->delimiter(',')
      ->excludes(seed_opt);
  run_cmd->add_option("--out", run.out, "Output directory for results.csv and summary.json")->required();
  run_cmd->add_flag("--no-timing", run.no_timing, "Omit wall-clock columns so outputs are byte-reproducible");

  DhsicArgs dh;
  auto* dhsic_cmd = app.add_subcommand("dhsic", "dHSIC of selected points' kernels from prediction-tensor files");
  dhsic_cmd->add_option("--tensors", dh.tensors, "One or more prediction-tensor files")->required()->check(CLI::ExistingFile);
  dhsic_cmd->add_option("--point-indices", dh.points, "Comma-separated point indices taken from every file")
      ->required()
      ->delimiter(',');
  dhsic_cmd->add_option("--scales", dh.scales, "Comma-separated rational-quadratic mixture exponents")->delimiter(',');

  Index ex_points = 50;
  auto* ex_cmd = app.add_subcommand("example1", "Exact values for the ten-hypothesis motivating example");
  ex_cmd->add_option("--L", ex_points, "Number of points x_1..x_L (>= 2)")->capture_default_str();

  std::vector<std::string> report_dirs;
  std::string report_out;
  auto* report_cmd = app.add_subcommand("report", "Merge runs into mean/std curves per policy");
  report_cmd->add_option("--results", report_dirs, "Run directories (or summary.json files)")->required();
  report_cmd->add_option("--out", report_out, "Output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run_cmd) return cmd_run(run, out);
    if (*dhsic_cmd) return cmd_dhsic(dh, out, err);
    if (*ex_cmd) {
      if (ex_points < 2) throw InvalidInput("--L must be >= 2");
      return cmd_example1(ex_points, out);
    }
    if (*report_cmd) return cmd_report(report_dirs, report_out, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace ical
