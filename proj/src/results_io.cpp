#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "ical/harness.hpp"

namespace ical {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

}  // namespace

void write_results_csv(const std::vector<MetricsRecord>& records, const std::string& path, bool include_timing) {
  std::ofstream out = open_out(path);
  const std::size_t classes = records.empty() ? 0 : records.front().label_histogram.size();
  out << "format_version,round,train_size,accuracy,nll,pool_entropy";
  if (include_timing) out << ",seconds";
  for (std::size_t c = 0; c < classes; ++c) out << ",hist_" << c;
  out << ",acquired\n";
  for (const auto& r : records) {
    out << kResultsFormatVersion << ',' << r.round << ',' << r.train_size << ',' << num(r.accuracy) << ','
        << num(r.nll) << ',' << num(r.pool_entropy);
    if (include_timing) out << ',' << num(r.seconds);
    for (Eigen::Index h : r.label_histogram) out << ',' << h;
    out << ',';
    for (std::size_t i = 0; i < r.acquired.size(); ++i) out << (i ? ";" : "") << r.acquired[i];
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path);
}

void write_summary_json(const ExperimentConfig& cfg, const std::vector<MetricsRecord>& records,
                        const std::string& path, bool include_timing) {
  nlohmann::ordered_json j;
  j["format_version"] = kResultsFormatVersion;
  j["policy"] = std::string(policy_name(cfg.acquisition.policy));
  j["seed"] = cfg.seed;
  nlohmann::ordered_json echo = nlohmann::ordered_json::object();
  for (const auto& [k, v] : config_echo(cfg)) echo[k] = v;
  j["config"] = echo;
  nlohmann::ordered_json recs = nlohmann::ordered_json::array();
  for (const auto& r : records) {
    nlohmann::ordered_json o;
    o["round"] = r.round;
    o["train_size"] = r.train_size;
    o["accuracy"] = r.accuracy;
    o["nll"] = r.nll;
    o["pool_entropy"] = r.pool_entropy;
    o["label_histogram"] = r.label_histogram;
    if (include_timing) o["seconds"] = r.seconds;
    o["acquired"] = r.acquired;
    recs.push_back(std::move(o));
  }
  j["records"] = recs;
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace ical
