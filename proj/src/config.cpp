#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <fstream>
#include <functional>
#include <sstream>

#include "ical/errors.hpp"
#include "ical/harness.hpp"

namespace ical {

using Eigen::Index;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError(key, "expected an integer, got '" + v + "'");
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError(key, "expected a non-negative integer, got '" + v + "'");
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size() && std::isfinite(d)) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError(key, "expected a number, got '" + v + "'");
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key, "expected true/false, got '" + v + "'");
}

std::vector<Index> to_index_list(const std::string& key, const std::string& v) {
  std::vector<Index> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto dash = item.find('-', 1);
    if (dash == std::string::npos) {
      out.push_back(to_int(key, item));
      continue;
    }
    const long long lo = to_int(key, trim(item.substr(0, dash)));
    const long long hi = to_int(key, trim(item.substr(dash + 1)));
    if (hi < lo) throw ConfigError(key, "empty range '" + item + "'");
    for (long long i = lo; i <= hi; ++i) out.push_back(i);
  }
  return out;
}

std::vector<double> to_double_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!trim(item).empty()) out.push_back(to_double(key, trim(item)));
  return out;
}

Index positive(const std::string& key, long long v) {
  if (v < 1) throw ConfigError(key, "must be >= 1");
  return v;
}

Index non_negative(const std::string& key, long long v) {
  if (v < 0) throw ConfigError(key, "must be >= 0");
  return v;
}

std::string join(const std::vector<Index>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

std::string fmt_double(double d) {
  std::ostringstream os;
  os.precision(17);
  os << d;
  return os.str();
}

using Setter = std::function<void(ExperimentConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"backend",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         if (v == "discrete") c.backend = BackendKind::Discrete;
         else if (v == "ensemble") c.backend = BackendKind::Ensemble;
         else if (v == "external") c.backend = BackendKind::External;
         else throw ConfigError(k, "expected discrete, ensemble or external");
       }},
      {"task",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         if (v == "example1") c.task = TaskKind::Example1;
         else if (v == "random") c.task = TaskKind::RandomHypotheses;
         else if (v == "blobs") c.task = TaskKind::Blobs;
         else if (v == "csv") c.task = TaskKind::Csv;
         else throw ConfigError(k, "expected example1, random, blobs or csv");
       }},
      {"points", [](auto& c, auto& k, auto& v) { c.example1_points = c.random_task.points = positive(k, to_int(k, v)); }},
      {"hypotheses", [](auto& c, auto& k, auto& v) { c.random_task.hypotheses = positive(k, to_int(k, v)); }},
      {"classes", [](auto& c, auto& k, auto& v) { c.random_task.classes = c.blob_classes = positive(k, to_int(k, v)); }},
      {"dim", [](auto& c, auto& k, auto& v) { c.random_task.dim = positive(k, to_int(k, v)); }},
      {"temperature", [](auto& c, auto& k, auto& v) { c.random_task.temperature = to_double(k, v); }},
      {"jitter", [](auto& c, auto& k, auto& v) { c.random_task.jitter = to_double(k, v); }},
      {"true_hypothesis", [](auto& c, auto& k, auto& v) { c.true_hypothesis = non_negative(k, to_int(k, v)); }},
      {"points_per_class", [](auto& c, auto& k, auto& v) { c.blob_points_per_class = positive(k, to_int(k, v)); }},
      {"radius", [](auto& c, auto& k, auto& v) { c.blob_radius = to_double(k, v); }},
      {"spread", [](auto& c, auto& k, auto& v) { c.blob_spread = to_double(k, v); }},
      {"dataset", [](auto& c, auto&, auto& v) { c.dataset_path = v; }},
      {"tensor", [](auto& c, auto&, auto& v) { c.tensor_path = v; }},
      {"members", [](auto& c, auto& k, auto& v) { c.members = static_cast<int>(positive(k, to_int(k, v))); }},
      {"epochs", [](auto& c, auto& k, auto& v) { c.hyper.epochs = static_cast<int>(non_negative(k, to_int(k, v))); }},
      {"learning_rate", [](auto& c, auto& k, auto& v) { c.hyper.learning_rate = to_double(k, v); }},
      {"bootstrap_fraction", [](auto& c, auto& k, auto& v) { c.hyper.bootstrap_fraction = to_double(k, v); }},
      {"weight_decay", [](auto& c, auto& k, auto& v) { c.hyper.weight_decay = to_double(k, v); }},
      {"policy",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         const auto p = parse_policy(v);
         if (!p) throw ConfigError(k, "unknown policy '" + v + "'");
         c.acquisition.policy = *p;
       }},
      {"batch_size", [](auto& c, auto& k, auto& v) { c.acquisition.batch_size = positive(k, to_int(k, v)); }},
      {"subsample", [](auto& c, auto& k, auto& v) { c.acquisition.subsample = positive(k, to_int(k, v)); }},
      {"minibatch", [](auto& c, auto& k, auto& v) { c.acquisition.minibatch = positive(k, to_int(k, v)); }},
      {"mc_samples", [](auto& c, auto& k, auto& v) { c.acquisition.mc_samples = positive(k, to_int(k, v)); }},
      {"beta", [](auto& c, auto& k, auto& v) { c.acquisition.beta = to_double(k, v); }},
      {"kernel_scales", [](auto& c, auto& k, auto& v) { c.acquisition.kernel.scales = to_double_list(k, v); }},
      {"rounds", [](auto& c, auto& k, auto& v) { c.rounds = positive(k, to_int(k, v)); }},
      {"initial_indices", [](auto& c, auto& k, auto& v) { c.initial_indices = to_index_list(k, v); }},
      {"pool_indices", [](auto& c, auto& k, auto& v) { c.pool_indices = to_index_list(k, v); }},
      {"test_indices", [](auto& c, auto& k, auto& v) { c.test_indices = to_index_list(k, v); }},
      {"initial_per_class", [](auto& c, auto& k, auto& v) { c.initial_per_class = non_negative(k, to_int(k, v)); }},
      {"test_size", [](auto& c, auto& k, auto& v) { c.test_size = non_negative(k, to_int(k, v)); }},
      {"pool_size", [](auto& c, auto& k, auto& v) { c.pool_size = non_negative(k, to_int(k, v)); }},
      {"timing", [](auto& c, auto& k, auto& v) { c.record_timing = to_bool(k, v); }},
      {"seed", [](auto& c, auto& k, auto& v) { c.seed = to_u64(k, v); }},
  };
  return table;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no), "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError(key, "unknown key");
    if (!seen.insert(key).second) throw ConfigError(key, "given more than once");
    it->second(cfg, key, value);
  }
  try {
    cfg.acquisition.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError("acquisition", e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::map<std::string, std::string> config_echo(const ExperimentConfig& c) {
  std::map<std::string, std::string> m;
  static constexpr const char* kBackends[] = {"discrete", "ensemble", "external"};
  static constexpr const char* kTasks[] = {"example1", "random", "blobs", "csv"};
  m["backend"] = kBackends[static_cast<int>(c.backend)];
  m["task"] = kTasks[static_cast<int>(c.task)];
  switch (c.task) {
    case TaskKind::Example1:
      m["points"] = std::to_string(c.example1_points);
      break;
    case TaskKind::RandomHypotheses:
      m["points"] = std::to_string(c.random_task.points);
      m["hypotheses"] = std::to_string(c.random_task.hypotheses);
      m["classes"] = std::to_string(c.random_task.classes);
      m["dim"] = std::to_string(c.random_task.dim);
      m["temperature"] = fmt_double(c.random_task.temperature);
      m["jitter"] = fmt_double(c.random_task.jitter);
      break;
    case TaskKind::Blobs:
      m["classes"] = std::to_string(c.blob_classes);
      m["points_per_class"] = std::to_string(c.blob_points_per_class);
      m["radius"] = fmt_double(c.blob_radius);
      m["spread"] = fmt_double(c.blob_spread);
      break;
    case TaskKind::Csv:
      break;
  }
  if (c.true_hypothesis) m["true_hypothesis"] = std::to_string(*c.true_hypothesis);
  if (!c.dataset_path.empty()) m["dataset"] = c.dataset_path;
  if (!c.tensor_path.empty()) m["tensor"] = c.tensor_path;
  if (c.backend == BackendKind::Ensemble) {
    m["members"] = std::to_string(c.members);
    m["epochs"] = std::to_string(c.hyper.epochs);
    m["learning_rate"] = fmt_double(c.hyper.learning_rate);
    m["bootstrap_fraction"] = fmt_double(c.hyper.bootstrap_fraction);
    m["weight_decay"] = fmt_double(c.hyper.weight_decay);
  }
  const auto& a = c.acquisition;
  m["policy"] = std::string(policy_name(a.policy));
  m["batch_size"] = std::to_string(a.batch_size);
  m["subsample"] = std::to_string(a.subsample);
  m["minibatch"] = std::to_string(a.minibatch);
  m["mc_samples"] = std::to_string(a.mc_samples);
  m["beta"] = fmt_double(a.beta);
  std::string scales;
  for (std::size_t i = 0; i < a.kernel.scales.size(); ++i) scales += (i ? "," : "") + fmt_double(a.kernel.scales[i]);
  m["kernel_scales"] = scales;
  m["rounds"] = std::to_string(c.rounds);
  if (!c.initial_indices.empty()) m["initial_indices"] = join(c.initial_indices);
  if (!c.pool_indices.empty()) m["pool_indices"] = join(c.pool_indices);
  if (!c.test_indices.empty()) m["test_indices"] = join(c.test_indices);
  m["initial_per_class"] = std::to_string(c.initial_per_class);
  m["test_size"] = std::to_string(c.test_size);
  m["pool_size"] = std::to_string(c.pool_size);
  m["timing"] = c.record_timing ? "true" : "false";
  m["seed"] = std::to_string(c.seed);
  return m;
}

}  // namespace ical
