#include "seqdesign/config.hpp"

#include <cstdio>
#include <set>

#include <json.hpp>

#include "seqdesign/csv.hpp"
#include "seqdesign/errors.hpp"
#include "seqdesign/random.hpp"
#include "seqdesign/synthetic.hpp"

namespace seqdesign {
namespace {

using nlohmann::json;

// Reads keys of one JSON object and reports any key nobody asked for.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ConfigError(name_ + " must be an object");
  }

  bool has(const char* key) {
    used_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  const json& raw(const char* key) {
    used_.insert(key);
    return j_.at(key);
  }

  std::string path(const char* key) const { return name_.empty() ? key : name_ + "." + key; }

  template <typename T>
  void read(const char* key, T& out) {
    if (!has(key)) return;
    out = convert<T>(j_.at(key), path(key));
  }

  template <typename T>
  void read(const char* key, std::optional<T>& out) {
    if (!has(key)) return;
    out = convert<T>(j_.at(key), path(key));
  }

  template <typename T>
  static T convert(const json& v, const std::string& where) {
    try {
      if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
        if (!v.is_number_integer() || (v.is_number_integer() && v.get<long long>() < 0 &&
                                       !v.is_number_unsigned())) {
          throw ConfigError(where + " must be a non-negative integer");
        }
        return v.get<T>();
      } else if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw ConfigError(where + " must be a number");
        return v.get<double>();
      } else if constexpr (std::is_same_v<T, int>) {
        if (!v.is_number_integer()) throw ConfigError(where + " must be an integer");
        return v.get<int>();
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError(where + " must be a boolean");
        return v.get<bool>();
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError(where + " must be a string");
        return v.get<std::string>();
      } else {
        if (!v.is_array()) throw ConfigError(where + " must be an array");
        T out;
        for (std::size_t i = 0; i < v.size(); ++i) {
          out.push_back(convert<typename T::value_type>(v[i], where + "[" + std::to_string(i) + "]"));
        }
        return out;
      }
    } catch (const json::exception& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) throw ConfigError("unknown config key: " + path(it.key().c_str()));
    }
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> used_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) return base / path;
  return path;
}

void parse_regressor(Section& s, RegressorSpec& spec) {
  std::string backend;
  s.read("backend", backend);
  if (!backend.empty()) {
    try {
      spec.backend = parse_backend_kind(backend);
    } catch (const ArgumentError& e) {
      throw ConfigError(s.path("backend") + ": " + e.what());
    }
  }
  s.read("bandwidth", spec.bandwidth);
  s.read("neighbors", spec.neighbors);
  s.read("endpoint", spec.endpoint);
  s.read("capacity", spec.capacity);
  s.read("bins", spec.bins);
  s.read("timeout_ms", spec.timeout_ms);
  s.read("retries", spec.retries);
  s.finish();
}

json regressor_json(const RegressorSpec& r) {
  json j;
  j["backend"] = std::string(backend_name(r.backend));
  j["bandwidth"] = r.bandwidth ? json(*r.bandwidth) : json(nullptr);
  j["neighbors"] = r.neighbors;
  j["endpoint"] = r.endpoint;
  j["capacity"] = r.capacity;
  j["bins"] = r.bins;
  j["timeout_ms"] = r.timeout_ms;
  j["retries"] = r.retries;
  return j;
}

template <typename T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

std::string order_name(OrderKind k) {
  switch (k) {
    case OrderKind::kDefault:
      return "default";
    case OrderKind::kRandom:
      return "random";
    case OrderKind::kExplicit:
      return "explicit";
  }
  return "default";
}

std::string dataset_kind_name(DatasetKind k) {
  switch (k) {
    case DatasetKind::kSynthetic:
      return "synthetic";
    case DatasetKind::kTabular:
      return "tabular";
    case DatasetKind::kAirfoil:
      return "airfoil";
  }
  return "synthetic";
}

}  // namespace

std::vector<std::size_t> default_reference_sizes() {
  std::vector<std::size_t> sizes;
  for (std::size_t s = 200; s <= 10000; s += 200) sizes.push_back(s);
  return sizes;
}

std::uint64_t ExperimentConfig::dataset_seed() const {
  return dataset.seed ? *dataset.seed : derive_seed(seed, 1);
}
std::uint64_t ExperimentConfig::split_seed() const {
  return split.seed ? *split.seed : derive_seed(seed, 2);
}
std::uint64_t ExperimentConfig::order_seed() const {
  return generation.order_seed ? *generation.order_seed : derive_seed(seed, 3);
}
std::uint64_t ExperimentConfig::noise_seed() const {
  return generation.noise_seed ? *generation.noise_seed : derive_seed(seed, 4);
}
std::uint64_t ExperimentConfig::condition_seed() const {
  return generation.condition_seed ? *generation.condition_seed : derive_seed(seed, 5);
}
std::uint64_t ExperimentConfig::study_seed() const {
  return study.seed ? *study.seed : derive_seed(seed, 6);
}
std::uint64_t ExperimentConfig::subset_seed() const { return derive_seed(seed, 7); }

std::string ExperimentConfig::to_json() const {
  json j;
  j["seed"] = seed;
  json d;
  d["kind"] = dataset_kind_name(dataset.kind);
  d["problem"] = dataset.problem;
  d["dimension"] = dataset.dimension;
  d["rows"] = dataset.rows;
  d["seed"] = opt(dataset.seed);
  d["path"] = dataset.path.string();
  d["performance_columns"] = dataset.kind == DatasetKind::kAirfoil ? dataset.performance_columns
                                                                    : dataset.schema.performance_columns;
  d["parameter_columns"] = dataset.schema.parameter_columns;
  d["boolean_columns"] = dataset.schema.boolean_columns;
  d["directory"] = dataset.directory.string();
  d["points_per_surface"] = dataset.points_per_surface;
  d["performance_csv"] = dataset.performance_csv.string();
  d["max_rows"] = opt(dataset.max_rows);
  j["dataset"] = d;
  j["regressor"] = regressor_json(regressor);
  j["split"] = {{"reference_fraction", split.reference_fraction}, {"seed", opt(split.seed)}};
  j["generation"] = {{"order", order_name(generation.order)},
                     {"order_seed", opt(generation.order_seed)},
                     {"permutation", generation.permutation},
                     {"noise_std", generation.noise_std},
                     {"noise_seed", opt(generation.noise_seed)},
                     {"condition_count", generation.condition_count},
                     {"condition_source",
                      generation.condition_source == ConditionSource::kTest ? "test" : "dataset"},
                     {"condition_seed", opt(generation.condition_seed)}};
  j["evaluator"] = {{"kind", evaluator.kind == EvaluatorKind::kAnalytic ? "analytic" : "surrogate"},
                    {"surrogate_rows", evaluator.surrogate_rows},
                    {"surrogate", regressor_json(evaluator.surrogate)}};
  j["metrics"] = {{"prd_clusters", metrics.prd_clusters},
                  {"prd_resolution", metrics.prd_resolution},
                  {"prd_seeds", metrics.prd_seeds},
                  {"kmeans_iterations", metrics.kmeans_iterations},
                  {"mmd_bandwidth", opt(metrics.mmd_bandwidth)},
                  {"mmd_estimator",
                   metrics.mmd_estimator == metrics::MmdEstimator::kUnbiased ? "unbiased" : "biased"}};
  j["study"] = {{"seed", opt(study.seed)},
                {"repeats", study.repeats},
                {"order_seeds", study.order_seeds},
                {"sizes", study.sizes},
                {"sweep_condition_count", study.sweep_condition_count},
                {"missing_counts", study.missing_counts},
                {"repeats_per_count", study.repeats_per_count},
                {"missing_parameters", study.missing_parameters},
                {"missing_count", opt(study.missing_count)},
                {"noise_std", study.noise_std},
                {"repeat_count", study.repeat_count},
                {"condition_row", study.condition_row},
                {"condition", study.condition},
                {"num_reference_sets", study.num_reference_sets},
                {"reference_set_size", study.reference_set_size},
                {"reference_set_seeds", study.reference_set_seeds}};
  return j.dump();
}

std::string ExperimentConfig::hash() const {
  const std::string text = to_json();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_directory) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  Section top(root, "");
  top.read("seed", cfg.seed);

  if (top.has("dataset")) {
    Section s(top.raw("dataset"), "dataset");
    std::string kind = "synthetic";
    s.read("kind", kind);
    if (kind == "synthetic") {
      cfg.dataset.kind = DatasetKind::kSynthetic;
    } else if (kind == "tabular") {
      cfg.dataset.kind = DatasetKind::kTabular;
    } else if (kind == "airfoil") {
      cfg.dataset.kind = DatasetKind::kAirfoil;
    } else {
      throw ConfigError("dataset.kind must be synthetic, tabular or airfoil, got " + kind);
    }
    s.read("problem", cfg.dataset.problem);
    s.read("dimension", cfg.dataset.dimension);
    s.read("rows", cfg.dataset.rows);
    s.read("seed", cfg.dataset.seed);
    std::string path;
    s.read("path", path);
    if (!path.empty()) cfg.dataset.path = resolve(base_directory, path);
    std::vector<std::string> perf;
    s.read("performance_columns", perf);
    s.read("parameter_columns", cfg.dataset.schema.parameter_columns);
    s.read("boolean_columns", cfg.dataset.schema.boolean_columns);
    cfg.dataset.schema.performance_columns = perf;
    cfg.dataset.performance_columns = perf;
    std::string dir;
    s.read("directory", dir);
    if (!dir.empty()) cfg.dataset.directory = resolve(base_directory, dir);
    s.read("points_per_surface", cfg.dataset.points_per_surface);
    std::string perf_csv;
    s.read("performance_csv", perf_csv);
    if (!perf_csv.empty()) cfg.dataset.performance_csv = resolve(base_directory, perf_csv);
    s.read("max_rows", cfg.dataset.max_rows);
    s.finish();
  }
  if (top.has("regressor")) {
    Section s(top.raw("regressor"), "regressor");
    parse_regressor(s, cfg.regressor);
  }
  if (top.has("split")) {
    Section s(top.raw("split"), "split");
    s.read("reference_fraction", cfg.split.reference_fraction);
    s.read("seed", cfg.split.seed);
    s.finish();
  }
  if (top.has("generation")) {
    Section s(top.raw("generation"), "generation");
    std::string order = "default";
    s.read("order", order);
    if (order == "default") {
      cfg.generation.order = OrderKind::kDefault;
    } else if (order == "random") {
      cfg.generation.order = OrderKind::kRandom;
    } else if (order == "explicit") {
      cfg.generation.order = OrderKind::kExplicit;
    } else {
      throw ConfigError("generation.order must be default, random or explicit, got " + order);
    }
    s.read("order_seed", cfg.generation.order_seed);
    s.read("permutation", cfg.generation.permutation);
    s.read("noise_std", cfg.generation.noise_std);
    s.read("noise_seed", cfg.generation.noise_seed);
    s.read("condition_count", cfg.generation.condition_count);
    std::string source = "test";
    s.read("condition_source", source);
    if (source == "test") {
      cfg.generation.condition_source = ConditionSource::kTest;
    } else if (source == "dataset") {
      cfg.generation.condition_source = ConditionSource::kDataset;
    } else {
      throw ConfigError("generation.condition_source must be test or dataset, got " + source);
    }
    s.read("condition_seed", cfg.generation.condition_seed);
    s.finish();
  }
  if (top.has("evaluator")) {
    Section s(top.raw("evaluator"), "evaluator");
    std::string kind = "analytic";
    s.read("kind", kind);
    if (kind == "analytic") {
      cfg.evaluator.kind = EvaluatorKind::kAnalytic;
    } else if (kind == "surrogate") {
      cfg.evaluator.kind = EvaluatorKind::kSurrogate;
    } else {
      throw ConfigError("evaluator.kind must be analytic or surrogate, got " + kind);
    }
    s.read("surrogate_rows", cfg.evaluator.surrogate_rows);
    if (s.has("surrogate")) {
      Section r(s.raw("surrogate"), "evaluator.surrogate");
      parse_regressor(r, cfg.evaluator.surrogate);
    }
    s.finish();
  } else if (cfg.dataset.kind != DatasetKind::kSynthetic) {
    cfg.evaluator.kind = EvaluatorKind::kSurrogate;
  }
  if (top.has("metrics")) {
    Section s(top.raw("metrics"), "metrics");
    s.read("prd_clusters", cfg.metrics.prd_clusters);
    s.read("prd_resolution", cfg.metrics.prd_resolution);
    s.read("prd_seeds", cfg.metrics.prd_seeds);
    s.read("kmeans_iterations", cfg.metrics.kmeans_iterations);
    s.read("mmd_bandwidth", cfg.metrics.mmd_bandwidth);
    std::string estimator = "unbiased";
    s.read("mmd_estimator", estimator);
    if (estimator == "unbiased") {
      cfg.metrics.mmd_estimator = metrics::MmdEstimator::kUnbiased;
    } else if (estimator == "biased") {
      cfg.metrics.mmd_estimator = metrics::MmdEstimator::kBiased;
    } else {
      throw ConfigError("metrics.mmd_estimator must be unbiased or biased, got " + estimator);
    }
    s.finish();
  }
  if (top.has("study")) {
    Section s(top.raw("study"), "study");
    s.read("seed", cfg.study.seed);
    s.read("repeats", cfg.study.repeats);
    s.read("order_seeds", cfg.study.order_seeds);
    s.read("sizes", cfg.study.sizes);
    s.read("sweep_condition_count", cfg.study.sweep_condition_count);
    s.read("missing_counts", cfg.study.missing_counts);
    s.read("repeats_per_count", cfg.study.repeats_per_count);
    s.read("missing_parameters", cfg.study.missing_parameters);
    s.read("missing_count", cfg.study.missing_count);
    s.read("noise_std", cfg.study.noise_std);
    s.read("repeat_count", cfg.study.repeat_count);
    s.read("condition_row", cfg.study.condition_row);
    s.read("condition", cfg.study.condition);
    s.read("num_reference_sets", cfg.study.num_reference_sets);
    s.read("reference_set_size", cfg.study.reference_set_size);
    s.read("reference_set_seeds", cfg.study.reference_set_seeds);
    s.read("workers", cfg.study.workers);
    s.finish();
  }
  if (top.has("plot")) {
    Section s(top.raw("plot"), "plot");
    std::vector<std::string> inputs;
    s.read("inputs", inputs);
    for (const auto& p : inputs) cfg.plot.inputs.push_back(resolve(base_directory, p));
    s.finish();
  }
  if (top.has("output")) {
    Section s(top.raw("output"), "output");
    std::string dir;
    s.read("directory", dir);
    if (!dir.empty()) cfg.output_directory = resolve(base_directory, dir);
    s.finish();
  }
  top.finish();

  // Value checks that need no filesystem access.
  try {
    cfg.regressor.validate();
    cfg.evaluator.surrogate.validate();
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("regressor: ") + e.what());
  }
  if (!(cfg.split.reference_fraction > 0.0 && cfg.split.reference_fraction < 1.0)) {
    throw ConfigError("split.reference_fraction must lie in (0, 1)");
  }
  if (cfg.generation.noise_std < 0.0 || cfg.study.noise_std < 0.0) {
    throw ConfigError("noise_std must be non-negative");
  }
  if (cfg.metrics.prd_resolution % 2 == 0) {
    throw ConfigError("metrics.prd_resolution must be odd so that slope 1 is on the grid");
  }
  if (cfg.metrics.prd_clusters < 2) throw ConfigError("metrics.prd_clusters must be at least 2");
  if (cfg.metrics.prd_seeds == 0) throw ConfigError("metrics.prd_seeds must be positive");
  if (cfg.metrics.mmd_bandwidth && !(*cfg.metrics.mmd_bandwidth > 0.0)) {
    throw ConfigError("metrics.mmd_bandwidth must be positive");
  }
  if (cfg.generation.order == OrderKind::kExplicit && cfg.generation.permutation.empty()) {
    throw ConfigError("generation.permutation is required for explicit order");
  }
  switch (cfg.dataset.kind) {
    case DatasetKind::kSynthetic: {
      try {
        make_synthetic_problem(cfg.dataset.problem, cfg.dataset.dimension);
      } catch (const ArgumentError& e) {
        throw ConfigError(std::string("dataset: ") + e.what());
      }
      if (cfg.dataset.rows < 2) throw ConfigError("dataset.rows must be at least 2");
      break;
    }
    case DatasetKind::kTabular:
      if (cfg.dataset.path.empty()) throw ConfigError("dataset.path is required for tabular data");
      try {
        cfg.dataset.schema.validate();
      } catch (const SchemaError& e) {
        throw ConfigError(std::string("dataset schema: ") + e.what());
      }
      break;
    case DatasetKind::kAirfoil:
      if (cfg.dataset.directory.empty()) throw ConfigError("dataset.directory is required for airfoils");
      if (cfg.dataset.performance_csv.empty()) {
        throw ConfigError("dataset.performance_csv is required for airfoils");
      }
      if (cfg.dataset.performance_columns.empty()) {
        throw ConfigError("dataset.performance_columns is required for airfoils");
      }
      if (cfg.dataset.points_per_surface < 2) throw ConfigError("dataset.points_per_surface must be >= 2");
      break;
  }
  if (cfg.evaluator.kind == EvaluatorKind::kAnalytic && cfg.dataset.kind != DatasetKind::kSynthetic) {
    throw ConfigError("the analytic evaluator is only available for synthetic datasets");
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
  return parse_config(text, path.parent_path());
}

void validate_paths(const ExperimentConfig& config) {
  auto require = [](const std::filesystem::path& p, const char* what) {
    if (!std::filesystem::exists(p)) throw ConfigError(std::string(what) + " does not exist: " + p.string());
  };
  switch (config.dataset.kind) {
    case DatasetKind::kSynthetic:
      break;
    case DatasetKind::kTabular:
      require(config.dataset.path, "dataset.path");
      break;
    case DatasetKind::kAirfoil:
      require(config.dataset.directory, "dataset.directory");
      require(config.dataset.performance_csv, "dataset.performance_csv");
      break;
  }
  for (const auto& p : config.plot.inputs) require(p, "plot input");
}

}  // namespace seqdesign
