#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "seqdesign/data.hpp"
#include "seqdesign/generator.hpp"
#include "seqdesign/metrics.hpp"
#include "seqdesign/regressor.hpp"

namespace seqdesign {

inline constexpr std::string_view kVersion = "1.0.0";

enum class DatasetKind { kSynthetic, kTabular, kAirfoil };

struct DatasetConfig {
  DatasetKind kind = DatasetKind::kSynthetic;
  // synthetic
  std::string problem = "linear-sum";
  std::size_t dimension = 4;
  std::size_t rows = 1000;
  std::optional<std::uint64_t> seed;
  // tabular
  std::filesystem::path path;
  DatasetSchema schema;
  // airfoil
  std::filesystem::path directory;
  std::size_t points_per_surface = 30;
  std::filesystem::path performance_csv;
  std::vector<std::string> performance_columns;
  // Optional random pick of at most this many designs before splitting.
  std::optional<std::size_t> max_rows;
};

struct SplitConfig {
  double reference_fraction = 0.7;
  std::optional<std::uint64_t> seed;
};

enum class ConditionSource { kTest, kDataset };

struct GenerationConfig {
  OrderKind order = OrderKind::kDefault;
  std::optional<std::uint64_t> order_seed;
  std::vector<std::string> permutation;  // parameter names, explicit order only
  double noise_std = 0.0;
  std::optional<std::uint64_t> noise_seed;
  std::size_t condition_count = 0;  // 0 = every available row
  ConditionSource condition_source = ConditionSource::kTest;
  std::optional<std::uint64_t> condition_seed;
};

enum class EvaluatorKind { kAnalytic, kSurrogate };

// knn with k = 5 unless the config says otherwise.
inline RegressorSpec default_surrogate_spec() {
  RegressorSpec spec;
  spec.backend = BackendKind::kKnn;
  spec.neighbors = 5;
  return spec;
}

struct EvaluatorConfig {
  EvaluatorKind kind = EvaluatorKind::kAnalytic;
  std::size_t surrogate_rows = 5000;
  RegressorSpec surrogate = default_surrogate_spec();
};

struct MetricsConfig {
  std::size_t prd_clusters = 20;
  std::size_t prd_resolution = 1001;
  std::size_t prd_seeds = 5;
  std::size_t kmeans_iterations = 100;
  std::optional<double> mmd_bandwidth;
  metrics::MmdEstimator mmd_estimator = metrics::MmdEstimator::kUnbiased;
};

struct StudyConfig {
  std::optional<std::uint64_t> seed;
  std::size_t repeats = 10;
  std::vector<std::uint64_t> order_seeds;
  std::vector<std::size_t> sizes;  // default 200, 400, ..., 10000
  std::size_t sweep_condition_count = 2000;
  std::vector<std::size_t> missing_counts;  // default 0..N
  std::size_t repeats_per_count = 3;
  std::vector<std::string> missing_parameters;  // inpaint subcommand
  std::optional<std::size_t> missing_count;     // inpaint subcommand
  double noise_std = 0.0001;
  std::size_t repeat_count = 1500;
  std::size_t condition_row = 0;
  std::vector<double> condition;  // explicit noise-study condition
  std::size_t num_reference_sets = 3;
  std::size_t reference_set_size = 0;  // 0 = whole reference split
  std::vector<std::uint64_t> reference_set_seeds;
  std::size_t workers = 1;
};

struct PlotConfig {
  std::vector<std::filesystem::path> inputs;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  DatasetConfig dataset;
  RegressorSpec regressor;
  SplitConfig split;
  GenerationConfig generation;
  EvaluatorConfig evaluator;
  MetricsConfig metrics;
  StudyConfig study;
  PlotConfig plot;
  std::filesystem::path output_directory = "results";

  // Stream seeds derived from `seed` unless set explicitly.
  std::uint64_t dataset_seed() const;
  std::uint64_t split_seed() const;
  std::uint64_t order_seed() const;
  std::uint64_t noise_seed() const;
  std::uint64_t condition_seed() const;
  std::uint64_t study_seed() const;
  std::uint64_t subset_seed() const;

  // 16 hex digits identifying every setting that affects results (the output
  // directory is excluded).
  std::string hash() const;
  // Canonical JSON text of the effective configuration.
  std::string to_json() const;
};

// Throws ConfigError on malformed JSON, wrong types, unknown keys or invalid
// values. Relative paths resolve against `base_directory`.
ExperimentConfig parse_config(std::string_view text,
                              const std::filesystem::path& base_directory = {});
ExperimentConfig load_config(const std::filesystem::path& path);

// Checks that every referenced input path exists; throws ConfigError.
void validate_paths(const ExperimentConfig& config);

std::vector<std::size_t> default_reference_sizes();

}  // namespace seqdesign
