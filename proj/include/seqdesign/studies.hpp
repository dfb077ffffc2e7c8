#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "seqdesign/config.hpp"
#include "seqdesign/csv.hpp"
#include "seqdesign/data.hpp"
#include "seqdesign/evaluator.hpp"
#include "seqdesign/generator.hpp"

namespace seqdesign {

// Dataset, split and performance evaluator shared by every study.
struct PreparedExperiment {
  Dataset dataset;
  Dataset reference;
  Dataset test;
  std::shared_ptr<const PerformanceEvaluator> evaluator;
  // Filled for the surrogate evaluator: accuracy on the test split.
  std::optional<SurrogateEvaluator::Fidelity> surrogate_fidelity;
};

PreparedExperiment prepare_experiment(const ExperimentConfig& config);

// Row indices (into the test split, or the whole dataset when the config
// says so) used as generation conditions, in ascending order. `count` 0
// means every row; larger counts than available are clamped.
std::vector<std::size_t> select_condition_rows(const ExperimentConfig& config,
                                               const PreparedExperiment& prepared,
                                               std::size_t count);
const Dataset& condition_source(const ExperimentConfig& config, const PreparedExperiment& prepared);

// The configured order policy restricted to `unknown` parameter indices.
OrderPolicy make_order_policy(const ExperimentConfig& config, const DatasetSchema& schema,
                              const std::vector<std::size_t>& unknown);

struct IndicatorErrors {
  std::vector<double> mape;  // percent, per indicator
  std::vector<double> mae;
  std::vector<std::size_t> skipped;
};

IndicatorErrors performance_errors(const Matrix& targets, const Matrix& achieved);

// Every study writes its tables (and figures) into the output directory and
// also returns them. Each table carries a provenance comment line:
//   #kind=<kind>,config_hash=<hex>,seed=<n>,backend=<name>,seqdesign=<version>
struct StudyOutput {
  std::vector<CsvTable> tables;
  std::vector<std::filesystem::path> files;

  const CsvTable& table(const std::string& kind) const;
};

StudyOutput run_generate(const ExperimentConfig& config);
StudyOutput run_inpaint(const ExperimentConfig& config);
StudyOutput run_generation_eval(const ExperimentConfig& config);
StudyOutput run_order_study(const ExperimentConfig& config, std::size_t repeats);
StudyOutput run_reference_size_sweep(const ExperimentConfig& config,
                                     const std::vector<std::size_t>& sizes);
StudyOutput run_inpainting_sweep(const ExperimentConfig& config,
                                 const std::vector<std::size_t>& missing_counts,
                                 std::size_t repeats_per_count);
StudyOutput run_noise_study(const ExperimentConfig& config, double noise_std,
                            std::size_t repeat_count);
StudyOutput run_reference_variation_study(const ExperimentConfig& config,
                                          std::size_t num_reference_sets);
// Renders the given result CSVs (or every CSV in the output directory when
// `inputs` is empty) to SVG.
StudyOutput run_plot(const ExperimentConfig& config,
                     const std::vector<std::filesystem::path>& inputs);

// Numeric cell lookup for tests and tools.
double table_value(const CsvTable& table, std::size_t row, const std::string& column);

}  // namespace seqdesign
