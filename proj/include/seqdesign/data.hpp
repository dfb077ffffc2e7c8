#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "seqdesign/matrix.hpp"

namespace seqdesign {

// Column roles of a design table: performance indicators are generation
// conditions, parameters are generation targets.
struct DatasetSchema {
  std::vector<std::string> performance_columns;
  std::vector<std::string> parameter_columns;
  std::vector<std::string> boolean_columns;  // subset of parameter_columns

  std::size_t performance_count() const { return performance_columns.size(); }
  std::size_t parameter_count() const { return parameter_columns.size(); }
  // Performances first, then parameters.
  std::vector<std::string> all_columns() const;
  bool is_boolean_parameter(std::size_t parameter_index) const;
  std::vector<bool> boolean_mask() const;

  // Throws SchemaError on empty roles, overlap, duplicates, or stray booleans.
  void validate() const;

  friend bool operator==(const DatasetSchema&, const DatasetSchema&) = default;
};

// Immutable table of designs. Columns follow schema order: the n performance
// columns, then the N parameter columns.
class Dataset {
 public:
  Dataset() = default;
  Dataset(DatasetSchema schema, Matrix rows);

  const DatasetSchema& schema() const { return schema_; }
  const Matrix& rows() const { return rows_; }
  std::size_t row_count() const { return rows_.rows(); }

  Matrix performances() const;
  Matrix parameters() const;
  Dataset select_rows(std::span<const std::size_t> indices) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  DatasetSchema schema_;
  Matrix rows_;
};

// Reads a CSV with a header, reorders columns to schema order and drops any
// extra columns. One warning string per dropped column is appended to
// `warnings` when provided.
Dataset load_tabular(const std::filesystem::path& path, const DatasetSchema& schema,
                     std::vector<std::string>* warnings = nullptr);
Dataset parse_tabular(std::string_view text, const DatasetSchema& schema,
                      std::vector<std::string>* warnings = nullptr);
void write_tabular(const std::filesystem::path& path, const Dataset& dataset);

// Seeded partition into (reference, test); |reference| = round(fraction * rows).
// Both parts keep the original relative row order.
std::pair<Dataset, Dataset> split_reference_test(const Dataset& dataset,
                                                 double reference_fraction,
                                                 std::uint64_t seed);

// Seeded sample of `count` distinct rows, in original relative order.
Dataset subsample_rows(const Dataset& dataset, std::size_t count, std::uint64_t seed);

enum class NormalizationMode { kMinMax, kZScore, kNone };

NormalizationMode parse_normalization_mode(std::string_view text);

// Per-column affine map z = (x - offset) / scale. A zero scale marks a
// degenerate column: it normalizes to 0 and denormalizes to `offset`.
class NormalizationState {
 public:
  struct ColumnStats {
    double offset = 0.0;
    double scale = 1.0;
  };

  NormalizationState() = default;
  NormalizationState(NormalizationMode mode, std::vector<ColumnStats> stats)
      : mode_(mode), stats_(std::move(stats)) {}

  // Boolean columns (mask true) are always identity so they stay in {0, 1}.
  static NormalizationState fit(const Matrix& data, NormalizationMode mode,
                                const std::vector<bool>& boolean_mask = {});

  NormalizationMode mode() const { return mode_; }
  std::size_t column_count() const { return stats_.size(); }
  const ColumnStats& stats(std::size_t column) const { return stats_.at(column); }

  double normalize_value(std::size_t column, double x) const;
  double denormalize_value(std::size_t column, double z) const;

  // Transform every column of `data`, where data column j uses the statistics
  // of column columns[j] (or column j when `columns` is empty).
  Matrix normalize(const Matrix& data, std::span<const std::size_t> columns = {}) const;
  Matrix denormalize(const Matrix& data, std::span<const std::size_t> columns = {}) const;

 private:
  NormalizationMode mode_ = NormalizationMode::kNone;
  std::vector<ColumnStats> stats_;
};

std::pair<Dataset, NormalizationState> normalize(const Dataset& dataset, NormalizationMode mode);
Dataset denormalize(const Dataset& dataset, const NormalizationState& state);

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct AirfoilCoordinates {
  std::string name;
  std::vector<Point2> points;  // trailing edge -> upper -> leading edge -> lower -> trailing edge
};

// Selig .dat: a name line, then whitespace-separated "x y" pairs.
AirfoilCoordinates parse_selig(std::string_view text);
AirfoilCoordinates load_selig(const std::filesystem::path& path);

// Throws GeometryError for fewer than 4 points or x outside [-0.05, 1.05].
void validate_airfoil(const AirfoilCoordinates& airfoil);

// Splits the trace at its minimum-x point and resamples both surfaces at
// cosine-spaced x-stations. Layout: interleaved (x, y) pairs, upper surface
// from leading to trailing edge, then lower surface likewise; length
// 4 * points_per_surface.
std::vector<double> resample_airfoil(const AirfoilCoordinates& airfoil,
                                     std::size_t points_per_surface);

// Parameter column names matching the resample_airfoil layout.
std::vector<std::string> airfoil_parameter_names(std::size_t points_per_surface);

// Builds a dataset from every *.dat in `directory` joined by file stem with the
// `name` column of `performance_csv`. Rows are sorted by airfoil name.
Dataset build_airfoil_dataset(const std::filesystem::path& directory,
                              std::size_t points_per_surface,
                              const std::filesystem::path& performance_csv,
                              const std::vector<std::string>& performance_columns);

}  // namespace seqdesign
