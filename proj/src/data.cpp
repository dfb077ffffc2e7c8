#include "seqdesign/data.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "seqdesign/csv.hpp"
#include "seqdesign/errors.hpp"
#include "seqdesign/random.hpp"

namespace seqdesign {

std::vector<std::string> DatasetSchema::all_columns() const {
  std::vector<std::string> out = performance_columns;
  out.insert(out.end(), parameter_columns.begin(), parameter_columns.end());
  return out;
}

bool DatasetSchema::is_boolean_parameter(std::size_t parameter_index) const {
  const auto& name = parameter_columns.at(parameter_index);
  return std::find(boolean_columns.begin(), boolean_columns.end(), name) !=
         boolean_columns.end();
}

std::vector<bool> DatasetSchema::boolean_mask() const {
  std::vector<bool> mask(performance_count() + parameter_count(), false);
  for (std::size_t j = 0; j < parameter_count(); ++j) {
    mask[performance_count() + j] = is_boolean_parameter(j);
  }
  return mask;
}

void DatasetSchema::validate() const {
  if (performance_columns.empty()) throw SchemaError("", "schema has no performance columns");
  if (parameter_columns.empty()) throw SchemaError("", "schema has no parameter columns");
  std::set<std::string> seen;
  for (const auto& c : all_columns()) {
    if (!seen.insert(c).second) throw SchemaError(c, "duplicate column name: " + c);
  }
  const std::set<std::string> params(parameter_columns.begin(), parameter_columns.end());
  for (const auto& b : boolean_columns) {
    if (!params.count(b)) throw SchemaError(b, "boolean column is not a parameter: " + b);
  }
}

Dataset::Dataset(DatasetSchema schema, Matrix rows) : schema_(std::move(schema)), rows_(std::move(rows)) {
  schema_.validate();
  const std::size_t width = schema_.performance_count() + schema_.parameter_count();
  if (rows_.rows() == 0 && rows_.cols() == 0) rows_ = Matrix(0, width);
  if (rows_.cols() != width) {
    throw ShapeError("dataset has " + std::to_string(rows_.cols()) + " columns, schema has " +
                     std::to_string(width));
  }
  const auto mask = schema_.boolean_mask();
  const auto names = schema_.all_columns();
  for (std::size_t r = 0; r < rows_.rows(); ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      const double v = rows_(r, c);
      if (!std::isfinite(v)) {
        throw ValidationError("non-finite value in row " + std::to_string(r) + ", column " +
                              names[c]);
      }
      if (mask[c] && v != 0.0 && v != 1.0) {
        throw ValidationError("boolean column " + names[c] + " holds " + format_double(v) +
                              " in row " + std::to_string(r));
      }
    }
  }
}

Matrix Dataset::performances() const {
  std::vector<std::size_t> cols(schema_.performance_count());
  for (std::size_t i = 0; i < cols.size(); ++i) cols[i] = i;
  return rows_.select_cols(cols);
}

Matrix Dataset::parameters() const {
  std::vector<std::size_t> cols(schema_.parameter_count());
  for (std::size_t i = 0; i < cols.size(); ++i) cols[i] = schema_.performance_count() + i;
  return rows_.select_cols(cols);
}

Dataset Dataset::select_rows(std::span<const std::size_t> indices) const {
  return Dataset(schema_, rows_.select_rows(indices));
}

Dataset parse_tabular(std::string_view text, const DatasetSchema& schema,
                      std::vector<std::string>* warnings) {
  schema.validate();
  const CsvTable table = parse_csv(text);
  const auto wanted = schema.all_columns();
  std::vector<std::size_t> source(wanted.size());
  for (std::size_t i = 0; i < wanted.size(); ++i) {
    source[i] = table.column_index(wanted[i]);
    if (source[i] == CsvTable::npos) {
      throw SchemaError(wanted[i], "missing column: " + wanted[i]);
    }
  }
  if (warnings) {
    const std::set<std::string> keep(wanted.begin(), wanted.end());
    for (const auto& h : table.header) {
      if (!keep.count(h)) warnings->push_back("dropped extra column: " + h);
    }
  }
  Matrix rows(table.rows.size(), wanted.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    for (std::size_t c = 0; c < wanted.size(); ++c) {
      const auto& cell = table.rows[r][source[c]];
      double v = 0.0;
      if (!parse_double(cell, v)) {
        throw ParseError(r + 1, source[c],
                         "non-numeric cell '" + cell + "' at data row " + std::to_string(r + 1) +
                             ", column " + wanted[c]);
      }
      rows(r, c) = v;
    }
  }
  return Dataset(schema, std::move(rows));
}

Dataset load_tabular(const std::filesystem::path& path, const DatasetSchema& schema,
                     std::vector<std::string>* warnings) {
  return parse_tabular(read_text_file(path), schema, warnings);
}

void write_tabular(const std::filesystem::path& path, const Dataset& dataset) {
  CsvTable table;
  table.header = dataset.schema().all_columns();
  const Matrix& m = dataset.rows();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    std::vector<std::string> cells;
    for (double v : m.row(r)) cells.push_back(format_double(v));
    table.rows.push_back(std::move(cells));
  }
  write_csv(path, table);
}

std::pair<Dataset, Dataset> split_reference_test(const Dataset& dataset, double reference_fraction,
                                                 std::uint64_t seed) {
  if (!(reference_fraction > 0.0 && reference_fraction < 1.0)) {
    throw ArgumentError("reference fraction must lie in (0, 1), got " +
                        format_double(reference_fraction));
  }
  const std::size_t n = dataset.row_count();
  if (n < 2) throw ArgumentError("split needs at least 2 rows");
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  const auto n_ref = static_cast<std::size_t>(std::llround(reference_fraction * static_cast<double>(n)));
  std::vector<std::size_t> ref(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_ref));
  std::vector<std::size_t> test(order.begin() + static_cast<std::ptrdiff_t>(n_ref), order.end());
  std::sort(ref.begin(), ref.end());
  std::sort(test.begin(), test.end());
  return {dataset.select_rows(ref), dataset.select_rows(test)};
}

Dataset subsample_rows(const Dataset& dataset, std::size_t count, std::uint64_t seed) {
  if (count > dataset.row_count()) {
    throw ArgumentError("cannot sample " + std::to_string(count) + " rows from " +
                        std::to_string(dataset.row_count()));
  }
  std::vector<std::size_t> order(dataset.row_count());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  order.resize(count);
  std::sort(order.begin(), order.end());
  return dataset.select_rows(order);
}

NormalizationMode parse_normalization_mode(std::string_view text) {
  if (text == "min-max" || text == "minmax") return NormalizationMode::kMinMax;
  if (text == "z-score" || text == "zscore") return NormalizationMode::kZScore;
  if (text == "none") return NormalizationMode::kNone;
  throw ArgumentError("unknown normalization mode: " + std::string(text));
}

NormalizationState NormalizationState::fit(const Matrix& data, NormalizationMode mode,
                                           const std::vector<bool>& boolean_mask) {
  std::vector<ColumnStats> stats(data.cols());
  for (std::size_t c = 0; c < data.cols(); ++c) {
    ColumnStats s;
    const bool is_bool = c < boolean_mask.size() && boolean_mask[c];
    if (mode == NormalizationMode::kNone || is_bool || data.rows() == 0) {
      stats[c] = s;
      continue;
    }
    if (mode == NormalizationMode::kMinMax) {
      double lo = data(0, c), hi = data(0, c);
      for (std::size_t r = 1; r < data.rows(); ++r) {
        lo = std::min(lo, data(r, c));
        hi = std::max(hi, data(r, c));
      }
      s.offset = lo;
      s.scale = hi - lo;
    } else {
      double mean = 0.0;
      for (std::size_t r = 0; r < data.rows(); ++r) mean += data(r, c);
      mean /= static_cast<double>(data.rows());
      double var = 0.0;
      for (std::size_t r = 0; r < data.rows(); ++r) {
        const double d = data(r, c) - mean;
        var += d * d;
      }
      s.offset = mean;
      s.scale = std::sqrt(var / static_cast<double>(data.rows()));
    }
    stats[c] = s;
  }
  return NormalizationState(mode, std::move(stats));
}

double NormalizationState::normalize_value(std::size_t column, double x) const {
  const auto& s = stats_.at(column);
  if (s.scale == 0.0) return 0.0;
  return (x - s.offset) / s.scale;
}

double NormalizationState::denormalize_value(std::size_t column, double z) const {
  const auto& s = stats_.at(column);
  if (s.scale == 0.0) return s.offset;
  return z * s.scale + s.offset;
}

Matrix NormalizationState::normalize(const Matrix& data, std::span<const std::size_t> columns) const {
  Matrix out(data.rows(), data.cols());
  for (std::size_t c = 0; c < data.cols(); ++c) {
    const std::size_t src = columns.empty() ? c : columns[c];
    for (std::size_t r = 0; r < data.rows(); ++r) out(r, c) = normalize_value(src, data(r, c));
  }
  return out;
}

Matrix NormalizationState::denormalize(const Matrix& data,
                                       std::span<const std::size_t> columns) const {
  Matrix out(data.rows(), data.cols());
  for (std::size_t c = 0; c < data.cols(); ++c) {
    const std::size_t src = columns.empty() ? c : columns[c];
    for (std::size_t r = 0; r < data.rows(); ++r) out(r, c) = denormalize_value(src, data(r, c));
  }
  return out;
}

std::pair<Dataset, NormalizationState> normalize(const Dataset& dataset, NormalizationMode mode) {
  auto state = NormalizationState::fit(dataset.rows(), mode, dataset.schema().boolean_mask());
  return {Dataset(dataset.schema(), state.normalize(dataset.rows())), std::move(state)};
}

Dataset denormalize(const Dataset& dataset, const NormalizationState& state) {
  return Dataset(dataset.schema(), state.denormalize(dataset.rows()));
}

AirfoilCoordinates parse_selig(std::string_view text) {
  AirfoilCoordinates airfoil;
  std::istringstream in{std::string(text)};
  std::string line;
  bool have_name = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!have_name) {
      const auto first = line.find_first_not_of(" \t");
      airfoil.name = first == std::string::npos ? "" : line.substr(first);
      have_name = true;
      continue;
    }
    std::istringstream fields(line);
    std::string xs, ys, extra;
    if (!(fields >> xs)) continue;
    if (!(fields >> ys) || (fields >> extra)) {
      throw ParseError(line_no, 0, "expected 'x y' pair on line " + std::to_string(line_no));
    }
    Point2 p;
    if (!parse_double(xs, p.x) || !parse_double(ys, p.y)) {
      throw ParseError(line_no, 0, "non-numeric coordinate on line " + std::to_string(line_no));
    }
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw ValidationError("non-finite coordinate on line " + std::to_string(line_no));
    }
    airfoil.points.push_back(p);
  }
  return airfoil;
}

AirfoilCoordinates load_selig(const std::filesystem::path& path) {
  return parse_selig(read_text_file(path));
}

void validate_airfoil(const AirfoilCoordinates& airfoil) {
  if (airfoil.points.size() < 4) {
    throw GeometryError("airfoil '" + airfoil.name + "' has " +
                        std::to_string(airfoil.points.size()) + " points, need at least 4");
  }
  for (const auto& p : airfoil.points) {
    if (p.x < -0.05 || p.x > 1.05) {
      throw GeometryError("airfoil '" + airfoil.name + "' has x = " + format_double(p.x) +
                          " outside [-0.05, 1.05]");
    }
  }
}

namespace {

// y on a leading-to-trailing-edge polyline with non-decreasing x.
double interpolate_surface(const std::vector<Point2>& surface, double x) {
  if (x <= surface.front().x) return surface.front().y;
  if (x >= surface.back().x) return surface.back().y;
  for (std::size_t i = 0; i + 1 < surface.size(); ++i) {
    const Point2& a = surface[i];
    const Point2& b = surface[i + 1];
    if (x >= a.x && x <= b.x && b.x > a.x) {
      const double t = (x - a.x) / (b.x - a.x);
      return a.y + t * (b.y - a.y);
    }
  }
  return surface.back().y;
}

void check_monotone(const std::vector<Point2>& surface, const std::string& name,
                    const char* which) {
  for (std::size_t i = 0; i + 1 < surface.size(); ++i) {
    if (surface[i + 1].x < surface[i].x) {
      throw GeometryError("airfoil '" + name + "' " + which +
                          " surface is not monotone in x after the leading-edge split");
    }
  }
  if (surface.size() < 2) {
    throw GeometryError("airfoil '" + name + "' " + which + " surface has fewer than 2 points");
  }
}

}  // namespace

std::vector<double> resample_airfoil(const AirfoilCoordinates& airfoil,
                                     std::size_t points_per_surface) {
  if (points_per_surface < 2) throw ArgumentError("points_per_surface must be at least 2");
  validate_airfoil(airfoil);
  const auto& pts = airfoil.points;
  std::size_t le = 0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (pts[i].x < pts[le].x) le = i;
  }
  std::vector<Point2> upper(pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(le) + 1);
  std::reverse(upper.begin(), upper.end());
  std::vector<Point2> lower(pts.begin() + static_cast<std::ptrdiff_t>(le), pts.end());
  check_monotone(upper, airfoil.name, "upper");
  check_monotone(lower, airfoil.name, "lower");

  std::vector<double> out;
  out.reserve(4 * points_per_surface);
  const double denom = static_cast<double>(points_per_surface - 1);
  for (const auto* surface : {&upper, &lower}) {
    const double x0 = surface->front().x;
    const double x1 = surface->back().x;
    for (std::size_t k = 0; k < points_per_surface; ++k) {
      const double s = 0.5 * (1.0 - std::cos(std::numbers::pi * static_cast<double>(k) / denom));
      const double x = k + 1 == points_per_surface ? x1 : x0 + s * (x1 - x0);
      out.push_back(x);
      out.push_back(interpolate_surface(*surface, x));
    }
  }
  return out;
}

std::vector<std::string> airfoil_parameter_names(std::size_t points_per_surface) {
  std::vector<std::string> names;
  for (const char* side : {"upper", "lower"}) {
    for (std::size_t k = 0; k < points_per_surface; ++k) {
      names.push_back(std::string(side) + "_x" + std::to_string(k));
      names.push_back(std::string(side) + "_y" + std::to_string(k));
    }
  }
  return names;
}

Dataset build_airfoil_dataset(const std::filesystem::path& directory,
                              std::size_t points_per_surface,
                              const std::filesystem::path& performance_csv,
                              const std::vector<std::string>& performance_columns) {
  const CsvTable perf = read_csv(performance_csv);
  const std::size_t name_col = perf.column_index("name");
  if (name_col == CsvTable::npos) throw SchemaError("name", "missing column: name");
  std::vector<std::size_t> perf_cols;
  for (const auto& c : performance_columns) {
    const auto idx = perf.column_index(c);
    if (idx == CsvTable::npos) throw SchemaError(c, "missing column: " + c);
    perf_cols.push_back(idx);
  }
  std::map<std::string, std::vector<double>> perf_by_name;
  for (std::size_t r = 0; r < perf.rows.size(); ++r) {
    std::vector<double> values;
    for (auto c : perf_cols) {
      double v = 0.0;
      if (!parse_double(perf.rows[r][c], v)) {
        throw ParseError(r + 1, c, "non-numeric performance value '" + perf.rows[r][c] + "'");
      }
      values.push_back(v);
    }
    perf_by_name[perf.rows[r][name_col]] = std::move(values);
  }

  std::map<std::string, std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(directory)) {
    if (entry.is_regular_file() && entry.path().extension() == ".dat") {
      files[entry.path().stem().string()] = entry.path();
    }
  }
  DatasetSchema schema;
  schema.performance_columns = performance_columns;
  schema.parameter_columns = airfoil_parameter_names(points_per_surface);
  Matrix rows;
  for (const auto& [name, path] : files) {
    auto it = perf_by_name.find(name);
    if (it == perf_by_name.end()) continue;
    std::vector<double> row = it->second;
    const auto shape = resample_airfoil(load_selig(path), points_per_surface);
    row.insert(row.end(), shape.begin(), shape.end());
    rows.append_row(row);
  }
  return Dataset(std::move(schema), std::move(rows));
}

}  // namespace seqdesign
