#include "seqdesign/studies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "seqdesign/errors.hpp"
#include "seqdesign/metrics.hpp"
#include "seqdesign/parallel.hpp"
#include "seqdesign/plots.hpp"
#include "seqdesign/random.hpp"
#include "seqdesign/synthetic.hpp"

namespace seqdesign {
namespace {

struct Summary {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1)
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
};

// Welford accumulation: a run of identical values yields that value as the
// mean and exactly zero spread.
Summary summarize(std::vector<double> values) {
  Summary s;
  if (values.empty()) return s;
  double mean = 0.0, m2 = 0.0;
  std::size_t k = 0;
  for (double v : values) {
    ++k;
    const double delta = v - mean;
    mean += delta / static_cast<double>(k);
    m2 += delta * (v - mean);
  }
  s.mean = mean;
  s.std = k > 1 ? std::sqrt(m2 / static_cast<double>(k - 1)) : 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  s.median = values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
  s.min = values.front();
  s.max = values.back();
  return s;
}

std::string provenance(const std::string& kind, const ExperimentConfig& cfg) {
  return "kind=" + kind + ",config_hash=" + cfg.hash() + ",seed=" + std::to_string(cfg.seed) +
         ",backend=" + std::string(backend_name(cfg.regressor.backend)) +
         ",seqdesign=" + std::string(kVersion);
}

CsvTable new_table(const std::string& kind, const ExperimentConfig& cfg,
                   std::vector<std::string> header) {
  CsvTable t;
  t.comments.push_back(provenance(kind, cfg));
  t.header = std::move(header);
  return t;
}

void add_row(CsvTable& t, std::vector<std::string> cells) { t.rows.push_back(std::move(cells)); }

std::string num(double v) { return format_double(v); }

void publish(StudyOutput& out, const ExperimentConfig& cfg, CsvTable table,
             const std::string& filename) {
  const auto path = cfg.output_directory / filename;
  write_csv(path, table);
  out.files.push_back(path);
  const std::string svg = render_svg(table);
  if (!svg.empty()) {
    auto svg_path = path;
    svg_path.replace_extension(".svg");
    write_text_file(svg_path, svg);
    out.files.push_back(svg_path);
  }
  out.tables.push_back(std::move(table));
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

std::vector<std::size_t> complement(std::size_t n, const std::vector<std::size_t>& chosen) {
  std::vector<bool> taken(n, false);
  for (auto c : chosen) taken[c] = true;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (!taken[i]) out.push_back(i);
  }
  return out;
}

std::vector<std::string> with_prefix(const std::string& prefix, const std::vector<std::string>& names) {
  std::vector<std::string> out;
  for (const auto& n : names) out.push_back(prefix + n);
  return out;
}

// One batch of designs for the given conditions.
struct GenerationRun {
  Matrix conditions;
  GenerationResult result;
  Matrix achieved;
};

GenerationRun run_generation(const ExperimentConfig& cfg, const PreparedExperiment& prep,
                             const Dataset& reference, Matrix conditions,
                             const std::vector<std::size_t>& known, const Matrix& known_values,
                             OrderPolicy order, double noise_std) {
  const auto& schema = reference.schema();
  GenerationTask task;
  task.conditions = std::move(conditions);
  if (!known.empty()) {
    task.known_mask.assign(schema.parameter_count(), false);
    for (auto j : known) task.known_mask[j] = true;
    task.known_values = known_values;
  }
  task.order = std::move(order);
  task.noise_std = noise_std;
  task.noise_seed = cfg.noise_seed();
  GenerationRun run;
  run.result = generate(reference, cfg.regressor, task);
  run.conditions = std::move(task.conditions);
  run.achieved = prep.evaluator->evaluate(run.result.designs);
  return run;
}

CsvTable designs_table(const std::string& kind, const ExperimentConfig& cfg,
                       const DatasetSchema& schema, const GenerationRun& run) {
  auto header = with_prefix("target_", schema.performance_columns);
  for (const auto& p : schema.parameter_columns) header.push_back(p);
  for (const auto& p : with_prefix("achieved_", schema.performance_columns)) header.push_back(p);
  CsvTable t = new_table(kind, cfg, header);
  for (std::size_t r = 0; r < run.result.designs.rows(); ++r) {
    std::vector<std::string> cells;
    for (double v : run.conditions.row(r)) cells.push_back(num(v));
    for (double v : run.result.designs.row(r)) cells.push_back(num(v));
    for (double v : run.achieved.row(r)) cells.push_back(num(v));
    add_row(t, std::move(cells));
  }
  return t;
}

std::vector<std::string> error_header(const DatasetSchema& schema) {
  std::vector<std::string> h = with_prefix("mape_", schema.performance_columns);
  for (const auto& p : with_prefix("mae_", schema.performance_columns)) h.push_back(p);
  return h;
}

void append_errors(std::vector<std::string>& cells, const IndicatorErrors& e) {
  for (double v : e.mape) cells.push_back(num(v));
  for (double v : e.mae) cells.push_back(num(v));
}

std::vector<std::size_t> missing_for(std::size_t n_param, std::size_t count, std::uint64_t seed) {
  auto order = all_indices(n_param);
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  order.resize(count);
  std::sort(order.begin(), order.end());
  return order;
}

Matrix known_values_for(const Dataset& source, const std::vector<std::size_t>& rows,
                        const std::vector<std::size_t>& known) {
  return source.parameters().select_rows(rows).select_cols(known);
}

}  // namespace

const CsvTable& StudyOutput::table(const std::string& kind) const {
  for (const auto& t : tables) {
    const auto prov = table_provenance(t);
    auto it = prov.find("kind");
    if (it != prov.end() && it->second == kind) return t;
  }
  throw ArgumentError("study produced no table of kind " + kind);
}

double table_value(const CsvTable& table, std::size_t row, const std::string& column) {
  const auto c = table.column_index(column);
  if (c == CsvTable::npos) throw ArgumentError("no column " + column);
  double v = 0.0;
  if (!parse_double(table.rows.at(row).at(c), v)) {
    throw ParseError(row, c, "non-numeric cell in column " + column);
  }
  return v;
}

PreparedExperiment prepare_experiment(const ExperimentConfig& cfg) {
  PreparedExperiment prep;
  std::optional<SyntheticProblem> problem;
  switch (cfg.dataset.kind) {
    case DatasetKind::kSynthetic:
      problem = make_synthetic_problem(cfg.dataset.problem, cfg.dataset.dimension);
      prep.dataset = sample_synthetic_dataset(*problem, cfg.dataset.rows, cfg.dataset_seed());
      break;
    case DatasetKind::kTabular:
      prep.dataset = load_tabular(cfg.dataset.path, cfg.dataset.schema);
      break;
    case DatasetKind::kAirfoil:
      prep.dataset = build_airfoil_dataset(cfg.dataset.directory, cfg.dataset.points_per_surface,
                                           cfg.dataset.performance_csv,
                                           cfg.dataset.performance_columns);
      break;
  }
  if (cfg.dataset.max_rows && prep.dataset.row_count() > *cfg.dataset.max_rows) {
    prep.dataset = subsample_rows(prep.dataset, *cfg.dataset.max_rows, cfg.subset_seed());
  }
  std::tie(prep.reference, prep.test) =
      split_reference_test(prep.dataset, cfg.split.reference_fraction, cfg.split_seed());

  if (cfg.evaluator.kind == EvaluatorKind::kAnalytic) {
    if (!problem) throw ConfigError("the analytic evaluator needs a synthetic dataset");
    prep.evaluator = std::make_shared<AnalyticEvaluator>(*problem);
  } else {
    Dataset training = prep.reference;
    if (training.row_count() > cfg.evaluator.surrogate_rows) {
      training = subsample_rows(training, cfg.evaluator.surrogate_rows, derive_seed(cfg.seed, 9));
    }
    auto surrogate = std::make_shared<SurrogateEvaluator>(training, cfg.evaluator.surrogate);
    if (prep.test.row_count() >= 2) prep.surrogate_fidelity = surrogate->fidelity(prep.test);
    prep.evaluator = std::move(surrogate);
  }
  return prep;
}

const Dataset& condition_source(const ExperimentConfig& cfg, const PreparedExperiment& prep) {
  return cfg.generation.condition_source == ConditionSource::kTest ? prep.test : prep.dataset;
}

std::vector<std::size_t> select_condition_rows(const ExperimentConfig& cfg,
                                               const PreparedExperiment& prep, std::size_t count) {
  const std::size_t available = condition_source(cfg, prep).row_count();
  if (count == 0 || count >= available) return all_indices(available);
  auto order = all_indices(available);
  Rng rng(cfg.condition_seed());
  rng.shuffle(std::span<std::size_t>(order));
  order.resize(count);
  std::sort(order.begin(), order.end());
  return order;
}

OrderPolicy make_order_policy(const ExperimentConfig& cfg, const DatasetSchema& schema,
                              const std::vector<std::size_t>& unknown) {
  switch (cfg.generation.order) {
    case OrderKind::kDefault:
      return OrderPolicy::default_order();
    case OrderKind::kRandom:
      return OrderPolicy::random(cfg.order_seed());
    case OrderKind::kExplicit: {
      std::vector<std::size_t> perm;
      for (const auto& name : cfg.generation.permutation) {
        const auto it = std::find(schema.parameter_columns.begin(), schema.parameter_columns.end(), name);
        if (it == schema.parameter_columns.end()) {
          throw ArgumentError("explicit order names unknown parameter " + name);
        }
        const auto j = static_cast<std::size_t>(it - schema.parameter_columns.begin());
        if (std::find(unknown.begin(), unknown.end(), j) != unknown.end()) perm.push_back(j);
      }
      return OrderPolicy::explicit_order(std::move(perm));
    }
  }
  return OrderPolicy::default_order();
}

IndicatorErrors performance_errors(const Matrix& targets, const Matrix& achieved) {
  if (targets.cols() != achieved.cols() || targets.rows() != achieved.rows()) {
    throw ShapeError("targets and achieved performances differ in shape");
  }
  IndicatorErrors e;
  for (std::size_t c = 0; c < targets.cols(); ++c) {
    const auto t = targets.column(c);
    const auto a = achieved.column(c);
    const auto m = metrics::mape(t, a);
    e.mape.push_back(m.percent);
    e.skipped.push_back(m.skipped);
    e.mae.push_back(metrics::mae(t, a));
  }
  return e;
}

StudyOutput run_generate(const ExperimentConfig& cfg) {
  const auto prep = prepare_experiment(cfg);
  const auto& source = condition_source(cfg, prep);
  const auto rows = select_condition_rows(cfg, prep, cfg.generation.condition_count);
  const auto& schema = prep.reference.schema();
  const auto unknown = all_indices(schema.parameter_count());
  const auto run = run_generation(cfg, prep, prep.reference, source.performances().select_rows(rows),
                                  {}, Matrix(), make_order_policy(cfg, schema, unknown),
                                  cfg.generation.noise_std);
  StudyOutput out;
  publish(out, cfg, designs_table("generated_designs", cfg, schema, run), "generated_designs.csv");
  return out;
}

StudyOutput run_inpaint(const ExperimentConfig& cfg) {
  const auto prep = prepare_experiment(cfg);
  const auto& source = condition_source(cfg, prep);
  const auto& schema = prep.reference.schema();
  const std::size_t n_param = schema.parameter_count();
  std::vector<std::size_t> missing;
  if (!cfg.study.missing_parameters.empty()) {
    for (const auto& name : cfg.study.missing_parameters) {
      const auto it = std::find(schema.parameter_columns.begin(), schema.parameter_columns.end(), name);
      if (it == schema.parameter_columns.end()) throw ArgumentError("unknown missing parameter " + name);
      missing.push_back(static_cast<std::size_t>(it - schema.parameter_columns.begin()));
    }
    std::sort(missing.begin(), missing.end());
    missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
  } else {
    const std::size_t count = cfg.study.missing_count.value_or(n_param);
    if (count > n_param) {
      throw ArgumentError("missing count " + std::to_string(count) + " exceeds the " +
                          std::to_string(n_param) + " parameters");
    }
    missing = missing_for(n_param, count, cfg.study_seed());
  }
  const auto known = complement(n_param, missing);
  const auto rows = select_condition_rows(cfg, prep, cfg.generation.condition_count);
  const auto run = run_generation(cfg, prep, prep.reference, source.performances().select_rows(rows),
                                  known, known_values_for(source, rows, known),
                                  make_order_policy(cfg, schema, missing), cfg.generation.noise_std);
  const auto errors = performance_errors(run.conditions, run.achieved);

  StudyOutput out;
  publish(out, cfg, designs_table("inpainted_designs", cfg, schema, run), "inpainted_designs.csv");
  CsvTable m = new_table("inpaint_metrics", cfg, {"metric", "indicator", "value"});
  add_row(m, {"missing_count", "-", std::to_string(missing.size())});
  add_row(m, {"fit_count", "-", std::to_string(run.result.fit_count)});
  for (std::size_t c = 0; c < schema.performance_count(); ++c) {
    add_row(m, {"mape", schema.performance_columns[c], num(errors.mape[c])});
    add_row(m, {"mae", schema.performance_columns[c], num(errors.mae[c])});
  }
  publish(out, cfg, std::move(m), "inpaint_metrics.csv");
  return out;
}

StudyOutput run_generation_eval(const ExperimentConfig& cfg) {
  const auto prep = prepare_experiment(cfg);
  const auto& source = condition_source(cfg, prep);
  const auto& schema = prep.reference.schema();
  const auto rows = select_condition_rows(cfg, prep, cfg.generation.condition_count);
  const auto unknown = all_indices(schema.parameter_count());
  const auto run = run_generation(cfg, prep, prep.reference, source.performances().select_rows(rows),
                                  {}, Matrix(), make_order_policy(cfg, schema, unknown),
                                  cfg.generation.noise_std);
  const auto errors = performance_errors(run.conditions, run.achieved);

  // Diversity in min-max space of the reference parameters.
  std::vector<bool> mask(schema.parameter_count());
  for (std::size_t j = 0; j < mask.size(); ++j) mask[j] = schema.is_boolean_parameter(j);
  const Matrix ref_params = prep.reference.parameters();
  const auto norm = NormalizationState::fit(ref_params, NormalizationMode::kMinMax, mask);
  const Matrix ref_norm = norm.normalize(ref_params);
  const Matrix gen_norm = norm.normalize(run.result.designs);

  std::vector<metrics::PrdCurve> curves;
  for (std::size_t s = 0; s < cfg.metrics.prd_seeds; ++s) {
    const auto hist = metrics::build_state_space(ref_norm, gen_norm, cfg.metrics.prd_clusters,
                                                 derive_seed(cfg.seed, 100 + s),
                                                 cfg.metrics.kmeans_iterations);
    curves.push_back(metrics::prd_curve(hist, cfg.metrics.prd_resolution));
  }
  const auto mean_curve = metrics::average_curves(curves);
  const double bandwidth = cfg.metrics.mmd_bandwidth
                               ? *cfg.metrics.mmd_bandwidth
                               : metrics::mmd_default_bandwidth(ref_norm, gen_norm);
  const double mmd2 = metrics::mmd_squared(ref_norm, gen_norm, {bandwidth, cfg.metrics.mmd_estimator});

  StudyOutput out;
  publish(out, cfg, designs_table("generated_designs", cfg, schema, run), "generated_designs.csv");

  CsvTable m = new_table("eval_metrics", cfg, {"metric", "indicator", "value"});
  add_row(m, {"conditions", "-", std::to_string(run.conditions.rows())});
  add_row(m, {"reference_rows", "-", std::to_string(prep.reference.row_count())});
  add_row(m, {"fit_count", "-", std::to_string(run.result.fit_count)});
  for (std::size_t c = 0; c < schema.performance_count(); ++c) {
    const auto& name = schema.performance_columns[c];
    add_row(m, {"mape", name, num(errors.mape[c])});
    add_row(m, {"mae", name, num(errors.mae[c])});
    add_row(m, {"mape_skipped", name, std::to_string(errors.skipped[c])});
    if (prep.surrogate_fidelity) {
      add_row(m, {"surrogate_r2", name, num(prep.surrogate_fidelity->r_squared[c])});
      add_row(m, {"surrogate_mape", name, num(prep.surrogate_fidelity->mape[c])});
    }
  }
  const auto [alpha1, beta1] = metrics::prd_at_unit_slope(mean_curve);
  add_row(m, {"prd_precision_at_unit_slope", "-", num(alpha1)});
  add_row(m, {"prd_recall_at_unit_slope", "-", num(beta1)});
  add_row(m, {"mmd2", "-", num(mmd2)});
  add_row(m, {"mmd_bandwidth", "-", num(bandwidth)});
  publish(out, cfg, std::move(m), "eval_metrics.csv");

  CsvTable prd = new_table("prd_curve", cfg, {"curve", "lambda", "precision", "recall"});
  auto emit_curve = [&prd](const std::string& label, const metrics::PrdCurve& c) {
    for (std::size_t k = 0; k < c.resolution; ++k) {
      add_row(prd, {label, num(c.lambdas[k]), num(c.precision[k]), num(c.recall[k])});
    }
  };
  for (std::size_t s = 0; s < curves.size(); ++s) emit_curve(std::to_string(s), curves[s]);
  emit_curve("mean", mean_curve);
  publish(out, cfg, std::move(prd), "eval_prd.csv");
  return out;
}

StudyOutput run_order_study(const ExperimentConfig& cfg, std::size_t repeats) {
  if (repeats < 2) throw ArgumentError("order study needs at least 2 repeats");
  if (!cfg.study.order_seeds.empty() && cfg.study.order_seeds.size() != repeats) {
    throw ArgumentError("study.order_seeds must list exactly one seed per repeat");
  }
  const auto prep = prepare_experiment(cfg);
  const auto& source = condition_source(cfg, prep);
  const auto& schema = prep.reference.schema();
  const auto rows = select_condition_rows(cfg, prep, cfg.generation.condition_count);
  const Matrix conditions = source.performances().select_rows(rows);

  std::vector<std::uint64_t> seeds(repeats);
  for (std::size_t r = 0; r < repeats; ++r) {
    seeds[r] = cfg.study.order_seeds.empty() ? derive_seed(cfg.study_seed(), r) : cfg.study.order_seeds[r];
  }
  std::vector<IndicatorErrors> errors(repeats + 1);
  std::vector<std::vector<std::size_t>> orders(repeats + 1);
  parallel_for(repeats + 1, cfg.study.workers, [&](std::size_t r) {
    const OrderPolicy policy = r < repeats ? OrderPolicy::random(seeds[r]) : OrderPolicy::default_order();
    const auto run = run_generation(cfg, prep, prep.reference, conditions, {}, Matrix(), policy,
                                    cfg.generation.noise_std);
    errors[r] = performance_errors(run.conditions, run.achieved);
    orders[r] = run.result.order;
  });

  auto header = std::vector<std::string>{"run", "order_seed", "order"};
  for (const auto& h : error_header(schema)) header.push_back(h);
  CsvTable t = new_table("order_study", cfg, header);
  auto order_text = [](const std::vector<std::size_t>& o) {
    std::string s;
    for (std::size_t i = 0; i < o.size(); ++i) s += (i ? "-" : "") + std::to_string(o[i]);
    return s;
  };
  for (std::size_t r = 0; r < repeats; ++r) {
    std::vector<std::string> cells{std::to_string(r), std::to_string(seeds[r]), order_text(orders[r])};
    append_errors(cells, errors[r]);
    add_row(t, std::move(cells));
  }
  const std::size_t n_ind = schema.performance_count();
  std::vector<std::string> mean_row{"mean", "-", "-"}, std_row{"std", "-", "-"};
  for (int which = 0; which < 2; ++which) {
    for (std::size_t c = 0; c < n_ind; ++c) {
      std::vector<double> values;
      for (std::size_t r = 0; r < repeats; ++r) values.push_back(which == 0 ? errors[r].mape[c] : errors[r].mae[c]);
      const auto s = summarize(values);
      mean_row.push_back(num(s.mean));
      std_row.push_back(num(s.std));
    }
  }
  add_row(t, std::move(mean_row));
  add_row(t, std::move(std_row));
  std::vector<std::string> baseline{"default", "-", order_text(orders[repeats])};
  append_errors(baseline, errors[repeats]);
  add_row(t, std::move(baseline));
  StudyOutput out;
  publish(out, cfg, std::move(t), "order_study.csv");
  return out;
}

StudyOutput run_reference_size_sweep(const ExperimentConfig& cfg,
                                     const std::vector<std::size_t>& requested) {
  const std::vector<std::size_t> sizes = requested.empty() ? default_reference_sizes() : requested;
  const auto prep = prepare_experiment(cfg);
  for (auto size : sizes) {
    if (size == 0) throw ArgumentError("reference size 0 is not allowed");
    if (size > prep.reference.row_count()) {
      throw ArgumentError("reference size " + std::to_string(size) + " exceeds the " +
                          std::to_string(prep.reference.row_count()) + " available reference rows");
    }
    if (size > cfg.regressor.capacity) {
      throw ArgumentError("reference size " + std::to_string(size) + " exceeds the regressor capacity of " +
                          std::to_string(cfg.regressor.capacity));
    }
  }
  const auto& source = condition_source(cfg, prep);
  const auto& schema = prep.reference.schema();
  const auto rows = select_condition_rows(cfg, prep, cfg.study.sweep_condition_count);
  const Matrix conditions = source.performances().select_rows(rows);
  const auto unknown = all_indices(schema.parameter_count());
  const auto policy = make_order_policy(cfg, schema, unknown);

  std::vector<IndicatorErrors> errors(sizes.size());
  parallel_for(sizes.size(), cfg.study.workers, [&](std::size_t i) {
    const Dataset subset = subsample_rows(prep.reference, sizes[i], derive_seed(cfg.study_seed(), sizes[i]));
    const auto run = run_generation(cfg, prep, subset, conditions, {}, Matrix(), policy,
                                    cfg.generation.noise_std);
    errors[i] = performance_errors(run.conditions, run.achieved);
  });

  auto header = std::vector<std::string>{"size", "conditions"};
  for (const auto& h : error_header(schema)) header.push_back(h);
  CsvTable t = new_table("refsize_sweep", cfg, header);
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    std::vector<std::string> cells{std::to_string(sizes[i]), std::to_string(conditions.rows())};
    append_errors(cells, errors[i]);
    add_row(t, std::move(cells));
  }
  StudyOutput out;
  publish(out, cfg, std::move(t), "refsize_sweep.csv");
  return out;
}

StudyOutput run_inpainting_sweep(const ExperimentConfig& cfg,
                                 const std::vector<std::size_t>& requested,
                                 std::size_t repeats_per_count) {
  if (repeats_per_count == 0) throw ArgumentError("repeats per count must be positive");
  const auto prep = prepare_experiment(cfg);
  const auto& schema = prep.reference.schema();
  const std::size_t n_param = schema.parameter_count();
  std::vector<std::size_t> counts = requested;
  if (counts.empty()) counts = all_indices(n_param + 1);
  for (auto c : counts) {
    if (c > n_param) {
      throw ArgumentError("missing count " + std::to_string(c) + " exceeds the " +
                          std::to_string(n_param) + " parameters");
    }
  }
  const auto& source = condition_source(cfg, prep);
  const auto rows = select_condition_rows(cfg, prep, cfg.generation.condition_count);
  const Matrix conditions = source.performances().select_rows(rows);

  const std::size_t jobs = counts.size() * repeats_per_count;
  std::vector<IndicatorErrors> errors(jobs);
  parallel_for(jobs, cfg.study.workers, [&](std::size_t job) {
    const std::size_t count = counts[job / repeats_per_count];
    const std::size_t repeat = job % repeats_per_count;
    const auto missing =
        missing_for(n_param, count, derive_seed(cfg.study_seed(), count * 100003 + repeat));
    const auto known = complement(n_param, missing);
    const auto run = run_generation(cfg, prep, prep.reference, conditions, known,
                                    known_values_for(source, rows, known),
                                    make_order_policy(cfg, schema, missing), cfg.generation.noise_std);
    errors[job] = performance_errors(run.conditions, run.achieved);
  });

  std::vector<std::string> header{"missing_count", "repeats"};
  for (const auto& p : schema.performance_columns) header.push_back("mape_" + p);
  for (const auto& p : schema.performance_columns) header.push_back("mape_std_" + p);
  for (const auto& p : schema.performance_columns) header.push_back("mae_" + p);
  CsvTable t = new_table("inpaint_sweep", cfg, header);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    std::vector<std::string> cells{std::to_string(counts[i]), std::to_string(repeats_per_count)};
    std::vector<std::string> stds, maes;
    for (std::size_t c = 0; c < schema.performance_count(); ++c) {
      std::vector<double> mapes, abs_errors;
      for (std::size_t k = 0; k < repeats_per_count; ++k) {
        mapes.push_back(errors[i * repeats_per_count + k].mape[c]);
        abs_errors.push_back(errors[i * repeats_per_count + k].mae[c]);
      }
      const auto s = summarize(mapes);
      cells.push_back(num(s.mean));
      stds.push_back(num(s.std));
      maes.push_back(num(summarize(abs_errors).mean));
    }
    cells.insert(cells.end(), stds.begin(), stds.end());
    cells.insert(cells.end(), maes.begin(), maes.end());
    add_row(t, std::move(cells));
  }
  StudyOutput out;
  publish(out, cfg, std::move(t), "inpaint_sweep.csv");
  return out;
}

StudyOutput run_noise_study(const ExperimentConfig& cfg, double noise_std, std::size_t repeat_count) {
  if (repeat_count < 2) throw ArgumentError("noise study needs a repeat count of at least 2");
  if (!(noise_std >= 0.0)) throw ArgumentError("noise standard deviation must be non-negative");
  const auto prep = prepare_experiment(cfg);
  const auto& schema = prep.reference.schema();
  std::vector<double> condition = cfg.study.condition;
  if (condition.empty()) {
    const auto& source = condition_source(cfg, prep);
    if (cfg.study.condition_row >= source.row_count()) {
      throw ArgumentError("condition row " + std::to_string(cfg.study.condition_row) +
                          " is outside the condition source");
    }
    const Matrix performances = source.performances();
    const auto row = performances.row(cfg.study.condition_row);
    condition.assign(row.begin(), row.end());
  }
  if (condition.size() != schema.performance_count()) {
    throw ArgumentError("noise study condition has the wrong number of indicators");
  }
  Matrix conditions;
  for (std::size_t r = 0; r < repeat_count; ++r) conditions.append_row(condition);
  const auto unknown = all_indices(schema.parameter_count());
  const auto run = run_generation(cfg, prep, prep.reference, conditions, {}, Matrix(),
                                  make_order_policy(cfg, schema, unknown), noise_std);

  StudyOutput out;
  auto header = schema.parameter_columns;
  for (const auto& p : with_prefix("achieved_", schema.performance_columns)) header.push_back(p);
  CsvTable designs = new_table("noise_designs", cfg, header);
  for (std::size_t r = 0; r < repeat_count; ++r) {
    std::vector<std::string> cells;
    for (double v : run.result.designs.row(r)) cells.push_back(num(v));
    for (double v : run.achieved.row(r)) cells.push_back(num(v));
    add_row(designs, std::move(cells));
  }
  publish(out, cfg, std::move(designs), "noise_designs.csv");

  CsvTable params = new_table("noise_parameters", cfg, {"parameter", "mean", "std", "median", "min", "max"});
  for (std::size_t j = 0; j < schema.parameter_count(); ++j) {
    const auto s = summarize(run.result.designs.column(j));
    add_row(params, {schema.parameter_columns[j], num(s.mean), num(s.std), num(s.median), num(s.min), num(s.max)});
  }
  publish(out, cfg, std::move(params), "noise_parameters.csv");

  const auto errors = performance_errors(run.conditions, run.achieved);
  CsvTable perf = new_table("noise_performance", cfg, {"indicator", "target", "mape", "mean", "std", "median"});
  for (std::size_t c = 0; c < schema.performance_count(); ++c) {
    const auto s = summarize(run.achieved.column(c));
    add_row(perf, {schema.performance_columns[c], num(condition[c]), num(errors.mape[c]), num(s.mean),
                   num(s.std), num(s.median)});
  }
  publish(out, cfg, std::move(perf), "noise_performance.csv");
  return out;
}

StudyOutput run_reference_variation_study(const ExperimentConfig& cfg, std::size_t num_sets) {
  if (num_sets < 2) throw ArgumentError("reference variation study needs at least 2 reference sets");
  if (!cfg.study.reference_set_seeds.empty() && cfg.study.reference_set_seeds.size() != num_sets) {
    throw ArgumentError("study.reference_set_seeds must list exactly one seed per set");
  }
  const auto prep = prepare_experiment(cfg);
  const auto& schema = prep.reference.schema();
  const std::size_t size = cfg.study.reference_set_size
                               ? cfg.study.reference_set_size
                               : std::max<std::size_t>(1, prep.reference.row_count() / 2);
  if (size > prep.reference.row_count()) {
    throw ArgumentError("reference set size " + std::to_string(size) + " exceeds the " +
                        std::to_string(prep.reference.row_count()) + " available reference rows");
  }
  const auto& source = condition_source(cfg, prep);
  const auto rows = select_condition_rows(cfg, prep, cfg.study.sweep_condition_count);
  const Matrix conditions = source.performances().select_rows(rows);
  const auto unknown = all_indices(schema.parameter_count());
  const auto policy = make_order_policy(cfg, schema, unknown);

  std::vector<std::uint64_t> seeds(num_sets);
  for (std::size_t s = 0; s < num_sets; ++s) {
    seeds[s] = cfg.study.reference_set_seeds.empty() ? derive_seed(cfg.study_seed(), 1000 + s)
                                                      : cfg.study.reference_set_seeds[s];
  }
  std::vector<Matrix> designs(num_sets);
  parallel_for(num_sets, cfg.study.workers, [&](std::size_t s) {
    const Dataset subset = subsample_rows(prep.reference, size, seeds[s]);
    designs[s] = run_generation(cfg, prep, subset, conditions, {}, Matrix(), policy,
                                cfg.generation.noise_std)
                     .result.designs;
  });

  StudyOutput out;
  auto header = std::vector<std::string>{"set"};
  for (const auto& p : schema.parameter_columns) header.push_back(p);
  CsvTable all = new_table("refsets_designs", cfg, header);
  CsvTable summary = new_table("refsets_summary", cfg, {"set", "seed", "parameter", "mean", "std", "median"});
  for (std::size_t s = 0; s < num_sets; ++s) {
    for (std::size_t r = 0; r < designs[s].rows(); ++r) {
      std::vector<std::string> cells{std::to_string(s)};
      for (double v : designs[s].row(r)) cells.push_back(num(v));
      add_row(all, std::move(cells));
    }
    for (std::size_t j = 0; j < schema.parameter_count(); ++j) {
      const auto st = summarize(designs[s].column(j));
      add_row(summary, {std::to_string(s), std::to_string(seeds[s]), schema.parameter_columns[j],
                        num(st.mean), num(st.std), num(st.median)});
    }
  }
  publish(out, cfg, std::move(all), "refsets_designs.csv");
  publish(out, cfg, std::move(summary), "refsets_summary.csv");
  return out;
}

StudyOutput run_plot(const ExperimentConfig& cfg, const std::vector<std::filesystem::path>& inputs) {
  std::vector<std::filesystem::path> files = inputs;
  if (files.empty()) {
    if (std::filesystem::is_directory(cfg.output_directory)) {
      for (const auto& entry : std::filesystem::directory_iterator(cfg.output_directory)) {
        if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
  }
  StudyOutput out;
  out.files = emit_plots(files, cfg.output_directory);
  return out;
}

}  // namespace seqdesign
