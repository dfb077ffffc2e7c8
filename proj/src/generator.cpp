#include "seqdesign/generator.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "seqdesign/errors.hpp"
#include "seqdesign/random.hpp"

namespace seqdesign {

std::vector<std::size_t> resolve_order(const OrderPolicy& policy,
                                       std::span<const std::size_t> unknown_indices) {
  std::vector<std::size_t> sorted(unknown_indices.begin(), unknown_indices.end());
  std::sort(sorted.begin(), sorted.end());
  switch (policy.kind) {
    case OrderKind::kDefault:
      return sorted;
    case OrderKind::kRandom: {
      Rng rng(policy.seed);
      rng.shuffle(std::span<std::size_t>(sorted));
      return sorted;
    }
    case OrderKind::kExplicit: {
      std::vector<std::size_t> check = policy.permutation;
      std::sort(check.begin(), check.end());
      if (check != sorted) {
        throw ArgumentError("explicit generation order is not a permutation of the " +
                            std::to_string(sorted.size()) + " unknown parameters");
      }
      return policy.permutation;
    }
  }
  return sorted;
}

namespace {

void validate_task(const Dataset& reference, const RegressorSpec& spec,
                   const GenerationTask& task, std::size_t known_count) {
  spec.validate();
  const auto& schema = reference.schema();
  if (reference.row_count() == 0) throw ArgumentError("reference set is empty");
  if (reference.row_count() > spec.capacity) {
    throw CapacityError(reference.row_count(), spec.capacity,
                        "reference set has " + std::to_string(reference.row_count()) +
                            " rows, exceeding the regressor capacity of " +
                            std::to_string(spec.capacity));
  }
  if (task.conditions.cols() != schema.performance_count()) {
    throw ArgumentError("conditions have " + std::to_string(task.conditions.cols()) +
                        " columns, the reference has " +
                        std::to_string(schema.performance_count()) + " performance indicators");
  }
  if (!task.known_mask.empty() && task.known_mask.size() != schema.parameter_count()) {
    throw ArgumentError("known mask has " + std::to_string(task.known_mask.size()) +
                        " entries for " + std::to_string(schema.parameter_count()) + " parameters");
  }
  if (known_count > 0) {
    if (task.known_values.cols() != known_count || task.known_values.rows() != task.conditions.rows()) {
      throw ArgumentError("known values must be " + std::to_string(task.conditions.rows()) + " x " +
                          std::to_string(known_count));
    }
    for (double v : task.known_values.data()) {
      if (!std::isfinite(v)) throw ValidationError("non-finite known parameter value");
    }
  } else if (task.known_values.cols() != 0 && task.known_values.rows() != 0) {
    throw ArgumentError("known values supplied but the mask marks no parameter as known");
  }
  for (double v : task.conditions.data()) {
    if (!std::isfinite(v)) throw ValidationError("non-finite generation condition");
  }
  if (!(task.noise_std >= 0.0) || !std::isfinite(task.noise_std)) {
    throw ArgumentError("noise standard deviation must be finite and non-negative");
  }
}

}  // namespace

GenerationResult generate(const Dataset& reference, const RegressorSpec& spec,
                          const GenerationTask& task) {
  const auto& schema = reference.schema();
  const std::size_t n_perf = schema.performance_count();
  const std::size_t n_param = schema.parameter_count();
  const std::size_t m = task.conditions.rows();

  std::vector<std::size_t> known, unknown;
  for (std::size_t j = 0; j < n_param; ++j) {
    const bool is_known = !task.known_mask.empty() && task.known_mask[j];
    (is_known ? known : unknown).push_back(j);
  }
  validate_task(reference, spec, task, known.size());

  GenerationResult result;
  result.order = resolve_order(task.order, unknown);

  const auto norm =
      NormalizationState::fit(reference.rows(), NormalizationMode::kMinMax, schema.boolean_mask());
  const Matrix ref = norm.normalize(reference.rows());

  std::vector<std::size_t> perf_cols(n_perf);
  std::iota(perf_cols.begin(), perf_cols.end(), 0);
  Matrix x_ref = ref.select_cols(perf_cols);
  Matrix x_gen = norm.normalize(task.conditions, perf_cols);
  for (std::size_t k = 0; k < known.size(); ++k) {
    const std::size_t col = n_perf + known[k];
    x_ref.append_column(ref.column(col));
    std::vector<double> values(m);
    for (std::size_t r = 0; r < m; ++r) values[r] = norm.normalize_value(col, task.known_values(r, k));
    x_gen.append_column(values);
  }

  Matrix generated(m, n_param, 0.0);
  Rng noise(task.noise_seed);
  for (std::size_t t = 0; t < result.order.size(); ++t) {
    const std::size_t j = result.order[t];
    const auto start = std::chrono::steady_clock::now();
    std::vector<double> y_ref = ref.column(n_perf + j);
    StepDiagnostics step;
    step.parameter = j;
    std::vector<double> column;
    try {
      const auto model = fit(spec, x_ref, y_ref);
      ++result.fit_count;
      PredictDiagnostics diag;
      column = model.predict_mean(x_gen, &diag);
      step.underflow_rows = diag.underflow_count();
      step.bandwidth = model.bandwidth();
    } catch (const TransportError& e) {
      throw GenerationError(t, "generation failed at step " + std::to_string(t) + " (parameter " +
                                   schema.parameter_columns[j] + "): " + e.what());
    } catch (const ProtocolError& e) {
      throw GenerationError(t, "generation failed at step " + std::to_string(t) + " (parameter " +
                                   schema.parameter_columns[j] + "): " + e.what());
    }
    if (task.noise_std > 0.0) {
      for (double& v : column) v += task.noise_std * noise.normal();
    }
    generated.set_column(j, column);
    x_gen.append_column(column);
    x_ref.append_column(y_ref);
    step.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.steps.push_back(step);
  }

  result.designs = Matrix(m, n_param);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t j : unknown) {
      result.designs(r, j) = norm.denormalize_value(n_perf + j, generated(r, j));
    }
    for (std::size_t k = 0; k < known.size(); ++k) result.designs(r, known[k]) = task.known_values(r, k);
  }
  result.unthresholded = result.designs;
  for (std::size_t j : unknown) {
    if (!schema.is_boolean_parameter(j)) continue;
    for (std::size_t r = 0; r < m; ++r) {
      result.designs(r, j) = result.designs(r, j) >= 0.5 ? 1.0 : 0.0;
    }
  }
  return result;
}

GenerationResult inpaint(const Dataset& reference, const RegressorSpec& spec,
                         const GenerationTask& task) {
  return generate(reference, spec, task);
}

}  // namespace seqdesign
