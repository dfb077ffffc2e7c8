#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "seqdesign/data.hpp"
#include "seqdesign/matrix.hpp"
#include "seqdesign/regressor.hpp"

namespace seqdesign {

enum class OrderKind { kDefault, kRandom, kExplicit };

// Order in which unknown parameters are generated.
struct OrderPolicy {
  OrderKind kind = OrderKind::kDefault;
  std::uint64_t seed = 0;
  std::vector<std::size_t> permutation;  // parameter indices, explicit only

  static OrderPolicy default_order() { return {}; }
  static OrderPolicy random(std::uint64_t seed) { return {OrderKind::kRandom, seed, {}}; }
  static OrderPolicy explicit_order(std::vector<std::size_t> permutation) {
    return {OrderKind::kExplicit, 0, std::move(permutation)};
  }
};

struct GenerationTask {
  Matrix conditions;             // m x n target performances
  std::vector<bool> known_mask;  // length N, true = supplied; empty = nothing known
  Matrix known_values;           // m x (number of true mask entries), schema order
  OrderPolicy order;
  double noise_std = 0.0;        // normalized-space Gaussian noise; 0 disables
  std::uint64_t noise_seed = 0;
};

struct StepDiagnostics {
  std::size_t parameter = 0;       // schema index generated at this step
  std::size_t underflow_rows = 0;  // rows that fell back to uniform weights
  double bandwidth = 0.0;
  double seconds = 0.0;
};

struct GenerationResult {
  Matrix designs;                  // m x N, schema order, denormalized
  Matrix unthresholded;            // as designs, boolean columns before rounding
  std::vector<std::size_t> order;  // generation order actually used
  std::vector<StepDiagnostics> steps;
  std::size_t fit_count = 0;
};

// Default: ascending. Random: seeded shuffle. Explicit: validated copy, must
// be a bijection onto `unknown_indices`.
std::vector<std::size_t> resolve_order(const OrderPolicy& policy,
                                       std::span<const std::size_t> unknown_indices);

// Generates every parameter not marked known, one parameter per step. Step t
// fits the regressor on [performances | known columns | columns generated so
// far] -> next column of the reference set, and predicts that column for the
// conditions. Work happens in min-max space fitted on `reference`; results
// are denormalized, and boolean parameters are thresholded at 0.5.
GenerationResult generate(const Dataset& reference, const RegressorSpec& spec,
                          const GenerationTask& task);

// Same machinery as generate(); known parameters are copied verbatim into the
// result and condition every step.
GenerationResult inpaint(const Dataset& reference, const RegressorSpec& spec,
                         const GenerationTask& task);

}  // namespace seqdesign
