#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "seqdesign/data.hpp"
#include "seqdesign/matrix.hpp"

namespace seqdesign {

// Closed-form design problem: parameters sampled uniformly on [lower, upper]
// (boolean parameters uniformly from {0, 1}) mapped to performance values.
struct SyntheticProblem {
  std::string name;
  DatasetSchema schema;
  std::vector<double> lower;
  std::vector<double> upper;
  std::function<std::vector<double>(std::span<const double>)> evaluate;

  std::size_t dimension() const { return schema.parameter_count(); }
  Matrix evaluate_all(const Matrix& designs) const;
};

// Known names:
//   linear-sum      1 + sum x_i
//   quadratic-bowl  0.5 + sum (x_i + 0.25)^2
//   hierarchical    x_0 is a 0/1 gate choosing between two formulas for a
//                   drag-like and a lift-like indicator (dimension >= 3)
SyntheticProblem make_synthetic_problem(const std::string& name, std::size_t dimension);
std::vector<std::string> synthetic_problem_names();

Dataset sample_synthetic_dataset(const SyntheticProblem& problem, std::size_t rows,
                                 std::uint64_t seed);

}  // namespace seqdesign
