#include "seqdesign/synthetic.hpp"

#include "seqdesign/errors.hpp"
#include "seqdesign/random.hpp"

namespace seqdesign {

Matrix SyntheticProblem::evaluate_all(const Matrix& designs) const {
  if (designs.cols() != dimension()) throw ShapeError("design width does not match problem dimension");
  Matrix out(designs.rows(), schema.performance_count());
  for (std::size_t r = 0; r < designs.rows(); ++r) {
    const auto perf = evaluate(designs.row(r));
    for (std::size_t c = 0; c < perf.size(); ++c) out(r, c) = perf[c];
  }
  return out;
}

std::vector<std::string> synthetic_problem_names() {
  return {"linear-sum", "quadratic-bowl", "hierarchical"};
}

SyntheticProblem make_synthetic_problem(const std::string& name, std::size_t dimension) {
  if (dimension == 0) throw ArgumentError("synthetic problem dimension must be positive");
  SyntheticProblem p;
  p.name = name;
  for (std::size_t i = 0; i < dimension; ++i) p.schema.parameter_columns.push_back("x" + std::to_string(i));
  p.lower.assign(dimension, 0.0);
  p.upper.assign(dimension, 1.0);

  if (name == "linear-sum") {
    p.schema.performance_columns = {"f"};
    p.evaluate = [](std::span<const double> x) {
      double s = 1.0;
      for (double v : x) s += v;
      return std::vector<double>{s};
    };
  } else if (name == "quadratic-bowl") {
    p.schema.performance_columns = {"f"};
    p.evaluate = [](std::span<const double> x) {
      double s = 0.5;
      for (double v : x) s += (v + 0.25) * (v + 0.25);
      return std::vector<double>{s};
    };
  } else if (name == "hierarchical") {
    if (dimension < 3) throw ArgumentError("hierarchical problem needs dimension >= 3");
    p.schema.performance_columns = {"drag", "lift"};
    p.schema.boolean_columns = {"x0"};
    p.evaluate = [](std::span<const double> x) {
      const bool gate = x[0] >= 0.5;
      double drag = 0.5;
      for (std::size_t i = 1; i < x.size(); ++i) drag += gate ? x[i] * x[i] : 0.5 * x[i];
      const double lift = gate ? 1.0 + 2.0 * x[1] : 1.0 + x[2] + 0.5 * x[1] * x[2];
      return std::vector<double>{drag, lift};
    };
  } else {
    throw ArgumentError("unknown synthetic problem: " + name);
  }
  p.schema.validate();
  return p;
}

Dataset sample_synthetic_dataset(const SyntheticProblem& problem, std::size_t rows,
                                 std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t n_perf = problem.schema.performance_count();
  const std::size_t dim = problem.dimension();
  Matrix data(rows, n_perf + dim);
  std::vector<double> x(dim);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < dim; ++j) {
      x[j] = problem.schema.is_boolean_parameter(j)
                 ? static_cast<double>(rng.below(2))
                 : rng.uniform(problem.lower[j], problem.upper[j]);
    }
    const auto perf = problem.evaluate(x);
    for (std::size_t c = 0; c < n_perf; ++c) data(r, c) = perf[c];
    for (std::size_t j = 0; j < dim; ++j) data(r, n_perf + j) = x[j];
  }
  return Dataset(problem.schema, std::move(data));
}

}  // namespace seqdesign
