#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "seqdesign/data.hpp"
#include "seqdesign/matrix.hpp"
#include "seqdesign/regressor.hpp"
#include "seqdesign/synthetic.hpp"

namespace seqdesign {

// Maps designs (m x N, schema parameter order) to achieved performances (m x n).
class PerformanceEvaluator {
 public:
  virtual ~PerformanceEvaluator() = default;
  virtual Matrix evaluate(const Matrix& designs) const = 0;
  virtual std::string name() const = 0;
};

class AnalyticEvaluator final : public PerformanceEvaluator {
 public:
  explicit AnalyticEvaluator(SyntheticProblem problem) : problem_(std::move(problem)) {}
  Matrix evaluate(const Matrix& designs) const override { return problem_.evaluate_all(designs); }
  std::string name() const override { return "analytic:" + problem_.name; }

 private:
  SyntheticProblem problem_;
};

// One regressor per performance indicator, fitted on (parameters -> indicator)
// pairs in min-max space.
class SurrogateEvaluator final : public PerformanceEvaluator {
 public:
  SurrogateEvaluator(const Dataset& training, const RegressorSpec& spec);

  Matrix evaluate(const Matrix& designs) const override;
  std::string name() const override { return "surrogate"; }

  struct Fidelity {
    std::vector<double> r_squared;  // per indicator
    std::vector<double> mape;       // per indicator, percent
  };
  // Predictive accuracy of the surrogate on held-out designs.
  Fidelity fidelity(const Dataset& held_out) const;

 private:
  NormalizationState normalization_;
  std::vector<FittedRegressor> models_;
  std::size_t parameter_count_ = 0;
};

}  // namespace seqdesign
