#include "seqdesign/evaluator.hpp"

#include "seqdesign/errors.hpp"
#include "seqdesign/metrics.hpp"

namespace seqdesign {

SurrogateEvaluator::SurrogateEvaluator(const Dataset& training, const RegressorSpec& spec) {
  const auto& schema = training.schema();
  parameter_count_ = schema.parameter_count();
  const Matrix params = training.parameters();
  std::vector<bool> mask(parameter_count_);
  for (std::size_t j = 0; j < parameter_count_; ++j) mask[j] = schema.is_boolean_parameter(j);
  normalization_ = NormalizationState::fit(params, NormalizationMode::kMinMax, mask);
  const Matrix x = normalization_.normalize(params);
  const Matrix perf = training.performances();
  for (std::size_t c = 0; c < perf.cols(); ++c) models_.push_back(fit(spec, x, perf.column(c)));
}

Matrix SurrogateEvaluator::evaluate(const Matrix& designs) const {
  if (designs.cols() != parameter_count_) throw ShapeError("design width does not match surrogate");
  const Matrix x = normalization_.normalize(designs);
  Matrix out(designs.rows(), models_.size());
  for (std::size_t c = 0; c < models_.size(); ++c) out.set_column(c, models_[c].predict_mean(x));
  return out;
}

SurrogateEvaluator::Fidelity SurrogateEvaluator::fidelity(const Dataset& held_out) const {
  Fidelity f;
  const Matrix predicted = evaluate(held_out.parameters());
  const Matrix actual = held_out.performances();
  for (std::size_t c = 0; c < actual.cols(); ++c) {
    const auto t = actual.column(c);
    const auto p = predicted.column(c);
    f.r_squared.push_back(metrics::r_squared(t, p));
    f.mape.push_back(metrics::mape(t, p).percent);
  }
  return f;
}

}  // namespace seqdesign
