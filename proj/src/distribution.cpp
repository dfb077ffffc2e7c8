#include "seqdesign/distribution.hpp"

#include <cmath>
#include <string>

#include "seqdesign/errors.hpp"

namespace seqdesign {

double PredictedDistribution::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    m += probabilities[i] * 0.5 * (bin_edges[i] + bin_edges[i + 1]);
  }
  return m;
}

void PredictedDistribution::validate(double sum_tolerance) const {
  if (probabilities.empty()) throw ProtocolError("distribution has no bins");
  if (bin_edges.size() != probabilities.size() + 1) {
    throw ProtocolError("distribution has " + std::to_string(bin_edges.size()) + " edges for " +
                        std::to_string(probabilities.size()) + " bins");
  }
  for (std::size_t i = 0; i < bin_edges.size(); ++i) {
    if (!std::isfinite(bin_edges[i])) throw ProtocolError("non-finite bin edge");
    if (i > 0 && !(bin_edges[i] > bin_edges[i - 1])) {
      throw ProtocolError("bin edges are not strictly increasing");
    }
  }
  double sum = 0.0;
  for (double p : probabilities) {
    if (!std::isfinite(p) || p < 0.0) throw ProtocolError("negative or non-finite probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > sum_tolerance) {
    throw ProtocolError("probabilities sum to " + std::to_string(sum) + ", expected 1");
  }
}

bool PredictedDistribution::is_valid(double sum_tolerance) const {
  try {
    validate(sum_tolerance);
    return true;
  } catch (const ProtocolError&) {
    return false;
  }
}

}  // namespace seqdesign
