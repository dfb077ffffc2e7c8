#pragma once

#include <vector>

namespace seqdesign {

// Piecewise-constant density over a scalar target: probability mass
// probabilities[i] spread uniformly on [bin_edges[i], bin_edges[i + 1]).
struct PredictedDistribution {
  std::vector<double> bin_edges;      // strictly increasing, size B + 1
  std::vector<double> probabilities;  // non-negative, size B, sums to 1

  std::size_t bin_count() const { return probabilities.size(); }
  // Sum of probability times bin midpoint.
  double mean() const;
  // Throws ProtocolError describing the first violated invariant.
  void validate(double sum_tolerance = 1e-9) const;
  bool is_valid(double sum_tolerance = 1e-9) const;

  friend bool operator==(const PredictedDistribution&, const PredictedDistribution&) = default;
};

}  // namespace seqdesign
