#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "seqdesign/matrix.hpp"

namespace seqdesign::metrics {

struct MapeResult {
  double percent = 0.0;
  std::size_t skipped = 0;  // targets with |t| < 1e-12, excluded from the mean
};

// Mean absolute percentage error over targets not numerically zero. Throws
// MetricError when every target is near zero.
MapeResult mape(std::span<const double> targets, std::span<const double> predictions);
double mae(std::span<const double> targets, std::span<const double> predictions);
// 1 - SS_res / SS_tot; throws MetricError on constant targets.
double r_squared(std::span<const double> targets, std::span<const double> predictions);

// Reference (P) and generated (Q) histograms over a shared set of clusters.
struct HistogramPair {
  std::vector<double> reference;
  std::vector<double> generated;
  Matrix cluster_centers;
};

struct KMeansResult {
  Matrix centers;
  std::vector<std::size_t> assignments;
  std::size_t iterations = 0;
};

// Lloyd's algorithm from `clusters` distinct seeded initial points. Ties go
// to the lowest cluster index; an emptied cluster keeps its previous center.
KMeansResult kmeans(const Matrix& samples, std::size_t clusters, std::uint64_t seed,
                    std::size_t max_iterations = 100);

// Clusters the pooled samples and returns each set's normalized histogram
// of cluster memberships.
HistogramPair build_state_space(const Matrix& reference_samples, const Matrix& generated_samples,
                                std::size_t clusters, std::uint64_t seed,
                                std::size_t max_iterations = 100);

struct PrdCurve {
  std::size_t resolution = 0;
  std::vector<double> lambdas;
  std::vector<double> precision;  // alpha
  std::vector<double> recall;     // beta
};

// Equiangular slopes tan(i / (m + 1) * pi / 2), i = 1..m.
std::vector<double> prd_lambdas(std::size_t resolution);

// alpha(l) = sum min(l P, Q), beta(l) = sum min(P, Q / l) over the slope grid.
// Requires an odd resolution so that l = 1 is on the grid.
PrdCurve prd_curve(const HistogramPair& hist, std::size_t resolution);

// Pointwise average of curves sharing one grid.
PrdCurve average_curves(std::span<const PrdCurve> curves);

// Precision and recall at slope 1 (the grid midpoint).
std::pair<double, double> prd_at_unit_slope(const PrdCurve& curve);

enum class MmdEstimator { kUnbiased, kBiased };

struct MmdConfig {
  double bandwidth = 1.0;  // sigma in exp(-|x - y|^2 / (2 sigma^2))
  MmdEstimator estimator = MmdEstimator::kUnbiased;
};

double gaussian_kernel(std::span<const double> a, std::span<const double> b, double bandwidth);

// Squared MMD. The unbiased estimator drops the i == i' terms from both
// within-set sums and keeps every (x_i, y_j) pair in the cross term; it can be
// negative.
double mmd_squared(const Matrix& x, const Matrix& y, const MmdConfig& config);

// Median heuristic bandwidth over pooled pairwise distances (1 when degenerate).
double mmd_default_bandwidth(const Matrix& x, const Matrix& y);

}  // namespace seqdesign::metrics
