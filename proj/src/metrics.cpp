#include "seqdesign/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "seqdesign/errors.hpp"
#include "seqdesign/parallel.hpp"
#include "seqdesign/random.hpp"
#include "seqdesign/regressor.hpp"

namespace seqdesign::metrics {
namespace {

void check_pair(std::span<const double> t, std::span<const double> p) {
  if (t.size() != p.size()) {
    throw ArgumentError("targets and predictions differ in length (" + std::to_string(t.size()) +
                        " vs " + std::to_string(p.size()) + ")");
  }
  if (t.empty()) throw ArgumentError("metric needs at least one target");
}

constexpr double kNearZeroTarget = 1e-12;

}  // namespace

MapeResult mape(std::span<const double> targets, std::span<const double> predictions) {
  check_pair(targets, predictions);
  MapeResult r;
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (std::abs(targets[i]) < kNearZeroTarget) {
      ++r.skipped;
      continue;
    }
    sum += std::abs(targets[i] - predictions[i]) / std::abs(targets[i]);
    ++used;
  }
  if (used == 0) throw MetricError("MAPE is undefined: every target is numerically zero");
  r.percent = 100.0 * sum / static_cast<double>(used);
  return r;
}

double mae(std::span<const double> targets, std::span<const double> predictions) {
  check_pair(targets, predictions);
  double sum = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) sum += std::abs(targets[i] - predictions[i]);
  return sum / static_cast<double>(targets.size());
}

double r_squared(std::span<const double> targets, std::span<const double> predictions) {
  check_pair(targets, predictions);
  if (targets.size() < 2) throw MetricError("R^2 needs at least two targets");
  const double mean =
      std::accumulate(targets.begin(), targets.end(), 0.0) / static_cast<double>(targets.size());
  double ss_tot = 0.0, ss_res = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    ss_tot += (targets[i] - mean) * (targets[i] - mean);
    ss_res += (targets[i] - predictions[i]) * (targets[i] - predictions[i]);
  }
  if (ss_tot == 0.0) throw MetricError("R^2 is undefined for constant targets");
  return 1.0 - ss_res / ss_tot;
}

KMeansResult kmeans(const Matrix& samples, std::size_t clusters, std::uint64_t seed,
                    std::size_t max_iterations) {
  const std::size_t n = samples.rows();
  if (clusters == 0) throw ArgumentError("k-means needs at least one cluster");
  if (clusters > n) {
    throw ArgumentError("cannot form " + std::to_string(clusters) + " clusters from " +
                        std::to_string(n) + " samples");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  order.resize(clusters);

  KMeansResult result;
  result.centers = samples.select_rows(order);
  result.assignments.assign(n, 0);
  const std::size_t d = samples.cols();
  const std::size_t workers = n * clusters * d >= (1u << 20) ? 0 : 1;
  bool first = true;
  for (std::size_t iter = 0; iter < max_iterations; ++iter) {
    std::vector<char> changed(n, 0);
    parallel_for(n, workers, [&](std::size_t i) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < clusters; ++c) {
        const double dist = squared_distance(samples.row(i), result.centers.row(c));
        if (dist < best_d) {
          best_d = dist;
          best = c;
        }
      }
      changed[i] = result.assignments[i] != best;
      result.assignments[i] = best;
    });
    result.iterations = iter + 1;
    const bool any_change = std::any_of(changed.begin(), changed.end(), [](char c) { return c; });
    if (!first && !any_change) break;
    first = false;

    Matrix sums(clusters, d, 0.0);
    std::vector<std::size_t> counts(clusters, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = result.assignments[i];
      ++counts[c];
      auto src = samples.row(i);
      auto dst = sums.row(c);
      for (std::size_t k = 0; k < d; ++k) dst[k] += src[k];
    }
    for (std::size_t c = 0; c < clusters; ++c) {
      if (counts[c] == 0) continue;
      auto dst = result.centers.row(c);
      auto src = sums.row(c);
      for (std::size_t k = 0; k < d; ++k) dst[k] = src[k] / static_cast<double>(counts[c]);
    }
  }
  return result;
}

HistogramPair build_state_space(const Matrix& reference_samples, const Matrix& generated_samples,
                                std::size_t clusters, std::uint64_t seed,
                                std::size_t max_iterations) {
  if (reference_samples.rows() == 0 || generated_samples.rows() == 0) {
    throw ArgumentError("state space needs non-empty reference and generated samples");
  }
  if (reference_samples.cols() != generated_samples.cols()) {
    throw ShapeError("reference and generated samples differ in width");
  }
  if (clusters < 2) throw ArgumentError("state space needs at least 2 clusters");
  Matrix pooled = reference_samples;
  for (std::size_t r = 0; r < generated_samples.rows(); ++r) pooled.append_row(generated_samples.row(r));
  const auto km = kmeans(pooled, clusters, seed, max_iterations);

  HistogramPair hist;
  hist.cluster_centers = km.centers;
  hist.reference.assign(clusters, 0.0);
  hist.generated.assign(clusters, 0.0);
  const std::size_t n_ref = reference_samples.rows();
  for (std::size_t i = 0; i < pooled.rows(); ++i) {
    (i < n_ref ? hist.reference : hist.generated)[km.assignments[i]] += 1.0;
  }
  for (double& p : hist.reference) p /= static_cast<double>(n_ref);
  for (double& q : hist.generated) q /= static_cast<double>(generated_samples.rows());
  return hist;
}

std::vector<double> prd_lambdas(std::size_t resolution) {
  std::vector<double> lambdas(resolution);
  for (std::size_t i = 1; i <= resolution; ++i) {
    // The midpoint angle is pi/4 exactly; tan() of its rounded value is not 1.
    if (2 * i == resolution + 1) {
      lambdas[i - 1] = 1.0;
      continue;
    }
    const double angle = static_cast<double>(i) / static_cast<double>(resolution + 1) *
                         (std::numbers::pi / 2.0);
    lambdas[i - 1] = std::tan(angle);
  }
  return lambdas;
}

PrdCurve prd_curve(const HistogramPair& hist, std::size_t resolution) {
  if (resolution == 0 || resolution % 2 == 0) {
    throw ArgumentError("PRD angular resolution must be a positive odd integer");
  }
  const auto& p = hist.reference;
  const auto& q = hist.generated;
  if (p.size() != q.size() || p.empty()) throw ShapeError("histograms differ in size or are empty");
  // Dividing by the realized totals removes the rounding left by count / n
  // normalization, so identical histograms reach exactly 1 at slope 1.
  const double p_total = std::accumulate(p.begin(), p.end(), 0.0);
  const double q_total = std::accumulate(q.begin(), q.end(), 0.0);
  if (!(p_total > 0.0) || !(q_total > 0.0)) throw ArgumentError("histograms must carry mass");

  PrdCurve curve;
  curve.resolution = resolution;
  curve.lambdas = prd_lambdas(resolution);
  curve.precision.resize(resolution);
  curve.recall.resize(resolution);
  for (std::size_t k = 0; k < resolution; ++k) {
    const double lambda = curve.lambdas[k];
    double alpha = 0.0, beta = 0.0;
    for (std::size_t w = 0; w < p.size(); ++w) {
      alpha += std::min(lambda * p[w], q[w]);
      beta += std::min(p[w], q[w] / lambda);
    }
    curve.precision[k] = std::clamp(alpha / q_total, 0.0, 1.0);
    curve.recall[k] = std::clamp(beta / p_total, 0.0, 1.0);
  }
  return curve;
}

PrdCurve average_curves(std::span<const PrdCurve> curves) {
  if (curves.empty()) throw ArgumentError("no curves to average");
  PrdCurve avg = curves.front();
  for (std::size_t c = 1; c < curves.size(); ++c) {
    if (curves[c].resolution != avg.resolution) throw ShapeError("curves use different grids");
    for (std::size_t k = 0; k < avg.resolution; ++k) {
      avg.precision[k] += curves[c].precision[k];
      avg.recall[k] += curves[c].recall[k];
    }
  }
  const double n = static_cast<double>(curves.size());
  for (std::size_t k = 0; k < avg.resolution; ++k) {
    avg.precision[k] /= n;
    avg.recall[k] /= n;
  }
  return avg;
}

std::pair<double, double> prd_at_unit_slope(const PrdCurve& curve) {
  const std::size_t mid = curve.resolution / 2;
  return {curve.precision.at(mid), curve.recall.at(mid)};
}

double gaussian_kernel(std::span<const double> a, std::span<const double> b, double bandwidth) {
  return std::exp(-squared_distance(a, b) / (2.0 * bandwidth * bandwidth));
}

double mmd_squared(const Matrix& x, const Matrix& y, const MmdConfig& config) {
  if (!(config.bandwidth > 0.0)) throw ArgumentError("MMD bandwidth must be positive");
  if (x.cols() != y.cols()) throw ShapeError("MMD sample sets differ in width");
  const std::size_t n = x.rows();
  const std::size_t m = y.rows();
  const bool unbiased = config.estimator == MmdEstimator::kUnbiased;
  if (unbiased && (n < 2 || m < 2)) {
    throw ArgumentError("unbiased MMD needs at least 2 samples in each set");
  }
  if (n == 0 || m == 0) throw ArgumentError("MMD needs non-empty sample sets");
  const double h = config.bandwidth;

  // Within-set sums over unordered pairs i < j, doubled.
  auto within = [h](const Matrix& s) {
    double sum = 0.0;
    for (std::size_t i = 0; i < s.rows(); ++i) {
      for (std::size_t j = i + 1; j < s.rows(); ++j) sum += gaussian_kernel(s.row(i), s.row(j), h);
    }
    return 2.0 * sum;
  };
  double cross = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) cross += gaussian_kernel(x.row(i), y.row(j), h);
  }
  const double dn = static_cast<double>(n);
  const double dm = static_cast<double>(m);
  if (unbiased) {
    return within(x) / (dn * (dn - 1.0)) + within(y) / (dm * (dm - 1.0)) - 2.0 * cross / (dn * dm);
  }
  // Biased (V-statistic) form keeps the k(x_i, x_i) = 1 diagonal.
  return (within(x) + dn) / (dn * dn) + (within(y) + dm) / (dm * dm) - 2.0 * cross / (dn * dm);
}

double mmd_default_bandwidth(const Matrix& x, const Matrix& y) {
  const double h = median_pairwise_distance(x, y);
  return h > 0.0 ? h : 1.0;
}

}  // namespace seqdesign::metrics
