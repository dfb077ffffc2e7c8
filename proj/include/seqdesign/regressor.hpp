#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "seqdesign/distribution.hpp"
#include "seqdesign/matrix.hpp"

namespace seqdesign {

enum class BackendKind { kKernel, kKnn, kRemote };

BackendKind parse_backend_kind(std::string_view text);
std::string_view backend_name(BackendKind kind);

// Largest reference set the in-context regressor accepts.
inline constexpr std::size_t kDefaultReferenceCapacity = 10000;

struct RegressorSpec {
  BackendKind backend = BackendKind::kKernel;
  // Gaussian kernel bandwidth; unset means the median pairwise distance of the
  // fitted inputs.
  std::optional<double> bandwidth;
  std::size_t neighbors = 1;
  std::string endpoint;
  std::size_t capacity = kDefaultReferenceCapacity;
  std::size_t bins = 64;
  int timeout_ms = 30000;
  int retries = 2;

  void validate() const;
};

struct PredictDiagnostics {
  // One entry per query row: true when every kernel weight underflowed and
  // uniform weights were used instead.
  std::vector<bool> weight_underflow;

  std::size_t underflow_count() const;
};

// In-context regressor bound to one reference pair (X_ref, y_ref). Immutable
// and cheap to copy; prediction is deterministic and thread-safe.
class FittedRegressor {
 public:
  class Impl;

  std::size_t input_width() const;
  std::size_t reference_rows() const;
  const RegressorSpec& spec() const;
  // Bandwidth in use by the kernel backend (0 for other backends).
  double bandwidth() const;

  std::vector<PredictedDistribution> predict_distribution(
      const Matrix& queries, PredictDiagnostics* diagnostics = nullptr) const;
  // Weighted mean of the reference outputs, computed directly rather than
  // from the bins.
  std::vector<double> predict_mean(const Matrix& queries,
                                   PredictDiagnostics* diagnostics = nullptr) const;
  // One draw per query row from its predicted distribution.
  std::vector<double> sample(const Matrix& queries, std::uint64_t seed) const;

 private:
  friend FittedRegressor fit(const RegressorSpec&, Matrix, std::vector<double>);
  explicit FittedRegressor(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

FittedRegressor fit(const RegressorSpec& spec, Matrix x_ref, std::vector<double> y_ref);

// Median Euclidean distance over row pairs, using at most `max_rows` evenly
// strided rows. Returns 0 when fewer than two rows are available.
double median_pairwise_distance(const Matrix& x, std::size_t max_rows = 1000);
double median_pairwise_distance(const Matrix& x, const Matrix& y, std::size_t max_rows = 1000);

// Distribution of `values` under normalized `weights`, binned onto `bins`
// equal-width bins spanning the padded range of `values`.
PredictedDistribution binned_distribution(const std::vector<double>& values,
                                          const std::vector<double>& weights, std::size_t bins);

// Draw from a piecewise-constant distribution given a uniform pair.
double sample_distribution(const PredictedDistribution& dist, double u_bin, double u_within);

}  // namespace seqdesign
