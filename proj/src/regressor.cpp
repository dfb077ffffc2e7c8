#include "seqdesign/regressor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "seqdesign/bridge.hpp"
#include "seqdesign/csv.hpp"
#include "seqdesign/errors.hpp"
#include "seqdesign/parallel.hpp"
#include "seqdesign/random.hpp"

namespace seqdesign {

BackendKind parse_backend_kind(std::string_view text) {
  if (text == "kernel") return BackendKind::kKernel;
  if (text == "knn") return BackendKind::kKnn;
  if (text == "remote") return BackendKind::kRemote;
  throw ArgumentError("unknown regressor backend: " + std::string(text));
}

std::string_view backend_name(BackendKind kind) {
  switch (kind) {
    case BackendKind::kKernel:
      return "kernel";
    case BackendKind::kKnn:
      return "knn";
    case BackendKind::kRemote:
      return "remote";
  }
  return "unknown";
}

void RegressorSpec::validate() const {
  if (capacity == 0) throw ArgumentError("regressor capacity must be positive");
  if (bins == 0) throw ArgumentError("regressor bin count must be positive");
  if (bandwidth && !(*bandwidth > 0.0 && std::isfinite(*bandwidth))) {
    throw ArgumentError("kernel bandwidth must be positive, got " + format_double(*bandwidth));
  }
  if (neighbors == 0) throw ArgumentError("knn neighbor count must be at least 1");
  if (backend == BackendKind::kRemote && endpoint.empty()) {
    throw ArgumentError("remote backend needs an endpoint");
  }
}

std::size_t PredictDiagnostics::underflow_count() const {
  return static_cast<std::size_t>(std::count(weight_underflow.begin(), weight_underflow.end(), true));
}

namespace {

// Work (query rows x reference rows) below which prediction stays on the
// calling thread.
constexpr std::size_t kParallelThreshold = 1u << 18;

double median_of(std::vector<double>& values) {
  if (values.empty()) return 0.0;
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  double m = values[mid];
  if (values.size() % 2 == 0) {
    const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    m = 0.5 * (m + lower);
  }
  return m;
}

std::vector<std::size_t> strided_rows(std::size_t rows, std::size_t max_rows) {
  std::vector<std::size_t> idx;
  if (rows <= max_rows) {
    idx.resize(rows);
    std::iota(idx.begin(), idx.end(), 0);
    return idx;
  }
  for (std::size_t k = 0; k < max_rows; ++k) idx.push_back(k * rows / max_rows);
  return idx;
}

}  // namespace

double median_pairwise_distance(const Matrix& x, std::size_t max_rows) {
  const auto idx = strided_rows(x.rows(), max_rows);
  std::vector<double> d;
  d.reserve(idx.size() * (idx.size() - (idx.empty() ? 0 : 1)) / 2);
  for (std::size_t a = 0; a < idx.size(); ++a) {
    for (std::size_t b = a + 1; b < idx.size(); ++b) {
      d.push_back(std::sqrt(squared_distance(x.row(idx[a]), x.row(idx[b]))));
    }
  }
  return median_of(d);
}

double median_pairwise_distance(const Matrix& x, const Matrix& y, std::size_t max_rows) {
  Matrix pooled;
  for (std::size_t r = 0; r < x.rows(); ++r) pooled.append_row(x.row(r));
  for (std::size_t r = 0; r < y.rows(); ++r) pooled.append_row(y.row(r));
  return median_pairwise_distance(pooled, max_rows);
}

PredictedDistribution binned_distribution(const std::vector<double>& values,
                                          const std::vector<double>& weights, std::size_t bins) {
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double range = *hi_it - *lo_it;
  double pad = 1e-9 * range;
  if (pad == 0.0) pad = 1e-9 * std::max(1.0, std::abs(*lo_it));
  const double lo = *lo_it - pad;
  const double hi = *hi_it + pad;
  const double width = (hi - lo) / static_cast<double>(bins);

  PredictedDistribution dist;
  dist.bin_edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) dist.bin_edges[i] = lo + width * static_cast<double>(i);
  dist.bin_edges.back() = hi;
  dist.probabilities.assign(bins, 0.0);
  double total = 0.0;
  for (double w : weights) total += w;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (weights[i] == 0.0) continue;
    auto bin = static_cast<std::size_t>(std::floor((values[i] - lo) / width));
    bin = std::min(bin, bins - 1);
    dist.probabilities[bin] += weights[i] / total;
  }
  return dist;
}

double sample_distribution(const PredictedDistribution& dist, double u_bin, double u_within) {
  double cumulative = 0.0;
  std::size_t chosen = dist.bin_count() - 1;
  for (std::size_t i = 0; i < dist.bin_count(); ++i) {
    cumulative += dist.probabilities[i];
    if (u_bin < cumulative && dist.probabilities[i] > 0.0) {
      chosen = i;
      break;
    }
  }
  // Rounding can leave u_bin above the final cumulative sum; fall back to the
  // last bin that carries mass.
  if (u_bin >= cumulative) {
    for (std::size_t i = dist.bin_count(); i-- > 0;) {
      if (dist.probabilities[i] > 0.0) {
        chosen = i;
        break;
      }
    }
  }
  const double a = dist.bin_edges[chosen];
  const double b = dist.bin_edges[chosen + 1];
  return a + u_within * (b - a);
}

class FittedRegressor::Impl {
 public:
  Impl(RegressorSpec spec, Matrix x, std::vector<double> y)
      : spec_(std::move(spec)), x_(std::move(x)), y_(std::move(y)) {
    const auto [lo, hi] = std::minmax_element(y_.begin(), y_.end());
    y_min_ = *lo;
    y_max_ = *hi;
  }
  virtual ~Impl() = default;

  const RegressorSpec& spec() const { return spec_; }
  std::size_t width() const { return x_.cols(); }
  std::size_t rows() const { return x_.rows(); }
  virtual double bandwidth() const { return 0.0; }

  void check_width(const Matrix& q) const {
    if (q.cols() != x_.cols()) {
      throw ShapeError("query width " + std::to_string(q.cols()) + " does not match fitted width " +
                       std::to_string(x_.cols()));
    }
  }

  virtual std::vector<double> means(const Matrix& q, PredictDiagnostics* diag) const = 0;
  virtual std::vector<PredictedDistribution> distributions(const Matrix& q,
                                                           PredictDiagnostics* diag) const = 0;

 protected:
  RegressorSpec spec_;
  Matrix x_;
  std::vector<double> y_;
  double y_min_ = 0.0;
  double y_max_ = 0.0;
};

namespace {

// Backends that reduce to a weight per reference row.
class WeightedImpl : public FittedRegressor::Impl {
 public:
  using Impl::Impl;

  // Returns false when all weights were zero and uniform weights were used.
  virtual bool weights(std::span<const double> query, std::vector<double>& w) const = 0;

  std::vector<double> means(const Matrix& q, PredictDiagnostics* diag) const override {
    check_width(q);
    std::vector<double> out(q.rows());
    std::vector<char> underflow(q.rows(), 0);
    run_rows(q.rows(), [&](std::size_t r, std::vector<double>& w) {
      underflow[r] = !weights(q.row(r), w);
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) {
        num += w[i] * y_[i];
        den += w[i];
      }
      out[r] = std::clamp(num / den, y_min_, y_max_);
    });
    record(diag, underflow);
    return out;
  }

  std::vector<PredictedDistribution> distributions(const Matrix& q,
                                                   PredictDiagnostics* diag) const override {
    check_width(q);
    std::vector<PredictedDistribution> out(q.rows());
    std::vector<char> underflow(q.rows(), 0);
    run_rows(q.rows(), [&](std::size_t r, std::vector<double>& w) {
      underflow[r] = !weights(q.row(r), w);
      out[r] = binned_distribution(y_, w, spec_.bins);
    });
    record(diag, underflow);
    return out;
  }

 private:
  template <typename Fn>
  void run_rows(std::size_t n, Fn&& fn) const {
    const std::size_t workers = n * rows() >= kParallelThreshold ? 0 : 1;
    const std::size_t chunks = workers == 1 ? 1 : std::min<std::size_t>(n, 64);
    parallel_for(chunks, workers, [&](std::size_t c) {
      std::vector<double> w(rows());
      for (std::size_t r = c * n / chunks; r < (c + 1) * n / chunks; ++r) fn(r, w);
    });
  }

  static void record(PredictDiagnostics* diag, const std::vector<char>& underflow) {
    if (!diag) return;
    diag->weight_underflow.assign(underflow.begin(), underflow.end());
  }
};

class KernelImpl final : public WeightedImpl {
 public:
  KernelImpl(RegressorSpec spec, Matrix x, std::vector<double> y)
      : WeightedImpl(std::move(spec), std::move(x), std::move(y)) {
    h_ = spec_.bandwidth ? *spec_.bandwidth : median_pairwise_distance(x_);
    if (!(h_ > 0.0)) h_ = 1.0;
    inv_two_h2_ = 1.0 / (2.0 * h_ * h_);
  }

  double bandwidth() const override { return h_; }

  bool weights(std::span<const double> query, std::vector<double>& w) const override {
    double total = 0.0;
    for (std::size_t i = 0; i < x_.rows(); ++i) {
      w[i] = std::exp(-squared_distance(query, x_.row(i)) * inv_two_h2_);
      total += w[i];
    }
    if (total > 0.0) return true;
    std::fill(w.begin(), w.end(), 1.0);
    return false;
  }

 private:
  double h_ = 1.0;
  double inv_two_h2_ = 0.5;
};

class KnnImpl final : public WeightedImpl {
 public:
  using WeightedImpl::WeightedImpl;

  bool weights(std::span<const double> query, std::vector<double>& w) const override {
    const std::size_t n = x_.rows();
    const std::size_t k = std::min(spec_.neighbors, n);
    std::vector<std::pair<double, std::size_t>> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = {squared_distance(query, x_.row(i)), i};
    // Pair ordering breaks distance ties by the lower reference index.
    std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k - 1), d.end());
    std::fill(w.begin(), w.end(), 0.0);
    const auto kth = d[k - 1];
    for (std::size_t i = 0; i < n; ++i) {
      if (d[i] <= kth) w[d[i].second] = 1.0;
    }
    return true;
  }
};

class RemoteImpl final : public FittedRegressor::Impl {
 public:
  RemoteImpl(RegressorSpec spec, Matrix x, std::vector<double> y)
      : Impl(std::move(spec), std::move(x), std::move(y)),
        client_(spec_.endpoint, spec_.timeout_ms, spec_.retries) {}

  std::vector<double> means(const Matrix& q, PredictDiagnostics* diag) const override {
    auto response = call(q, false);
    if (diag) diag->weight_underflow.assign(q.rows(), false);
    return std::move(response.means);
  }

  std::vector<PredictedDistribution> distributions(const Matrix& q,
                                                   PredictDiagnostics* diag) const override {
    auto response = call(q, true);
    if (!response.distributions) {
      throw ProtocolError("remote response is missing the requested distributions");
    }
    if (diag) diag->weight_underflow.assign(q.rows(), false);
    return std::move(*response.distributions);
  }

 private:
  bridge::FitPredictResponse call(const Matrix& q, bool want_distribution) const {
    check_width(q);
    bridge::FitPredictRequest request;
    request.x_train = x_;
    request.y_train = y_;
    request.x_query = q;
    request.want_distribution = want_distribution;
    request.request_id = bridge::make_request_id(request);
    return client_.fit_predict(request);
  }

  bridge::BridgeClient client_;
};

}  // namespace

std::size_t FittedRegressor::input_width() const { return impl_->width(); }
std::size_t FittedRegressor::reference_rows() const { return impl_->rows(); }
const RegressorSpec& FittedRegressor::spec() const { return impl_->spec(); }
double FittedRegressor::bandwidth() const { return impl_->bandwidth(); }

std::vector<PredictedDistribution> FittedRegressor::predict_distribution(
    const Matrix& queries, PredictDiagnostics* diagnostics) const {
  return impl_->distributions(queries, diagnostics);
}

std::vector<double> FittedRegressor::predict_mean(const Matrix& queries,
                                                  PredictDiagnostics* diagnostics) const {
  return impl_->means(queries, diagnostics);
}

std::vector<double> FittedRegressor::sample(const Matrix& queries, std::uint64_t seed) const {
  const auto dists = predict_distribution(queries);
  Rng rng(seed);
  std::vector<double> out(dists.size());
  for (std::size_t i = 0; i < dists.size(); ++i) {
    const double u_bin = rng.uniform();
    const double u_within = rng.uniform();
    out[i] = sample_distribution(dists[i], u_bin, u_within);
  }
  return out;
}

FittedRegressor fit(const RegressorSpec& spec, Matrix x_ref, std::vector<double> y_ref) {
  spec.validate();
  if (x_ref.rows() == 0 || y_ref.empty()) throw ArgumentError("reference set is empty");
  if (x_ref.rows() != y_ref.size()) {
    throw ShapeError("reference inputs have " + std::to_string(x_ref.rows()) + " rows but " +
                     std::to_string(y_ref.size()) + " outputs");
  }
  if (x_ref.rows() > spec.capacity) {
    throw CapacityError(x_ref.rows(), spec.capacity,
                        "reference set has " + std::to_string(x_ref.rows()) +
                            " rows, exceeding the regressor capacity of " +
                            std::to_string(spec.capacity));
  }
  for (double v : x_ref.data()) {
    if (!std::isfinite(v)) throw ValidationError("non-finite reference input");
  }
  for (double v : y_ref) {
    if (!std::isfinite(v)) throw ValidationError("non-finite reference output");
  }
  std::shared_ptr<const FittedRegressor::Impl> impl;
  switch (spec.backend) {
    case BackendKind::kKernel:
      impl = std::make_shared<KernelImpl>(spec, std::move(x_ref), std::move(y_ref));
      break;
    case BackendKind::kKnn:
      impl = std::make_shared<KnnImpl>(spec, std::move(x_ref), std::move(y_ref));
      break;
    case BackendKind::kRemote:
      impl = std::make_shared<RemoteImpl>(spec, std::move(x_ref), std::move(y_ref));
      break;
  }
  return FittedRegressor(std::move(impl));
}

}  // namespace seqdesign
