#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "seqdesign/distribution.hpp"
#include "seqdesign/matrix.hpp"
#include "seqdesign/regressor.hpp"

// Client side of the remote regressor protocol.
//
//   POST /v1/fit_predict   body: FitPredictRequest JSON  -> FitPredictResponse JSON
//   GET  /v1/health        -> {"status": "ok" | "loading", "model_info": "..."}
//
// Errors come back as {"code", "message", "request_id"} with HTTP 400 (bad
// body), 413 (too many training rows) or 500 (model failure). Each request is
// self-contained: the full training set travels with every call.
namespace seqdesign::bridge {

struct FitPredictRequest {
  Matrix x_train;
  std::vector<double> y_train;
  Matrix x_query;
  bool want_distribution = false;
  std::string request_id;

  // Throws CapacityError above `capacity` training rows, ShapeError on
  // misaligned shapes, ValidationError on non-finite values.
  void validate(std::size_t capacity = kDefaultReferenceCapacity) const;

  friend bool operator==(const FitPredictRequest&, const FitPredictRequest&) = default;
};

struct FitPredictResponse {
  std::vector<double> means;
  std::optional<std::vector<PredictedDistribution>> distributions;
  std::string model_info;
  std::string request_id;

  // Throws ProtocolError when the response breaks the contract.
  void validate(std::size_t query_rows) const;
};

struct HealthStatus {
  std::string status;
  std::string model_info;
};

struct ErrorBody {
  std::string code;
  std::string message;
  std::string request_id;
};

std::string serialize_request(const FitPredictRequest& request);
FitPredictRequest parse_request(std::string_view body);
std::string serialize_response(const FitPredictResponse& response);
FitPredictResponse parse_response(std::string_view body);
std::string serialize_error(const ErrorBody& error);
ErrorBody parse_error(std::string_view body);

// Content-derived id, so a retried request carries the same id.
std::string make_request_id(const FitPredictRequest& request);

class BridgeClient {
 public:
  // `endpoint` is "http://host:port".
  BridgeClient(std::string endpoint, int timeout_ms = 30000, int retries = 2);

  // One round trip, retried on connection failures and HTTP 502/503/504.
  FitPredictResponse fit_predict(const FitPredictRequest& request) const;
  HealthStatus health() const;

  const std::string& endpoint() const { return endpoint_; }

 private:
  std::string endpoint_;
  int timeout_ms_;
  int retries_;
};

FitPredictResponse remote_fit_predict(const std::string& endpoint,
                                      const FitPredictRequest& request, int timeout_ms,
                                      int retries);

struct StubServerOptions {
  std::size_t capacity = kDefaultReferenceCapacity;
  std::optional<double> bandwidth;  // unset: median heuristic per request
  std::size_t bins = 64;
  std::string model_info = "seqdesign-stub/kernel";
};

// Handles one fit_predict body with the local kernel regressor. Returns the
// HTTP status and response body.
std::pair<int, std::string> handle_fit_predict(const StubServerOptions& options,
                                               std::string_view body);

// Loopback HTTP server speaking the protocol above, backed by the local
// kernel regressor. Used as a test fixture and for manual experiments.
class StubServer {
 public:
  explicit StubServer(StubServerOptions options = {});
  ~StubServer();
  StubServer(const StubServer&) = delete;
  StubServer& operator=(const StubServer&) = delete;

  // Binds (port 0 picks a free port), starts serving on a background thread
  // and returns the bound port.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  void stop();
  // Blocks serving on the calling thread.
  void listen_blocking(const std::string& host, int port);
  std::string endpoint() const;

 private:
  struct State;
  std::unique_ptr<State> state_;
};

}  // namespace seqdesign::bridge
