#include "seqdesign/bridge.hpp"

#include <cmath>
#include <cstdint>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "seqdesign/errors.hpp"

namespace seqdesign::bridge {
namespace {

using nlohmann::json;

constexpr const char* kJson = "application/json";

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, const char* field) {
  if (!j.is_array()) throw ProtocolError(std::string(field) + " must be an array of rows");
  Matrix m;
  for (const auto& row : j) {
    if (!row.is_array()) throw ProtocolError(std::string(field) + " rows must be arrays");
    std::vector<double> values;
    values.reserve(row.size());
    for (const auto& v : row) {
      if (!v.is_number()) throw ProtocolError(std::string(field) + " holds a non-number");
      values.push_back(v.get<double>());
    }
    if (m.rows() > 0 && values.size() != m.cols()) {
      throw ProtocolError(std::string(field) + " is ragged");
    }
    m.append_row(values);
  }
  return m;
}

std::vector<double> vector_from_json(const json& j, const char* field) {
  if (!j.is_array()) throw ProtocolError(std::string(field) + " must be an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) throw ProtocolError(std::string(field) + " holds a non-number");
    out.push_back(v.get<double>());
  }
  return out;
}

json parse_json(std::string_view body) {
  try {
    return json::parse(body);
  } catch (const json::parse_error& e) {
    throw ProtocolError(std::string("malformed JSON body: ") + e.what());
  }
}

const json& require(const json& j, const char* field) {
  if (!j.is_object() || !j.contains(field)) {
    throw ProtocolError(std::string("missing field: ") + field);
  }
  return j.at(field);
}

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t size) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

void FitPredictRequest::validate(std::size_t capacity) const {
  if (x_train.rows() > capacity) {
    throw CapacityError(x_train.rows(), capacity,
                        "request has " + std::to_string(x_train.rows()) +
                            " training rows, exceeding the capacity of " +
                            std::to_string(capacity));
  }
  if (x_train.rows() == 0) throw ArgumentError("request has no training rows");
  if (x_train.rows() != y_train.size()) throw ShapeError("x_train and y_train are not row-aligned");
  if (x_query.rows() > 0 && x_query.cols() != x_train.cols()) {
    throw ShapeError("x_query width does not match x_train width");
  }
  auto finite = [](std::span<const double> values) {
    for (double v : values) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  };
  if (!finite(x_train.data()) || !finite(y_train) || !finite(x_query.data())) {
    throw ValidationError("request holds non-finite values");
  }
}

void FitPredictResponse::validate(std::size_t query_rows) const {
  if (means.size() != query_rows) {
    throw ProtocolError("response has " + std::to_string(means.size()) + " means for " +
                        std::to_string(query_rows) + " query rows");
  }
  for (double m : means) {
    if (!std::isfinite(m)) throw ProtocolError("response holds a non-finite mean");
  }
  if (distributions) {
    if (distributions->size() != query_rows) {
      throw ProtocolError("response distribution count does not match query rows");
    }
    for (const auto& d : *distributions) d.validate();
  }
}

std::string serialize_request(const FitPredictRequest& request) {
  json j;
  j["request_id"] = request.request_id;
  j["x_train"] = matrix_to_json(request.x_train);
  j["y_train"] = request.y_train;
  j["x_query"] = matrix_to_json(request.x_query);
  j["want_distribution"] = request.want_distribution;
  return j.dump();
}

FitPredictRequest parse_request(std::string_view body) {
  const json j = parse_json(body);
  FitPredictRequest r;
  r.x_train = matrix_from_json(require(j, "x_train"), "x_train");
  r.y_train = vector_from_json(require(j, "y_train"), "y_train");
  r.x_query = matrix_from_json(require(j, "x_query"), "x_query");
  if (j.contains("want_distribution")) {
    if (!j["want_distribution"].is_boolean()) throw ProtocolError("want_distribution must be boolean");
    r.want_distribution = j["want_distribution"].get<bool>();
  }
  if (j.contains("request_id")) {
    if (!j["request_id"].is_string()) throw ProtocolError("request_id must be a string");
    r.request_id = j["request_id"].get<std::string>();
  }
  return r;
}

std::string serialize_response(const FitPredictResponse& response) {
  json j;
  j["request_id"] = response.request_id;
  j["means"] = response.means;
  j["model_info"] = response.model_info;
  if (response.distributions) {
    json dists = json::array();
    for (const auto& d : *response.distributions) {
      dists.push_back({{"bin_edges", d.bin_edges}, {"probabilities", d.probabilities}});
    }
    j["distributions"] = std::move(dists);
  } else {
    j["distributions"] = nullptr;
  }
  return j.dump();
}

FitPredictResponse parse_response(std::string_view body) {
  const json j = parse_json(body);
  FitPredictResponse r;
  r.means = vector_from_json(require(j, "means"), "means");
  if (j.contains("model_info") && j["model_info"].is_string()) {
    r.model_info = j["model_info"].get<std::string>();
  }
  if (j.contains("request_id") && j["request_id"].is_string()) {
    r.request_id = j["request_id"].get<std::string>();
  }
  if (j.contains("distributions") && !j["distributions"].is_null()) {
    const auto& dists = j["distributions"];
    if (!dists.is_array()) throw ProtocolError("distributions must be an array");
    std::vector<PredictedDistribution> out;
    for (const auto& d : dists) {
      PredictedDistribution pd;
      pd.bin_edges = vector_from_json(require(d, "bin_edges"), "bin_edges");
      pd.probabilities = vector_from_json(require(d, "probabilities"), "probabilities");
      out.push_back(std::move(pd));
    }
    r.distributions = std::move(out);
  }
  return r;
}

std::string serialize_error(const ErrorBody& error) {
  return json{{"code", error.code}, {"message", error.message}, {"request_id", error.request_id}}
      .dump();
}

ErrorBody parse_error(std::string_view body) {
  ErrorBody e;
  try {
    const json j = json::parse(body);
    if (j.contains("code") && j["code"].is_string()) e.code = j["code"].get<std::string>();
    if (j.contains("message") && j["message"].is_string()) e.message = j["message"].get<std::string>();
    if (j.contains("request_id") && j["request_id"].is_string()) {
      e.request_id = j["request_id"].get<std::string>();
    }
  } catch (const json::exception&) {
    e.message = std::string(body);
  }
  return e;
}

std::string make_request_id(const FitPredictRequest& request) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const std::uint64_t shape[] = {request.x_train.rows(), request.x_train.cols(),
                                 request.x_query.rows(), request.want_distribution ? 1u : 0u};
  h = fnv1a(h, shape, sizeof(shape));
  h = fnv1a(h, request.x_train.data().data(), request.x_train.data().size_bytes());
  h = fnv1a(h, request.y_train.data(), request.y_train.size() * sizeof(double));
  h = fnv1a(h, request.x_query.data().data(), request.x_query.data().size_bytes());
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string("fp-") + buf;
}

BridgeClient::BridgeClient(std::string endpoint, int timeout_ms, int retries)
    : endpoint_(std::move(endpoint)), timeout_ms_(timeout_ms), retries_(std::max(0, retries)) {}

namespace {

httplib::Client make_client(const std::string& endpoint, int timeout_ms) {
  httplib::Client client(endpoint);
  const auto sec = timeout_ms / 1000;
  const auto usec = (timeout_ms % 1000) * 1000;
  client.set_connection_timeout(sec, usec);
  client.set_read_timeout(sec, usec);
  client.set_write_timeout(sec, usec);
  return client;
}

bool transient_status(int status) { return status == 502 || status == 503 || status == 504; }

}  // namespace

FitPredictResponse BridgeClient::fit_predict(const FitPredictRequest& request) const {
  request.validate();
  const std::string body = serialize_request(request);
  std::string last_failure = "no attempt made";
  for (int attempt = 0; attempt <= retries_; ++attempt) {
    auto client = make_client(endpoint_, timeout_ms_);
    auto result = client.Post("/v1/fit_predict", body, kJson);
    if (!result) {
      last_failure = httplib::to_string(result.error());
      continue;
    }
    const int status = result->status;
    if (status == 200) {
      FitPredictResponse response = parse_response(result->body);
      response.validate(request.x_query.rows());
      if (!response.request_id.empty() && !request.request_id.empty() &&
          response.request_id != request.request_id) {
        throw ProtocolError("response request_id '" + response.request_id +
                            "' does not echo '" + request.request_id + "'");
      }
      return response;
    }
    const ErrorBody error = parse_error(result->body);
    if (status == 413) {
      throw CapacityError(request.x_train.rows(), kDefaultReferenceCapacity,
                          "remote rejected the training set as over capacity: " + error.message);
    }
    if (transient_status(status)) {
      last_failure = "HTTP " + std::to_string(status) + ": " + error.message;
      continue;
    }
    if (status >= 500) {
      throw TransportError("remote model failure (HTTP " + std::to_string(status) + "): " +
                           error.message);
    }
    throw ProtocolError("remote rejected request (HTTP " + std::to_string(status) + "): " +
                        error.message);
  }
  throw TransportError("fit_predict to " + endpoint_ + " failed after " +
                       std::to_string(retries_ + 1) + " attempts: " + last_failure);
}

HealthStatus BridgeClient::health() const {
  auto client = make_client(endpoint_, timeout_ms_);
  auto result = client.Get("/v1/health");
  if (!result) {
    throw TransportError("health probe to " + endpoint_ + " failed: " +
                         httplib::to_string(result.error()));
  }
  if (result->status != 200) {
    throw ProtocolError("health probe returned HTTP " + std::to_string(result->status));
  }
  const json j = parse_json(result->body);
  HealthStatus h;
  h.status = require(j, "status").get<std::string>();
  if (j.contains("model_info") && j["model_info"].is_string()) {
    h.model_info = j["model_info"].get<std::string>();
  }
  return h;
}

FitPredictResponse remote_fit_predict(const std::string& endpoint,
                                      const FitPredictRequest& request, int timeout_ms,
                                      int retries) {
  return BridgeClient(endpoint, timeout_ms, retries).fit_predict(request);
}

std::pair<int, std::string> handle_fit_predict(const StubServerOptions& options,
                                               std::string_view body) {
  FitPredictRequest request;
  try {
    request = parse_request(body);
  } catch (const ProtocolError& e) {
    return {400, serialize_error({"bad_request", e.what(), ""})};
  }
  try {
    request.validate(options.capacity);
  } catch (const CapacityError& e) {
    return {413, serialize_error({"capacity_exceeded", e.what(), request.request_id})};
  } catch (const Error& e) {
    return {400, serialize_error({"bad_request", e.what(), request.request_id})};
  }
  try {
    RegressorSpec spec;
    spec.backend = BackendKind::kKernel;
    spec.bandwidth = options.bandwidth;
    spec.bins = options.bins;
    spec.capacity = options.capacity;
    const auto model = fit(spec, request.x_train, request.y_train);
    FitPredictResponse response;
    response.request_id = request.request_id;
    response.model_info = options.model_info;
    if (request.x_query.rows() > 0) {
      response.means = model.predict_mean(request.x_query);
      if (request.want_distribution) {
        response.distributions = model.predict_distribution(request.x_query);
      }
    } else if (request.want_distribution) {
      response.distributions.emplace();
    }
    return {200, serialize_response(response)};
  } catch (const std::exception& e) {
    return {500, serialize_error({"model_failure", e.what(), request.request_id})};
  }
}

struct StubServer::State {
  StubServerOptions options;
  httplib::Server server;
  std::thread thread;
  std::string host = "127.0.0.1";
  int port = 0;
};

StubServer::StubServer(StubServerOptions options) : state_(std::make_unique<State>()) {
  state_->options = std::move(options);
  auto* state = state_.get();
  state->server.Post("/v1/fit_predict", [state](const httplib::Request& req, httplib::Response& res) {
    auto [status, body] = handle_fit_predict(state->options, req.body);
    res.status = status;
    res.set_content(body, kJson);
  });
  state->server.Get("/v1/health", [state](const httplib::Request&, httplib::Response& res) {
    res.set_content(json{{"status", "ok"}, {"model_info", state->options.model_info}}.dump(), kJson);
  });
}

StubServer::~StubServer() { stop(); }

int StubServer::start(const std::string& host, int port) {
  state_->host = host;
  if (port == 0) {
    state_->port = state_->server.bind_to_any_port(host);
  } else {
    if (!state_->server.bind_to_port(host, port)) {
      throw TransportError("cannot bind " + host + ":" + std::to_string(port));
    }
    state_->port = port;
  }
  if (state_->port <= 0) throw TransportError("cannot bind stub server on " + host);
  state_->thread = std::thread([state = state_.get()] { state->server.listen_after_bind(); });
  state_->server.wait_until_ready();
  return state_->port;
}

void StubServer::listen_blocking(const std::string& host, int port) {
  state_->host = host;
  state_->port = port;
  if (!state_->server.listen(host, port)) {
    throw TransportError("cannot listen on " + host + ":" + std::to_string(port));
  }
}

void StubServer::stop() {
  if (!state_) return;
  state_->server.stop();
  if (state_->thread.joinable()) state_->thread.join();
}

std::string StubServer::endpoint() const {
  return "http://" + state_->host + ":" + std::to_string(state_->port);
}

}  // namespace seqdesign::bridge
