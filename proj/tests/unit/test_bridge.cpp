#include <atomic>
#include <cmath>
#include <functional>
#include <numeric>
#include <thread>

#include "doctest.h"
#include "helpers.hpp"
#include "httplib.h"
#include "seqdesign/bridge.hpp"
#include "seqdesign/errors.hpp"

using namespace seqdesign;
using namespace seqdesign::bridge;

namespace {

// Loopback server whose fit_predict answer is supplied by the test.
class ScriptedServer {
 public:
  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  explicit ScriptedServer(Handler handler) : handler_(std::move(handler)) {
    server_.Post("/v1/fit_predict", [this](const httplib::Request& req, httplib::Response& res) {
      ++calls;
      handler_(req, res);
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~ScriptedServer() {
    server_.stop();
    thread_.join();
  }
  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }

  std::atomic<int> calls{0};

 private:
  Handler handler_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

FitPredictRequest small_request(std::uint64_t seed, std::size_t rows = 20, std::size_t cols = 2) {
  FitPredictRequest r;
  r.x_train = testing::random_matrix(rows, cols, seed);
  Rng rng(seed + 1);
  r.y_train.resize(rows);
  for (double& v : r.y_train) v = rng.uniform(-1.0, 2.0);
  r.x_query = testing::random_matrix(5, cols, seed + 2);
  r.request_id = make_request_id(r);
  return r;
}

// An endpoint nothing listens on.
std::string dead_endpoint() {
  httplib::Server probe;
  const int port = probe.bind_to_any_port("127.0.0.1");
  return "http://127.0.0.1:" + std::to_string(port);
}

}  // namespace

TEST_SUITE("bridge") {
  TEST_CASE("requests survive a serialize/parse cycle unchanged") {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
      FitPredictRequest r = small_request(rng.next_u64(), 1 + rng.below(30), 1 + rng.below(4));
      for (double& v : r.y_train) v = std::ldexp(v, static_cast<int>(rng.below(80)) - 40);
      r.want_distribution = trial % 2 == 0;
      CHECK(parse_request(serialize_request(r)) == r);
    }
  }

  TEST_CASE("request ids are content derived") {
    const auto a = small_request(1);
    auto b = a;
    CHECK(make_request_id(a) == make_request_id(b));
    b.y_train[0] += 1.0;
    CHECK(make_request_id(a) != make_request_id(b));
  }

  TEST_CASE("request validation") {
    auto r = small_request(2);
    CHECK_NOTHROW(r.validate());
    r.y_train.pop_back();
    CHECK_THROWS_AS(r.validate(), ShapeError);
    r = small_request(2);
    r.x_query = Matrix{{1.0, 2.0, 3.0}};
    CHECK_THROWS_AS(r.validate(), ShapeError);
    r = small_request(2);
    r.x_train(0, 0) = INFINITY;
    CHECK_THROWS_AS(r.validate(), ValidationError);
  }

  TEST_CASE("over-capacity requests never reach the network") {
    ScriptedServer server([](const httplib::Request&, httplib::Response& res) { res.status = 200; });
    FitPredictRequest r;
    r.x_train = Matrix(10001, 1, 0.5);
    r.y_train.assign(10001, 1.0);
    r.x_query = Matrix{{0.5}};
    CHECK_THROWS_AS(BridgeClient(server.endpoint()).fit_predict(r), CapacityError);
    CHECK_THROWS_AS(remote_fit_predict(dead_endpoint(), r, 200, 0), CapacityError);
    CHECK(server.calls == 0);
  }

  TEST_CASE("a stub echoing the average output is returned unchanged") {
    ScriptedServer server([](const httplib::Request& req, httplib::Response& res) {
      const auto r = parse_request(req.body);
      FitPredictResponse out;
      const double avg = std::accumulate(r.y_train.begin(), r.y_train.end(), 0.0) /
                         static_cast<double>(r.y_train.size());
      out.means.assign(r.x_query.rows(), avg);
      out.request_id = r.request_id;
      out.model_info = "echo";
      res.set_content(serialize_response(out), "application/json");
    });
    const auto r = small_request(3);
    const double avg = std::accumulate(r.y_train.begin(), r.y_train.end(), 0.0) / 20.0;
    const auto response = BridgeClient(server.endpoint()).fit_predict(r);
    CHECK(response.means == std::vector<double>(5, avg));
    CHECK(response.model_info == "echo");
    CHECK(response.request_id == r.request_id);
  }

  TEST_CASE("responses that break the contract are protocol errors") {
    const auto r = small_request(4);
    auto respond_with = [&](FitPredictResponse out) {
      return ScriptedServer([out](const httplib::Request&, httplib::Response& res) {
        res.set_content(serialize_response(out), "application/json");
      });
    };
    {
      FitPredictResponse out;
      out.means.assign(5, 0.0);
      out.request_id = r.request_id;
      out.distributions = std::vector<PredictedDistribution>(5, PredictedDistribution{{0, 1, 2}, {0.5, 0.3}});
      auto server = respond_with(out);
      CHECK_THROWS_AS(BridgeClient(server.endpoint()).fit_predict(r), ProtocolError);
    }
    {
      FitPredictResponse out;
      out.means.assign(4, 0.0);
      out.request_id = r.request_id;
      auto server = respond_with(out);
      CHECK_THROWS_AS(BridgeClient(server.endpoint()).fit_predict(r), ProtocolError);
    }
    {
      FitPredictResponse out;
      out.means.assign(5, 0.0);
      out.request_id = "someone-else";
      auto server = respond_with(out);
      CHECK_THROWS_AS(BridgeClient(server.endpoint()).fit_predict(r), ProtocolError);
    }
    {
      ScriptedServer server([](const httplib::Request&, httplib::Response& res) {
        res.set_content("{not json", "application/json");
      });
      CHECK_THROWS_AS(BridgeClient(server.endpoint()).fit_predict(r), ProtocolError);
    }
    CHECK_THROWS_AS(parse_response(R"({"means":[1,"x"]})"), ProtocolError);
  }

  TEST_CASE("HTTP status mapping") {
    const auto r = small_request(5);
    auto failing = [](int status) {
      return [status](const httplib::Request&, httplib::Response& res) {
        res.status = status;
        res.set_content(serialize_error({"x", "nope", ""}), "application/json");
      };
    };
    {
      ScriptedServer server(failing(413));
      CHECK_THROWS_AS(BridgeClient(server.endpoint(), 2000, 0).fit_predict(r), CapacityError);
    }
    {
      ScriptedServer server(failing(400));
      CHECK_THROWS_AS(BridgeClient(server.endpoint(), 2000, 0).fit_predict(r), ProtocolError);
    }
    {
      ScriptedServer server(failing(500));
      CHECK_THROWS_AS(BridgeClient(server.endpoint(), 2000, 3).fit_predict(r), TransportError);
      CHECK(server.calls == 1);
    }
    {
      ScriptedServer server(failing(503));
      CHECK_THROWS_AS(BridgeClient(server.endpoint(), 2000, 2).fit_predict(r), TransportError);
      CHECK(server.calls == 3);
    }
    CHECK_THROWS_AS(BridgeClient(dead_endpoint(), 500, 1).fit_predict(r), TransportError);
  }

  TEST_CASE("transient failures are retried") {
    std::atomic<int> seen{0};
    ScriptedServer server([&seen](const httplib::Request& req, httplib::Response& res) {
      if (seen++ == 0) {
        res.status = 503;
        return;
      }
      auto [status, body] = handle_fit_predict({}, req.body);
      res.status = status;
      res.set_content(body, "application/json");
    });
    const auto r = small_request(6);
    CHECK(BridgeClient(server.endpoint(), 2000, 1).fit_predict(r).means.size() == 5);
    CHECK(server.calls == 2);
  }

  TEST_CASE("the stub server agrees with the local kernel backend") {
    StubServer stub;
    stub.start();
    const BridgeClient client(stub.endpoint());
    CHECK(client.health().status == "ok");
    CHECK_FALSE(client.health().model_info.empty());
    Rng rng(8);
    for (int trial = 0; trial < 100; ++trial) {
      auto r = small_request(rng.next_u64(), 5 + rng.below(60), 1 + rng.below(5));
      r.want_distribution = trial % 3 == 0;
      const Matrix x_copy = r.x_train;
      const auto response = client.fit_predict(r);
      CHECK(r.x_train == x_copy);
      const auto local = fit(RegressorSpec{}, r.x_train, r.y_train);
      const auto means = local.predict_mean(r.x_query);
      REQUIRE(response.means.size() == means.size());
      for (std::size_t i = 0; i < means.size(); ++i) CHECK(std::abs(response.means[i] - means[i]) <= 1e-9);
      if (r.want_distribution) {
        REQUIRE(response.distributions.has_value());
        for (const auto& d : *response.distributions) CHECK(d.is_valid());
      }
    }
  }

  TEST_CASE("the remote backend behaves like the kernel backend") {
    StubServer stub;
    stub.start();
    RegressorSpec remote;
    remote.backend = BackendKind::kRemote;
    remote.endpoint = stub.endpoint();
    const Matrix x = testing::random_matrix(40, 3, 9);
    std::vector<double> y(40);
    for (std::size_t i = 0; i < 40; ++i) y[i] = x(i, 0) - 2.0 * x(i, 2);
    const Matrix q = testing::random_matrix(7, 3, 10);
    const auto a = fit(remote, x, y).predict_mean(q);
    const auto b = fit(RegressorSpec{}, x, y).predict_mean(q);
    for (std::size_t i = 0; i < 7; ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-9);
    const auto dist = fit(remote, x, y).predict_distribution(q);
    CHECK(dist.size() == 7);
    CHECK_THROWS_AS(fit(remote, Matrix(10001, 1), std::vector<double>(10001, 0.0)), CapacityError);
  }

  TEST_CASE("server-side handling of bad and oversized bodies") {
    CHECK(handle_fit_predict({}, "garbage").first == 400);
    StubServerOptions tight;
    tight.capacity = 10;
    const auto r = small_request(11, 11, 1);
    const auto [status, body] = handle_fit_predict(tight, serialize_request(r));
    CHECK(status == 413);
    CHECK(parse_error(body).request_id == r.request_id);
    CHECK(parse_error(body).code == "capacity_exceeded");

    FitPredictRequest big;
    big.x_train = Matrix(10001, 1, 0.0);
    big.y_train.assign(10001, 0.0);
    big.x_query = Matrix{{0.0}};
    CHECK(handle_fit_predict({}, serialize_request(big)).first == 413);

    StubServer stub(tight);
    stub.start();
    httplib::Client raw(stub.endpoint());
    const auto res = raw.Post("/v1/fit_predict", serialize_request(r), "application/json");
    REQUIRE(res);
    CHECK(res->status == 413);
  }

  TEST_CASE("concurrent clients share one stub") {
    StubServer stub;
    stub.start();
    std::vector<std::thread> threads;
    std::atomic<int> ok{0};
    for (int t = 0; t < 6; ++t) {
      threads.emplace_back([&, t] {
        const auto r = small_request(100 + t);
        const auto means = BridgeClient(stub.endpoint()).fit_predict(r).means;
        if (means == fit(RegressorSpec{}, r.x_train, r.y_train).predict_mean(r.x_query)) ++ok;
      });
    }
    for (auto& th : threads) th.join();
    CHECK(ok == 6);
  }
}
