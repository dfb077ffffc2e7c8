// Loopback server speaking the fit/predict bridge protocol, backed by the
// local kernel regressor. Used as a test fixture for the remote backend.
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "seqdesign/bridge.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Kernel-backed fit/predict stub server"};
  std::string host = "127.0.0.1";
  int port = 8765;
  seqdesign::bridge::StubServerOptions options;
  std::optional<double> bandwidth;
  app.add_option("--host", host, "Listen address");
  app.add_option("--port", port, "Listen port");
  app.add_option("--capacity", options.capacity, "Maximum training rows per request");
  app.add_option("--bins", options.bins, "Histogram bins per distribution");
  app.add_option("--bandwidth", bandwidth, "Fixed kernel bandwidth");
  CLI11_PARSE(app, argc, argv);
  options.bandwidth = bandwidth;

  seqdesign::bridge::StubServer server(options);
  std::cerr << "listening on http://" << host << ":" << port << "\n";
  try {
    server.listen_blocking(host, port);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
