#pragma once
// JSON-over-HTTP front end for BenchService (cpp-httplib).

#include <functional>
#include <memory>
#include <string>

#include "nlpre/bench/service.hpp"

namespace nlpre::bench {

int http_status(ServiceErrorCode code);

class HttpServer {
 public:
  // Sees every response body; tests use it to audit what leaves the server.
  using Observer = std::function<void(const std::string& method, const std::string& path, int status,
                                      const std::string& body)>;

  explicit HttpServer(BenchService& service, bool log_requests = true);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  void set_observer(Observer observer);
  // Port 0 picks a free one; returns the bound port or throws.
  int bind(const std::string& host, int port);
  void run();    // blocks until stop()
  void start();  // run() on a background thread
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace nlpre::bench
