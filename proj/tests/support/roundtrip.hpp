#pragma once
// End-to-end HTTP scenario shared by the HTTP test and the acceptance run:
// upload, poll until evaluated, check privacy, publish, check the board.
// Every response body and every log line is recorded for the sentinel grep.

#include <httplib.h>

#include <chrono>
#include <mutex>
#include <thread>

#include "nlpre/bench/http_api.hpp"
#include "nlpre/bench/service.hpp"
#include "support/bench_fixture.hpp"

namespace nlpre::testkit {

struct RoundTrip {
  std::vector<std::string> failures;
  double seconds_to_evaluated = -1;
  std::vector<std::string> bodies;  // all responses plus captured logs
  std::size_t sentinel_hits = 0;

  bool ok() const { return failures.empty() && sentinel_hits == 0; }
};

// Runs a live server on an ephemeral port for the duration of the scenario.
class LiveServer {
 public:
  explicit LiveServer(bench::BenchmarkConfig cfg) : svc_(std::move(cfg)), server_(svc_, true) {
    server_.set_observer([this](const std::string&, const std::string&, int, const std::string& body) {
      std::lock_guard lock(mu_);
      bodies_.push_back(body);
    });
    port_ = server_.bind("127.0.0.1", 0);
    server_.start();
  }
  ~LiveServer() { server_.stop(); }

  bench::BenchService& service() { return svc_; }
  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(30);
    return c;
  }
  std::vector<std::string> bodies() {
    std::lock_guard lock(mu_);
    return bodies_;
  }

 private:
  bench::BenchService svc_;
  bench::HttpServer server_;
  int port_ = 0;
  std::mutex mu_;
  std::vector<std::string> bodies_;
};

inline RoundTrip http_round_trip(const std::filesystem::path& storage) {
  RoundTrip rt;
  auto fail = [&](const std::string& what) { rt.failures.push_back(what); };

  std::ostringstream logs;
  auto* old_clog = std::clog.rdbuf(logs.rdbuf());
  {
    LiveServer live(test_config(storage));
    auto cli = live.client();

    httplib::MultipartFormDataItems form{
        {"archive", gold_archive("roundtrip"), "predictions.zip", "application/zip"},
        {"contact", "someone@example.org", "", ""},
    };
    const auto t0 = std::chrono::steady_clock::now();
    auto res = cli.Post("/api/v1/submissions", form);
    if (!res || res->status != 201) {
      fail("upload did not return 201");
    } else {
      const auto created = Json::parse(res->body);
      const std::string id = created["id"], token = created["access_token"];
      const httplib::Headers auth{{"Authorization", "Bearer " + token}};

      std::string status;
      while (std::chrono::steady_clock::now() - t0 < std::chrono::seconds(30)) {
        res = cli.Get("/api/v1/submissions/" + id, auth);
        if (!res || res->status != 200) break;
        status = Json::parse(res->body)["status"];
        if (status == "evaluated" || status == "rejected") break;
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
      }
      rt.seconds_to_evaluated = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (status != "evaluated") fail("status is '" + status + "' instead of evaluated");

      const auto view = Json::parse(res->body);
      if (!view.contains("reports") || view["reports"].is_null() || view["reports"]["alpha"]["metrics"]["LAS"]["f1"] != 1.0)
        fail("scores not retrievable with the token");

      res = cli.Get("/api/v1/submissions/" + id);
      if (!res || res->status != 403) fail("unpublished scores visible without token");

      auto board = [&] {
        auto r = cli.Get("/api/v1/leaderboard?tagset=ud");
        return r && r->status == 200 ? Json::parse(r->body)["entries"] : Json();
      };
      if (!board().is_array() || !board().empty()) fail("unpublished entry on the leaderboard");

      res = cli.Post("/api/v1/submissions/" + id + "/publish", httplib::Headers{{"Authorization", "Bearer wrong"}}, "",
                     "application/json");
      if (!res || res->status != 403) fail("publish with a wrong token was not refused");
      res = cli.Post("/api/v1/submissions/" + id + "/publish", auth, "", "application/json");
      if (!res || res->status != 200) fail("publish failed");

      const auto entries = board();
      if (!entries.is_array() || entries.size() != 1 || entries[0]["submission_id"] != id || entries[0]["rank"] != 1)
        fail("published entry missing or not ranked 1");
    }
    rt.bodies = live.bodies();
  }
  std::clog.rdbuf(old_clog);
  rt.bodies.push_back(logs.str());
  for (const auto& b : rt.bodies) rt.sentinel_hits += b.find(kSentinelLemma) != std::string::npos;
  return rt;
}

}  // namespace nlpre::testkit
