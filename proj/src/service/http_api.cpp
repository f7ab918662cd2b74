#include "nlpre/bench/http_api.hpp"

#include <httplib.h>

#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace nlpre::bench {

int http_status(ServiceErrorCode code) {
  switch (code) {
    case ServiceErrorCode::TooLarge: return 413;
    case ServiceErrorCode::NotAZip:
    case ServiceErrorCode::BadQuery: return 400;
    case ServiceErrorCode::DuplicateArchive:
    case ServiceErrorCode::WrongState: return 409;
    case ServiceErrorCode::WrongToken: return 403;
    case ServiceErrorCode::NotFound:
    case ServiceErrorCode::UnknownTagset:
    case ServiceErrorCode::UnknownDataset: return 404;
    default: return 500;
  }
}

namespace {

void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json; charset=utf-8");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message,
                const std::optional<std::string>& reference = std::nullopt) {
  Json err{{"code", code}, {"message", message}};
  if (reference) err["reference"] = *reference;
  send_json(res, status, Json{{"error", std::move(err)}});
}

void send_error(httplib::Response& res, const ServiceError& e) {
  std::string msg = e.what();
  // what() is "Code: message"; the code has its own field.
  if (const auto colon = msg.find(": "); colon != std::string::npos) msg = msg.substr(colon + 2);
  send_error(res, http_status(e.code()), to_string(e.code()), msg, e.reference());
}

std::string token_of(const httplib::Request& req) {
  const auto auth = req.get_header_value("Authorization");
  if (auth.rfind("Bearer ", 0) == 0) return auth.substr(7);
  if (req.has_header("X-Access-Token")) return req.get_header_value("X-Access-Token");
  if (req.has_param("token")) return req.get_param_value("token");
  if (!req.body.empty()) {
    const auto j = Json::parse(req.body, nullptr, false);
    if (j.is_object() && j.contains("token") && j["token"].is_string()) return j["token"].get<std::string>();
  }
  return {};
}

std::vector<std::string> csv_param(const httplib::Request& req, const char* name) {
  std::vector<std::string> out;
  if (!req.has_param(name)) return out;
  std::stringstream ss(req.get_param_value(name));
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

// Shared by both analytics endpoints.
std::vector<analytics::ScoreVector> vectors_for(BenchService& svc, const httplib::Request& req) {
  analytics::VectorOptions opts;
  if (const auto names = csv_param(req, "metrics"); !names.empty()) {
    opts.metrics.clear();
    for (const auto& n : names) {
      const auto id = eval::parse_metric(n);
      if (!id) throw ServiceError(ServiceErrorCode::BadQuery, "unknown metric '" + n + "'");
      opts.metrics.push_back(*id);
    }
  }
  opts.datasets = csv_param(req, "datasets");
  const auto order = req.has_param("order") ? req.get_param_value("order") : "datasets-first";
  if (order == "pooled")
    opts.order = analytics::AveragingOrder::Pooled;
  else if (order != "datasets-first")
    throw ServiceError(ServiceErrorCode::BadQuery, "order must be datasets-first or pooled");
  const auto group = req.has_param("group") ? req.get_param_value("group") : "model";
  if (group != "model" && group != "entry") throw ServiceError(ServiceErrorCode::BadQuery, "group must be model or entry");
  const auto tagsets = csv_param(req, "tagsets");
  for (const auto& t : tagsets)
    if (!svc.config().find_tagset(t)) throw ServiceError(ServiceErrorCode::UnknownTagset, "unknown tagset '" + t + "'");
  return analytics::score_vectors(svc.scored_entries(tagsets), group == "entry", opts);
}

}  // namespace

struct HttpServer::Impl {
  BenchService& svc;
  httplib::Server server;
  Observer observer;
  std::thread thread;
  bool log_requests;

  Impl(BenchService& s, bool log) : svc(s), log_requests(log) {}

  // Runs a handler, translating domain errors into JSON error bodies.
  template <class F>
  void guarded(httplib::Response& res, F&& f) {
    try {
      f();
    } catch (const ServiceError& e) {
      send_error(res, e);
    } catch (const analytics::AnalyticsError& e) {
      send_error(res, 422, analytics::to_string(e.code()), e.what());
    }
  }

  void routes() {
    server.set_payload_max_length(svc.config().max_upload_bytes + (1u << 20));

    server.Get("/api/v1/config", [this](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, svc.config().public_view());
    });

    server.Post("/api/v1/submissions", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        SubmitterMetadata meta;
        std::string archive;
        if (req.is_multipart_form_data()) {
          if (req.has_file("archive")) {
            archive = req.get_file_value("archive").content;
          } else {
            for (const auto& [_, f] : req.files)
              if (!f.filename.empty()) {
                archive = f.content;
                break;
              }
          }
          auto field = [&](const char* k) { return req.has_file(k) ? req.get_file_value(k).content : std::string(); };
          meta.contact = field("contact");
          meta.model_name = field("model_name");
          meta.embeddings = field("embeddings");
        } else {
          archive = req.body;
        }
        const auto created = svc.create_submission(archive, meta);
        send_json(res, 201,
                  Json{{"id", created.id}, {"access_token", created.access_token}, {"status", to_string(created.status)}});
      });
    });

    server.Get(R"(/api/v1/submissions/([A-Za-z0-9_-]+))", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { send_json(res, 200, svc.submission_view(req.matches[1], token_of(req))); });
    });

    server.Post(R"(/api/v1/submissions/([A-Za-z0-9_-]+)/publish)",
                [this](const httplib::Request& req, httplib::Response& res) {
                  guarded(res, [&] { send_json(res, 200, to_json(svc.publish(req.matches[1], token_of(req)))); });
                });

    server.Get("/api/v1/leaderboard", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        if (!req.has_param("tagset")) throw ServiceError(ServiceErrorCode::BadQuery, "tagset is required");
        LeaderboardQuery q;
        q.tagset = req.get_param_value("tagset");
        if (req.has_param("dataset") && !req.get_param_value("dataset").empty()) q.dataset = req.get_param_value("dataset");
        if (req.has_param("metric") && !req.get_param_value("metric").empty()) {
          q.metric = eval::parse_metric(req.get_param_value("metric"));
          if (!q.metric) throw ServiceError(ServiceErrorCode::BadQuery, "unknown metric");
        }
        if (req.has_param("sort")) {
          const auto s = req.get_param_value("sort");
          if (s != "asc" && s != "desc") throw ServiceError(ServiceErrorCode::BadQuery, "sort must be asc or desc");
          q.descending = s == "desc";
        }
        send_json(res, 200, leaderboard_json(svc.query_leaderboard(q), q));
      });
    });

    server.Get(R"(/api/v1/pages/([A-Za-z0-9_-]+))", [this](const httplib::Request& req, httplib::Response& res) {
      const std::string slug = req.matches[1];
      const auto it = svc.config().content_pages.find(slug);
      if (it == svc.config().content_pages.end()) return send_error(res, 404, "NotFound", "no page '" + slug + "'");
      std::ifstream in(it->second, std::ios::binary);
      if (!in) return send_error(res, 404, "NotFound", "page '" + slug + "' is unavailable");
      std::ostringstream ss;
      ss << in.rdbuf();
      send_json(res, 200, Json{{"slug", slug}, {"markdown", ss.str()}});
    });

    server.Get("/api/v1/analytics/correlation", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const auto vectors = vectors_for(svc, req);
        Json out = analytics::to_json(analytics::correlation_matrix(vectors));
        Json vs = Json::array();
        for (const auto& v : vectors) vs.push_back(analytics::to_json(v));
        out["vectors"] = std::move(vs);
        send_json(res, 200, out);
      });
    });

    server.Get("/api/v1/analytics/dispersion", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const auto vectors = vectors_for(svc, req);
        send_json(res, 200, Json{{"summaries", analytics::to_json(analytics::dispersion_summary(vectors))}});
      });
    });

    server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr) {
      // Internals stay internal.
      send_error(res, 500, "Internal", "internal error");
    });

    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (res.body.empty()) send_error(res, res.status, "HttpError", "request failed with status " + std::to_string(res.status));
    });

    server.set_logger([this](const httplib::Request& req, const httplib::Response& res) {
      // Path only: query strings may carry tokens.
      if (log_requests) std::clog << "[nlpre http] " << req.method << ' ' << req.path << ' ' << res.status << '\n';
      if (observer) observer(req.method, req.path, res.status, res.body);
    });
  }
};

HttpServer::HttpServer(BenchService& service, bool log_requests) : impl_(std::make_unique<Impl>(service, log_requests)) {
  impl_->routes();
}

HttpServer::~HttpServer() { stop(); }

void HttpServer::set_observer(Observer observer) { impl_->observer = std::move(observer); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int p = impl_->server.bind_to_any_port(host);
    if (p < 0) throw ServiceError(ServiceErrorCode::Storage, "cannot bind " + host);
    return p;
  }
  if (!impl_->server.bind_to_port(host, port))
    throw ServiceError(ServiceErrorCode::Storage, "cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void HttpServer::run() { impl_->server.listen_after_bind(); }

void HttpServer::start() {
  impl_->thread = std::thread([this] { run(); });
  impl_->server.wait_until_ready();
}

void HttpServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace nlpre::bench
