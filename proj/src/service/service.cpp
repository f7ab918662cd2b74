#include "nlpre/bench/service.hpp"

#include <yaml-cpp/yaml.h>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include "nlpre/bench/crypto.hpp"
#include "nlpre/zip.hpp"

namespace nlpre::bench {

namespace {

void log_line(const std::string& msg) {
  static std::mutex mu;
  std::lock_guard lock(mu);
  std::clog << "[nlpre " << now_iso8601() << "] " << msg << '\n';
}

struct Manifest {
  std::string tagset;
  std::string model_name;
  std::string embeddings;
  std::vector<std::string> tasks;  // empty: every task of the tagset
};

Manifest parse_manifest(const std::string& text) {
  const auto root = YAML::Load(text);
  if (!root.IsMap()) throw std::runtime_error("manifest must be a mapping");
  Manifest m;
  if (!root["tagset"] || !root["tagset"].IsScalar()) throw std::runtime_error("manifest lacks 'tagset'");
  m.tagset = root["tagset"].as<std::string>();
  if (root["model_name"]) m.model_name = root["model_name"].as<std::string>();
  if (root["embeddings"] && !root["embeddings"].IsNull()) m.embeddings = root["embeddings"].as<std::string>();
  if (const auto t = root["tasks"]) {
    if (t.IsScalar()) {
      const auto s = t.as<std::string>();
      if (s != "all") {
        std::stringstream ss(s);
        for (std::string item; std::getline(ss, item, ',');)
          if (!item.empty()) m.tasks.push_back(item);
      }
    } else if (t.IsSequence()) {
      for (const auto& item : t) m.tasks.push_back(item.as<std::string>());
    } else {
      throw std::runtime_error("'tasks' must be a list");
    }
  }
  return m;
}

// Looks an entry up by exact path, else by unique basename, so archives
// with a single top-level folder also work.
const zip::Entry* find_entry(const std::vector<zip::Entry>& entries, const std::string& name) {
  for (const auto& e : entries)
    if (e.name == name) return &e;
  const zip::Entry* found = nullptr;
  for (const auto& e : entries) {
    const auto slash = e.name.find_last_of('/');
    if ((slash == std::string::npos ? e.name : e.name.substr(slash + 1)) != name) continue;
    if (found) return nullptr;
    found = &e;
  }
  return found;
}

Json reason_json(std::string_view code, const std::string& message, const std::string& dataset = {}) {
  Json r{{"code", code}};
  if (!dataset.empty()) r["dataset"] = dataset;
  r["message"] = message;
  return r;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ServiceError(ServiceErrorCode::Storage, "cannot read " + p.filename().string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

eval::MetricSet declared_set(const std::vector<std::string>& names) {
  eval::MetricSet s;
  for (const auto& n : names)
    if (const auto id = eval::parse_metric(n)) s.insert(*id);
  return s;
}

std::string iso_days_ago(int days) {
  const auto at = std::chrono::system_clock::now() - std::chrono::hours(24 * days);
  const auto t = std::chrono::system_clock::to_time_t(at);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(at.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[40];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[48];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
  return out;
}

}  // namespace

BenchService::BenchService(BenchmarkConfig config, ServiceOptions options)
    : config_(std::move(config)), options_(std::move(options)) {
  std::filesystem::create_directories(config_.storage_dir / "archives");
  store_ = std::make_unique<Store>(config_.storage_dir / "nlpre.sqlite3");
  if (options_.start_workers)
    for (std::size_t i = 0; i < config_.workers; ++i) workers_.emplace_back([this] { worker_loop(); });
}

BenchService::~BenchService() {
  {
    std::lock_guard lock(queue_mu_);
    stopping_ = true;
  }
  queue_cv_.notify_all();
  for (auto& t : workers_) t.join();
}

std::filesystem::path BenchService::archive_path(const std::string& digest) const {
  return config_.storage_dir / "archives" / (digest + ".zip");
}

std::mutex& BenchService::lock_for(const std::string& id) {
  std::lock_guard lock(locks_mu_);
  auto& slot = locks_[id];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

CreatedSubmission BenchService::create_submission(std::string_view archive, const SubmitterMetadata& meta) {
  if (archive.size() > config_.max_upload_bytes)
    throw ServiceError(ServiceErrorCode::TooLarge, "archive exceeds " + std::to_string(config_.max_upload_bytes) + " bytes");
  std::vector<zip::Entry> entries;
  try {
    if (!zip::looks_like_zip(archive)) throw zip::ZipError("missing ZIP signature");
    entries = zip::read_archive(archive);
  } catch (const zip::ZipError& e) {
    throw ServiceError(ServiceErrorCode::NotAZip, e.what());
  }

  // Best effort here; validation reports manifest problems properly.
  Manifest manifest;
  if (const auto* m = find_entry(entries, "manifest.yaml")) {
    try {
      manifest = parse_manifest(m->data);
    } catch (const std::exception&) {
    }
  }

  const auto digest = sha256_hex(archive);
  if (const auto prior = store_->find_duplicate(digest, manifest.tagset))
    throw ServiceError(ServiceErrorCode::DuplicateArchive, "identical archive already submitted as " + prior->id,
                       prior->id);

  const auto path = archive_path(digest);
  if (!std::filesystem::exists(path)) {
    const auto tmp = path.string() + ".part-" + random_hex(4);
    {
      std::ofstream out(tmp, std::ios::binary);
      out.write(archive.data(), static_cast<std::streamsize>(archive.size()));
      if (!out) throw ServiceError(ServiceErrorCode::Storage, "cannot persist archive");
    }
    std::filesystem::rename(tmp, path);
  }

  CreatedSubmission created;
  created.id = "sub-" + random_hex(8);
  created.access_token = random_hex(32);

  SubmissionRecord r;
  r.id = created.id;
  r.token_hash = sha256_hex(created.access_token);
  r.model_name = manifest.model_name.empty() ? meta.model_name : manifest.model_name;
  r.embeddings = manifest.embeddings.empty() ? meta.embeddings : manifest.embeddings;
  r.contact = meta.contact;
  r.tagset_id = manifest.tagset;
  r.declared_tasks = manifest.tasks;
  r.archive_digest = digest;
  r.created_at = r.updated_at = now_iso8601();
  store_->insert_submission(r);
  log_line("submission " + r.id + " received");
  enqueue(r.id);
  return created;
}

Status BenchService::validate_submission(const std::string& id) {
  std::lock_guard lock(lock_for(id));
  return validate_locked(id);
}

Status BenchService::evaluate_submission(const std::string& id) {
  std::lock_guard lock(lock_for(id));
  return evaluate_locked(id);
}

Status BenchService::process(const std::string& id) {
  std::lock_guard lock(lock_for(id));
  auto s = validate_locked(id);
  if (s == Status::Validated) s = evaluate_locked(id);
  return s;
}

Status BenchService::validate_locked(const std::string& id) {
  const auto rec = store_->get(id);
  if (!rec) throw ServiceError(ServiceErrorCode::NotFound, "no submission " + id);
  if (rec->status != Status::Received) return rec->status;

  Json reasons = Json::array();
  auto reject = [&] {
    store_->transition(id, Status::Received, Status::Rejected, reasons);
    std::string codes;
    for (const auto& r : reasons) codes += (codes.empty() ? "" : ",") + r["code"].get<std::string>();
    log_line("submission " + id + " rejected: " + codes);
    return Status::Rejected;
  };

  std::vector<zip::Entry> entries;
  try {
    entries = zip::read_archive(read_file(archive_path(rec->archive_digest)));
  } catch (const zip::ZipError& e) {
    reasons.push_back(reason_json(reason::kNotAZip, e.what()));
    return reject();
  }

  Manifest manifest;
  const auto* mf = find_entry(entries, "manifest.yaml");
  if (!mf) {
    reasons.push_back(reason_json(reason::kBadManifest, "manifest.yaml is missing"));
    return reject();
  }
  try {
    manifest = parse_manifest(mf->data);
  } catch (const std::exception& e) {
    reasons.push_back(reason_json(reason::kBadManifest, std::string("manifest.yaml: ") + e.what()));
    return reject();
  }
  const auto* tagset = config_.find_tagset(manifest.tagset);
  if (!tagset) {
    reasons.push_back(reason_json(reason::kUnknownTagset, "tagset '" + manifest.tagset + "' is not part of this benchmark"));
    return reject();
  }

  const auto supported = tagset->tasks();
  std::vector<std::string> tasks;
  for (const auto& name : manifest.tasks) {
    const auto metric = eval::parse_metric(name);
    if (!metric || !supported.contains(*metric)) {
      reasons.push_back(reason_json(reason::kUnsupportedTask, "task '" + name + "' is not evaluated in tagset " + tagset->id));
      continue;
    }
    tasks.emplace_back(eval::metric_name(*metric));
  }

  for (const auto& ds : tagset->datasets) {
    const auto file_name = ds.id + ".conllu";
    const auto* entry = find_entry(entries, file_name);
    if (!entry) {
      reasons.push_back(reason_json(reason::kMissingDataset, file_name + " is missing", ds.id));
      continue;
    }
    conllu::TreebankFile pred;
    try {
      pred = conllu::parse_conllu(entry->data, file_name);
    } catch (const conllu::ParseError& e) {
      auto r = reason_json(reason::kInvalidConllu, e.what(), ds.id);
      r["line"] = e.line();
      reasons.push_back(std::move(r));
      continue;
    }
    const auto report = conllu::validate_treebank(pred, conllu::ValidationMode::Surface);
    if (!report.ok()) {
      const auto& issue = report.errors.front();
      reasons.push_back(reason_json(reason::kInvalidConllu,
                                    file_name + ", sentence " + std::to_string(issue.sentence_index + 1) + ": " +
                                        issue.message,
                                    ds.id));
      continue;
    }
    try {
      const auto rep = eval::build_representation(pred, config_.feats);
      if (ds.gold && rep.characters != ds.gold->characters) {
        const auto& g = ds.gold->characters;
        std::size_t at = 0;
        while (at < g.size() && at < rep.characters.size() && g[at] == rep.characters[at]) ++at;
        // Only an offset: the gold text itself is confidential.
        reasons.push_back(reason_json(reason::kTextMismatch,
                                      file_name + ": text differs from the test input at non-space character " +
                                          std::to_string(at),
                                      ds.id));
      }
    } catch (const eval::EvalError& e) {
      reasons.push_back(reason_json(reason::kInvalidConllu, file_name + ": " + e.what(), ds.id));
    }
  }

  if (!reasons.empty()) return reject();
  store_->update_manifest(id, tagset->id, manifest.model_name.empty() ? rec->model_name : manifest.model_name,
                          manifest.embeddings.empty() ? rec->embeddings : manifest.embeddings, tasks);
  if (!store_->transition(id, Status::Received, Status::Validated, Json::array())) return store_->get(id)->status;
  log_line("submission " + id + " validated");
  return Status::Validated;
}

Status BenchService::evaluate_locked(const std::string& id) {
  const auto rec = store_->get(id);
  if (!rec) throw ServiceError(ServiceErrorCode::NotFound, "no submission " + id);
  if (rec->status != Status::Validated) return rec->status;

  struct InFlight {
    BenchService* self;
    std::string id;
    InFlight(BenchService* s, std::string i) : self(s), id(std::move(i)) {
      std::lock_guard lock(self->flight_mu_);
      self->evaluating_.insert(id);
    }
    ~InFlight() {
      std::lock_guard lock(self->flight_mu_);
      self->evaluating_.erase(id);
    }
  } in_flight(this, id);

  const auto* tagset = config_.find_tagset(rec->tagset_id);
  std::map<std::string, Json> reports;
  std::vector<ScoreRow> rows;
  Json datasets = Json::array();
  try {
    if (!tagset) throw std::runtime_error("tagset '" + rec->tagset_id + "' is no longer configured");
    const auto entries = zip::read_archive(read_file(archive_path(rec->archive_digest)));
    const auto declared = rec->declared_tasks.empty() ? tagset->tasks() : declared_set(rec->declared_tasks);
    for (const auto& ds : tagset->datasets) {
      if (!ds.gold) throw std::runtime_error("gold for " + ds.id + " is not loaded");
      const auto* entry = find_entry(entries, ds.id + ".conllu");
      if (!entry) throw std::runtime_error(ds.id + ".conllu disappeared from the archive");
      eval::EvalOptions opts;
      opts.tasks = (declared & ds.tasks) | eval::MetricSet::segmentation();
      opts.feats = config_.feats;
      for (auto m : ds.average_metrics)
        if (opts.tasks.contains(m)) opts.average_metrics.push_back(m);
      if (opts.average_metrics.empty()) opts.average_metrics = opts.tasks.to_vector();
      const auto system = eval::build_representation(conllu::parse_conllu(entry->data), config_.feats);
      auto report = eval::to_json(eval::evaluate(*ds.gold, system, opts));
      rows.push_back(score_row_from_json(report));
      reports.emplace(ds.id, std::move(report));
      datasets.push_back(ds.id);
    }
  } catch (const ServiceError&) {
    throw;
  } catch (const std::exception& e) {
    Json reasons = Json::array({reason_json(reason::kEngineError, e.what())});
    store_->transition(id, Status::Validated, Status::Rejected, reasons);
    log_line("submission " + id + " rejected: EngineError");
    return Status::Rejected;
  }

  auto summary = to_json(average_rows(rows));
  summary["datasets"] = std::move(datasets);
  store_->commit_evaluation(id, reports, summary, options_.before_commit);
  log_line("submission " + id + " evaluated");
  return Status::Evaluated;
}

Status BenchService::status_of(const std::string& id) {
  {
    std::lock_guard lock(flight_mu_);
    if (evaluating_.count(id)) return Status::Evaluating;
  }
  const auto rec = store_->get(id);
  if (!rec) throw ServiceError(ServiceErrorCode::NotFound, "no submission " + id);
  return rec->status;
}

Json BenchService::submission_view(const std::string& id, const std::string& token) {
  const auto rec = store_->get(id);
  const bool token_ok = rec && equal_secret(sha256_hex(token), rec->token_hash);
  if (!rec || (rec->status != Status::Published && !token_ok))
    throw ServiceError(ServiceErrorCode::WrongToken, "unknown submission or wrong token");

  Json out{{"id", rec->id},
           {"status", to_string(status_of(id))},
           {"tagset", rec->tagset_id},
           {"model_name", rec->model_name},
           {"embeddings", rec->embeddings},
           {"declared_tasks", rec->declared_tasks},
           {"created_at", rec->created_at},
           {"updated_at", rec->updated_at},
           {"published_at", rec->published_at},
           {"reasons", rec->reasons}};
  Json history = Json::array();
  for (auto s : store_->history(id)) history.push_back(to_string(s));
  out["history"] = std::move(history);
  if (rec->status == Status::Evaluated || rec->status == Status::Published) {
    Json reports = Json::object();
    for (auto& [ds, r] : store_->reports(id)) reports[ds] = std::move(r);
    out["reports"] = std::move(reports);
    out["summary"] = store_->summary(id);
  } else {
    out["reports"] = nullptr;
  }
  return out;
}

LeaderboardEntry BenchService::publish(const std::string& id, const std::string& token) {
  std::lock_guard lock(lock_for(id));
  const auto rec = store_->get(id);
  if (!rec || !equal_secret(sha256_hex(token), rec->token_hash))
    throw ServiceError(ServiceErrorCode::WrongToken, "unknown submission or wrong token");
  if (rec->status != Status::Evaluated || !store_->transition(id, Status::Evaluated, Status::Published))
    throw ServiceError(ServiceErrorCode::WrongState,
                       "submission is " + std::string(to_string(status_of(id))) + ", not evaluated");
  log_line("submission " + id + " published");
  for (auto& e : query_leaderboard(LeaderboardQuery{rec->tagset_id, std::nullopt, std::nullopt, true}))
    if (e.submission_id == id) return e;
  throw ServiceError(ServiceErrorCode::Storage, "published entry not found");
}

std::optional<LeaderboardEntry> BenchService::entry_for(const StoredResult& r) const {
  if (r.summary.is_null()) return std::nullopt;
  LeaderboardEntry e;
  e.submission_id = r.record.id;
  e.model_name = r.record.model_name;
  e.embeddings_label = r.record.embeddings;
  e.tagset_id = r.record.tagset_id;
  e.origin = r.record.origin;
  e.published_at = r.record.published_at;
  for (const auto& [ds, report] : r.reports) e.datasets[ds] = score_row_from_json(report);
  e.averaged = score_row_from_json(r.summary);
  return e;
}

std::vector<LeaderboardEntry> BenchService::query_leaderboard(const LeaderboardQuery& q) {
  const auto* tagset = config_.find_tagset(q.tagset);
  if (!tagset) throw ServiceError(ServiceErrorCode::UnknownTagset, "unknown tagset '" + q.tagset + "'");
  if (q.dataset && !tagset->find_dataset(*q.dataset))
    throw ServiceError(ServiceErrorCode::UnknownDataset, "tagset " + q.tagset + " has no dataset '" + *q.dataset + "'");
  std::vector<LeaderboardEntry> out;
  for (const auto& r : store_->published(q.tagset))
    if (auto e = entry_for(r)) out.push_back(std::move(*e));
  assign_ranks(out);
  sort_for_query(out, q);
  return out;
}

std::vector<analytics::ScoredEntry> BenchService::scored_entries(const std::vector<std::string>& tagsets) {
  std::vector<std::string> ids = tagsets;
  if (ids.empty())
    for (const auto& t : config_.tagsets) ids.push_back(t.id);
  std::vector<analytics::ScoredEntry> out;
  for (const auto& t : ids)
    for (const auto& e : query_leaderboard(LeaderboardQuery{t, std::nullopt, std::nullopt, true}))
      out.push_back(to_scored(e));
  return out;
}

SeedReport BenchService::seed_fixtures() {
  const auto seed = Json::parse(seed_fixture_json());
  std::vector<eval::MetricId> tagging, parsing;
  for (const auto& n : seed["columns"]["tagging"]) tagging.push_back(*eval::parse_metric(n.get<std::string>()));
  for (const auto& n : seed["columns"]["parsing"]) parsing.push_back(*eval::parse_metric(n.get<std::string>()));

  // Rows are percentages: [average, metric...]; null marks "not reported".
  auto metrics_json = [](const std::vector<eval::MetricId>& ids, const Json& f1, const Json* aa, std::size_t skip,
                         Json& into) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      Json cell{{"f1", f1[i + skip].get<double>() / 100.0}};
      cell["aligned_accuracy"] = aa && !(*aa)[i + skip].is_null() ? Json((*aa)[i + skip].get<double>() / 100.0) : Json();
      into[std::string(eval::metric_name(ids[i]))] = std::move(cell);
    }
  };

  SeedReport result;
  for (const auto& entry : seed["entries"]) {
    const auto* tagset = config_.find_tagset(entry["tagset"].get<std::string>());
    if (!tagset) {
      ++result.skipped;
      continue;
    }
    std::map<std::string, Json> reports;
    for (const auto& [ds, row] : entry["datasets"].items()) {
      if (!tagset->find_dataset(ds)) continue;
      Json metrics = Json::object();
      metrics_json(tagging, row["f1"], &row["aa"], 1, metrics);
      if (row.contains("parsing_f1")) metrics_json(parsing, row["parsing_f1"], &row["parsing_aa"], 0, metrics);
      Json report{{"average_f1", row["f1"][0].get<double>() / 100.0},
                   {"average_aligned_accuracy", row["aa"][0].get<double>() / 100.0},
                   {"metrics", std::move(metrics)}};
      reports.emplace(ds, std::move(report));
    }
    if (reports.size() != tagset->datasets.size()) {
      ++result.skipped;
      continue;
    }
    const auto& s = entry["summary"];
    Json metrics = Json::object();
    metrics_json(tagging, s["tagging"], nullptr, 0, metrics);
    if (s.contains("parsing")) metrics_json(parsing, s["parsing"], nullptr, 0, metrics);
    Json summary{{"average_f1", s["average"].get<double>() / 100.0}, {"average_aligned_accuracy", nullptr},
                 {"metrics", std::move(metrics)}};
    Json ds_ids = Json::array();
    for (const auto& [ds, _] : reports) ds_ids.push_back(ds);
    summary["datasets"] = std::move(ds_ids);

    SubmissionRecord r;
    r.id = entry["id"].get<std::string>();
    r.token_hash = "";  // never matches a hashed token
    r.model_name = entry["model"].get<std::string>();
    r.embeddings = entry["embedding"].get<std::string>();
    r.tagset_id = tagset->id;
    for (const auto& [name, _] : summary["metrics"].items()) r.declared_tasks.push_back(name);
    r.archive_digest = "fixture:" + r.id;
    r.origin = "fixture";
    r.created_at = r.updated_at = r.published_at = "2024-01-01T00:00:00.000Z";
    if (store_->insert_published(r, reports, summary))
      ++result.inserted;
    else
      ++result.existing;
  }
  return result;
}

void BenchService::enqueue(const std::string& id) {
  {
    std::lock_guard lock(queue_mu_);
    if (!queued_.insert(id).second) return;
    queue_.push_back(id);
  }
  queue_cv_.notify_one();
}

void BenchService::worker_loop() {
  for (;;) {
    std::string id;
    {
      std::unique_lock lock(queue_mu_);
      queue_cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
      if (stopping_) return;
      id = queue_.front();
      queue_.pop_front();
      queued_.erase(id);
      ++running_;
    }
    try {
      process(id);
    } catch (const std::exception& e) {
      log_line("submission " + id + " failed: " + e.what());
    }
    {
      std::lock_guard lock(queue_mu_);
      --running_;
    }
    idle_cv_.notify_all();
  }
}

void BenchService::wait_idle() {
  if (workers_.empty()) {
    for (;;) {
      std::string id;
      {
        std::lock_guard lock(queue_mu_);
        if (queue_.empty()) return;
        id = queue_.front();
        queue_.pop_front();
        queued_.erase(id);
      }
      process(id);
    }
  }
  std::unique_lock lock(queue_mu_);
  idle_cv_.wait(lock, [&] { return queue_.empty() && running_ == 0; });
}

std::size_t BenchService::recover() {
  std::size_t n = 0;
  for (auto s : {Status::Received, Status::Validated})
    for (const auto& id : store_->ids_with_status(s)) {
      enqueue(id);
      ++n;
    }
  if (n) log_line("recovered " + std::to_string(n) + " pending submission(s)");
  return n;
}

std::size_t BenchService::purge_expired() {
  if (!config_.retention_days) return 0;
  const auto digests = store_->purge_unpublished_before(iso_days_ago(*config_.retention_days));
  for (const auto& d : digests)
    if (!store_->digest_in_use(d)) std::filesystem::remove(archive_path(d));
  return digests.size();
}

}  // namespace nlpre::bench
