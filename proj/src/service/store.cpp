#include "nlpre/bench/store.hpp"

#include <sqlite3.h>

#include <chrono>
#include <ctime>

#include "nlpre/bench/errors.hpp"

namespace nlpre::bench {

std::string_view to_string(Status s) {
  switch (s) {
    case Status::Received: return "received";
    case Status::Validated: return "validated";
    case Status::Evaluating: return "evaluating";
    case Status::Evaluated: return "evaluated";
    case Status::Published: return "published";
    case Status::Rejected: return "rejected";
  }
  return "?";
}

std::optional<Status> parse_status(std::string_view s) {
  for (auto st : {Status::Received, Status::Validated, Status::Evaluating, Status::Evaluated, Status::Published,
                  Status::Rejected})
    if (to_string(st) == s) return st;
  return std::nullopt;
}

bool transition_allowed(Status from, Status to) {
  switch (from) {
    case Status::Received: return to == Status::Validated || to == Status::Rejected;
    case Status::Validated: return to == Status::Evaluating || to == Status::Rejected;
    case Status::Evaluating: return to == Status::Evaluated;
    case Status::Evaluated: return to == Status::Published;
    default: return false;
  }
}

std::string now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const auto t = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[40];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[48];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
  return out;
}

namespace {

[[noreturn]] void fail(sqlite3* db, const std::string& what) {
  throw ServiceError(ServiceErrorCode::Storage, what + ": " + (db ? sqlite3_errmsg(db) : "no database"));
}

class Stmt {
 public:
  Stmt(sqlite3* db, const char* sql) : db_(db) {
    if (sqlite3_prepare_v2(db, sql, -1, &st_, nullptr) != SQLITE_OK) fail(db, "prepare");
  }
  ~Stmt() { sqlite3_finalize(st_); }
  Stmt(const Stmt&) = delete;
  Stmt& operator=(const Stmt&) = delete;

  Stmt& bind(int i, const std::string& v) {
    sqlite3_bind_text(st_, i, v.data(), static_cast<int>(v.size()), SQLITE_TRANSIENT);
    return *this;
  }
  Stmt& bind(int i, long long v) {
    sqlite3_bind_int64(st_, i, v);
    return *this;
  }
  // true while rows remain
  bool step() {
    const int rc = sqlite3_step(st_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    fail(db_, "step");
  }
  void run() {
    while (step()) {
    }
  }
  std::string text(int col) const {
    const auto* p = sqlite3_column_text(st_, col);
    return p ? std::string(reinterpret_cast<const char*>(p), static_cast<std::size_t>(sqlite3_column_bytes(st_, col)))
             : std::string();
  }
  long long integer(int col) const { return sqlite3_column_int64(st_, col); }

 private:
  sqlite3* db_;
  sqlite3_stmt* st_ = nullptr;
};

// Rolls back unless committed.
class Txn {
 public:
  explicit Txn(sqlite3* db) : db_(db) { run("BEGIN IMMEDIATE"); }
  ~Txn() {
    if (!done_) sqlite3_exec(db_, "ROLLBACK", nullptr, nullptr, nullptr);
  }
  void commit() {
    run("COMMIT");
    done_ = true;
  }

 private:
  void run(const char* sql) {
    if (sqlite3_exec(db_, sql, nullptr, nullptr, nullptr) != SQLITE_OK) fail(db_, sql);
  }
  sqlite3* db_;
  bool done_ = false;
};

constexpr const char* kSchema = R"sql(
CREATE TABLE IF NOT EXISTS submissions (
  id TEXT PRIMARY KEY,
  token_hash TEXT NOT NULL,
  model_name TEXT NOT NULL DEFAULT '',
  embeddings TEXT NOT NULL DEFAULT '',
  contact TEXT NOT NULL DEFAULT '',
  tagset_id TEXT NOT NULL DEFAULT '',
  declared_tasks TEXT NOT NULL DEFAULT '[]',
  archive_digest TEXT NOT NULL,
  status TEXT NOT NULL,
  reasons TEXT NOT NULL DEFAULT '[]',
  origin TEXT NOT NULL DEFAULT 'upload',
  created_at TEXT NOT NULL,
  updated_at TEXT NOT NULL,
  published_at TEXT NOT NULL DEFAULT ''
);
CREATE INDEX IF NOT EXISTS submissions_digest ON submissions(archive_digest, tagset_id);
CREATE INDEX IF NOT EXISTS submissions_status ON submissions(status, tagset_id);
CREATE TABLE IF NOT EXISTS status_history (
  submission_id TEXT NOT NULL,
  seq INTEGER NOT NULL,
  status TEXT NOT NULL,
  at TEXT NOT NULL,
  PRIMARY KEY (submission_id, seq)
);
CREATE TABLE IF NOT EXISTS reports (
  submission_id TEXT NOT NULL,
  dataset_id TEXT NOT NULL,
  report TEXT NOT NULL,
  PRIMARY KEY (submission_id, dataset_id)
);
CREATE TABLE IF NOT EXISTS summaries (
  submission_id TEXT PRIMARY KEY,
  summary TEXT NOT NULL
);
)sql";

constexpr const char* kColumns =
    "id, token_hash, model_name, embeddings, contact, tagset_id, declared_tasks, archive_digest, status, reasons, "
    "origin, created_at, updated_at, published_at";

SubmissionRecord read_record(const Stmt& st) {
  SubmissionRecord r;
  r.id = st.text(0);
  r.token_hash = st.text(1);
  r.model_name = st.text(2);
  r.embeddings = st.text(3);
  r.contact = st.text(4);
  r.tagset_id = st.text(5);
  r.declared_tasks = Json::parse(st.text(6)).get<std::vector<std::string>>();
  r.archive_digest = st.text(7);
  r.status = parse_status(st.text(8)).value_or(Status::Rejected);
  r.reasons = Json::parse(st.text(9));
  r.origin = st.text(10);
  r.created_at = st.text(11);
  r.updated_at = st.text(12);
  r.published_at = st.text(13);
  return r;
}

void insert_row(sqlite3* db, const SubmissionRecord& r) {
  Stmt st(db,
          "INSERT INTO submissions (id, token_hash, model_name, embeddings, contact, tagset_id, declared_tasks, "
          "archive_digest, status, reasons, origin, created_at, updated_at, published_at) "
          "VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8, ?9, ?10, ?11, ?12, ?13, ?14)");
  st.bind(1, r.id)
      .bind(2, r.token_hash)
      .bind(3, r.model_name)
      .bind(4, r.embeddings)
      .bind(5, r.contact)
      .bind(6, r.tagset_id)
      .bind(7, Json(r.declared_tasks).dump())
      .bind(8, r.archive_digest)
      .bind(9, std::string(to_string(r.status)))
      .bind(10, r.reasons.dump())
      .bind(11, r.origin)
      .bind(12, r.created_at)
      .bind(13, r.updated_at)
      .bind(14, r.published_at);
  st.run();
}

std::optional<Status> current_status(sqlite3* db, const std::string& id) {
  Stmt st(db, "SELECT status FROM submissions WHERE id = ?1");
  st.bind(1, id);
  if (!st.step()) return std::nullopt;
  return parse_status(st.text(0));
}

void set_status(sqlite3* db, const std::string& id, Status s, const std::string& at) {
  Stmt st(db, "UPDATE submissions SET status = ?2, updated_at = ?3 WHERE id = ?1");
  st.bind(1, id).bind(2, std::string(to_string(s))).bind(3, at);
  st.run();
}

void put_reports(sqlite3* db, const std::string& id, const std::map<std::string, Json>& reports, const Json& summary) {
  for (const auto& [ds, report] : reports) {
    Stmt st(db, "INSERT OR REPLACE INTO reports (submission_id, dataset_id, report) VALUES (?1, ?2, ?3)");
    st.bind(1, id).bind(2, ds).bind(3, report.dump());
    st.run();
  }
  Stmt st(db, "INSERT OR REPLACE INTO summaries (submission_id, summary) VALUES (?1, ?2)");
  st.bind(1, id).bind(2, summary.dump());
  st.run();
}

}  // namespace

Store::Store(const std::filesystem::path& db_path) {
  if (!db_path.parent_path().empty()) std::filesystem::create_directories(db_path.parent_path());
  if (sqlite3_open(db_path.c_str(), &db_) != SQLITE_OK) {
    const std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
    sqlite3_close(db_);
    db_ = nullptr;
    throw ServiceError(ServiceErrorCode::Storage, "cannot open " + db_path.string() + ": " + msg);
  }
  sqlite3_busy_timeout(db_, 5000);
  exec("PRAGMA journal_mode=WAL");
  exec("PRAGMA synchronous=FULL");
  exec("PRAGMA foreign_keys=ON");
  exec(kSchema);
}

Store::~Store() { sqlite3_close(db_); }

void Store::exec(const char* sql) {
  char* err = nullptr;
  if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
    const std::string msg = err ? err : "unknown error";
    sqlite3_free(err);
    throw ServiceError(ServiceErrorCode::Storage, msg);
  }
}

void Store::append_history(const std::string& id, Status s, const std::string& at) {
  Stmt st(db_,
          "INSERT INTO status_history (submission_id, seq, status, at) "
          "VALUES (?1, (SELECT COALESCE(MAX(seq), 0) + 1 FROM status_history WHERE submission_id = ?1), ?2, ?3)");
  st.bind(1, id).bind(2, std::string(to_string(s))).bind(3, at);
  st.run();
}

void Store::insert_submission(const SubmissionRecord& r) {
  std::lock_guard lock(mu_);
  Txn txn(db_);
  insert_row(db_, r);
  append_history(r.id, r.status, r.created_at);
  txn.commit();
}

std::optional<SubmissionRecord> Store::get(const std::string& id) {
  std::lock_guard lock(mu_);
  Stmt st(db_, (std::string("SELECT ") + kColumns + " FROM submissions WHERE id = ?1").c_str());
  st.bind(1, id);
  if (!st.step()) return std::nullopt;
  return read_record(st);
}

std::optional<SubmissionRecord> Store::find_duplicate(const std::string& digest, const std::string& tagset) {
  std::lock_guard lock(mu_);
  Stmt st(db_, (std::string("SELECT ") + kColumns +
                " FROM submissions WHERE archive_digest = ?1 AND tagset_id = ?2 AND status != 'rejected' "
                "ORDER BY created_at LIMIT 1")
                   .c_str());
  st.bind(1, digest).bind(2, tagset);
  if (!st.step()) return std::nullopt;
  return read_record(st);
}

void Store::update_manifest(const std::string& id, const std::string& tagset, const std::string& model,
                            const std::string& embeddings, const std::vector<std::string>& tasks) {
  std::lock_guard lock(mu_);
  Stmt st(db_,
          "UPDATE submissions SET tagset_id = ?2, model_name = ?3, embeddings = ?4, declared_tasks = ?5 "
          "WHERE id = ?1");
  st.bind(1, id).bind(2, tagset).bind(3, model).bind(4, embeddings).bind(5, Json(tasks).dump());
  st.run();
}

bool Store::transition(const std::string& id, Status from, Status to, const Json& reasons) {
  if (!transition_allowed(from, to)) return false;
  std::lock_guard lock(mu_);
  Txn txn(db_);
  if (current_status(db_, id) != from) return false;
  const auto at = now_iso8601();
  set_status(db_, id, to, at);
  if (!reasons.is_null()) {
    Stmt st(db_, "UPDATE submissions SET reasons = ?2 WHERE id = ?1");
    st.bind(1, id).bind(2, reasons.dump());
    st.run();
  }
  if (to == Status::Published) {
    Stmt st(db_, "UPDATE submissions SET published_at = ?2 WHERE id = ?1");
    st.bind(1, id).bind(2, at);
    st.run();
  }
  append_history(id, to, at);
  txn.commit();
  return true;
}

void Store::commit_evaluation(const std::string& id, const std::map<std::string, Json>& reports, const Json& summary,
                              const std::function<void(const std::string&)>& before_commit) {
  std::lock_guard lock(mu_);
  Txn txn(db_);
  if (current_status(db_, id) != Status::Validated)
    throw ServiceError(ServiceErrorCode::WrongState, "submission " + id + " is not validated");
  const auto at = now_iso8601();
  put_reports(db_, id, reports, summary);
  append_history(id, Status::Evaluating, at);
  append_history(id, Status::Evaluated, at);
  set_status(db_, id, Status::Evaluated, at);
  if (before_commit) before_commit(id);
  txn.commit();
}

std::map<std::string, Json> Store::reports(const std::string& id) {
  std::lock_guard lock(mu_);
  std::map<std::string, Json> out;
  Stmt st(db_, "SELECT dataset_id, report FROM reports WHERE submission_id = ?1");
  st.bind(1, id);
  while (st.step()) out.emplace(st.text(0), Json::parse(st.text(1)));
  return out;
}

Json Store::summary(const std::string& id) {
  std::lock_guard lock(mu_);
  Stmt st(db_, "SELECT summary FROM summaries WHERE submission_id = ?1");
  st.bind(1, id);
  return st.step() ? Json::parse(st.text(0)) : Json();
}

std::vector<StoredResult> Store::published(const std::string& tagset) {
  std::vector<SubmissionRecord> records;
  {
    std::lock_guard lock(mu_);
    Stmt st(db_, (std::string("SELECT ") + kColumns +
                  " FROM submissions WHERE tagset_id = ?1 AND status = 'published' ORDER BY published_at, id")
                     .c_str());
    st.bind(1, tagset);
    while (st.step()) records.push_back(read_record(st));
  }
  std::vector<StoredResult> out;
  for (auto& r : records) {
    StoredResult sr;
    sr.reports = reports(r.id);
    sr.summary = summary(r.id);
    sr.record = std::move(r);
    out.push_back(std::move(sr));
  }
  return out;
}

std::vector<std::string> Store::ids_with_status(Status s) {
  std::lock_guard lock(mu_);
  Stmt st(db_, "SELECT id FROM submissions WHERE status = ?1 ORDER BY created_at, id");
  st.bind(1, std::string(to_string(s)));
  std::vector<std::string> out;
  while (st.step()) out.push_back(st.text(0));
  return out;
}

std::vector<Status> Store::history(const std::string& id) {
  std::lock_guard lock(mu_);
  Stmt st(db_, "SELECT status FROM status_history WHERE submission_id = ?1 ORDER BY seq");
  st.bind(1, id);
  std::vector<Status> out;
  while (st.step()) out.push_back(parse_status(st.text(0)).value_or(Status::Rejected));
  return out;
}

bool Store::insert_published(const SubmissionRecord& r, const std::map<std::string, Json>& reports,
                             const Json& summary) {
  std::lock_guard lock(mu_);
  Txn txn(db_);
  if (current_status(db_, r.id)) return false;
  SubmissionRecord row = r;
  row.status = Status::Published;
  insert_row(db_, row);
  for (auto s : {Status::Received, Status::Validated, Status::Evaluating, Status::Evaluated, Status::Published})
    append_history(r.id, s, r.created_at);
  put_reports(db_, r.id, reports, summary);
  txn.commit();
  return true;
}

std::vector<std::string> Store::purge_unpublished_before(const std::string& cutoff) {
  std::lock_guard lock(mu_);
  Txn txn(db_);
  std::vector<std::string> ids, digests;
  {
    Stmt st(db_,
            "SELECT id, archive_digest FROM submissions WHERE status IN ('evaluated', 'rejected') "
            "AND updated_at < ?1");
    st.bind(1, cutoff);
    while (st.step()) {
      ids.push_back(st.text(0));
      digests.push_back(st.text(1));
    }
  }
  for (const auto& id : ids) {
    for (const char* sql : {"DELETE FROM reports WHERE submission_id = ?1", "DELETE FROM summaries WHERE submission_id = ?1",
                            "DELETE FROM status_history WHERE submission_id = ?1", "DELETE FROM submissions WHERE id = ?1"}) {
      Stmt st(db_, sql);
      st.bind(1, id);
      st.run();
    }
  }
  txn.commit();
  return digests;
}

bool Store::digest_in_use(const std::string& digest) {
  std::lock_guard lock(mu_);
  Stmt st(db_, "SELECT 1 FROM submissions WHERE archive_digest = ?1 LIMIT 1");
  st.bind(1, digest);
  return st.step();
}

}  // namespace nlpre::bench
