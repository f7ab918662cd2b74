#pragma once
// Transactional SQLite persistence for submissions, their status history and
// per-dataset reports. One connection, serialized by a mutex.

#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "nlpre/eval_json.hpp"

struct sqlite3;

namespace nlpre::bench {

enum class Status { Received, Validated, Evaluating, Evaluated, Published, Rejected };

std::string_view to_string(Status s);
std::optional<Status> parse_status(std::string_view s);
// Edges of received→validated→evaluating→evaluated→published, plus
// received/validated→rejected.
bool transition_allowed(Status from, Status to);

struct SubmissionRecord {
  std::string id;
  std::string token_hash;
  std::string model_name;
  std::string embeddings;
  std::string contact;
  std::string tagset_id;
  std::vector<std::string> declared_tasks;
  std::string archive_digest;
  Status status = Status::Received;
  Json reasons = Json::array();
  std::string origin = "upload";  // or "fixture"
  std::string created_at;
  std::string updated_at;
  std::string published_at;
};

struct StoredResult {
  SubmissionRecord record;
  std::map<std::string, Json> reports;  // dataset id -> report JSON
  Json summary;
};

std::string now_iso8601();

class Store {
 public:
  explicit Store(const std::filesystem::path& db_path);
  ~Store();
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  void insert_submission(const SubmissionRecord& r);
  std::optional<SubmissionRecord> get(const std::string& id);
  // Most recent non-rejected submission with this digest and tagset.
  std::optional<SubmissionRecord> find_duplicate(const std::string& digest, const std::string& tagset);

  void update_manifest(const std::string& id, const std::string& tagset, const std::string& model,
                       const std::string& embeddings, const std::vector<std::string>& tasks);

  // Compare-and-set on status; false when the current status is not `from`.
  bool transition(const std::string& id, Status from, Status to, const Json& reasons = nullptr);

  // validated → evaluating → evaluated with the reports, in one transaction.
  // The hook runs just before COMMIT (crash-injection point for tests).
  void commit_evaluation(const std::string& id, const std::map<std::string, Json>& reports, const Json& summary,
                         const std::function<void(const std::string&)>& before_commit = {});

  std::map<std::string, Json> reports(const std::string& id);
  Json summary(const std::string& id);
  std::vector<StoredResult> published(const std::string& tagset);
  std::vector<std::string> ids_with_status(Status s);
  std::vector<Status> history(const std::string& id);

  // Inserts an already-published row; false if the id exists.
  bool insert_published(const SubmissionRecord& r, const std::map<std::string, Json>& reports, const Json& summary);

  // Deletes unpublished submissions last updated before `cutoff`; returns
  // their archive digests.
  std::vector<std::string> purge_unpublished_before(const std::string& cutoff);
  bool digest_in_use(const std::string& digest);

 private:
  void exec(const char* sql);
  void append_history(const std::string& id, Status s, const std::string& at);

  sqlite3* db_ = nullptr;
  std::mutex mu_;
};

}  // namespace nlpre::bench
