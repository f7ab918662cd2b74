#pragma once
// Submission lifecycle: ingest a ZIP, validate it against the configured
// datasets, score it against hidden gold on a worker pool, and publish on
// the submitter's confirmation.

#include <condition_variable>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "nlpre/analytics.hpp"
#include "nlpre/bench/config.hpp"
#include "nlpre/bench/leaderboard.hpp"
#include "nlpre/bench/store.hpp"

namespace nlpre::bench {

struct ServiceOptions {
  bool start_workers = true;
  // Called inside the evaluation transaction right before COMMIT.
  std::function<void(const std::string&)> before_commit;
};

struct SubmitterMetadata {
  std::string contact;
  // Fallbacks when the manifest leaves them out.
  std::string model_name;
  std::string embeddings;
};

struct CreatedSubmission {
  std::string id;
  std::string access_token;  // shown once, stored only as a hash
  Status status = Status::Received;
};

struct SeedReport {
  std::size_t inserted = 0;
  std::size_t existing = 0;
  std::size_t skipped = 0;  // tagset or dataset not in this config
};

// The bundled demo results, as JSON.
const std::string& seed_fixture_json();

class BenchService {
 public:
  explicit BenchService(BenchmarkConfig config, ServiceOptions options = {});
  ~BenchService();
  BenchService(const BenchService&) = delete;
  BenchService& operator=(const BenchService&) = delete;

  const BenchmarkConfig& config() const { return config_; }
  Store& store() { return *store_; }

  CreatedSubmission create_submission(std::string_view archive, const SubmitterMetadata& meta = {});
  // Each returns the status afterwards. Both are no-ops in other states.
  Status validate_submission(const std::string& id);
  Status evaluate_submission(const std::string& id);
  // validate then evaluate, under the per-submission lock.
  Status process(const std::string& id);

  // Status, reasons and (once evaluated) reports. Before publication the
  // token must match; unknown ids and wrong tokens are indistinguishable.
  Json submission_view(const std::string& id, const std::string& token);
  LeaderboardEntry publish(const std::string& id, const std::string& token);

  std::vector<LeaderboardEntry> query_leaderboard(const LeaderboardQuery& q);
  std::vector<analytics::ScoredEntry> scored_entries(const std::vector<std::string>& tagsets);

  SeedReport seed_fixtures();

  // Status including the in-memory "evaluating" overlay.
  Status status_of(const std::string& id);
  void enqueue(const std::string& id);
  // Blocks until the queue is empty and no job runs.
  void wait_idle();
  // Re-queues received/validated submissions left by an earlier run.
  std::size_t recover();
  std::size_t purge_expired();

 private:
  std::filesystem::path archive_path(const std::string& digest) const;
  std::mutex& lock_for(const std::string& id);
  void worker_loop();
  Status validate_locked(const std::string& id);
  Status evaluate_locked(const std::string& id);
  std::optional<LeaderboardEntry> entry_for(const StoredResult& r) const;

  BenchmarkConfig config_;
  ServiceOptions options_;
  std::unique_ptr<Store> store_;

  std::mutex locks_mu_;
  std::map<std::string, std::unique_ptr<std::mutex>> locks_;

  std::mutex flight_mu_;
  std::set<std::string> evaluating_;

  std::mutex queue_mu_;
  std::condition_variable queue_cv_;
  std::condition_variable idle_cv_;
  std::deque<std::string> queue_;
  std::set<std::string> queued_;
  std::size_t running_ = 0;
  bool stopping_ = false;
  std::vector<std::thread> workers_;
};

}  // namespace nlpre::bench
