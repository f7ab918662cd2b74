#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nlpre/analytics.hpp"
#include "nlpre/eval_json.hpp"

namespace nlpre::bench {

struct ScoreCell {
  double f1 = 0.0;
  std::optional<double> aligned_accuracy;
};

// Scores for one dataset, or the per-entry average across datasets. Metrics
// that were not evaluated are simply absent.
struct ScoreRow {
  std::map<eval::MetricId, ScoreCell> metrics;
  double average_f1 = 0.0;
  std::optional<double> average_aligned_accuracy;
};

// Accepts both full EvaluationReport JSON and the reduced fixture shape.
ScoreRow score_row_from_json(const Json& j);
Json to_json(const ScoreRow& row);

// Per-metric means over the rows that evaluated the metric; average_f1 is the
// mean of the rows' own averages.
ScoreRow average_rows(const std::vector<ScoreRow>& rows);

struct LeaderboardEntry {
  std::string submission_id;
  std::string model_name;
  std::string embeddings_label;
  std::string tagset_id;
  std::string origin;
  std::string published_at;
  std::map<std::string, ScoreRow> datasets;
  ScoreRow averaged;
  int rank = 0;

  double average_f1() const { return averaged.average_f1; }
};

struct LeaderboardQuery {
  std::string tagset;
  std::optional<std::string> dataset;
  std::optional<eval::MetricId> metric;
  bool descending = true;
};

// Competition ranking ("1, 2, 2, 4") on average_f1 rounded to hundredths of a
// percent, the precision the board displays.
void assign_ranks(std::vector<LeaderboardEntry>& entries);

// Orders entries for a query view; entries lacking the sort key go last.
void sort_for_query(std::vector<LeaderboardEntry>& entries, const LeaderboardQuery& q);

// `dataset` selects which row is reported under "scores".
Json to_json(const LeaderboardEntry& e, const std::optional<std::string>& dataset = std::nullopt);
Json leaderboard_json(const std::vector<LeaderboardEntry>& entries, const LeaderboardQuery& q);
std::vector<LeaderboardEntry> leaderboard_from_json(const Json& j);

analytics::ScoredEntry to_scored(const LeaderboardEntry& e);

}  // namespace nlpre::bench
