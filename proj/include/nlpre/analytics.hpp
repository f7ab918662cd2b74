#pragma once
// Cross-submission statistics over F1 score vectors: Pearson/Spearman
// correlation matrices and five-number dispersion summaries.

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlpre/eval.hpp"
#include "nlpre/eval_json.hpp"

namespace nlpre::analytics {

enum class AnalyticsErrorCode { MissingMetric, NoEntries, ZeroVariance, LengthMismatch, InsufficientData };
std::string_view to_string(AnalyticsErrorCode code);

class AnalyticsError : public std::runtime_error {
 public:
  AnalyticsError(AnalyticsErrorCode code, const std::string& message);
  AnalyticsErrorCode code() const { return code_; }

 private:
  AnalyticsErrorCode code_;
};

// Default vector components.
inline const std::vector<eval::MetricId> kVectorMetrics{eval::MetricId::Tokens, eval::MetricId::Sentences,
                                                        eval::MetricId::Words,  eval::MetricId::UPOS,
                                                        eval::MetricId::XPOS,   eval::MetricId::Lemmas};

using MetricF1 = std::map<eval::MetricId, double>;

// One published result as seen by analytics: f1 fractions per dataset, plus
// the entry's averaged row.
struct ScoredEntry {
  std::string model;
  std::string embedding;
  std::string tagset;
  MetricF1 summary;
  std::map<std::string, MetricF1> datasets;
};

struct ScoreKey {
  std::string model;
  std::string tagset;
  std::optional<std::string> embedding;  // absent: average over embeddings
  std::string label() const;
  bool operator<(const ScoreKey& o) const;
  bool operator==(const ScoreKey& o) const = default;
};

enum class AveragingOrder {
  DatasetsThenEmbeddings,  // mean per entry over datasets, then mean of entries
  Pooled,                  // one mean over every (entry, dataset) value
};

struct VectorOptions {
  std::vector<eval::MetricId> metrics = kVectorMetrics;
  // Empty: use each entry's summary row. Otherwise average these datasets.
  std::vector<std::string> datasets;
  AveragingOrder order = AveragingOrder::DatasetsThenEmbeddings;
};

struct ScoreVector {
  ScoreKey key;
  std::vector<eval::MetricId> metrics;
  std::vector<double> values;
};

ScoreVector score_vector(const std::vector<ScoredEntry>& entries, const ScoreKey& key,
                         const VectorOptions& options = {});

// One key per distinct (model, tagset[, embedding]) in `entries`, sorted.
std::vector<ScoreKey> distinct_keys(const std::vector<ScoredEntry>& entries, bool per_embedding);

// Vectors for every distinct key, in distinct_keys order.
std::vector<ScoreVector> score_vectors(const std::vector<ScoredEntry>& entries, bool per_embedding,
                                       const VectorOptions& options = {});

double pearson(const std::vector<double>& x, const std::vector<double>& y);
double spearman(const std::vector<double>& x, const std::vector<double>& y);

// Average (fractional) ranks, 1-based; ties share the mean of their positions.
std::vector<double> fractional_ranks(const std::vector<double>& x);

struct CorrelationMatrix {
  std::vector<std::string> labels;
  // nullopt marks an undefined cell (zero variance).
  std::vector<std::vector<std::optional<double>>> pearson;
  std::vector<std::vector<std::optional<double>>> spearman;
};

CorrelationMatrix correlation_matrix(const std::vector<ScoreVector>& vectors);

struct Dispersion {
  std::string label;
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
};

// Linear interpolation between order statistics.
double quantile(std::vector<double> values, double q);
std::vector<Dispersion> dispersion_summary(const std::vector<ScoreVector>& vectors);

Json to_json(const ScoreVector& v);
Json to_json(const CorrelationMatrix& m);
Json to_json(const std::vector<Dispersion>& rows);

std::string correlation_csv(const CorrelationMatrix& m, bool spearman);
std::string dispersion_csv(const std::vector<Dispersion>& rows);

}  // namespace nlpre::analytics
