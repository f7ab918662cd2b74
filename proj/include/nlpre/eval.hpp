#pragma once

// CoNLL 2018 shared-task scoring: character-span representation, gold/system
// word alignment, and the 13-metric suite with F1 and AlignedAccuracy.

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nlpre/conllu.hpp"

namespace nlpre::eval {

enum class MetricId : std::uint8_t {
  Tokens,
  Sentences,
  Words,
  UPOS,
  XPOS,
  UFeats,
  AllTags,
  Lemmas,
  UAS,
  LAS,
  CLAS,
  MLAS,
  BLEX,
};

inline constexpr std::array<MetricId, 13> kAllMetrics{
    MetricId::Tokens, MetricId::Sentences, MetricId::Words, MetricId::UPOS,  MetricId::XPOS,
    MetricId::UFeats, MetricId::AllTags,   MetricId::Lemmas, MetricId::UAS,  MetricId::LAS,
    MetricId::CLAS,   MetricId::MLAS,      MetricId::BLEX};

std::string_view metric_name(MetricId id);
// Case-insensitive.
std::optional<MetricId> parse_metric(std::string_view name);

bool is_segmentation_metric(MetricId id);
bool is_parsing_metric(MetricId id);

// Small ordered set of metrics; iteration follows display order.
class MetricSet {
 public:
  MetricSet() = default;
  MetricSet(std::initializer_list<MetricId> ids);

  static MetricSet all();
  static MetricSet segmentation();
  static MetricSet tagging();  // segmentation + UPOS..Lemmas

  bool contains(MetricId id) const { return (bits_ >> static_cast<unsigned>(id)) & 1U; }
  void insert(MetricId id) { bits_ |= 1U << static_cast<unsigned>(id); }
  void erase(MetricId id) { bits_ &= ~(1U << static_cast<unsigned>(id)); }
  bool empty() const { return bits_ == 0; }
  std::size_t size() const;
  bool is_subset_of(const MetricSet& other) const { return (bits_ & ~other.bits_) == 0; }

  MetricSet operator|(const MetricSet& o) const { return from_bits(bits_ | o.bits_); }
  MetricSet operator&(const MetricSet& o) const { return from_bits(bits_ & o.bits_); }
  bool operator==(const MetricSet&) const = default;

  std::vector<MetricId> to_vector() const;

 private:
  static MetricSet from_bits(std::uint16_t bits) {
    MetricSet s;
    s.bits_ = bits;
    return s;
  }
  std::uint16_t bits_ = 0;
};

// Parses "UPOS,Lemmas" style lists; throws std::invalid_argument on unknown names.
MetricSet parse_metric_list(std::string_view list);

enum class EvalErrorCode {
  EmptyRepresentation,
  EmptyForm,
  MismatchedCharacters,
  UnsupportedMetric,
  InconsistentTaskSets,
};

std::string_view to_string(EvalErrorCode code);

class EvalError : public std::runtime_error {
 public:
  EvalError(EvalErrorCode code, const std::string& message);
  EvalErrorCode code() const { return code_; }

 private:
  EvalErrorCode code_;
};

// How FEATS are compared for UFeats/AllTags/MLAS.
//   Universal: only the universal feature inventory, sorted (reference behaviour).
//   All:       every Key=Value pair, canonically sorted.
enum class FeatsComparison { Universal, All };

struct CharSpan {
  std::size_t start = 0;
  std::size_t end = 0;  // exclusive

  bool operator==(const CharSpan&) const = default;
};

inline constexpr int kRootHead = -1;
inline constexpr int kMissingHead = -2;

struct EvalWord {
  CharSpan span;
  bool is_multiword_part = false;
  std::string form;
  std::u32string folded_form;  // lowercased code points, compared in LCS
  std::string lemma;
  std::string upos;
  std::string xpos;
  std::string feats;  // comparison key per FeatsComparison
  int head = kRootHead;  // index into words, kRootHead, or kMissingHead
  std::string deprel;  // universal part (before ':')
  std::string full_deprel;
  bool is_content = false;
  bool is_functional = false;
  std::vector<std::size_t> functional_children;
};

struct EvalRepresentation {
  std::u32string characters;
  std::vector<CharSpan> token_spans;
  std::vector<CharSpan> sentence_spans;
  std::vector<EvalWord> words;
  FeatsComparison feats_comparison = FeatsComparison::Universal;
};

EvalRepresentation build_representation(const conllu::TreebankFile& file,
                                         FeatsComparison feats = FeatsComparison::Universal);

// Count of spans equal in both (start, end); inputs sorted and non-overlapping.
std::size_t align_spans(const std::vector<CharSpan>& gold, const std::vector<CharSpan>& system);

struct Alignment {
  std::vector<std::pair<std::size_t, std::size_t>> matched_pairs;  // (gold, system)
  std::vector<int> system_to_gold;  // -1 when unaligned
};

Alignment align_words(const EvalRepresentation& gold, const EvalRepresentation& system);

struct MetricCounts {
  std::size_t correct = 0;
  std::size_t gold_total = 0;
  std::size_t system_total = 0;
  std::optional<std::size_t> aligned_total;

  bool operator==(const MetricCounts&) const = default;
};

struct MetricScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::optional<double> aligned_accuracy;  // absent for Tokens/Sentences/Words
  std::optional<MetricCounts> counts;      // dropped by average_reports

  static MetricScore from_counts(const MetricCounts& counts);
};

MetricScore score_metric(MetricId metric, const EvalRepresentation& gold, const EvalRepresentation& system,
                         const Alignment& alignment, const MetricSet& configured = MetricSet::all());

struct EvaluationReport {
  std::map<MetricId, MetricScore> scores;
  MetricSet tasks_evaluated;
  std::vector<MetricId> average_metrics;
  double average_f1 = 0.0;
  // Mean aligned accuracy over average_metrics that define one; absent otherwise.
  std::optional<double> average_aligned_accuracy;

  void recompute_averages();
};

// Default averaged columns: tagging metrics, or all 13 when parsing is evaluated.
std::vector<MetricId> default_average_metrics(const MetricSet& tasks);

struct EvalOptions {
  MetricSet tasks = MetricSet::all();
  std::vector<MetricId> average_metrics;  // empty -> default_average_metrics(tasks)
  FeatsComparison feats = FeatsComparison::Universal;
};

EvaluationReport evaluate(const EvalRepresentation& gold, const EvalRepresentation& system,
                          const EvalOptions& options = {});
EvaluationReport evaluate(const conllu::TreebankFile& gold, const conllu::TreebankFile& system,
                          const EvalOptions& options = {});

// Uniform per-metric mean of scores; all reports must share tasks_evaluated.
EvaluationReport average_reports(const std::vector<EvaluationReport>& reports);

// Percent with two decimals, rounded half away from zero ("99.74").
std::string format_percent(double fraction);
double round_percent(double fraction);

std::string render_table(const EvaluationReport& report);

}  // namespace nlpre::eval
