#include <algorithm>
#include <bit>
#include <cctype>

#include "nlpre/eval.hpp"

namespace nlpre::eval {

namespace {

constexpr std::array<std::string_view, 13> kNames{"Tokens", "Sentences", "Words", "UPOS", "XPOS",
                                                  "UFeats", "AllTags",   "Lemmas", "UAS",  "LAS",
                                                  "CLAS",   "MLAS",      "BLEX"};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

}  // namespace

std::string_view metric_name(MetricId id) { return kNames[static_cast<std::size_t>(id)]; }

std::optional<MetricId> parse_metric(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i)
    if (iequals(kNames[i], name)) return static_cast<MetricId>(i);
  return std::nullopt;
}

bool is_segmentation_metric(MetricId id) {
  return id == MetricId::Tokens || id == MetricId::Sentences || id == MetricId::Words;
}

bool is_parsing_metric(MetricId id) { return static_cast<int>(id) >= static_cast<int>(MetricId::UAS); }

MetricSet::MetricSet(std::initializer_list<MetricId> ids) {
  for (auto id : ids) insert(id);
}

MetricSet MetricSet::all() {
  MetricSet s;
  for (auto id : kAllMetrics) s.insert(id);
  return s;
}

MetricSet MetricSet::segmentation() { return {MetricId::Tokens, MetricId::Sentences, MetricId::Words}; }

MetricSet MetricSet::tagging() {
  return segmentation() | MetricSet{MetricId::UPOS, MetricId::XPOS, MetricId::UFeats, MetricId::AllTags,
                                    MetricId::Lemmas};
}

std::size_t MetricSet::size() const { return static_cast<std::size_t>(std::popcount(bits_)); }

std::vector<MetricId> MetricSet::to_vector() const {
  std::vector<MetricId> out;
  for (auto id : kAllMetrics)
    if (contains(id)) out.push_back(id);
  return out;
}

MetricSet parse_metric_list(std::string_view list) {
  MetricSet out;
  std::size_t start = 0;
  while (start <= list.size()) {
    auto comma = list.find(',', start);
    if (comma == std::string_view::npos) comma = list.size();
    auto item = list.substr(start, comma - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) {
      const auto id = parse_metric(item);
      if (!id) throw std::invalid_argument("unknown metric '" + std::string(item) + "'");
      out.insert(*id);
    }
    start = comma + 1;
  }
  return out;
}

std::string_view to_string(EvalErrorCode code) {
  switch (code) {
    case EvalErrorCode::EmptyRepresentation: return "EmptyRepresentation";
    case EvalErrorCode::EmptyForm: return "EmptyForm";
    case EvalErrorCode::MismatchedCharacters: return "MismatchedCharacters";
    case EvalErrorCode::UnsupportedMetric: return "UnsupportedMetric";
    case EvalErrorCode::InconsistentTaskSets: return "InconsistentTaskSets";
  }
  return "Unknown";
}

EvalError::EvalError(EvalErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace nlpre::eval
