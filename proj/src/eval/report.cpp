#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "nlpre/eval.hpp"

namespace nlpre::eval {

std::vector<MetricId> default_average_metrics(const MetricSet& tasks) {
  for (auto id : tasks.to_vector())
    if (is_parsing_metric(id)) return MetricSet::all().to_vector();
  return MetricSet::tagging().to_vector();
}

void EvaluationReport::recompute_averages() {
  double f1_sum = 0.0, aa_sum = 0.0;
  std::size_t f1_n = 0, aa_n = 0;
  for (auto id : average_metrics) {
    const auto it = scores.find(id);
    if (it == scores.end()) continue;
    f1_sum += it->second.f1;
    ++f1_n;
    if (it->second.aligned_accuracy) {
      aa_sum += *it->second.aligned_accuracy;
      ++aa_n;
    }
  }
  average_f1 = f1_n ? f1_sum / static_cast<double>(f1_n) : 0.0;
  average_aligned_accuracy = aa_n ? std::optional<double>(aa_sum / static_cast<double>(aa_n)) : std::nullopt;
}

EvaluationReport evaluate(const EvalRepresentation& gold, const EvalRepresentation& system,
                          const EvalOptions& options) {
  const auto alignment = align_words(gold, system);
  EvaluationReport report;
  report.tasks_evaluated = options.tasks | MetricSet::segmentation();
  for (auto id : report.tasks_evaluated.to_vector())
    report.scores.emplace(id, score_metric(id, gold, system, alignment, report.tasks_evaluated));
  report.average_metrics =
      options.average_metrics.empty() ? default_average_metrics(options.tasks) : options.average_metrics;
  report.recompute_averages();
  return report;
}

EvaluationReport evaluate(const conllu::TreebankFile& gold, const conllu::TreebankFile& system,
                          const EvalOptions& options) {
  return evaluate(build_representation(gold, options.feats), build_representation(system, options.feats), options);
}

EvaluationReport average_reports(const std::vector<EvaluationReport>& reports) {
  if (reports.empty()) throw EvalError(EvalErrorCode::InconsistentTaskSets, "no reports to average");
  const auto& first = reports.front();
  for (const auto& r : reports)
    if (!(r.tasks_evaluated == first.tasks_evaluated))
      throw EvalError(EvalErrorCode::InconsistentTaskSets, "reports were evaluated on different task sets");

  const auto n = static_cast<double>(reports.size());
  EvaluationReport out;
  out.tasks_evaluated = first.tasks_evaluated;
  out.average_metrics = first.average_metrics;
  for (const auto& [id, _] : first.scores) {
    MetricScore mean;
    bool all_have_aa = true;
    double aa = 0.0;
    for (const auto& r : reports) {
      const auto it = r.scores.find(id);
      if (it == r.scores.end())
        throw EvalError(EvalErrorCode::InconsistentTaskSets, std::string(metric_name(id)) + " missing from a report");
      mean.precision += it->second.precision / n;
      mean.recall += it->second.recall / n;
      mean.f1 += it->second.f1 / n;
      if (it->second.aligned_accuracy)
        aa += *it->second.aligned_accuracy / n;
      else
        all_have_aa = false;
    }
    if (all_have_aa) mean.aligned_accuracy = aa;
    out.scores.emplace(id, mean);
  }
  out.recompute_averages();
  return out;
}

namespace {

// Hundredths of a percent, half away from zero, decided on a 9-decimal
// rendering so that binary noise (96.66499999...) does not flip the result.
long long percent_hundredths(double fraction) {
  const double pct = fraction * 100.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9f", std::fabs(pct));
  char* dot = nullptr;
  const long long whole = std::strtoll(buf, &dot, 10);
  const int d1 = dot[1] - '0', d2 = dot[2] - '0', d3 = dot[3] - '0';
  long long h = whole * 100 + d1 * 10 + d2 + (d3 >= 5 ? 1 : 0);
  return pct < 0 ? -h : h;
}

}  // namespace

double round_percent(double fraction) { return static_cast<double>(percent_hundredths(fraction)) / 100.0; }

std::string format_percent(double fraction) {
  const long long h = percent_hundredths(fraction);
  const long long a = h < 0 ? -h : h;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%lld.%02lld", h < 0 ? "-" : "", a / 100, a % 100);
  return buf;
}

std::string render_table(const EvaluationReport& report) {
  std::string out =
      "Metric     | Precision |    Recall |  F1 Score | AligndAcc\n"
      "-----------+-----------+-----------+-----------+-----------\n";
  char line[160];
  for (const auto& [id, score] : report.scores) {
    const std::string aligned = score.aligned_accuracy ? format_percent(*score.aligned_accuracy) : "";
    std::snprintf(line, sizeof line, "%-11s|%10s |%10s |%10s |%*s\n", std::string(metric_name(id)).c_str(),
                  format_percent(score.precision).c_str(), format_percent(score.recall).c_str(),
                  format_percent(score.f1).c_str(), aligned.empty() ? 0 : 10, aligned.c_str());
    out += line;
  }
  return out;
}

}  // namespace nlpre::eval
