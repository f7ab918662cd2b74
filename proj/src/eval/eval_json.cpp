#include "nlpre/eval_json.hpp"

namespace nlpre::eval {

namespace {

MetricId metric_from_name(const std::string& name) {
  const auto id = parse_metric(name);
  if (!id) throw std::invalid_argument("unknown metric '" + name + "'");
  return *id;
}

}  // namespace

Json to_json(const MetricScore& s) {
  Json j;
  j["precision"] = s.precision;
  j["recall"] = s.recall;
  j["f1"] = s.f1;
  j["aligned_accuracy"] = s.aligned_accuracy ? Json(*s.aligned_accuracy) : Json(nullptr);
  if (s.counts) {
    j["correct"] = s.counts->correct;
    j["gold_total"] = s.counts->gold_total;
    j["system_total"] = s.counts->system_total;
    j["aligned_total"] = s.counts->aligned_total ? Json(*s.counts->aligned_total) : Json(nullptr);
  }
  return j;
}

Json to_json(const MetricSet& set) {
  Json j = Json::array();
  for (auto id : set.to_vector()) j.push_back(std::string(metric_name(id)));
  return j;
}

MetricSet metric_set_from_json(const Json& j) {
  MetricSet out;
  for (const auto& item : j) out.insert(metric_from_name(item.get<std::string>()));
  return out;
}

Json to_json(const EvaluationReport& r) {
  Json j;
  j["tasks_evaluated"] = to_json(r.tasks_evaluated);
  Json avg = Json::array();
  for (auto id : r.average_metrics) avg.push_back(std::string(metric_name(id)));
  j["average_metrics"] = avg;
  j["average_f1"] = r.average_f1;
  j["average_aligned_accuracy"] =
      r.average_aligned_accuracy ? Json(*r.average_aligned_accuracy) : Json(nullptr);
  Json metrics = Json::object();
  for (const auto& [id, score] : r.scores) metrics[std::string(metric_name(id))] = to_json(score);
  j["metrics"] = metrics;
  return j;
}

EvaluationReport report_from_json(const Json& j) {
  EvaluationReport r;
  r.tasks_evaluated = metric_set_from_json(j.at("tasks_evaluated"));
  for (const auto& item : j.at("average_metrics")) r.average_metrics.push_back(metric_from_name(item.get<std::string>()));
  for (const auto& [name, m] : j.at("metrics").items()) {
    MetricScore s;
    s.precision = m.value("precision", 0.0);
    s.recall = m.value("recall", 0.0);
    s.f1 = m.at("f1").get<double>();
    if (m.contains("aligned_accuracy") && !m["aligned_accuracy"].is_null())
      s.aligned_accuracy = m["aligned_accuracy"].get<double>();
    if (m.contains("correct")) {
      MetricCounts c;
      c.correct = m.at("correct").get<std::size_t>();
      c.gold_total = m.at("gold_total").get<std::size_t>();
      c.system_total = m.at("system_total").get<std::size_t>();
      if (!m.at("aligned_total").is_null()) c.aligned_total = m["aligned_total"].get<std::size_t>();
      s.counts = c;
    }
    r.scores.emplace(metric_from_name(name), s);
  }
  r.recompute_averages();
  return r;
}

}  // namespace nlpre::eval
