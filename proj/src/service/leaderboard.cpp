#include "nlpre/bench/leaderboard.hpp"

#include <algorithm>
#include <cmath>

namespace nlpre::bench {

namespace {

std::optional<double> opt_number(const Json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<double>();
}

}  // namespace

ScoreRow score_row_from_json(const Json& j) {
  ScoreRow row;
  for (const auto& [name, m] : j.at("metrics").items()) {
    const auto id = eval::parse_metric(name);
    if (!id) continue;
    row.metrics[*id] = ScoreCell{m.at("f1").get<double>(), opt_number(m, "aligned_accuracy")};
  }
  row.average_f1 = j.at("average_f1").get<double>();
  row.average_aligned_accuracy = opt_number(j, "average_aligned_accuracy");
  return row;
}

Json to_json(const ScoreRow& row) {
  Json metrics = Json::object();
  for (const auto& [id, cell] : row.metrics) {
    Json c{{"f1", cell.f1}};
    c["aligned_accuracy"] = cell.aligned_accuracy ? Json(*cell.aligned_accuracy) : Json();
    metrics[std::string(eval::metric_name(id))] = std::move(c);
  }
  Json out{{"average_f1", row.average_f1}};
  out["average_aligned_accuracy"] = row.average_aligned_accuracy ? Json(*row.average_aligned_accuracy) : Json();
  out["metrics"] = std::move(metrics);
  return out;
}

ScoreRow average_rows(const std::vector<ScoreRow>& rows) {
  ScoreRow out;
  if (rows.empty()) return out;
  for (auto id : eval::kAllMetrics) {
    double f1 = 0, aa = 0;
    std::size_t n = 0, n_aa = 0;
    for (const auto& r : rows) {
      const auto it = r.metrics.find(id);
      if (it == r.metrics.end()) continue;
      f1 += it->second.f1;
      ++n;
      if (it->second.aligned_accuracy) {
        aa += *it->second.aligned_accuracy;
        ++n_aa;
      }
    }
    if (n == 0) continue;
    ScoreCell cell{f1 / static_cast<double>(n), std::nullopt};
    if (n_aa == n) cell.aligned_accuracy = aa / static_cast<double>(n);
    out.metrics[id] = cell;
  }
  double avg = 0, avg_aa = 0;
  std::size_t n_aa = 0;
  for (const auto& r : rows) {
    avg += r.average_f1;
    if (r.average_aligned_accuracy) {
      avg_aa += *r.average_aligned_accuracy;
      ++n_aa;
    }
  }
  out.average_f1 = avg / static_cast<double>(rows.size());
  if (n_aa == rows.size()) out.average_aligned_accuracy = avg_aa / static_cast<double>(n_aa);
  return out;
}

void assign_ranks(std::vector<LeaderboardEntry>& entries) {
  std::vector<std::size_t> order(entries.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto key = [&](std::size_t i) { return eval::round_percent(entries[i].average_f1()); };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key(a) > key(b); });
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const bool tied = pos > 0 && key(order[pos]) == key(order[pos - 1]);
    entries[order[pos]].rank = tied ? entries[order[pos - 1]].rank : static_cast<int>(pos) + 1;
  }
}

void sort_for_query(std::vector<LeaderboardEntry>& entries, const LeaderboardQuery& q) {
  auto value = [&](const LeaderboardEntry& e) -> std::optional<double> {
    const ScoreRow* row = &e.averaged;
    if (q.dataset) {
      const auto it = e.datasets.find(*q.dataset);
      if (it == e.datasets.end()) return std::nullopt;
      row = &it->second;
    }
    if (!q.metric) return eval::round_percent(row->average_f1);
    const auto it = row->metrics.find(*q.metric);
    if (it == row->metrics.end()) return std::nullopt;
    return eval::round_percent(it->second.f1);
  };
  std::stable_sort(entries.begin(), entries.end(), [&](const LeaderboardEntry& a, const LeaderboardEntry& b) {
    const auto va = value(a), vb = value(b);
    if (va.has_value() != vb.has_value()) return va.has_value();
    if (va && *va != *vb) return q.descending ? *va > *vb : *va < *vb;
    if (a.rank != b.rank) return a.rank < b.rank;
    return a.submission_id < b.submission_id;
  });
}

Json to_json(const LeaderboardEntry& e, const std::optional<std::string>& dataset) {
  Json out{{"rank", e.rank},
           {"submission_id", e.submission_id},
           {"model_name", e.model_name},
           {"embeddings", e.embeddings_label},
           {"tagset", e.tagset_id},
           {"origin", e.origin},
           {"published_at", e.published_at},
           {"average_f1", e.average_f1()}};
  if (dataset) {
    const auto it = e.datasets.find(*dataset);
    out["dataset"] = *dataset;
    out["scores"] = it == e.datasets.end() ? Json() : to_json(it->second);
  } else {
    out["dataset"] = nullptr;
    out["scores"] = to_json(e.averaged);
  }
  Json ds = Json::object();
  for (const auto& [id, row] : e.datasets) ds[id] = to_json(row);
  out["datasets"] = std::move(ds);
  return out;
}

Json leaderboard_json(const std::vector<LeaderboardEntry>& entries, const LeaderboardQuery& q) {
  Json out{{"tagset", q.tagset}};
  out["dataset"] = q.dataset ? Json(*q.dataset) : Json();
  out["metric"] = q.metric ? Json(std::string(eval::metric_name(*q.metric))) : Json();
  out["sort"] = q.descending ? "desc" : "asc";
  Json list = Json::array();
  for (const auto& e : entries) list.push_back(to_json(e, q.dataset));
  out["entries"] = std::move(list);
  return out;
}

std::vector<LeaderboardEntry> leaderboard_from_json(const Json& j) {
  std::vector<LeaderboardEntry> out;
  for (const auto& ej : j.at("entries")) {
    LeaderboardEntry e;
    e.rank = ej.value("rank", 0);
    e.submission_id = ej.value("submission_id", "");
    e.model_name = ej.value("model_name", "");
    e.embeddings_label = ej.value("embeddings", "");
    e.tagset_id = ej.value("tagset", "");
    e.origin = ej.value("origin", "");
    e.published_at = ej.value("published_at", "");
    for (const auto& [id, row] : ej.at("datasets").items()) e.datasets[id] = score_row_from_json(row);
    // The averaged row is only present as "scores" in the unfiltered view.
    if (ej.at("dataset").is_null())
      e.averaged = score_row_from_json(ej.at("scores"));
    else {
      std::vector<ScoreRow> rows;
      for (const auto& [_, row] : e.datasets) rows.push_back(row);
      e.averaged = average_rows(rows);
      e.averaged.average_f1 = ej.at("average_f1").get<double>();
    }
    out.push_back(std::move(e));
  }
  return out;
}

analytics::ScoredEntry to_scored(const LeaderboardEntry& e) {
  analytics::ScoredEntry s;
  s.model = e.model_name;
  s.embedding = e.embeddings_label;
  s.tagset = e.tagset_id;
  for (const auto& [id, cell] : e.averaged.metrics) s.summary[id] = cell.f1;
  for (const auto& [ds, row] : e.datasets)
    for (const auto& [id, cell] : row.metrics) s.datasets[ds][id] = cell.f1;
  return s;
}

}  // namespace nlpre::bench
