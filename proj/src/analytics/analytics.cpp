#include "nlpre/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <set>
#include <tuple>

namespace nlpre::analytics {

std::string_view to_string(AnalyticsErrorCode code) {
  switch (code) {
    case AnalyticsErrorCode::MissingMetric: return "MissingMetric";
    case AnalyticsErrorCode::NoEntries: return "NoEntries";
    case AnalyticsErrorCode::ZeroVariance: return "ZeroVariance";
    case AnalyticsErrorCode::LengthMismatch: return "LengthMismatch";
    case AnalyticsErrorCode::InsufficientData: return "InsufficientData";
  }
  return "?";
}

AnalyticsError::AnalyticsError(AnalyticsErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

std::string ScoreKey::label() const {
  std::string out = model;
  if (embedding && !embedding->empty()) out += "+" + *embedding;
  return out + "@" + tagset;
}

bool ScoreKey::operator<(const ScoreKey& o) const {
  return std::tie(tagset, model, embedding) < std::tie(o.tagset, o.model, o.embedding);
}

namespace {

double metric_of(const MetricF1& scores, eval::MetricId id, const std::string& where) {
  const auto it = scores.find(id);
  if (it == scores.end())
    throw AnalyticsError(AnalyticsErrorCode::MissingMetric,
                         std::string(eval::metric_name(id)) + " not evaluated for " + where);
  return it->second;
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

}  // namespace

ScoreVector score_vector(const std::vector<ScoredEntry>& entries, const ScoreKey& key, const VectorOptions& options) {
  std::vector<const ScoredEntry*> matched;
  for (const auto& e : entries)
    if (e.model == key.model && e.tagset == key.tagset && (!key.embedding || e.embedding == *key.embedding))
      matched.push_back(&e);
  if (matched.empty()) throw AnalyticsError(AnalyticsErrorCode::NoEntries, "no published entry for " + key.label());

  ScoreVector out;
  out.key = key;
  out.metrics = options.metrics;
  for (auto id : options.metrics) {
    std::vector<double> per_entry, pooled;
    for (const auto* e : matched) {
      const std::string where = e->model + "+" + e->embedding;
      if (options.datasets.empty()) {
        per_entry.push_back(metric_of(e->summary, id, where));
        pooled.push_back(per_entry.back());
        continue;
      }
      std::vector<double> values;
      for (const auto& ds : options.datasets) {
        const auto it = e->datasets.find(ds);
        if (it == e->datasets.end())
          throw AnalyticsError(AnalyticsErrorCode::MissingMetric, "dataset " + ds + " not evaluated for " + where);
        values.push_back(metric_of(it->second, id, where + " on " + ds));
      }
      per_entry.push_back(mean(values));
      pooled.insert(pooled.end(), values.begin(), values.end());
    }
    out.values.push_back(options.order == AveragingOrder::Pooled ? mean(pooled) : mean(per_entry));
  }
  return out;
}

std::vector<ScoreKey> distinct_keys(const std::vector<ScoredEntry>& entries, bool per_embedding) {
  std::set<ScoreKey> keys;
  for (const auto& e : entries) {
    ScoreKey k{e.model, e.tagset, std::nullopt};
    if (per_embedding) k.embedding = e.embedding;
    keys.insert(k);
  }
  return {keys.begin(), keys.end()};
}

std::vector<ScoreVector> score_vectors(const std::vector<ScoredEntry>& entries, bool per_embedding,
                                       const VectorOptions& options) {
  std::vector<ScoreVector> out;
  for (const auto& key : distinct_keys(entries, per_embedding)) out.push_back(score_vector(entries, key, options));
  return out;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size())
    throw AnalyticsError(AnalyticsErrorCode::LengthMismatch,
                         "vectors of length " + std::to_string(x.size()) + " and " + std::to_string(y.size()));
  if (x.size() < 2) throw AnalyticsError(AnalyticsErrorCode::InsufficientData, "need at least two values");
  const double mx = mean(x), my = mean(y);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw AnalyticsError(AnalyticsErrorCode::ZeroVariance, "constant vector");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> fractional_ranks(const std::vector<double>& x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) return pearson(x, y);  // throws LengthMismatch
  return pearson(fractional_ranks(x), fractional_ranks(y));
}

CorrelationMatrix correlation_matrix(const std::vector<ScoreVector>& vectors) {
  if (vectors.size() < 2) throw AnalyticsError(AnalyticsErrorCode::InsufficientData, "need at least two vectors");
  for (const auto& v : vectors)
    if (v.metrics != vectors.front().metrics)
      throw AnalyticsError(AnalyticsErrorCode::LengthMismatch, "vectors use different metric lists");

  const std::size_t n = vectors.size();
  CorrelationMatrix m;
  m.pearson.assign(n, std::vector<std::optional<double>>(n));
  m.spearman = m.pearson;
  for (const auto& v : vectors) m.labels.push_back(v.key.label());
  for (std::size_t i = 0; i < n; ++i) {
    // A constant vector has no defined correlation, not even with itself.
    const bool constant = std::adjacent_find(vectors[i].values.begin(), vectors[i].values.end(),
                                             std::not_equal_to<>()) == vectors[i].values.end();
    if (!constant) m.pearson[i][i] = m.spearman[i][i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      try {
        m.pearson[i][j] = m.pearson[j][i] = pearson(vectors[i].values, vectors[j].values);
      } catch (const AnalyticsError& e) {
        if (e.code() != AnalyticsErrorCode::ZeroVariance) throw;
      }
      try {
        m.spearman[i][j] = m.spearman[j][i] = spearman(vectors[i].values, vectors[j].values);
      } catch (const AnalyticsError& e) {
        if (e.code() != AnalyticsErrorCode::ZeroVariance) throw;
      }
    }
  }
  return m;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw AnalyticsError(AnalyticsErrorCode::InsufficientData, "empty vector");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<Dispersion> dispersion_summary(const std::vector<ScoreVector>& vectors) {
  std::vector<Dispersion> out;
  for (const auto& v : vectors) {
    if (v.values.empty()) throw AnalyticsError(AnalyticsErrorCode::InsufficientData, v.key.label() + " is empty");
    Dispersion d;
    d.label = v.key.label();
    d.min = *std::min_element(v.values.begin(), v.values.end());
    d.max = *std::max_element(v.values.begin(), v.values.end());
    d.q1 = quantile(v.values, 0.25);
    d.median = quantile(v.values, 0.5);
    d.q3 = quantile(v.values, 0.75);
    out.push_back(d);
  }
  return out;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

Json to_json(const ScoreVector& v) {
  Json metrics = Json::array();
  for (auto id : v.metrics) metrics.push_back(eval::metric_name(id));
  Json out{{"label", v.key.label()}, {"model", v.key.model}, {"tagset", v.key.tagset}};
  out["embedding"] = v.key.embedding ? Json(*v.key.embedding) : Json();
  out["metrics"] = std::move(metrics);
  out["values"] = v.values;
  return out;
}

namespace {

Json cells_json(const std::vector<std::vector<std::optional<double>>>& cells) {
  Json out = Json::array();
  for (const auto& row : cells) {
    Json r = Json::array();
    for (const auto& c : row) r.push_back(c ? Json(*c) : Json("undefined"));
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

Json to_json(const CorrelationMatrix& m) {
  return Json{{"labels", m.labels}, {"pearson", cells_json(m.pearson)}, {"spearman", cells_json(m.spearman)}};
}

Json to_json(const std::vector<Dispersion>& rows) {
  Json out = Json::array();
  for (const auto& d : rows)
    out.push_back({{"label", d.label}, {"min", d.min}, {"q1", d.q1}, {"median", d.median}, {"q3", d.q3}, {"max", d.max}});
  return out;
}

std::string correlation_csv(const CorrelationMatrix& m, bool use_spearman) {
  const auto& cells = use_spearman ? m.spearman : m.pearson;
  std::string out = "label";
  for (const auto& l : m.labels) out += "," + csv_field(l);
  out += "\n";
  for (std::size_t i = 0; i < cells.size(); ++i) {
    out += csv_field(m.labels[i]);
    for (const auto& c : cells[i]) out += "," + (c ? number(*c) : std::string("undefined"));
    out += "\n";
  }
  return out;
}

std::string dispersion_csv(const std::vector<Dispersion>& rows) {
  std::string out = "label,min,q1,median,q3,max\n";
  for (const auto& d : rows)
    out += csv_field(d.label) + "," + number(d.min) + "," + number(d.q1) + "," + number(d.median) + "," +
           number(d.q3) + "," + number(d.max) + "\n";
  return out;
}

}  // namespace nlpre::analytics
