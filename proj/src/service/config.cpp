#include "nlpre/bench/config.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

namespace nlpre::bench {

std::string_view to_string(ServiceErrorCode code) {
  switch (code) {
    case ServiceErrorCode::ConfigSyntax: return "ConfigSyntax";
    case ServiceErrorCode::MissingGold: return "MissingGold";
    case ServiceErrorCode::InvalidGold: return "InvalidGold";
    case ServiceErrorCode::DuplicateId: return "DuplicateId";
    case ServiceErrorCode::TooLarge: return "TooLarge";
    case ServiceErrorCode::NotAZip: return "NotAZip";
    case ServiceErrorCode::DuplicateArchive: return "DuplicateArchive";
    case ServiceErrorCode::NotFound: return "NotFound";
    case ServiceErrorCode::WrongToken: return "WrongToken";
    case ServiceErrorCode::WrongState: return "WrongState";
    case ServiceErrorCode::UnknownTagset: return "UnknownTagset";
    case ServiceErrorCode::UnknownDataset: return "UnknownDataset";
    case ServiceErrorCode::BadQuery: return "BadQuery";
    case ServiceErrorCode::Storage: return "Storage";
  }
  return "?";
}

ServiceError::ServiceError(ServiceErrorCode code, const std::string& message, std::optional<std::string> reference)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), reference_(std::move(reference)) {}

const DatasetConfig* TagsetConfig::find_dataset(const std::string& want) const {
  for (const auto& d : datasets)
    if (d.id == want) return &d;
  return nullptr;
}

eval::MetricSet TagsetConfig::tasks() const {
  eval::MetricSet out;
  for (const auto& d : datasets) out = out | d.tasks;
  return out;
}

const TagsetConfig* BenchmarkConfig::find_tagset(const std::string& want) const {
  for (const auto& t : tagsets)
    if (t.id == want) return &t;
  return nullptr;
}

Json BenchmarkConfig::public_view() const {
  Json out;
  out["benchmark_name"] = benchmark_name;
  out["language_code"] = language_code;
  out["feats"] = feats == eval::FeatsComparison::Universal ? "universal" : "all";
  out["max_upload_bytes"] = max_upload_bytes;
  Json tags = Json::array();
  for (const auto& t : tagsets) {
    Json tj{{"id", t.id}, {"label", t.label}, {"datasets", Json::array()}};
    for (const auto& d : t.datasets) {
      Json avg = Json::array();
      for (auto id : d.average_metrics) avg.push_back(eval::metric_name(id));
      tj["datasets"].push_back(
          {{"id", d.id}, {"label", d.label}, {"tasks", eval::to_json(d.tasks)}, {"average_metrics", avg}});
    }
    tags.push_back(std::move(tj));
  }
  out["tagsets"] = std::move(tags);
  Json pages = Json::array();
  for (const auto& [slug, _] : content_pages) pages.push_back(slug);
  out["content_pages"] = std::move(pages);
  return out;
}

namespace {

[[noreturn]] void syntax(const std::string& what) { throw ServiceError(ServiceErrorCode::ConfigSyntax, what); }

std::string scalar(const YAML::Node& node, const std::string& key, const std::string& where, bool required = true) {
  const auto v = node[key];
  if (!v) {
    if (required) syntax(where + ": missing '" + key + "'");
    return {};
  }
  if (!v.IsScalar()) syntax(where + ": '" + key + "' must be a scalar");
  return v.as<std::string>();
}

std::vector<eval::MetricId> metric_list(const YAML::Node& node, const std::string& where) {
  std::vector<eval::MetricId> out;
  if (node.IsScalar()) {
    const auto s = node.as<std::string>();
    if (s == "all") return eval::MetricSet::all().to_vector();
    if (s == "tagging") return eval::MetricSet::tagging().to_vector();
    try {
      return eval::parse_metric_list(s).to_vector();
    } catch (const std::invalid_argument& e) {
      syntax(where + ": " + e.what());
    }
  }
  if (!node.IsSequence()) syntax(where + ": expected a metric list");
  for (const auto& item : node) {
    const auto id = eval::parse_metric(item.as<std::string>());
    if (!id) syntax(where + ": unknown metric '" + item.as<std::string>() + "'");
    out.push_back(*id);
  }
  return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

void load_gold(DatasetConfig& d, eval::FeatsComparison feats) {
  if (!std::filesystem::is_regular_file(d.gold_path))
    throw ServiceError(ServiceErrorCode::MissingGold, "gold file for dataset '" + d.id + "' not found");
  conllu::TreebankFile file;
  try {
    file = conllu::read_conllu_file(d.gold_path);
  } catch (const conllu::ParseError& e) {
    throw ServiceError(ServiceErrorCode::InvalidGold,
                       "gold for dataset '" + d.id + "' does not parse (line " + std::to_string(e.line()) + ")");
  }
  const auto report = conllu::validate_treebank(file, conllu::ValidationMode::Full);
  if (!report.ok()) {
    // Location and error class only: issue messages may quote gold columns.
    const auto& issue = report.errors.front();
    throw ServiceError(ServiceErrorCode::InvalidGold,
                       "gold for dataset '" + d.id + "' fails validation (" + std::string(conllu::to_string(issue.code)) +
                           " in sentence " + std::to_string(issue.sentence_index + 1) + ")");
  }
  try {
    d.gold = std::make_shared<const eval::EvalRepresentation>(eval::build_representation(file, feats));
  } catch (const eval::EvalError& e) {
    throw ServiceError(ServiceErrorCode::InvalidGold, "gold for dataset '" + d.id + "': " + e.what());
  }
}

}  // namespace

BenchmarkConfig parse_config(const std::string& text, const std::filesystem::path& base, bool with_gold) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    syntax(e.what());
  }
  if (!root.IsMap()) syntax("top level must be a mapping");

  BenchmarkConfig cfg;
  try {
    cfg.benchmark_name = scalar(root, "benchmark_name", "config");
    cfg.language_code = scalar(root, "language_code", "config", false);
    cfg.storage_dir = resolve(base, root["storage_dir"] ? root["storage_dir"].as<std::string>() : "var");
    if (root["workers"]) cfg.workers = std::max<std::size_t>(1, root["workers"].as<std::size_t>());
    if (root["feats"]) {
      const auto f = root["feats"].as<std::string>();
      if (f == "universal") cfg.feats = eval::FeatsComparison::Universal;
      else if (f == "all") cfg.feats = eval::FeatsComparison::All;
      else syntax("feats must be 'universal' or 'all'");
    }
    if (const auto limits = root["limits"]) {
      if (limits["max_upload_mib"]) cfg.max_upload_bytes = limits["max_upload_mib"].as<std::size_t>() << 20;
      if (limits["retention_days"] && !limits["retention_days"].IsNull())
        cfg.retention_days = limits["retention_days"].as<int>();
    }
    if (const auto pages = root["content_pages"]) {
      if (!pages.IsMap()) syntax("content_pages must map slug to a markdown path");
      for (const auto& kv : pages) cfg.content_pages[kv.first.as<std::string>()] = resolve(base, kv.second.as<std::string>());
    }

    const auto tagsets = root["tagsets"];
    if (!tagsets || !tagsets.IsSequence() || tagsets.size() == 0) syntax("at least one tagset is required");
    std::set<std::string> tag_ids;
    for (const auto& tn : tagsets) {
      TagsetConfig t;
      t.id = scalar(tn, "id", "tagset");
      t.label = tn["label"] ? tn["label"].as<std::string>() : t.id;
      if (!tag_ids.insert(t.id).second)
        throw ServiceError(ServiceErrorCode::DuplicateId, "tagset id '" + t.id + "' is used twice");
      const auto datasets = tn["datasets"];
      if (!datasets || !datasets.IsSequence() || datasets.size() == 0)
        syntax("tagset '" + t.id + "' needs at least one dataset");
      std::set<std::string> ds_ids;
      for (const auto& dn : datasets) {
        DatasetConfig d;
        d.id = scalar(dn, "id", "dataset in tagset '" + t.id + "'");
        if (!ds_ids.insert(d.id).second)
          throw ServiceError(ServiceErrorCode::DuplicateId, "dataset id '" + d.id + "' is used twice in tagset '" + t.id + "'");
        if (d.id.find_first_of("/\\") != std::string::npos || d.id.empty() || d.id[0] == '.')
          syntax("dataset id '" + d.id + "' is not a valid file stem");
        d.label = dn["label"] ? dn["label"].as<std::string>() : d.id;
        d.gold_path = resolve(base, scalar(dn, "gold", "dataset '" + d.id + "'"));
        if (dn["tasks"]) {
          d.tasks = eval::MetricSet{};
          for (auto id : metric_list(dn["tasks"], "dataset '" + d.id + "' tasks")) d.tasks.insert(id);
          d.tasks = d.tasks | eval::MetricSet::segmentation();
        }
        d.average_metrics = dn["average_metrics"] ? metric_list(dn["average_metrics"], "dataset '" + d.id + "' average_metrics")
                                                  : eval::default_average_metrics(d.tasks);
        for (auto id : d.average_metrics)
          if (!d.tasks.contains(id))
            syntax("dataset '" + d.id + "': average metric " + std::string(eval::metric_name(id)) + " is not a task");
        t.datasets.push_back(std::move(d));
      }
      cfg.tagsets.push_back(std::move(t));
    }
  } catch (const YAML::Exception& e) {
    syntax(e.what());
  }

  if (with_gold)
    for (auto& t : cfg.tagsets)
      for (auto& d : t.datasets) load_gold(d, cfg.feats);
  return cfg;
}

BenchmarkConfig load_config(const std::filesystem::path& path, bool with_gold) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ServiceError(ServiceErrorCode::ConfigSyntax, "cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path(), with_gold);
}

}  // namespace nlpre::bench
