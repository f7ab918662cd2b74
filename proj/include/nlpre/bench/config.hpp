#pragma once
// Benchmark configuration: tagsets, their datasets with hidden gold files,
// content pages and service limits, loaded from YAML.

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nlpre/bench/errors.hpp"
#include "nlpre/eval.hpp"
#include "nlpre/eval_json.hpp"

namespace nlpre::bench {

inline constexpr std::size_t kDefaultUploadLimit = std::size_t{64} << 20;

struct DatasetConfig {
  std::string id;
  std::string label;
  std::filesystem::path gold_path;  // server-local, never served
  eval::MetricSet tasks = eval::MetricSet::all();
  std::vector<eval::MetricId> average_metrics;
  std::shared_ptr<const eval::EvalRepresentation> gold;  // null when loaded without gold
};

struct TagsetConfig {
  std::string id;
  std::string label;
  std::vector<DatasetConfig> datasets;

  const DatasetConfig* find_dataset(const std::string& id) const;
  // Union of the dataset task sets.
  eval::MetricSet tasks() const;
};

struct BenchmarkConfig {
  std::string benchmark_name;
  std::string language_code;
  std::vector<TagsetConfig> tagsets;
  std::map<std::string, std::filesystem::path> content_pages;
  std::filesystem::path storage_dir;
  std::size_t workers = 2;
  std::size_t max_upload_bytes = kDefaultUploadLimit;
  std::optional<int> retention_days;  // unset: keep unpublished results forever
  eval::FeatsComparison feats = eval::FeatsComparison::Universal;

  const TagsetConfig* find_tagset(const std::string& id) const;
  // Everything a client may see: no gold paths.
  Json public_view() const;
};

// Relative paths resolve against the config file's directory. With
// load_gold, every gold file is parsed, fully validated and cached.
BenchmarkConfig load_config(const std::filesystem::path& path, bool load_gold = true);
BenchmarkConfig parse_config(const std::string& yaml_text, const std::filesystem::path& base_dir,
                             bool load_gold = true);

}  // namespace nlpre::bench
