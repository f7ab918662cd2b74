// nlpre: command-line front end. Every subcommand is a thin adapter over the
// libraries; exit 0 on success, 1 on domain errors, 2 on usage errors.

#include <CLI11.hpp>
#include <httplib.h>
#include <signal.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "nlpre/analytics.hpp"
#include "nlpre/bench/http_api.hpp"
#include "nlpre/bench/service.hpp"
#include "nlpre/conllu.hpp"
#include "nlpre/eval.hpp"
#include "nlpre/eval_json.hpp"
#include "nlpre/splitter.hpp"

namespace fs = std::filesystem;
using namespace nlpre;

namespace {

// Domain failure: message already formatted for stderr.
struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

conllu::TreebankFile load_treebank(const std::string& path) {
  try {
    return conllu::read_conllu_file(path);
  } catch (const conllu::ParseError& e) {
    throw Failure(path + ":" + std::to_string(e.line()) + ": " + e.what());
  } catch (const std::runtime_error& e) {
    throw Failure(e.what());
  }
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<eval::MetricId> metric_vector(const std::string& list) {
  std::vector<eval::MetricId> out;
  for (const auto& n : split_list(list)) {
    const auto id = eval::parse_metric(n);
    if (!id) throw CLI::ValidationError("--metrics", "unknown metric '" + n + "'");
    out.push_back(*id);
  }
  return out;
}

eval::FeatsComparison feats_mode(const std::string& s) {
  return s == "all" ? eval::FeatsComparison::All : eval::FeatsComparison::Universal;
}

// ---- eval -----------------------------------------------------------------

struct EvalArgs {
  std::string gold, system, tasks, format = "table", feats = "universal";
};

int run_eval(const EvalArgs& a) {
  eval::EvalOptions opts;
  if (!a.tasks.empty()) {
    try {
      opts.tasks = eval::parse_metric_list(a.tasks);
    } catch (const std::invalid_argument& e) {
      throw CLI::ValidationError("--tasks", e.what());
    }
  }
  opts.feats = feats_mode(a.feats);
  const auto gold = load_treebank(a.gold);
  const auto system = load_treebank(a.system);
  eval::EvaluationReport report;
  try {
    report = eval::evaluate(gold, system, opts);
  } catch (const eval::EvalError& e) {
    throw Failure(a.system + ": " + e.what());
  }
  if (a.format == "json")
    std::cout << eval::to_json(report).dump(2) << '\n';
  else
    std::cout << eval::render_table(report);
  return 0;
}

// ---- validate -------------------------------------------------------------

int run_validate(const std::vector<std::string>& files, const std::string& mode) {
  int rc = 0;
  for (const auto& f : files) {
    const auto file = load_treebank(f);
    const auto report =
        conllu::validate_treebank(file, mode == "full" ? conllu::ValidationMode::Full : conllu::ValidationMode::Surface);
    if (report.ok()) {
      std::cout << f << ": OK (" << file.sentences.size() << " sentences, " << file.word_count() << " words)\n";
      continue;
    }
    rc = 1;
    for (const auto& issue : report.errors)
      std::cerr << f << ": sentence " << issue.sentence_index + 1 << ", line " << issue.line_index + 1 << ": "
                << conllu::to_string(issue.code) << ": " << issue.message << '\n';
  }
  return rc;
}

// ---- split ----------------------------------------------------------------

struct SplitArgs {
  std::string input, by = "name", ratios = "0.8,0.1,0.1", out_dir = ".";
  std::size_t k = 10;
  std::uint64_t seed = 0;
  split::BoundaryKeys keys;
};

int run_split(const SplitArgs& a) {
  split::SplitSpec spec;
  spec.bucket_count = a.k;
  spec.seed = a.seed;
  spec.stratify_by_type = a.by == "type";
  const auto parts = split_list(a.ratios);
  if (parts.size() != 3) throw CLI::ValidationError("--ratios", "expected three comma-separated numbers");
  for (std::size_t i = 0; i < 3; ++i) {
    try {
      spec.ratios[i] = std::stod(parts[i]);
    } catch (const std::exception&) {
      throw CLI::ValidationError("--ratios", "'" + parts[i] + "' is not a number");
    }
  }

  const auto corpus = load_treebank(a.input);
  try {
    const auto paragraphs = split::extract_paragraphs(corpus, a.keys);
    const auto result = split::split(paragraphs, spec);
    const auto files = split::materialize(result, paragraphs);
    fs::create_directories(a.out_dir);
    for (auto s : split::kSubsets) {
      std::ofstream out(fs::path(a.out_dir) / (std::string(split::to_string(s)) + ".conllu"), std::ios::binary);
      out << conllu::serialize_conllu(files[static_cast<std::size_t>(s)]);
      if (!out) throw Failure("cannot write to " + a.out_dir);
    }
    std::ofstream manifest(fs::path(a.out_dir) / "split-manifest.json", std::ios::binary);
    manifest << split::manifest_json(result, spec, paragraphs).dump(2) << '\n';
    const auto& d = result.diagnostics;
    std::cerr << "paragraphs train/dev/test: " << d.paragraphs[0] << '/' << d.paragraphs[1] << '/' << d.paragraphs[2]
              << ", segments: " << d.segments[0] << '/' << d.segments[1] << '/' << d.segments[2]
              << ", max bucket deviation: " << d.max_bucket_deviation << '\n';
  } catch (const split::SplitError& e) {
    throw Failure(a.input + ": " + e.what());
  }
  return 0;
}

// ---- serve / seed-fixtures ------------------------------------------------

bench::BenchmarkConfig load_bench_config(const std::string& path) {
  try {
    return bench::load_config(path);
  } catch (const bench::ServiceError& e) {
    throw Failure(path + ": " + e.what());
  }
}

std::pair<std::string, int> parse_listen(const std::string& addr) {
  const auto colon = addr.rfind(':');
  if (colon == std::string::npos) throw CLI::ValidationError("--listen", "expected HOST:PORT");
  try {
    return {addr.substr(0, colon), std::stoi(addr.substr(colon + 1))};
  } catch (const std::exception&) {
    throw CLI::ValidationError("--listen", "bad port in '" + addr + "'");
  }
}

void print_seed(const bench::SeedReport& r) {
  std::cout << "seeded " << r.inserted << " entries (" << r.existing << " already present, " << r.skipped
            << " skipped)\n";
}

int run_seed(const std::string& config_path) {
  bench::ServiceOptions opts;
  opts.start_workers = false;
  bench::BenchService svc(load_bench_config(config_path), opts);
  print_seed(svc.seed_fixtures());
  return 0;
}

int run_serve(const std::string& config_path, const std::string& listen, bool seed) {
  const auto [host, port] = parse_listen(listen);
  // Block termination signals so a dedicated thread can sigwait for them.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  bench::BenchService svc(load_bench_config(config_path));
  if (seed) print_seed(svc.seed_fixtures());
  svc.purge_expired();
  svc.recover();
  bench::HttpServer server(svc);
  int bound = 0;
  try {
    bound = server.bind(host, port);
  } catch (const bench::ServiceError& e) {
    throw Failure(e.what());
  }
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&set, &sig);
    server.stop();
  });
  std::cerr << "listening on http://" << host << ':' << bound << '\n';
  server.run();
  // run() returned on its own: release the waiter.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  return 0;
}

// ---- analyze --------------------------------------------------------------

struct AnalyzeArgs {
  std::string what, url, metrics, datasets, group = "model", order = "datasets-first", method = "pearson";
  std::vector<std::string> files, tagsets;
};

std::vector<bench::LeaderboardEntry> fetch_leaderboards(const AnalyzeArgs& a) {
  std::vector<bench::LeaderboardEntry> out;
  auto append = [&](const Json& j) {
    for (auto& e : bench::leaderboard_from_json(j)) out.push_back(std::move(e));
  };
  for (const auto& f : a.files) {
    std::ifstream in(f, std::ios::binary);
    if (!in) throw Failure("cannot read " + f);
    try {
      append(Json::parse(in));
    } catch (const Json::exception& e) {
      throw Failure(f + ": " + e.what());
    }
  }
  if (a.url.empty()) return out;

  httplib::Client client(a.url);
  client.set_connection_timeout(10);
  client.set_read_timeout(60);
  auto get = [&](const std::string& path) {
    const auto res = client.Get(path);
    if (!res) throw Failure(a.url + path + ": " + httplib::to_string(res.error()));
    if (res->status != 200) throw Failure(a.url + path + ": HTTP " + std::to_string(res->status) + " " + res->body);
    return Json::parse(res->body);
  };
  auto tagsets = a.tagsets;
  if (tagsets.empty()) {
    const auto config = get("/api/v1/config");
    for (const auto& t : config["tagsets"]) tagsets.push_back(t["id"].get<std::string>());
  }
  for (const auto& t : tagsets) append(get("/api/v1/leaderboard?tagset=" + httplib::detail::encode_query_param(t)));
  return out;
}

int run_analyze(const AnalyzeArgs& a) {
  if (a.url.empty() && a.files.empty())
    throw CLI::ValidationError("analyze", "one of --leaderboard-url or --leaderboard-file is required");
  std::vector<analytics::ScoredEntry> entries;
  for (const auto& e : fetch_leaderboards(a))
    if (a.tagsets.empty() || std::find(a.tagsets.begin(), a.tagsets.end(), e.tagset_id) != a.tagsets.end())
      entries.push_back(bench::to_scored(e));

  analytics::VectorOptions opts;
  if (!a.metrics.empty()) opts.metrics = metric_vector(a.metrics);
  opts.datasets = split_list(a.datasets);
  opts.order = a.order == "pooled" ? analytics::AveragingOrder::Pooled : analytics::AveragingOrder::DatasetsThenEmbeddings;
  try {
    const auto vectors = analytics::score_vectors(entries, a.group == "entry", opts);
    if (a.what == "correlation")
      std::cout << analytics::correlation_csv(analytics::correlation_matrix(vectors), a.method == "spearman");
    else
      std::cout << analytics::dispersion_csv(analytics::dispersion_summary(vectors));
  } catch (const analytics::AnalyticsError& e) {
    throw Failure(e.what());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"NLPre benchmarking toolkit"};
  app.require_subcommand(1);

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Score a system CoNLL-U file against gold");
  eval_cmd->add_option("gold", ev.gold, "Gold CoNLL-U file")->required();
  eval_cmd->add_option("system", ev.system, "System CoNLL-U file")->required();
  eval_cmd->add_option("--tasks", ev.tasks, "Comma-separated metrics to evaluate (default: all)");
  eval_cmd->add_option("--format", ev.format)->check(CLI::IsMember({"table", "json"}));
  eval_cmd->add_option("--feats", ev.feats, "FEATS comparison")->check(CLI::IsMember({"universal", "all"}));

  std::vector<std::string> validate_files;
  std::string validate_mode = "full";
  auto* validate_cmd = app.add_subcommand("validate", "Check CoNLL-U files");
  validate_cmd->add_option("files", validate_files)->required();
  validate_cmd->add_option("--mode", validate_mode)->check(CLI::IsMember({"surface", "full"}));

  SplitArgs sp;
  auto* split_cmd = app.add_subcommand("split", "Split a corpus into train/dev/test by paragraphs");
  split_cmd->add_option("--input", sp.input)->required();
  split_cmd->add_option("--by", sp.by)->check(CLI::IsMember({"name", "type"}));
  split_cmd->add_option("--k", sp.k, "Length buckets")->check(CLI::PositiveNumber);
  split_cmd->add_option("--ratios", sp.ratios, "train,dev,test");
  split_cmd->add_option("--seed", sp.seed);
  split_cmd->add_option("--out-dir", sp.out_dir);
  split_cmd->add_option("--paragraph-key", sp.keys.paragraph);
  split_cmd->add_option("--document-key", sp.keys.document);
  split_cmd->add_option("--type-key", sp.keys.document_type);

  std::string config_path, listen = "127.0.0.1:8080";
  bool serve_seed = false;
  auto* serve_cmd = app.add_subcommand("serve", "Run the benchmark HTTP service");
  serve_cmd->add_option("--config", config_path)->required();
  serve_cmd->add_option("--listen", listen, "HOST:PORT");
  serve_cmd->add_flag("--seed-fixtures", serve_seed, "Insert the demo results before serving");

  auto* seed_cmd = app.add_subcommand("seed-fixtures", "Insert the bundled demo results as published entries");
  seed_cmd->add_option("--config", config_path)->required();

  AnalyzeArgs an;
  auto* analyze_cmd = app.add_subcommand("analyze", "Correlation and dispersion of published F1 vectors");
  analyze_cmd->add_option("what", an.what)->required()->check(CLI::IsMember({"correlation", "dispersion"}));
  analyze_cmd->add_option("--leaderboard-url", an.url, "Service base URL");
  analyze_cmd->add_option("--leaderboard-file", an.files, "Saved leaderboard JSON (repeatable)");
  analyze_cmd->add_option("--tagsets", an.tagsets)->delimiter(',');
  analyze_cmd->add_option("--metrics", an.metrics, "Vector components");
  analyze_cmd->add_option("--datasets", an.datasets, "Average these datasets instead of the summary row");
  analyze_cmd->add_option("--group", an.group)->check(CLI::IsMember({"model", "entry"}));
  analyze_cmd->add_option("--order", an.order)->check(CLI::IsMember({"datasets-first", "pooled"}));
  analyze_cmd->add_option("--method", an.method)->check(CLI::IsMember({"pearson", "spearman"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*eval_cmd) return run_eval(ev);
    if (*validate_cmd) return run_validate(validate_files, validate_mode);
    if (*split_cmd) return run_split(sp);
    if (*serve_cmd) return run_serve(config_path, listen, serve_seed);
    if (*seed_cmd) return run_seed(config_path);
    if (*analyze_cmd) return run_analyze(an);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const Failure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
