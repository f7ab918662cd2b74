#pragma once
// Paragraph-atomic, length-bucketed train/dev/test sampling, optionally
// stratified by document type.

#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlpre/conllu.hpp"
#include "nlpre/eval_json.hpp"

namespace nlpre::split {

enum class Subset : std::uint8_t { Train, Dev, Test };
inline constexpr std::array<Subset, 3> kSubsets{Subset::Train, Subset::Dev, Subset::Test};
std::string_view to_string(Subset s);

enum class SplitErrorCode {
  MissingBoundaryMetadata,
  DuplicateParagraphId,
  EmptyCorpus,
  MissingDocumentType,
  IncompleteAssignment,
  InvalidSpec,
};
std::string_view to_string(SplitErrorCode code);

class SplitError : public std::runtime_error {
 public:
  SplitError(SplitErrorCode code, const std::string& message);
  SplitErrorCode code() const { return code_; }

 private:
  SplitErrorCode code_;
};

struct Paragraph {
  std::string id;
  std::string document_id;
  std::string document_type;
  std::size_t segment_count = 0;  // words in payload
  std::vector<conllu::Sentence> payload;
};

// Comment keys, e.g. "# newpar id = p1", "# newdoc id = d1", "# doctype = prasa".
struct BoundaryKeys {
  std::string paragraph = "newpar";
  std::string document = "newdoc";
  std::string document_type = "doctype";
};

std::vector<Paragraph> extract_paragraphs(const conllu::TreebankFile& corpus, const BoundaryKeys& keys = {});

struct SplitSpec {
  std::size_t bucket_count = 10;
  std::array<double, 3> ratios{0.8, 0.1, 0.1};
  std::uint64_t seed = 0;
  bool stratify_by_type = false;

  void validate() const;  // throws InvalidSpec
};

struct BucketStats {
  std::string group;  // document type when stratified, empty otherwise
  std::size_t bucket = 0;
  std::array<std::size_t, 3> paragraphs{};
  std::array<double, 3> proportions{};
  double deviation = 0.0;  // max |proportion - ratio|
};

struct SplitDiagnostics {
  std::array<std::size_t, 3> paragraphs{};
  std::array<std::size_t, 3> segments{};
  std::array<std::size_t, 3> sentences{};
  std::vector<BucketStats> buckets;
  double max_bucket_deviation = 0.0;
  // Largest gap, over subsets and buckets, between the share of a subset's
  // paragraphs coming from a bucket and that bucket's share of the corpus.
  double max_distribution_deviation = 0.0;
};

struct SplitResult {
  std::map<std::string, Subset> assignment;
  SplitDiagnostics diagnostics;
};

// Contiguous quantile buckets after sorting by (segment_count, id).
std::map<std::string, std::size_t> assign_buckets(const std::vector<Paragraph>& paragraphs, std::size_t k);

// Seats for n items under `ratios`: floors first, leftover seats by largest
// remainder; equal remainders go to the higher `priority`, then subset order.
std::array<std::size_t, 3> apportion(std::size_t n, const std::array<double, 3>& ratios,
                                     const std::array<double, 3>& priority = {});

SplitResult split_by_name(const std::vector<Paragraph>& paragraphs, const SplitSpec& spec);
SplitResult split_by_type(const std::vector<Paragraph>& paragraphs, const SplitSpec& spec);
// Dispatches on spec.stratify_by_type.
SplitResult split(const std::vector<Paragraph>& paragraphs, const SplitSpec& spec);

SplitDiagnostics verify_split(const SplitResult& result, const SplitSpec& spec,
                              const std::vector<Paragraph>& paragraphs);

// Sentences of each subset in corpus order.
std::array<conllu::TreebankFile, 3> materialize(const SplitResult& result, const std::vector<Paragraph>& paragraphs);

Json manifest_json(const SplitResult& result, const SplitSpec& spec, const std::vector<Paragraph>& paragraphs);

}  // namespace nlpre::split
