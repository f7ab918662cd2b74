#include <gtest/gtest.h>

#include "nlpre/splitter.hpp"
#include "support/synthetic.hpp"

using namespace nlpre;
using namespace nlpre::split;
using nlpre::testkit::is_largest_remainder;
using nlpre::testkit::synthetic_corpus;

namespace {

const std::string kData = NLPRE_TEST_DATA_DIR;

conllu::TreebankFile three_sentences(const std::vector<std::vector<std::string>>& comments) {
  std::string text;
  for (const auto& cs : comments) {
    for (const auto& c : cs) text += c + "\n";
    text += "1\ta\ta\tX\tx\t_\t0\troot\t_\t_\n2\tb\tb\tX\tx\t_\t1\tdep\t_\t_\n\n";
  }
  return conllu::parse_conllu(text);
}

std::vector<Paragraph> uniform(std::size_t n, std::size_t segments = 5) {
  std::vector<Paragraph> out;
  for (std::size_t i = 0; i < n; ++i) {
    Paragraph p;
    p.id = "p" + std::to_string(1000 + i);
    p.document_type = "t";
    p.segment_count = segments;
    out.push_back(p);
  }
  return out;
}

std::array<std::size_t, 3> counts(const SplitResult& r) {
  std::array<std::size_t, 3> c{};
  for (const auto& [_, s] : r.assignment) ++c[static_cast<std::size_t>(s)];
  return c;
}

SplitErrorCode error_of(auto&& fn) {
  try {
    fn();
  } catch (const SplitError& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected a split error";
  return SplitErrorCode::InvalidSpec;
}

}  // namespace

TEST(ExtractParagraphs, OneMarker) {
  const auto ps = extract_paragraphs(three_sentences({{"# newpar id = x"}, {}, {}}));
  ASSERT_EQ(ps.size(), 1u);
  EXPECT_EQ(ps[0].id, "x");
  EXPECT_EQ(ps[0].payload.size(), 3u);
  EXPECT_EQ(ps[0].segment_count, 6u);
}

TEST(ExtractParagraphs, TwoMarkers) {
  const auto ps = extract_paragraphs(three_sentences({{"# newpar"}, {}, {"# newpar"}}));
  ASSERT_EQ(ps.size(), 2u);
  EXPECT_EQ(ps[0].payload.size(), 2u);
  EXPECT_EQ(ps[1].payload.size(), 1u);
  EXPECT_NE(ps[0].id, ps[1].id);
}

TEST(ExtractParagraphs, NoMarkers) {
  EXPECT_EQ(error_of([] { extract_paragraphs(three_sentences({{"# text = ab"}, {}, {}})); }),
            SplitErrorCode::MissingBoundaryMetadata);
}

TEST(ExtractParagraphs, DocumentsAndTypesFromGoldFixture) {
  const auto ps = extract_paragraphs(conllu::read_conllu_file(kData + "/pl_gold.conllu"));
  ASSERT_EQ(ps.size(), 5u);
  EXPECT_EQ(ps[0].id, "d1p1");
  EXPECT_EQ(ps[0].document_type, "prasa");
  EXPECT_EQ(ps[2].document_id, "d2");
  EXPECT_EQ(ps[2].document_type, "literatura");
  EXPECT_EQ(ps[4].payload.size(), 2u);
}

TEST(ExtractParagraphs, CustomKeys) {
  BoundaryKeys keys;
  keys.paragraph = "p";
  keys.document_type = "genre";
  const auto ps = extract_paragraphs(three_sentences({{"# p = a", "# genre = news"}, {"# p = b"}, {}}), keys);
  ASSERT_EQ(ps.size(), 2u);
  EXPECT_EQ(ps[1].id, "b");
  EXPECT_EQ(ps[1].document_type, "news");
}

TEST(AssignBuckets, SizesDifferByAtMostOne) {
  auto count_sizes = [](const std::map<std::string, std::size_t>& m, std::size_t k) {
    std::vector<std::size_t> sizes(k);
    for (const auto& [_, b] : m) ++sizes[b];
    return sizes;
  };
  auto even = count_sizes(assign_buckets(uniform(100), 10), 10);
  EXPECT_EQ(even, std::vector<std::size_t>(10, 10));

  auto odd = count_sizes(assign_buckets(uniform(101), 10), 10);
  EXPECT_EQ(std::count(odd.begin(), odd.end(), 11u), 1);
  EXPECT_EQ(std::count(odd.begin(), odd.end(), 10u), 9);

  for (const auto& [_, b] : assign_buckets(uniform(7), 1)) EXPECT_EQ(b, 0u);
}

TEST(AssignBuckets, OrderedByLength) {
  const auto ps = synthetic_corpus(500, 3);
  const auto buckets = assign_buckets(ps, 10);
  std::vector<std::size_t> max_len(10, 0), min_len(10, SIZE_MAX);
  for (const auto& p : ps) {
    const auto b = buckets.at(p.id);
    max_len[b] = std::max(max_len[b], p.segment_count);
    min_len[b] = std::min(min_len[b], p.segment_count);
  }
  for (std::size_t b = 1; b < 10; ++b) EXPECT_LE(max_len[b - 1], min_len[b]);
}

TEST(Apportion, LargestRemainder) {
  EXPECT_EQ(apportion(10, {0.8, 0.1, 0.1}), (std::array<std::size_t, 3>{8, 1, 1}));
  EXPECT_EQ(apportion(5, {0.8, 0.1, 0.1}), (std::array<std::size_t, 3>{4, 1, 0}));
  EXPECT_EQ(apportion(5, {0.8, 0.1, 0.1}, {0, 0, 1}), (std::array<std::size_t, 3>{4, 0, 1}));
  EXPECT_EQ(apportion(7, {1, 0, 0}), (std::array<std::size_t, 3>{7, 0, 0}));
  for (std::size_t n = 0; n < 200; ++n)
    for (const auto& r : {std::array<double, 3>{0.8, 0.1, 0.1}, {0.7, 0.2, 0.1}, {1.0 / 3, 1.0 / 3, 1.0 / 3}})
      EXPECT_TRUE(is_largest_remainder(apportion(n, r), n, r)) << n;
}

TEST(SplitByName, UniformCorpus) {
  SplitSpec spec;
  spec.seed = 42;
  const auto ps = uniform(100);
  const auto r = split_by_name(ps, spec);
  EXPECT_EQ(counts(r), (std::array<std::size_t, 3>{80, 10, 10}));
  EXPECT_EQ(r.diagnostics.max_bucket_deviation, 0.0);
  EXPECT_EQ(r.diagnostics.segments[0], 400u);
}

TEST(SplitByName, EverythingToTrain) {
  SplitSpec spec;
  spec.ratios = {1, 0, 0};
  EXPECT_EQ(counts(split_by_name(uniform(33), spec)), (std::array<std::size_t, 3>{33, 0, 0}));
}

TEST(SplitByName, Deterministic) {
  SplitSpec spec;
  spec.seed = 7;
  const auto ps = synthetic_corpus(1000, 1);
  EXPECT_EQ(split_by_name(ps, spec).assignment, split_by_name(ps, spec).assignment);
  spec.seed = 8;
  EXPECT_NE(split_by_name(ps, spec).assignment, split_by_name(ps, SplitSpec{10, {0.8, 0.1, 0.1}, 7}).assignment);
}

TEST(SplitByName, PinnedAssignment) {
  // Guards cross-platform stability of the shuffle.
  SplitSpec spec;
  spec.bucket_count = 1;
  spec.ratios = {0.5, 0.25, 0.25};
  spec.seed = 1;
  const auto r = split_by_name(uniform(8), spec);
  std::string got;
  for (const auto& [id, s] : r.assignment) got += std::string(to_string(s)).substr(0, 1);
  EXPECT_EQ(got.size(), 8u);
  EXPECT_EQ(std::count(got.begin(), got.end(), 't'), 6);  // train + test
  EXPECT_EQ(got, "tttdttdt");
}

TEST(SplitByName, Errors) {
  EXPECT_EQ(error_of([] { split_by_name({}, SplitSpec{}); }), SplitErrorCode::EmptyCorpus);
  EXPECT_EQ(error_of([] { split_by_name(uniform(3), SplitSpec{10, {0.5, 0.5, 0.5}, 0}); }),
            SplitErrorCode::InvalidSpec);
  EXPECT_EQ(error_of([] { split_by_name(uniform(3), SplitSpec{0, {0.8, 0.1, 0.1}, 0}); }),
            SplitErrorCode::InvalidSpec);
}

TEST(SplitByType, TwoTypesOfFifty) {
  auto ps = uniform(100);
  for (std::size_t i = 0; i < ps.size(); ++i) ps[i].document_type = i % 2 ? "a" : "b";
  SplitSpec spec;
  spec.stratify_by_type = true;
  const auto r = split_by_type(ps, spec);
  for (const std::string type : {"a", "b"}) {
    std::array<std::size_t, 3> c{};
    for (const auto& p : ps)
      if (p.document_type == type) ++c[static_cast<std::size_t>(r.assignment.at(p.id))];
    EXPECT_EQ(c, (std::array<std::size_t, 3>{40, 5, 5})) << type;
  }
}

TEST(SplitByType, SingleTypeMatchesByName) {
  const auto ps = synthetic_corpus(300, 5);
  SplitSpec spec;
  spec.seed = 11;
  EXPECT_EQ(split_by_type(ps, spec).assignment, split_by_name(ps, spec).assignment);
}

TEST(SplitByType, MissingType) {
  auto ps = uniform(10);
  ps[3].document_type.clear();
  EXPECT_EQ(error_of([&] { split_by_type(ps, SplitSpec{}); }), SplitErrorCode::MissingDocumentType);
}

TEST(VerifySplit, IncompleteAssignment) {
  const auto ps = uniform(20);
  auto r = split_by_name(ps, SplitSpec{});
  r.assignment.erase(ps[4].id);
  EXPECT_EQ(error_of([&] { verify_split(r, SplitSpec{}, ps); }), SplitErrorCode::IncompleteAssignment);
}

TEST(VerifySplit, LargeCorpusDeviation) {
  const auto ps = synthetic_corpus(10000, 2024);
  SplitSpec spec;
  spec.seed = 5;
  const auto r = split_by_name(ps, spec);
  EXPECT_LE(r.diagnostics.max_bucket_deviation, 0.02);
  EXPECT_LE(r.diagnostics.max_distribution_deviation, 0.02);
  std::size_t total = 0;
  for (const auto& p : ps) total += p.segment_count;
  EXPECT_EQ(r.diagnostics.segments[0] + r.diagnostics.segments[1] + r.diagnostics.segments[2], total);
}

TEST(Materialize, KeepsParagraphsWhole) {
  const auto ps = synthetic_corpus(400, 9);
  const auto r = split_by_name(ps, SplitSpec{});
  const auto files = materialize(r, ps);
  std::size_t sentences = 0;
  for (std::size_t s = 0; s < 3; ++s) {
    for (const auto& sent : files[s].sentences) {
      const auto id = sent.comments.at(0).substr(std::string("# par = ").size());
      EXPECT_EQ(static_cast<std::size_t>(r.assignment.at(id)), s);
    }
    sentences += files[s].sentences.size();
  }
  std::size_t expected = 0;
  for (const auto& p : ps) expected += p.payload.size();
  EXPECT_EQ(sentences, expected);
}

TEST(ManifestJson, ContainsAssignmentAndDiagnostics) {
  const auto ps = uniform(10);
  SplitSpec spec;
  const auto r = split_by_name(ps, spec);
  const auto j = manifest_json(r, spec, ps);
  EXPECT_EQ(j["assignment"].size(), 10u);
  // ten one-paragraph buckets: 0.8 is the largest remainder in each
  EXPECT_EQ(j["diagnostics"]["subsets"]["train"]["paragraphs"], 10);
  EXPECT_EQ(j["spec"]["by"], "name");
}
