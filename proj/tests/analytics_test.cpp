#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "nlpre/analytics.hpp"
#include "support/seed_vectors.hpp"

using namespace nlpre;
using namespace nlpre::analytics;
using eval::MetricId;

TEST(Pearson, TextbookOracleOnSeedVectors) {
  const auto entries = testkit::seed_entries(NLPRE_SEED_FILE);
  ASSERT_EQ(entries.size(), 17u);
  for (const auto& a : entries)
    for (const auto& b : entries) {
      const auto x = testkit::tagging_vector(a), y = testkit::tagging_vector(b);
      EXPECT_NEAR(pearson(x, y), testkit::textbook_pearson(x, y), 1e-9);
      EXPECT_NEAR(spearman(x, y), testkit::textbook_spearman(x, y), 1e-9);
    }
}

TEST(Pearson, KnownValues) {
  EXPECT_NEAR(pearson({1, 2, 3}, {2, 4, 6}), 1.0, 1e-15);
  EXPECT_NEAR(pearson({1, 2, 3}, {3, 2, 1}), -1.0, 1e-15);
  EXPECT_NEAR(pearson({1, 2, 3, 4}, {1, 3, 2, 4}), 0.8, 1e-12);
}

TEST(Pearson, Errors) {
  auto code = [](auto f) {
    try {
      f();
    } catch (const AnalyticsError& e) {
      return e.code();
    }
    ADD_FAILURE() << "no error";
    return AnalyticsErrorCode::NoEntries;
  };
  EXPECT_EQ(code([] { pearson({1, 1, 1}, {1, 2, 3}); }), AnalyticsErrorCode::ZeroVariance);
  EXPECT_EQ(code([] { pearson({1, 2}, {1, 2, 3}); }), AnalyticsErrorCode::LengthMismatch);
  EXPECT_EQ(code([] { pearson({1}, {1}); }), AnalyticsErrorCode::InsufficientData);
  EXPECT_EQ(code([] { spearman({5, 5, 5}, {1, 2, 3}); }), AnalyticsErrorCode::ZeroVariance);
}

TEST(Spearman, TiesUseAverageRanks) {
  EXPECT_EQ(fractional_ranks({10, 20, 20, 5}), (std::vector<double>{2, 3.5, 3.5, 1}));
  const std::vector<double> x{1, 2, 2, 3, 4}, y{2, 1, 4, 3, 5};
  EXPECT_NEAR(spearman(x, y), testkit::textbook_spearman(x, y), 1e-12);
  // Monotone transforms do not change it.
  EXPECT_NEAR(spearman({1, 2, 3, 4}, {1, 8, 27, 64}), 1.0, 1e-15);
}

TEST(CorrelationMatrix, SymmetricUnitDiagonal) {
  const auto vectors = score_vectors(testkit::seed_entries(NLPRE_SEED_FILE), false);
  const auto m = correlation_matrix(vectors);
  ASSERT_EQ(m.labels.size(), vectors.size());
  for (std::size_t i = 0; i < m.labels.size(); ++i)
    for (std::size_t j = 0; j < m.labels.size(); ++j) {
      ASSERT_TRUE(m.pearson[i][j] && m.spearman[i][j]);
      EXPECT_DOUBLE_EQ(*m.pearson[i][j], *m.pearson[j][i]);
      EXPECT_DOUBLE_EQ(*m.spearman[i][j], *m.spearman[j][i]);
      if (i == j) {
        EXPECT_DOUBLE_EQ(*m.pearson[i][j], 1.0);
        EXPECT_DOUBLE_EQ(*m.spearman[i][j], 1.0);
      }
    }
}

// Structure only: a model's vectors on two tagsets correlate strongly, and
// more strongly than the typical pair of different models.
TEST(CorrelationMatrix, SameModelAcrossTagsetsIsHigh) {
  const auto vectors = score_vectors(testkit::seed_entries(NLPRE_SEED_FILE), false);
  const auto m = correlation_matrix(vectors);
  std::vector<double> same, other;
  for (std::size_t i = 0; i < vectors.size(); ++i)
    for (std::size_t j = i + 1; j < vectors.size(); ++j)
      (vectors[i].key.model == vectors[j].key.model ? same : other).push_back(*m.pearson[i][j]);
  ASSERT_EQ(same.size(), 5u);  // concraft exists for one tagset only
  const double other_median = quantile(other, 0.5);
  for (double r : same) {
    EXPECT_GT(r, 0.9);
    EXPECT_GT(r, other_median);
  }
}

TEST(CorrelationMatrix, ConstantVectorGivesUndefinedCells) {
  ScoreVector a{{"a", "t", {}}, {MetricId::UPOS, MetricId::XPOS}, {0.5, 0.5}};
  ScoreVector b{{"b", "t", {}}, {MetricId::UPOS, MetricId::XPOS}, {0.4, 0.6}};
  ScoreVector c{{"c", "t", {}}, {MetricId::UPOS, MetricId::XPOS}, {0.1, 0.9}};
  const auto m = correlation_matrix({a, b, c});
  EXPECT_FALSE(m.pearson[0][1]);
  EXPECT_FALSE(m.pearson[0][0]);
  EXPECT_NEAR(*m.pearson[1][2], 1.0, 1e-12);
  EXPECT_NE(correlation_csv(m, false).find("undefined"), std::string::npos);
  EXPECT_EQ(to_json(m)["pearson"][0][1], "undefined");
  EXPECT_THROW(correlation_matrix({a}), AnalyticsError);
}

TEST(ScoreVectors, GroupingAndAveragingOrder) {
  std::vector<ScoredEntry> entries{
      {"m", "e1", "t", {}, {{"d1", {{MetricId::UPOS, 0.9}}}, {"d2", {{MetricId::UPOS, 0.7}}}}},
      {"m", "e2", "t", {}, {{"d1", {{MetricId::UPOS, 0.6}}}}},
  };
  VectorOptions opts;
  opts.metrics = {MetricId::UPOS};
  opts.datasets = {"d1", "d2"};
  // e2 lacks d2, so only d1 can be requested for both.
  EXPECT_THROW(score_vectors(entries, false, opts), AnalyticsError);
  entries[1].datasets["d2"] = {{MetricId::UPOS, 0.4}};
  entries[1].datasets["d3"] = {{MetricId::UPOS, 0.0}};
  const auto by_model = score_vectors(entries, false, opts);
  ASSERT_EQ(by_model.size(), 1u);
  EXPECT_NEAR(by_model[0].values[0], (0.8 + 0.5) / 2, 1e-12);
  const auto per_entry = score_vectors(entries, true, opts);
  ASSERT_EQ(per_entry.size(), 2u);
  EXPECT_EQ(per_entry[0].key.label(), "m+e1@t");
  EXPECT_NEAR(per_entry[1].values[0], 0.5, 1e-12);

  // Pooled differs from datasets-first only when entries cover unequal datasets.
  opts.datasets = {"d1", "d2", "d3"};
  entries[0].datasets["d3"] = {{MetricId::UPOS, 0.2}};
  opts.order = AveragingOrder::Pooled;
  EXPECT_NEAR(score_vectors(entries, false, opts)[0].values[0], (0.9 + 0.7 + 0.2 + 0.6 + 0.4 + 0.0) / 6, 1e-12);
}

TEST(ScoreVectors, SummaryRowByDefault) {
  std::vector<ScoredEntry> entries{{"m", "", "t", {{MetricId::UPOS, 0.9}}, {}}};
  VectorOptions opts;
  opts.metrics = {MetricId::UPOS};
  EXPECT_NEAR(score_vectors(entries, false, opts)[0].values[0], 0.9, 1e-15);
  opts.metrics = {MetricId::LAS};
  EXPECT_THROW(score_vectors(entries, false, opts), AnalyticsError);
  EXPECT_TRUE(score_vectors({}, false, opts).empty());
}

TEST(Dispersion, LinearInterpolationQuantiles) {
  EXPECT_DOUBLE_EQ(quantile({4, 1, 3, 2}, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile({1, 2, 3, 4, 5}, 0.25), 2.0);
  EXPECT_DOUBLE_EQ(quantile({1, 2, 3, 4}, 0.25), 1.75);
  EXPECT_DOUBLE_EQ(quantile({7}, 0.75), 7.0);
  ScoreVector v{{"m", "t", {}}, {MetricId::UPOS, MetricId::XPOS, MetricId::Lemmas}, {0.9, 0.5, 0.7}};
  const auto rows = dispersion_summary({v});
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].label, "m@t");
  EXPECT_DOUBLE_EQ(rows[0].min, 0.5);
  EXPECT_DOUBLE_EQ(rows[0].q1, 0.6);
  EXPECT_DOUBLE_EQ(rows[0].median, 0.7);
  EXPECT_DOUBLE_EQ(rows[0].q3, 0.8);
  EXPECT_DOUBLE_EQ(rows[0].max, 0.9);
  EXPECT_EQ(dispersion_csv(rows), "label,min,q1,median,q3,max\nm@t,0.500000,0.600000,0.700000,0.800000,0.900000\n");
}
