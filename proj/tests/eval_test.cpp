#include <gtest/gtest.h>

#include "nlpre/conllu.hpp"
#include "nlpre/eval.hpp"
#include "nlpre/eval_json.hpp"

using namespace nlpre;
using namespace nlpre::eval;

namespace {

const std::string kData = NLPRE_TEST_DATA_DIR;

// Builds a one-column-per-word sentence: "form/upos/head/deprel".
std::string line(int id, const std::string& form, const std::string& upos = "X", int head = 0,
                 const std::string& deprel = "root", const std::string& lemma = "_",
                 const std::string& feats = "_") {
  return std::to_string(id) + "\t" + form + "\t" + lemma + "\t" + upos + "\tx\t" + feats + "\t" +
         std::to_string(head) + "\t" + deprel + "\t_\t_\n";
}

conllu::TreebankFile words(std::initializer_list<const char*> forms) {
  std::string text;
  int id = 1;
  for (const char* f : forms) text += line(id, f, "X", id == 1 ? 0 : 1, id == 1 ? "root" : "dep"), ++id;
  return conllu::parse_conllu(text + "\n");
}

const std::string kSpaliMwt =
    "1-3\tspalibyśmy\t_\t_\t_\t_\t_\t_\t_\t_\n"
    "1\tspali\tspać\tVERB\tpraet\t_\t0\troot\t_\t_\n"
    "2\tby\tby\tAUX\tqub\t_\t1\taux\t_\t_\n"
    "3\tśmy\tbyć\tAUX\taglt\t_\t1\taux\t_\t_\n\n";

}  // namespace

TEST(BuildRepresentation, PlainWords) {
  const auto rep = build_representation(words({"a", "b"}));
  EXPECT_EQ(rep.characters, U"ab");
  EXPECT_EQ(rep.token_spans, (std::vector<CharSpan>{{0, 1}, {1, 2}}));
  EXPECT_EQ(rep.sentence_spans, (std::vector<CharSpan>{{0, 2}}));
}

TEST(BuildRepresentation, MultiwordWordsShareTheTokenSpan) {
  const auto rep = build_representation(conllu::parse_conllu(kSpaliMwt));
  ASSERT_EQ(rep.token_spans.size(), 1u);
  EXPECT_EQ(rep.token_spans[0], (CharSpan{0, 10}));
  ASSERT_EQ(rep.words.size(), 3u);
  for (const auto& w : rep.words) {
    EXPECT_EQ(w.span, (CharSpan{0, 10}));
    EXPECT_TRUE(w.is_multiword_part);
  }
}

TEST(BuildRepresentation, SentenceSpansAndSpaceRemoval) {
  const auto rep = build_representation(conllu::parse_conllu(line(1, "a") + "\n" + line(1, "b c") + "\n"));
  EXPECT_EQ(rep.characters, U"abc");
  EXPECT_EQ(rep.sentence_spans, (std::vector<CharSpan>{{0, 1}, {1, 3}}));
}

TEST(BuildRepresentation, NoWords) {
  conllu::TreebankFile empty;
  try {
    build_representation(empty);
    FAIL();
  } catch (const EvalError& e) {
    EXPECT_EQ(e.code(), EvalErrorCode::EmptyRepresentation);
  }
}

TEST(AlignSpans, TwoPointerSweep) {
  const std::vector<CharSpan> a{{0, 1}, {1, 3}};
  EXPECT_EQ(align_spans(a, a), 2u);
  EXPECT_EQ(align_spans(a, {{0, 2}, {2, 3}}), 0u);
  EXPECT_EQ(align_spans({{0, 2}, {2, 3}}, {{0, 2}, {2, 4}}), 1u);
}

TEST(AlignWords, MultiwordAgainstPlainWords) {
  const auto gold = build_representation(conllu::parse_conllu(kSpaliMwt));
  const auto plain = build_representation(words({"spali", "by", "śmy"}));
  const auto a = align_words(gold, plain);
  using P = std::pair<std::size_t, std::size_t>;
  EXPECT_EQ(a.matched_pairs, (std::vector<P>{{0, 0}, {1, 1}, {2, 2}}));

  const auto single = build_representation(words({"spalibyśmy"}));
  EXPECT_TRUE(align_words(gold, single).matched_pairs.empty());
}

TEST(AlignWords, CaseFoldedLcsInsideMultiwordRegion) {
  const auto gold = build_representation(conllu::parse_conllu(kSpaliMwt));
  std::string upper = kSpaliMwt;
  upper.replace(upper.find("\tśmy\t"), 7, "\tŚMY\t");
  const auto a = align_words(gold, build_representation(conllu::parse_conllu(upper)));
  EXPECT_EQ(a.matched_pairs.size(), 3u);
}

TEST(AlignWords, ReferenceScriptAlignmentCases) {
  // "abc a b c" style tokens: first item is the token, the rest its words.
  auto build = [](std::initializer_list<std::vector<std::string>> tokens) {
    std::string text;
    int n = 0;
    for (const auto& t : tokens) {
      if (t.size() == 1) {
        ++n;
        text += line(n, t[0], "X", n > 1 ? 1 : 0, n > 1 ? "dep" : "root");
        continue;
      }
      text += std::to_string(n + 1) + "-" + std::to_string(n + t.size() - 1) + "\t" + t[0] +
              "\t_\t_\t_\t_\t_\t_\t_\t_\n";
      for (std::size_t i = 1; i < t.size(); ++i) {
        ++n;
        text += line(n, t[i], "X", n > 1 ? 1 : 0, n > 1 ? "dep" : "root");
      }
    }
    return build_representation(conllu::parse_conllu(text + "\n"));
  };
  auto words_correct = [](const EvalRepresentation& g, const EvalRepresentation& s) {
    return align_words(g, s).matched_pairs.size();
  };
  EXPECT_EQ(words_correct(build({{"abc", "a", "b", "c"}}), build({{"a"}, {"b"}, {"c"}})), 3u);
  EXPECT_EQ(words_correct(build({{"abcd", "a", "b", "c", "d"}}), build({{"ab", "a", "b"}, {"cd", "c", "d"}})), 4u);
  EXPECT_EQ(words_correct(build({{"abc", "a", "b", "c"}, {"de", "d", "e"}}),
                          build({{"a"}, {"bcd", "b", "c", "d"}, {"e"}})),
            5u);
  EXPECT_EQ(words_correct(build({{"abcd"}}), build({{"a"}, {"b"}, {"c"}, {"d"}})), 0u);
  EXPECT_EQ(words_correct(build({{"a"}, {"bc"}, {"d"}}), build({{"a"}, {"b"}, {"c"}, {"d"}})), 2u);
  EXPECT_EQ(words_correct(build({{"a"}, {"bc", "b", "c"}, {"d"}}), build({{"a"}, {"b"}, {"cd"}})), 2u);
  EXPECT_EQ(words_correct(build({{"abc", "a", "BX", "c"}, {"def", "d", "EX", "f"}}),
                          build({{"ab", "a", "b"}, {"cd", "c", "d"}, {"ef", "e", "f"}})),
            4u);
  EXPECT_EQ(words_correct(build({{"ab", "a", "b"}, {"cd", "bc", "d"}}), build({{"a"}, {"bc"}, {"d"}})), 2u);
  EXPECT_EQ(words_correct(build({{"a"}, {"bc", "b", "c"}, {"d"}}), build({{"ab", "AX", "BX"}, {"cd", "CX", "a"}})),
            1u);
}

TEST(AlignWords, DifferentTextIsRejectedWithoutLeakingIt) {
  const auto gold = build_representation(words({"tajne"}));
  const auto system = build_representation(words({"tajnX"}));
  try {
    align_words(gold, system);
    FAIL();
  } catch (const EvalError& e) {
    EXPECT_EQ(e.code(), EvalErrorCode::MismatchedCharacters);
    EXPECT_EQ(std::string(e.what()).find("tajne"), std::string::npos);
  }
}

TEST(ScoreMetric, UposDirectCount) {
  const auto gold = conllu::parse_conllu(line(1, "a", "NOUN") + line(2, "b", "VERB", 1, "dep") +
                                         line(3, "c", "ADJ", 1, "dep") + line(4, "d", "ADV", 1, "dep") + "\n");
  const auto sys = conllu::parse_conllu(line(1, "a", "NOUN") + line(2, "b", "VERB", 1, "dep") +
                                        line(3, "c", "ADJ", 1, "dep") + line(4, "d", "X", 1, "dep") + "\n");
  const auto r = evaluate(gold, sys);
  const auto& upos = r.scores.at(MetricId::UPOS);
  EXPECT_DOUBLE_EQ(upos.f1, 0.75);
  EXPECT_DOUBLE_EQ(*upos.aligned_accuracy, 0.75);
  EXPECT_EQ(upos.counts->correct, 3u);
}

TEST(ScoreMetric, TokensVersusSentences) {
  const auto r = evaluate(words({"a", "b"}), words({"ab"}));
  EXPECT_EQ(r.scores.at(MetricId::Tokens).f1, 0.0);
  EXPECT_EQ(r.scores.at(MetricId::Sentences).f1, 1.0);
  EXPECT_FALSE(r.scores.at(MetricId::Tokens).aligned_accuracy);
}

TEST(ScoreMetric, GoldLemmaUnderscoreIsWildcard) {
  const auto gold = conllu::parse_conllu(line(1, "a", "X", 0, "root", "_") + line(2, "b", "X", 1, "obj", "b") + "\n");
  const auto sys = conllu::parse_conllu(line(1, "a", "X", 0, "root", "zz") + line(2, "b", "X", 1, "obj", "c") + "\n");
  const auto r = evaluate(gold, sys);
  EXPECT_DOUBLE_EQ(r.scores.at(MetricId::Lemmas).f1, 0.5);
  EXPECT_DOUBLE_EQ(r.scores.at(MetricId::BLEX).f1, 0.5);
}

TEST(ScoreMetric, HeadOnUnalignedWordIsWrong) {
  // gold: a b c, system retokenizes "bc"; word a depends on the lost "b".
  const auto gold = conllu::parse_conllu(line(1, "a", "X", 2, "obj") + line(2, "b", "X", 0, "root") +
                                         line(3, "c", "X", 2, "obj") + "\n");
  const auto sys = conllu::parse_conllu(line(1, "a", "X", 2, "obj") + line(2, "bc", "X", 0, "root") + "\n");
  const auto r = evaluate(gold, sys);
  EXPECT_EQ(r.scores.at(MetricId::UAS).counts->correct, 0u);
  EXPECT_EQ(*r.scores.at(MetricId::UAS).counts->aligned_total, 1u);
}

TEST(ScoreMetric, DeprelSubtypesAreIgnored) {
  const auto gold = conllu::parse_conllu(line(1, "a", "X", 0, "root") + line(2, "b", "X", 1, "obl:arg") + "\n");
  const auto sys = conllu::parse_conllu(line(1, "a", "X", 0, "root") + line(2, "b", "X", 1, "obl") + "\n");
  EXPECT_DOUBLE_EQ(evaluate(gold, sys).scores.at(MetricId::LAS).f1, 1.0);
}

TEST(ScoreMetric, ContentWordFilterForClas) {
  const auto gold = conllu::parse_conllu(line(1, "w", "ADP", 2, "case") + line(2, "domu", "NOUN", 0, "root") + "\n");
  const auto sys = conllu::parse_conllu(line(1, "w", "ADP", 2, "case") + line(2, "domu", "NOUN", 0, "root") + "\n");
  const auto& clas = evaluate(gold, sys).scores.at(MetricId::CLAS);
  EXPECT_EQ(clas.counts->gold_total, 1u);
  EXPECT_EQ(clas.counts->system_total, 1u);
}

TEST(ScoreMetric, MlasChecksFunctionalChildren) {
  const auto gold = conllu::parse_conllu(line(1, "w", "ADP", 2, "case") + line(2, "domu", "NOUN", 0, "root") + "\n");
  const auto sys = conllu::parse_conllu(line(1, "w", "PART", 2, "case") + line(2, "domu", "NOUN", 0, "root") + "\n");
  const auto r = evaluate(gold, sys);
  EXPECT_DOUBLE_EQ(r.scores.at(MetricId::CLAS).f1, 1.0);
  EXPECT_DOUBLE_EQ(r.scores.at(MetricId::MLAS).f1, 0.0);
}

TEST(ScoreMetric, UniversalFeatureFilter) {
  const auto gold = conllu::parse_conllu(line(1, "a", "X", 0, "root", "_", "Case=Nom|Variant=Short") + "\n");
  const auto sys = conllu::parse_conllu(line(1, "a", "X", 0, "root", "_", "Variant=Long|Case=Nom") + "\n");
  EXPECT_DOUBLE_EQ(evaluate(gold, sys).scores.at(MetricId::UFeats).f1, 1.0);
  EvalOptions all;
  all.feats = FeatsComparison::All;
  EXPECT_DOUBLE_EQ(evaluate(gold, sys, all).scores.at(MetricId::UFeats).f1, 0.0);

  const auto reordered = conllu::parse_conllu(line(1, "a", "X", 0, "root", "_", "Variant=Short|case=Nom") + "\n");
  const auto canonical = conllu::parse_conllu(line(1, "a", "X", 0, "root", "_", "case=Nom|Variant=Short") + "\n");
  EXPECT_DOUBLE_EQ(evaluate(canonical, reordered, all).scores.at(MetricId::UFeats).f1, 1.0);
}

TEST(ScoreMetric, UnsupportedMetric) {
  const auto g = build_representation(words({"a"}));
  const auto a = align_words(g, g);
  try {
    score_metric(MetricId::LAS, g, g, a, MetricSet{MetricId::UPOS});
    FAIL();
  } catch (const EvalError& e) {
    EXPECT_EQ(e.code(), EvalErrorCode::UnsupportedMetric);
  }
  EXPECT_NO_THROW(score_metric(MetricId::Tokens, g, g, a, MetricSet{MetricId::UPOS}));
}

TEST(Evaluate, IdentityOnGoldFixture) {
  const auto gold = conllu::read_conllu_file(kData + "/pl_gold.conllu");
  const auto r = evaluate(gold, gold);
  ASSERT_EQ(r.scores.size(), 13u);
  for (const auto& [id, s] : r.scores) {
    EXPECT_EQ(format_percent(s.f1), "100.00") << metric_name(id);
    if (s.aligned_accuracy) {
      EXPECT_EQ(*s.aligned_accuracy, 1.0);
    }
  }
  EXPECT_EQ(r.average_f1, 1.0);
}

TEST(Evaluate, TaskSubset) {
  const auto g = words({"a", "b"});
  EvalOptions o;
  o.tasks = {MetricId::UPOS, MetricId::Lemmas};
  const auto r = evaluate(g, g, o);
  std::vector<MetricId> got;
  for (const auto& [id, _] : r.scores) got.push_back(id);
  EXPECT_EQ(got, (std::vector<MetricId>{MetricId::Tokens, MetricId::Sentences, MetricId::Words, MetricId::UPOS,
                                        MetricId::Lemmas}));
  EXPECT_EQ(r.average_metrics.size(), 8u);
  EXPECT_EQ(r.average_f1, 1.0);
}

TEST(Evaluate, CommentsAndMiscDoNotMatter) {
  const auto gold = conllu::read_conllu_file(kData + "/pl_gold.conllu");
  auto edited = gold;
  for (auto& s : edited.sentences) {
    s.comments = {"# edited"};
    for (auto& t : s.tokens)
      if (auto* w = std::get_if<conllu::Word>(&t)) w->misc = "Note=x";
  }
  const auto sys = conllu::read_conllu_file(kData + "/oracle/random_1.conllu");
  const auto a = evaluate(gold, sys), b = evaluate(edited, sys);
  for (auto id : kAllMetrics) EXPECT_EQ(a.scores.at(id).f1, b.scores.at(id).f1);
}

TEST(AverageReports, MeanOfF1) {
  auto make = [](double tokens_f1) {
    EvaluationReport r;
    r.tasks_evaluated = MetricSet::segmentation();
    r.average_metrics = {MetricId::Tokens};
    MetricScore s;
    s.f1 = tokens_f1;
    r.scores[MetricId::Tokens] = s;
    r.recompute_averages();
    return r;
  };
  const auto one = average_reports({make(0.9975)});
  EXPECT_DOUBLE_EQ(one.scores.at(MetricId::Tokens).f1, 0.9975);
  const auto avg = average_reports({make(0.9975), make(0.9973)});
  EXPECT_EQ(format_percent(avg.scores.at(MetricId::Tokens).f1), "99.74");

  auto other = make(0.5);
  other.tasks_evaluated.insert(MetricId::UPOS);
  try {
    average_reports({make(0.9), other});
    FAIL();
  } catch (const EvalError& e) {
    EXPECT_EQ(e.code(), EvalErrorCode::InconsistentTaskSets);
  }
}

TEST(FormatPercent, HalfAwayFromZero) {
  EXPECT_EQ(format_percent(0.96665), "96.67");
  EXPECT_EQ(format_percent(0.12345), "12.35");
  EXPECT_EQ(format_percent(1.0), "100.00");
  EXPECT_EQ(format_percent(0.0), "0.00");
  EXPECT_DOUBLE_EQ(round_percent(0.96665), 96.67);
}

TEST(RenderTable, MirrorsReferenceLayout) {
  const auto g = words({"a"});
  const auto table = render_table(evaluate(g, g));
  EXPECT_EQ(table.substr(0, table.find('\n')), "Metric     | Precision |    Recall |  F1 Score | AligndAcc");
  EXPECT_NE(table.find("Tokens     |    100.00 |    100.00 |    100.00 |\n"), std::string::npos);
  EXPECT_NE(table.find("UPOS       |    100.00 |    100.00 |    100.00 |    100.00\n"), std::string::npos);
}

TEST(MetricNames, ParseAndList) {
  EXPECT_EQ(parse_metric("ufeats"), MetricId::UFeats);
  EXPECT_FALSE(parse_metric("ELAS"));
  EXPECT_EQ(parse_metric_list("UPOS, Lemmas").size(), 2u);
  EXPECT_THROW(parse_metric_list("UPOS,Bogus"), std::invalid_argument);
}

TEST(ReportJson, RoundTrip) {
  const auto gold = conllu::read_conllu_file(kData + "/pl_gold.conllu");
  const auto sys = conllu::read_conllu_file(kData + "/oracle/chaos.conllu");
  const auto r = evaluate(gold, sys);
  const auto j = to_json(r);
  EXPECT_EQ(j["metrics"].size(), 13u);
  EXPECT_TRUE(j["metrics"]["Words"]["aligned_accuracy"].is_null());
  const auto back = report_from_json(j);
  EXPECT_EQ(back.tasks_evaluated, r.tasks_evaluated);
  for (auto id : kAllMetrics) {
    EXPECT_EQ(back.scores.at(id).f1, r.scores.at(id).f1);
    EXPECT_EQ(back.scores.at(id).counts, r.scores.at(id).counts);
  }
  EXPECT_DOUBLE_EQ(back.average_f1, r.average_f1);
}
