#include "nlpre/eval.hpp"

namespace nlpre::eval {

MetricScore MetricScore::from_counts(const MetricCounts& c) {
  MetricScore s;
  s.counts = c;
  const auto correct = static_cast<double>(c.correct);
  s.precision = c.system_total ? correct / static_cast<double>(c.system_total) : 0.0;
  s.recall = c.gold_total ? correct / static_cast<double>(c.gold_total) : 0.0;
  s.f1 = (c.system_total + c.gold_total) ? 2.0 * correct / static_cast<double>(c.system_total + c.gold_total) : 0.0;
  if (c.aligned_total)
    s.aligned_accuracy = *c.aligned_total ? correct / static_cast<double>(*c.aligned_total) : 0.0;
  return s;
}

namespace {

// Head of a word expressed as a gold word index, so gold and system heads are
// directly comparable.
constexpr int kHeadRoot = -1;
constexpr int kHeadNotAligned = -2;
constexpr int kHeadGoldMissing = -3;

int gold_side_head(const EvalWord& w) {
  if (w.head == kRootHead) return kHeadRoot;
  if (w.head == kMissingHead) return kHeadGoldMissing;
  return w.head;
}

int system_side_head(const EvalWord& w, const Alignment& a) {
  if (w.head == kRootHead) return kHeadRoot;
  if (w.head == kMissingHead) return kHeadNotAligned;
  const int g = a.system_to_gold[static_cast<std::size_t>(w.head)];
  return g < 0 ? kHeadNotAligned : g;
}

int system_side_index(std::size_t s, const Alignment& a) {
  const int g = a.system_to_gold[s];
  return g < 0 ? kHeadNotAligned : g;
}

bool lemma_matches(const EvalWord& g, const EvalWord& s) { return g.lemma == "_" || g.lemma == s.lemma; }

bool attachment_matches(const EvalWord& g, const EvalWord& s, const Alignment& a) {
  return gold_side_head(g) == system_side_head(s, a);
}

bool labeled_matches(const EvalWord& g, const EvalWord& s, const Alignment& a) {
  return attachment_matches(g, s, a) && g.deprel == s.deprel;
}

bool functional_children_match(const EvalRepresentation& gold, std::size_t gi, const EvalRepresentation& system,
                               std::size_t si, const Alignment& a) {
  const auto& gc = gold.words[gi].functional_children;
  const auto& sc = system.words[si].functional_children;
  if (gc.size() != sc.size()) return false;
  for (std::size_t k = 0; k < gc.size(); ++k) {
    const auto& g = gold.words[gc[k]];
    const auto& s = system.words[sc[k]];
    if (static_cast<int>(gc[k]) != system_side_index(sc[k], a) || g.deprel != s.deprel || g.upos != s.upos ||
        g.feats != s.feats)
      return false;
  }
  return true;
}

template <class Filter, class Key>
MetricScore alignment_score(const EvalRepresentation& gold, const EvalRepresentation& system, const Alignment& a,
                            Filter&& filter, Key&& key) {
  MetricCounts c;
  for (const auto& w : gold.words) c.gold_total += filter(w);
  for (const auto& w : system.words) c.system_total += filter(w);
  std::size_t aligned = 0;
  for (const auto& [g, s] : a.matched_pairs) {
    if (!filter(gold.words[g])) continue;
    ++aligned;
    c.correct += key(g, s);
  }
  c.aligned_total = aligned;
  return MetricScore::from_counts(c);
}

}  // namespace

MetricScore score_metric(MetricId metric, const EvalRepresentation& gold, const EvalRepresentation& system,
                         const Alignment& a, const MetricSet& configured) {
  if (!is_segmentation_metric(metric) && !configured.contains(metric))
    throw EvalError(EvalErrorCode::UnsupportedMetric,
                    std::string(metric_name(metric)) + " is not among the configured tasks");

  const auto& gw = gold.words;
  const auto& sw = system.words;
  auto any = [](const EvalWord&) { return true; };
  auto content = [](const EvalWord& w) { return w.is_content; };

  switch (metric) {
    case MetricId::Tokens:
      return MetricScore::from_counts(
          {align_spans(gold.token_spans, system.token_spans), gold.token_spans.size(), system.token_spans.size(), {}});
    case MetricId::Sentences:
      return MetricScore::from_counts({align_spans(gold.sentence_spans, system.sentence_spans),
                                       gold.sentence_spans.size(), system.sentence_spans.size(), {}});
    case MetricId::Words:
      return MetricScore::from_counts({a.matched_pairs.size(), gw.size(), sw.size(), {}});
    case MetricId::UPOS:
      return alignment_score(gold, system, a, any, [&](auto g, auto s) { return gw[g].upos == sw[s].upos; });
    case MetricId::XPOS:
      return alignment_score(gold, system, a, any, [&](auto g, auto s) { return gw[g].xpos == sw[s].xpos; });
    case MetricId::UFeats:
      return alignment_score(gold, system, a, any, [&](auto g, auto s) { return gw[g].feats == sw[s].feats; });
    case MetricId::AllTags:
      return alignment_score(gold, system, a, any, [&](auto g, auto s) {
        return gw[g].upos == sw[s].upos && gw[g].xpos == sw[s].xpos && gw[g].feats == sw[s].feats;
      });
    case MetricId::Lemmas:
      return alignment_score(gold, system, a, any, [&](auto g, auto s) { return lemma_matches(gw[g], sw[s]); });
    case MetricId::UAS:
      return alignment_score(gold, system, a, any,
                             [&](auto g, auto s) { return attachment_matches(gw[g], sw[s], a); });
    case MetricId::LAS:
      return alignment_score(gold, system, a, any, [&](auto g, auto s) { return labeled_matches(gw[g], sw[s], a); });
    case MetricId::CLAS:
      return alignment_score(gold, system, a, content,
                             [&](auto g, auto s) { return labeled_matches(gw[g], sw[s], a); });
    case MetricId::MLAS:
      return alignment_score(gold, system, a, content, [&](auto g, auto s) {
        return labeled_matches(gw[g], sw[s], a) && gw[g].upos == sw[s].upos && gw[g].feats == sw[s].feats &&
               functional_children_match(gold, g, system, s, a);
      });
    case MetricId::BLEX:
      return alignment_score(gold, system, a, content, [&](auto g, auto s) {
        return labeled_matches(gw[g], sw[s], a) && lemma_matches(gw[g], sw[s]);
      });
  }
  throw EvalError(EvalErrorCode::UnsupportedMetric, "unknown metric");
}

}  // namespace nlpre::eval
