#include "nlpre/eval.hpp"

namespace nlpre::eval {

std::size_t align_spans(const std::vector<CharSpan>& gold, const std::vector<CharSpan>& system) {
  std::size_t correct = 0, gi = 0, si = 0;
  while (gi < gold.size() && si < system.size()) {
    if (system[si].start < gold[gi].start) {
      ++si;
    } else if (gold[gi].start < system[si].start) {
      ++gi;
    } else {
      correct += gold[gi].end == system[si].end;
      ++gi;
      ++si;
    }
  }
  return correct;
}

namespace {

using Words = std::vector<EvalWord>;

bool beyond_end(const Words& words, std::size_t i, std::size_t multiword_end) {
  if (i >= words.size()) return true;
  if (words[i].is_multiword_part) return words[i].span.start >= multiword_end;
  return words[i].span.end > multiword_end;
}

std::size_t extend_end(const EvalWord& word, std::size_t multiword_end) {
  if (word.is_multiword_part && word.span.end > multiword_end) return word.span.end;
  return multiword_end;
}

struct Region {
  std::size_t gold_start, system_start, gold_end, system_end;
};

// Smallest character region that starts at the current position, contains a
// multiword token, and has no multiword token (gold or system) sticking out.
Region find_multiword_region(const Words& gold, const Words& system, std::size_t gi, std::size_t si) {
  std::size_t end = 0;
  if (gold[gi].is_multiword_part) {
    end = gold[gi].span.end;
    if (!system[si].is_multiword_part && system[si].span.start < gold[gi].span.start) ++si;
  } else {
    end = system[si].span.end;
    if (!gold[gi].is_multiword_part && gold[gi].span.start < system[si].span.start) ++gi;
  }
  Region r{gi, si, gi, si};
  while (!beyond_end(gold, gi, end) || !beyond_end(system, si, end)) {
    if (gi < gold.size() && (si >= system.size() || gold[gi].span.start <= system[si].span.start)) {
      end = extend_end(gold[gi], end);
      ++gi;
    } else {
      end = extend_end(system[si], end);
      ++si;
    }
  }
  r.gold_end = gi;
  r.system_end = si;
  return r;
}

void align_region_by_lcs(const Words& gold, const Words& system, const Region& r, Alignment& out) {
  const std::size_t g_len = r.gold_end - r.gold_start;
  const std::size_t s_len = r.system_end - r.system_start;
  auto same = [&](std::size_t g, std::size_t s) {
    return gold[r.gold_start + g].folded_form == system[r.system_start + s].folded_form;
  };
  // lcs[g][s]: LCS length of gold[g..] and system[s..], with a zero border.
  std::vector<std::vector<std::size_t>> lcs(g_len + 1, std::vector<std::size_t>(s_len + 1, 0));
  for (std::size_t g = g_len; g-- > 0;) {
    for (std::size_t s = s_len; s-- > 0;) {
      if (same(g, s)) lcs[g][s] = 1 + lcs[g + 1][s + 1];
      lcs[g][s] = std::max({lcs[g][s], lcs[g + 1][s], lcs[g][s + 1]});
    }
  }
  std::size_t g = 0, s = 0;
  while (g < g_len && s < s_len) {
    if (same(g, s)) {
      out.matched_pairs.emplace_back(r.gold_start + g, r.system_start + s);
      ++g;
      ++s;
    } else if (lcs[g][s] == lcs[g + 1][s]) {
      ++g;
    } else {
      ++s;
    }
  }
}

}  // namespace

Alignment align_words(const EvalRepresentation& gold_rep, const EvalRepresentation& system_rep) {
  if (gold_rep.characters != system_rep.characters) {
    std::size_t index = 0;
    while (index < gold_rep.characters.size() && index < system_rep.characters.size() &&
           gold_rep.characters[index] == system_rep.characters[index])
      ++index;
    // Only the offset is reported: the gold text is confidential.
    throw EvalError(EvalErrorCode::MismatchedCharacters,
                    "system text differs from gold text at character " + std::to_string(index));
  }

  const auto& gold = gold_rep.words;
  const auto& system = system_rep.words;
  Alignment alignment;
  std::size_t gi = 0, si = 0;
  while (gi < gold.size() && si < system.size()) {
    if (gold[gi].is_multiword_part || system[si].is_multiword_part) {
      const auto region = find_multiword_region(gold, system, gi, si);
      if (region.system_end > region.system_start && region.gold_end > region.gold_start)
        align_region_by_lcs(gold, system, region, alignment);
      gi = region.gold_end;
      si = region.system_end;
    } else if (gold[gi].span == system[si].span) {
      alignment.matched_pairs.emplace_back(gi, si);
      ++gi;
      ++si;
    } else if (gold[gi].span.start <= system[si].span.start) {
      ++gi;
    } else {
      ++si;
    }
  }

  alignment.system_to_gold.assign(system.size(), -1);
  for (const auto& [g, s] : alignment.matched_pairs) alignment.system_to_gold[s] = static_cast<int>(g);
  return alignment;
}

}  // namespace nlpre::eval
