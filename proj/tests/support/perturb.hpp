#pragma once
// Random system outputs derived from a gold file. Every operation keeps the
// character stream intact, so the result is always evaluable against gold.
//
// Families: re-tokenization (split/merge a word), sentence merges, multiword
// collapse, and tag/lemma/head corruption. Deprel corruption only touches the
// subtype; relabelling the universal part can legitimately push F1 above
// aligned accuracy for CLAS/MLAS/BLEX.

#include <functional>
#include <random>
#include <string>
#include <variant>

#include "nlpre/conllu.hpp"

namespace nlpre::testkit {

namespace detail {

inline void remap_ids(conllu::Sentence& s, const std::function<int(int)>& f) {
  for (auto& t : s.tokens) {
    if (auto* w = std::get_if<conllu::Word>(&t)) {
      w->id = f(w->id);
      if (w->head && *w->head > 0) w->head = f(*w->head);
    } else if (auto* m = std::get_if<conllu::MultiwordToken>(&t)) {
      m->first = f(m->first);
      m->last = f(m->last);
    }
  }
}

// Index into tokens of the word with this id, or -1.
inline int word_at(const conllu::Sentence& s, int id) {
  for (std::size_t i = 0; i < s.tokens.size(); ++i)
    if (const auto* w = std::get_if<conllu::Word>(&s.tokens[i]); w && w->id == id) return static_cast<int>(i);
  return -1;
}

inline bool inside_mwt(const conllu::Sentence& s, int id) {
  for (const auto& t : s.tokens)
    if (const auto* m = std::get_if<conllu::MultiwordToken>(&t); m && m->first <= id && id <= m->last) return true;
  return false;
}

// Byte offsets of UTF-8 code point starts.
inline std::vector<std::size_t> code_points(const std::string& s) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < s.size(); ++i)
    if ((static_cast<unsigned char>(s[i]) & 0xC0) != 0x80) out.push_back(i);
  return out;
}

}  // namespace detail

// Splits word `id` into two words at a code point boundary.
inline bool split_word(conllu::Sentence& s, int id, std::mt19937_64& rng) {
  const int at = detail::word_at(s, id);
  if (at < 0 || detail::inside_mwt(s, id)) return false;
  const auto cps = detail::code_points(std::get<conllu::Word>(s.tokens[at]).form);
  if (cps.size() < 2) return false;
  const auto cut = cps[std::uniform_int_distribution<std::size_t>(1, cps.size() - 1)(rng)];
  detail::remap_ids(s, [id](int x) { return x > id ? x + 1 : x; });
  auto& w = std::get<conllu::Word>(s.tokens[at]);
  conllu::Word tail = w;
  tail.id = id + 1;
  tail.form = w.form.substr(cut);
  tail.lemma = tail.form;
  tail.head = id;
  tail.deprel = "flat";
  w.form.resize(cut);
  w.misc = "_";
  s.tokens.insert(s.tokens.begin() + at + 1, tail);
  return true;
}

// Merges word `id` with the following one.
inline bool merge_words(conllu::Sentence& s, int id) {
  const int a = detail::word_at(s, id), b = detail::word_at(s, id + 1);
  if (a < 0 || b != a + 1 || detail::inside_mwt(s, id) || detail::inside_mwt(s, id + 1)) return false;
  const auto second = std::get<conllu::Word>(s.tokens[b]);
  auto& first = std::get<conllu::Word>(s.tokens[a]);
  first.form += second.form;
  first.misc = second.misc;
  if (first.head == id + 1) first.head = second.head;
  s.tokens.erase(s.tokens.begin() + b);
  detail::remap_ids(s, [id](int x) { return x > id ? x - 1 : x; });
  if (first.head == first.id) first.head = 0;
  return true;
}

// Replaces the multiword token at token index `at` by one plain word.
inline bool collapse_mwt(conllu::Sentence& s, std::size_t at) {
  const auto* m = std::get_if<conllu::MultiwordToken>(&s.tokens[at]);
  if (!m) return false;
  const int first = m->first, last = m->last;
  conllu::Word w = std::get<conllu::Word>(s.tokens[at + 1]);
  w.form = m->form;
  w.misc = m->misc;
  for (std::size_t i = at + 1; i < s.tokens.size(); ++i)
    if (const auto* x = std::get_if<conllu::Word>(&s.tokens[i]); x && x->id <= last && x->head &&
                                                                 (*x->head < first || *x->head > last)) {
      w.head = x->head;
      w.deprel = x->deprel;
      break;
    }
  s.tokens.erase(s.tokens.begin() + at, s.tokens.begin() + at + 2 + (last - first));
  s.tokens.insert(s.tokens.begin() + at, w);
  const int span = last - first;
  detail::remap_ids(s, [&](int x) { return x > last ? x - span : (x > first ? first : x); });
  return true;
}

// Appends sentence b to a. Both roots survive.
inline void merge_sentences(conllu::Sentence& a, const conllu::Sentence& b) {
  const int n = static_cast<int>(a.word_count());
  conllu::Sentence tail = b;
  detail::remap_ids(tail, [n](int x) { return x + n; });
  for (auto& t : tail.tokens)
    if (!std::holds_alternative<conllu::EmptyNode>(t)) a.tokens.push_back(std::move(t));
}

inline void corrupt_word(conllu::Word& w, int root, std::mt19937_64& rng) {
  static const char* kUpos[] = {"NOUN", "VERB", "ADJ", "X", "ADP"};
  const double roll = std::uniform_real_distribution<double>(0, 1)(rng);
  if (roll < 0.08) {
    w.upos = kUpos[rng() % 5];
  } else if (roll < 0.14) {
    w.xpos = "ign";
  } else if (roll < 0.20) {
    auto feats = conllu::canonical_features(w.feats);
    if (!feats.empty()) {
      feats.erase(feats.begin() + static_cast<long>(rng() % feats.size()));
      std::string joined;
      for (const auto& f : feats) joined += (joined.empty() ? "" : "|") + f.key + "=" + f.value;
      w.feats = joined.empty() ? "_" : joined;
    }
  } else if (roll < 0.26) {
    w.lemma = w.lemma + "x";
  } else if (roll < 0.33) {
    if (w.id != root) w.head = root;
  } else if (roll < 0.38) {
    const auto colon = w.deprel.find(':');
    w.deprel = colon == std::string::npos ? w.deprel + ":x" : w.deprel.substr(0, colon);
  }
}

// One random system output; different seeds give different mixes.
inline conllu::TreebankFile perturb(const conllu::TreebankFile& gold, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.25);
  conllu::TreebankFile out = gold;
  for (auto& s : out.sentences)
    std::erase_if(s.tokens, [](const auto& t) { return std::holds_alternative<conllu::EmptyNode>(t); });

  if (out.sentences.size() > 1 && coin(rng)) {
    const auto i = rng() % (out.sentences.size() - 1);
    merge_sentences(out.sentences[i], out.sentences[i + 1]);
    out.sentences.erase(out.sentences.begin() + static_cast<long>(i) + 1);
  }
  for (auto& s : out.sentences) {
    if (coin(rng))
      for (std::size_t i = 0; i < s.tokens.size(); ++i)
        if (std::holds_alternative<conllu::MultiwordToken>(s.tokens[i]) && coin(rng)) collapse_mwt(s, i);
    const int n = static_cast<int>(s.word_count());
    if (n > 0 && coin(rng)) split_word(s, 1 + static_cast<int>(rng() % n), rng);
    if (n > 1 && coin(rng)) merge_words(s, 1 + static_cast<int>(rng() % (n - 1)));
    int root = 0;
    for (const auto* w : s.words())
      if (w->head == 0) {
        root = w->id;
        break;
      }
    for (auto& t : s.tokens)
      if (auto* w = std::get_if<conllu::Word>(&t)) corrupt_word(*w, root, rng);
  }
  return out;
}

}  // namespace nlpre::testkit
