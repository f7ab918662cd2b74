#include <algorithm>
#include <set>

#include "nlpre/eval.hpp"
#include "relations.hpp"
#include "unicode.hpp"

namespace nlpre::eval {

namespace {

std::string universal_part(std::string_view deprel) {
  return std::string(deprel.substr(0, deprel.find(':')));
}

std::string feats_key(std::string_view feats, FeatsComparison mode) {
  std::vector<std::string> items;
  if (mode == FeatsComparison::Universal) {
    // Mirrors the reference script: split on '|', keep universal keys, sort, join.
    std::size_t start = 0;
    while (start <= feats.size()) {
      auto bar = feats.find('|', start);
      if (bar == std::string_view::npos) bar = feats.size();
      const auto item = feats.substr(start, bar - start);
      if (detail::is_universal_feature(item.substr(0, item.find('=')))) items.emplace_back(item);
      start = bar + 1;
    }
    std::sort(items.begin(), items.end());
  } else {
    for (const auto& f : conllu::canonical_features(feats)) items.push_back(f.key + "=" + f.value);
  }
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += '|';
    out += items[i];
  }
  return out;
}

std::u32string strip_separators(std::string_view form) {
  std::u32string decoded;
  try {
    decoded = detail::decode_utf8(form);
  } catch (const std::invalid_argument& e) {
    throw EvalError(EvalErrorCode::EmptyForm, std::string("undecodable FORM: ") + e.what());
  }
  std::erase_if(decoded, detail::is_space_separator);
  return decoded;
}

}  // namespace

EvalRepresentation build_representation(const conllu::TreebankFile& file, FeatsComparison feats) {
  EvalRepresentation rep;
  rep.feats_comparison = feats;

  for (const auto& sentence : file.sentences) {
    const std::size_t sentence_start = rep.characters.size();
    const std::size_t word_offset = rep.words.size();
    int multiword_last = 0;
    CharSpan multiword_span;

    for (const auto& token : sentence.tokens) {
      if (std::holds_alternative<conllu::EmptyNode>(token)) continue;

      if (const auto* mwt = std::get_if<conllu::MultiwordToken>(&token)) {
        const auto chars = strip_separators(mwt->form);
        if (chars.empty()) throw EvalError(EvalErrorCode::EmptyForm, "multiword token with empty FORM");
        multiword_span = {rep.characters.size(), rep.characters.size() + chars.size()};
        rep.characters += chars;
        rep.token_spans.push_back(multiword_span);
        multiword_last = mwt->last;
        continue;
      }

      const auto& word = std::get<conllu::Word>(token);
      const auto chars = strip_separators(word.form);
      if (chars.empty()) throw EvalError(EvalErrorCode::EmptyForm, "word " + std::to_string(word.id) + " has empty FORM");

      EvalWord ew;
      if (word.id <= multiword_last) {
        ew.span = multiword_span;
        ew.is_multiword_part = true;
      } else {
        ew.span = {rep.characters.size(), rep.characters.size() + chars.size()};
        rep.characters += chars;
        rep.token_spans.push_back(ew.span);
      }
      ew.form = word.form;
      ew.folded_form = detail::to_lower(chars);
      ew.lemma = word.lemma;
      ew.upos = word.upos;
      ew.xpos = word.xpos;
      ew.feats = feats_key(word.feats, feats);
      if (!word.head)
        ew.head = kMissingHead;
      else if (*word.head == 0)
        ew.head = kRootHead;
      else
        ew.head = static_cast<int>(word_offset) + *word.head - 1;
      ew.full_deprel = word.deprel;
      ew.deprel = universal_part(word.deprel);
      ew.is_content = detail::is_content_relation(ew.deprel);
      ew.is_functional = detail::is_functional_relation(ew.deprel);
      rep.words.push_back(std::move(ew));
    }

    for (std::size_t w = word_offset; w < rep.words.size(); ++w) {
      const auto& word = rep.words[w];
      if (word.head >= 0 && word.is_functional)
        rep.words[static_cast<std::size_t>(word.head)].functional_children.push_back(w);
    }
    if (rep.characters.size() > sentence_start)
      rep.sentence_spans.push_back({sentence_start, rep.characters.size()});
  }

  if (rep.words.empty()) throw EvalError(EvalErrorCode::EmptyRepresentation, "file contains no words");
  return rep;
}

}  // namespace nlpre::eval
