#pragma once

#include <algorithm>
#include <array>
#include <string_view>

namespace nlpre::eval::detail {

// Relation and feature inventories copied verbatim from the CoNLL 2018 shared
// task evaluation script (conll18_ud_eval.py, v1.2, UFAL, MPL-2.0).

inline constexpr std::array<std::string_view, 29> kContentRelations{
    "nsubj", "obj",       "iobj",     "csubj",      "ccomp",  "xcomp",    "obl",   "vocative",
    "expl",  "dislocated", "advcl",   "advmod",     "discourse", "nmod",  "appos", "nummod",
    "acl",   "amod",      "conj",     "fixed",      "flat",   "compound", "list",  "parataxis",
    "orphan", "goeswith", "reparandum", "root",     "dep"};

inline constexpr std::array<std::string_view, 7> kFunctionalRelations{"aux", "cop", "mark", "det",
                                                                      "clf", "case", "cc"};

inline constexpr std::array<std::string_view, 21> kUniversalFeatures{
    "PronType", "NumType", "Poss",  "Reflex", "Foreign",  "Abbr",  "Gender",
    "Animacy",  "Number",  "Case",  "Definite", "Degree", "VerbForm", "Mood",
    "Tense",    "Aspect",  "Voice", "Evident", "Polarity", "Person", "Polite"};

inline bool is_content_relation(std::string_view universal_deprel) {
  return std::find(kContentRelations.begin(), kContentRelations.end(), universal_deprel) !=
         kContentRelations.end();
}

inline bool is_functional_relation(std::string_view universal_deprel) {
  return std::find(kFunctionalRelations.begin(), kFunctionalRelations.end(), universal_deprel) !=
         kFunctionalRelations.end();
}

inline bool is_universal_feature(std::string_view key) {
  return std::find(kUniversalFeatures.begin(), kUniversalFeatures.end(), key) != kUniversalFeatures.end();
}

}  // namespace nlpre::eval::detail
