#pragma once

// In-memory CoNLL-U document model: parsing, serialization and structural
// validation. Every other module consumes TreebankFile.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace nlpre::conllu {

enum class ErrorCode {
  MalformedLine,
  BadIdSequence,
  BadHead,
  BadRange,
  EmptyFile,
  MissingAnnotation,  // full mode: "_" in UPOS/HEAD/DEPREL
  Cycle,
  MultipleRoots,
};

std::string_view to_string(ErrorCode code);

// Thrown by parse_conllu. `line()` is 1-based within the input text.
class ParseError : public std::runtime_error {
 public:
  ParseError(ErrorCode code, std::size_t line, const std::string& message);

  ErrorCode code() const { return code_; }
  std::size_t line() const { return line_; }

 private:
  ErrorCode code_;
  std::size_t line_;
};

// A syntactic word. `head` is empty when the column holds "_".
struct Word {
  int id = 0;
  std::string form;
  std::string lemma = "_";
  std::string upos = "_";
  std::string xpos = "_";
  std::string feats = "_";
  std::optional<int> head;
  std::string deprel = "_";
  std::string deps = "_";
  std::string misc = "_";

  bool operator==(const Word&) const = default;
};

// An orthographic token spanning words first..last. Columns other than FORM
// and MISC are normally "_" but are kept verbatim.
struct MultiwordToken {
  int first = 0;
  int last = 0;
  std::string form;
  std::string lemma = "_";
  std::string upos = "_";
  std::string xpos = "_";
  std::string feats = "_";
  std::string head = "_";
  std::string deprel = "_";
  std::string deps = "_";
  std::string misc = "_";

  bool operator==(const MultiwordToken&) const = default;
};

// Enhanced-graph node with decimal id major.minor. Never evaluated.
struct EmptyNode {
  int major = 0;
  int minor = 0;
  std::string form;
  std::string lemma = "_";
  std::string upos = "_";
  std::string xpos = "_";
  std::string feats = "_";
  std::string head = "_";
  std::string deprel = "_";
  std::string deps = "_";
  std::string misc = "_";

  bool operator==(const EmptyNode&) const = default;
};

using TokenLine = std::variant<Word, MultiwordToken, EmptyNode>;

struct Sentence {
  std::vector<std::string> comments;  // verbatim, each starting with '#'
  std::vector<TokenLine> tokens;

  std::vector<const Word*> words() const;
  std::size_t word_count() const;

  bool operator==(const Sentence&) const = default;
};

struct TreebankFile {
  std::vector<Sentence> sentences;
  std::string source_name;

  std::size_t word_count() const;
};

struct Feature {
  std::string key;
  std::string value;

  bool operator==(const Feature&) const = default;
};

// Splits a FEATS column into Key=Value pairs sorted by key (case-insensitive,
// ties by exact key then value). "_" yields an empty list.
std::vector<Feature> canonical_features(std::string_view feats);

TreebankFile parse_conllu(std::string_view text, std::string source_name = {});
TreebankFile read_conllu_file(const std::filesystem::path& path);

std::string serialize_conllu(const TreebankFile& file);

enum class ValidationMode { Surface, Full };

struct ValidationIssue {
  std::size_t sentence_index = 0;
  std::size_t line_index = 0;  // token line within the sentence
  ErrorCode code = ErrorCode::MalformedLine;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> errors;
  bool ok() const { return errors.empty(); }
};

ValidationReport validate_treebank(const TreebankFile& file, ValidationMode mode);

}  // namespace nlpre::conllu
