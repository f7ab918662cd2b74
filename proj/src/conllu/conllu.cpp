#include "nlpre/conllu.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

namespace nlpre::conllu {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::BadIdSequence: return "BadIdSequence";
    case ErrorCode::BadHead: return "BadHead";
    case ErrorCode::BadRange: return "BadRange";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::MissingAnnotation: return "MissingAnnotation";
    case ErrorCode::Cycle: return "Cycle";
    case ErrorCode::MultipleRoots: return "MultipleRoots";
  }
  return "Unknown";
}

ParseError::ParseError(ErrorCode code, std::size_t line, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ": " + std::string(to_string(code)) +
                         ": " + message),
      code_(code),
      line_(line) {}

std::vector<const Word*> Sentence::words() const {
  std::vector<const Word*> out;
  for (const auto& token : tokens)
    if (const auto* word = std::get_if<Word>(&token)) out.push_back(word);
  return out;
}

std::size_t Sentence::word_count() const {
  return static_cast<std::size_t>(std::count_if(tokens.begin(), tokens.end(), [](const TokenLine& t) {
    return std::holds_alternative<Word>(t);
  }));
}

std::size_t TreebankFile::word_count() const {
  std::size_t total = 0;
  for (const auto& s : sentences) total += s.word_count();
  return total;
}

namespace {

std::string lowercase_ascii(std::string_view s) {
  std::string out(s);
  for (auto& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

std::optional<int> parse_positive(std::string_view s) {
  if (s.empty()) return std::nullopt;
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || value < 0) return std::nullopt;
  return value;
}

// Structural checks shared by the parser (first error throws) and the
// validator (all errors collected). `report(token_index, code, message)`.
template <class Report>
void check_structure(const Sentence& sentence, Report&& report) {
  int expected = 1;
  int covered_until = 0;
  int last_empty_major = -1;
  int last_empty_minor = 0;
  const auto& tokens = sentence.tokens;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& token = tokens[i];
    if (const auto* word = std::get_if<Word>(&token)) {
      if (word->id != expected)
        report(i, ErrorCode::BadIdSequence,
               "word id " + std::to_string(word->id) + ", expected " + std::to_string(expected));
      expected = word->id + 1;
    } else if (const auto* mwt = std::get_if<MultiwordToken>(&token)) {
      const std::string range = std::to_string(mwt->first) + "-" + std::to_string(mwt->last);
      if (mwt->first > mwt->last) {
        report(i, ErrorCode::BadRange, "range " + range + " is ill-ordered");
      } else if (mwt->first <= covered_until) {
        report(i, ErrorCode::BadRange, "range " + range + " overlaps a previous range");
      } else if (mwt->first != expected) {
        report(i, ErrorCode::BadRange,
               "range " + range + " must precede word " + std::to_string(mwt->first));
      }
      covered_until = std::max(covered_until, mwt->last);
    } else {
      const auto& node = std::get<EmptyNode>(token);
      const std::string id = std::to_string(node.major) + "." + std::to_string(node.minor);
      const int expected_minor = node.major == last_empty_major ? last_empty_minor + 1 : 1;
      if (node.major != expected - 1 || node.minor != expected_minor)
        report(i, ErrorCode::BadIdSequence, "empty node " + id + " out of sequence");
      last_empty_major = node.major;
      last_empty_minor = node.minor;
    }
  }

  const int n = static_cast<int>(sentence.word_count());
  if (covered_until > n)
    report(tokens.empty() ? 0 : tokens.size() - 1, ErrorCode::BadRange,
           "range ends at " + std::to_string(covered_until) + " but sentence has " +
               std::to_string(n) + " words");

  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto* word = std::get_if<Word>(&tokens[i]);
    if (!word || !word->head) continue;
    const int head = *word->head;
    if (head > n || head == word->id)
      report(i, ErrorCode::BadHead,
             "head " + std::to_string(head) + " of word " + std::to_string(word->id) +
                 " outside 0.." + std::to_string(n) + " or self-referential");
  }
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

TokenLine parse_token_line(std::string_view line, std::size_t line_no) {
  const auto fields = split_tabs(line);
  if (fields.size() != 10)
    throw ParseError(ErrorCode::MalformedLine, line_no,
                     "expected 10 tab-separated columns, found " + std::to_string(fields.size()));
  for (std::size_t c = 0; c < fields.size(); ++c)
    if (fields[c].empty())
      throw ParseError(ErrorCode::MalformedLine, line_no, "column " + std::to_string(c + 1) + " is empty");

  const std::string_view id = fields[0];
  auto fill = [&](auto& t) {
    t.form = fields[1];
    t.lemma = fields[2];
    t.upos = fields[3];
    t.xpos = fields[4];
    t.feats = fields[5];
    t.deprel = fields[7];
    t.deps = fields[8];
    t.misc = fields[9];
  };

  if (const auto dash = id.find('-'); dash != std::string_view::npos) {
    const auto first = parse_positive(id.substr(0, dash));
    const auto last = parse_positive(id.substr(dash + 1));
    if (!first || !last || *first == 0)
      throw ParseError(ErrorCode::MalformedLine, line_no, "cannot parse range id '" + std::string(id) + "'");
    MultiwordToken mwt;
    mwt.first = *first;
    mwt.last = *last;
    fill(mwt);
    mwt.head = fields[6];
    return mwt;
  }
  if (const auto dot = id.find('.'); dot != std::string_view::npos) {
    const auto major = parse_positive(id.substr(0, dot));
    const auto minor = parse_positive(id.substr(dot + 1));
    if (!major || !minor || *minor == 0)
      throw ParseError(ErrorCode::MalformedLine, line_no, "cannot parse empty node id '" + std::string(id) + "'");
    EmptyNode node;
    node.major = *major;
    node.minor = *minor;
    fill(node);
    node.head = fields[6];
    return node;
  }

  const auto word_id = parse_positive(id);
  if (!word_id || *word_id == 0)
    throw ParseError(ErrorCode::MalformedLine, line_no, "cannot parse word id '" + std::string(id) + "'");
  Word word;
  word.id = *word_id;
  fill(word);
  if (fields[6] != "_") {
    const auto head = parse_positive(fields[6]);
    if (!head)
      throw ParseError(ErrorCode::BadHead, line_no, "cannot parse head '" + std::string(fields[6]) + "'");
    word.head = *head;
  }
  return word;
}

void write_columns(std::string& out, std::string_view id, const auto& t, std::string_view head) {
  const std::array<std::string_view, 10> cols{id,     t.form,   t.lemma, t.upos, t.xpos,
                                              t.feats, head,    t.deprel, t.deps, t.misc};
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) out += '\t';
    out += cols[i];
  }
  out += '\n';
}

}  // namespace

std::vector<Feature> canonical_features(std::string_view feats) {
  std::vector<Feature> out;
  if (feats.empty() || feats == "_") return out;
  std::size_t start = 0;
  while (start <= feats.size()) {
    auto bar = feats.find('|', start);
    if (bar == std::string_view::npos) bar = feats.size();
    const auto item = feats.substr(start, bar - start);
    if (!item.empty()) {
      const auto eq = item.find('=');
      if (eq == std::string_view::npos)
        out.push_back({std::string(item), {}});
      else
        out.push_back({std::string(item.substr(0, eq)), std::string(item.substr(eq + 1))});
    }
    start = bar + 1;
  }
  std::stable_sort(out.begin(), out.end(), [](const Feature& a, const Feature& b) {
    const auto la = lowercase_ascii(a.key), lb = lowercase_ascii(b.key);
    if (la != lb) return la < lb;
    if (a.key != b.key) return a.key < b.key;
    return a.value < b.value;
  });
  return out;
}

TreebankFile parse_conllu(std::string_view text, std::string source_name) {
  TreebankFile file;
  file.source_name = std::move(source_name);

  Sentence current;
  std::vector<std::size_t> token_lines;
  std::size_t comment_line = 0;

  auto finish = [&](std::size_t line_no) {
    if (current.tokens.empty()) {
      if (!current.comments.empty())
        throw ParseError(ErrorCode::MalformedLine, comment_line, "comment block without a sentence");
      return;
    }
    check_structure(current, [&](std::size_t token_index, ErrorCode code, const std::string& message) {
      const auto at = token_index < token_lines.size() ? token_lines[token_index] : line_no;
      throw ParseError(code, at, message);
    });
    file.sentences.push_back(std::move(current));
    current = Sentence{};
    token_lines.clear();
  };

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (line.empty()) {
      finish(line_no);
    } else if (line.front() == '#') {
      if (!current.tokens.empty())
        throw ParseError(ErrorCode::MalformedLine, line_no, "comment inside a sentence");
      if (current.comments.empty()) comment_line = line_no;
      current.comments.emplace_back(line);
    } else {
      current.tokens.push_back(parse_token_line(line, line_no));
      token_lines.push_back(line_no);
    }
  }
  finish(line_no + 1);

  if (file.sentences.empty()) throw ParseError(ErrorCode::EmptyFile, line_no == 0 ? 1 : line_no, "no sentences");
  return file;
}

TreebankFile read_conllu_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_conllu(buffer.str(), path.filename().string());
}

std::string serialize_conllu(const TreebankFile& file) {
  std::string out;
  for (const auto& sentence : file.sentences) {
    for (const auto& comment : sentence.comments) {
      out += comment;
      out += '\n';
    }
    for (const auto& token : sentence.tokens) {
      if (const auto* word = std::get_if<Word>(&token)) {
        write_columns(out, std::to_string(word->id), *word, word->head ? std::to_string(*word->head) : "_");
      } else if (const auto* mwt = std::get_if<MultiwordToken>(&token)) {
        write_columns(out, std::to_string(mwt->first) + "-" + std::to_string(mwt->last), *mwt, mwt->head);
      } else {
        const auto& node = std::get<EmptyNode>(token);
        write_columns(out, std::to_string(node.major) + "." + std::to_string(node.minor), node, node.head);
      }
    }
    out += '\n';
  }
  return out;
}

ValidationReport validate_treebank(const TreebankFile& file, ValidationMode mode) {
  ValidationReport report;
  if (file.sentences.empty()) {
    report.errors.push_back({0, 0, ErrorCode::EmptyFile, "no sentences"});
    return report;
  }
  for (std::size_t s = 0; s < file.sentences.size(); ++s) {
    const auto& sentence = file.sentences[s];
    if (sentence.tokens.empty()) {
      report.errors.push_back({s, 0, ErrorCode::EmptyFile, "sentence without tokens"});
      continue;
    }
    bool structural_ok = true;
    check_structure(sentence, [&](std::size_t i, ErrorCode code, const std::string& message) {
      structural_ok = false;
      report.errors.push_back({s, i, code, message});
    });
    if (mode != ValidationMode::Full) continue;

    bool heads_complete = true;
    for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
      const auto* word = std::get_if<Word>(&sentence.tokens[i]);
      if (!word) continue;
      std::string missing;
      if (word->upos == "_") missing += " UPOS";
      if (!word->head) missing += " HEAD";
      if (word->deprel == "_") missing += " DEPREL";
      if (!missing.empty()) {
        heads_complete = false;
        report.errors.push_back({s, i, ErrorCode::MissingAnnotation,
                                 "word " + std::to_string(word->id) + " lacks" + missing});
      }
    }
    if (!structural_ok || !heads_complete) continue;

    const auto words = sentence.words();
    const auto n = words.size();
    std::size_t roots = 0;
    for (const auto* w : words) roots += *w->head == 0;
    if (roots != 1)
      report.errors.push_back({s, 0, ErrorCode::MultipleRoots,
                               "sentence has " + std::to_string(roots) + " root words"});
    for (std::size_t w = 0; w < n; ++w) {
      int node = static_cast<int>(w) + 1;
      std::size_t steps = 0;
      while (node != 0 && steps <= n) {
        node = *words[static_cast<std::size_t>(node) - 1]->head;
        ++steps;
      }
      if (node != 0) {
        report.errors.push_back({s, w, ErrorCode::Cycle,
                                 "word " + std::to_string(w + 1) + " does not reach the root"});
        break;
      }
    }
  }
  return report;
}

}  // namespace nlpre::conllu
