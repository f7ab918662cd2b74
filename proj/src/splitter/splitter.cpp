#include "nlpre/splitter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

namespace nlpre::split {

std::string_view to_string(Subset s) {
  switch (s) {
    case Subset::Train: return "train";
    case Subset::Dev: return "dev";
    case Subset::Test: return "test";
  }
  return "?";
}

std::string_view to_string(SplitErrorCode code) {
  switch (code) {
    case SplitErrorCode::MissingBoundaryMetadata: return "MissingBoundaryMetadata";
    case SplitErrorCode::DuplicateParagraphId: return "DuplicateParagraphId";
    case SplitErrorCode::EmptyCorpus: return "EmptyCorpus";
    case SplitErrorCode::MissingDocumentType: return "MissingDocumentType";
    case SplitErrorCode::IncompleteAssignment: return "IncompleteAssignment";
    case SplitErrorCode::InvalidSpec: return "InvalidSpec";
  }
  return "?";
}

SplitError::SplitError(SplitErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

// Matches "# key", "# key = v", "# key id = v". Returns nullopt for other
// comments, an empty string when the key carries no value.
std::optional<std::string> comment_value(std::string_view comment, std::string_view key) {
  if (comment.empty() || comment.front() != '#') return std::nullopt;
  auto body = trim(comment.substr(1));
  if (body.substr(0, key.size()) != key) return std::nullopt;
  auto rest = body.substr(key.size());
  if (!rest.empty() && rest.front() != ' ' && rest.front() != '\t' && rest.front() != '=') return std::nullopt;
  const auto eq = rest.find('=');
  if (eq == std::string_view::npos) return std::string{};
  return std::string(trim(rest.substr(eq + 1)));
}

std::size_t sentence_words(const conllu::Sentence& s) { return s.word_count(); }

}  // namespace

std::vector<Paragraph> extract_paragraphs(const conllu::TreebankFile& corpus, const BoundaryKeys& keys) {
  std::vector<Paragraph> out;
  bool saw_marker = false;
  std::string doc_id, doc_type;
  std::size_t doc_ordinal = 0, par_ordinal = 0;
  std::set<std::string> ids;

  auto open_paragraph = [&](std::string id) {
    if (id.empty()) id = (doc_id.empty() ? std::string("p") : doc_id + "/p") + std::to_string(++par_ordinal);
    if (!ids.insert(id).second)
      throw SplitError(SplitErrorCode::DuplicateParagraphId, "paragraph id '" + id + "' occurs twice");
    Paragraph p;
    p.id = std::move(id);
    p.document_id = doc_id;
    p.document_type = doc_type;
    out.push_back(std::move(p));
  };

  for (const auto& sentence : corpus.sentences) {
    std::optional<std::string> new_par;
    bool new_doc = false;
    for (const auto& c : sentence.comments) {
      if (auto v = comment_value(c, keys.document)) {
        new_doc = true;
        doc_id = v->empty() ? "d" + std::to_string(doc_ordinal + 1) : *v;
        ++doc_ordinal;
        doc_type.clear();
        par_ordinal = 0;
      } else if (auto v = comment_value(c, keys.paragraph)) {
        new_par = *v;
      } else if (auto v = comment_value(c, keys.document_type)) {
        doc_type = *v;
      }
    }
    if (new_doc || new_par) {
      saw_marker = true;
      open_paragraph(new_par.value_or(""));
    } else if (out.empty()) {
      open_paragraph("");
    }
    auto& p = out.back();
    if (p.document_type.empty()) p.document_type = doc_type;
    p.segment_count += sentence_words(sentence);
    p.payload.push_back(sentence);
  }
  if (!saw_marker)
    throw SplitError(SplitErrorCode::MissingBoundaryMetadata,
                     "no '# " + keys.paragraph + "' or '# " + keys.document + "' comments found");
  return out;
}

void SplitSpec::validate() const {
  if (bucket_count < 1) throw SplitError(SplitErrorCode::InvalidSpec, "bucket count must be at least 1");
  double sum = 0.0;
  for (double r : ratios) {
    if (!(r >= 0.0)) throw SplitError(SplitErrorCode::InvalidSpec, "ratios must be non-negative");
    sum += r;
  }
  if (std::fabs(sum - 1.0) > 1e-9) throw SplitError(SplitErrorCode::InvalidSpec, "ratios must sum to 1");
}

namespace {

std::vector<const Paragraph*> length_order(const std::vector<const Paragraph*>& ps) {
  auto sorted = ps;
  std::stable_sort(sorted.begin(), sorted.end(), [](const Paragraph* a, const Paragraph* b) {
    if (a->segment_count != b->segment_count) return a->segment_count < b->segment_count;
    return a->id < b->id;
  });
  return sorted;
}

// Bucket b holds sorted positions [floor(b*n/k), floor((b+1)*n/k)).
std::vector<std::vector<const Paragraph*>> cut_buckets(const std::vector<const Paragraph*>& ps, std::size_t k) {
  const auto sorted = length_order(ps);
  const std::size_t n = sorted.size();
  std::vector<std::vector<const Paragraph*>> buckets(k);
  for (std::size_t b = 0; b < k; ++b)
    for (std::size_t i = b * n / k; i < (b + 1) * n / k; ++i) buckets[b].push_back(sorted[i]);
  return buckets;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// std::shuffle and the std distributions are implementation-defined; this one
// gives identical splits on every platform.
template <class T>
void shuffle(std::vector<T>& v, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::uint64_t bound = i;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t r;
    do r = gen();
    while (r >= limit);
    std::swap(v[i - 1], v[r % bound]);
  }
}

std::uint64_t bucket_seed(std::uint64_t seed, std::size_t bucket) {
  return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(bucket)));
}

void split_group(const std::vector<const Paragraph*>& group, const SplitSpec& spec,
                 std::map<std::string, Subset>& out) {
  std::array<double, 3> deficit{};
  const auto buckets = cut_buckets(group, spec.bucket_count);
  for (std::size_t b = 0; b < buckets.size(); ++b) {
    auto members = buckets[b];
    shuffle(members, bucket_seed(spec.seed, b));
    const auto seats = apportion(members.size(), spec.ratios, deficit);
    std::size_t next = 0;
    for (std::size_t s = 0; s < 3; ++s) {
      for (std::size_t i = 0; i < seats[s]; ++i) out[members[next++]->id] = kSubsets[s];
      deficit[s] += spec.ratios[s] * static_cast<double>(members.size()) - static_cast<double>(seats[s]);
    }
  }
}

std::vector<const Paragraph*> pointers(const std::vector<Paragraph>& ps) {
  std::vector<const Paragraph*> out;
  out.reserve(ps.size());
  for (const auto& p : ps) out.push_back(&p);
  return out;
}

std::map<std::string, std::vector<const Paragraph*>> by_type(const std::vector<Paragraph>& ps) {
  std::map<std::string, std::vector<const Paragraph*>> groups;
  for (const auto& p : ps) {
    if (p.document_type.empty())
      throw SplitError(SplitErrorCode::MissingDocumentType, "paragraph '" + p.id + "' has no document type");
    groups[p.document_type].push_back(&p);
  }
  return groups;
}

}  // namespace

std::map<std::string, std::size_t> assign_buckets(const std::vector<Paragraph>& paragraphs, std::size_t k) {
  if (k < 1) throw SplitError(SplitErrorCode::InvalidSpec, "bucket count must be at least 1");
  std::map<std::string, std::size_t> out;
  const auto buckets = cut_buckets(pointers(paragraphs), k);
  for (std::size_t b = 0; b < buckets.size(); ++b)
    for (const auto* p : buckets[b]) out[p->id] = b;
  return out;
}

std::array<std::size_t, 3> apportion(std::size_t n, const std::array<double, 3>& ratios,
                                     const std::array<double, 3>& priority) {
  std::array<std::size_t, 3> seats{};
  std::array<double, 3> remainder{};
  std::size_t given = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double quota = ratios[i] * static_cast<double>(n);
    seats[i] = static_cast<std::size_t>(std::floor(quota + 1e-9));
    remainder[i] = std::max(0.0, quota - static_cast<double>(seats[i]));
    given += seats[i];
  }
  while (given > n) {  // only reachable through floating-point slack
    const auto i = static_cast<std::size_t>(std::max_element(seats.begin(), seats.end()) - seats.begin());
    --seats[i];
    --given;
  }
  std::array<std::size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (std::fabs(remainder[a] - remainder[b]) > 1e-9) return remainder[a] > remainder[b];
    if (std::fabs(priority[a] - priority[b]) > 1e-9) return priority[a] > priority[b];
    return a < b;
  });
  for (std::size_t k = 0; given < n; k = (k + 1) % 3) {
    if (ratios[order[k]] <= 0.0) continue;
    ++seats[order[k]];
    ++given;
  }
  return seats;
}

SplitResult split_by_name(const std::vector<Paragraph>& paragraphs, const SplitSpec& spec) {
  spec.validate();
  if (paragraphs.empty()) throw SplitError(SplitErrorCode::EmptyCorpus, "no paragraphs to split");
  SplitResult result;
  split_group(pointers(paragraphs), spec, result.assignment);
  auto plain = spec;
  plain.stratify_by_type = false;
  result.diagnostics = verify_split(result, plain, paragraphs);
  return result;
}

SplitResult split_by_type(const std::vector<Paragraph>& paragraphs, const SplitSpec& spec) {
  spec.validate();
  if (paragraphs.empty()) throw SplitError(SplitErrorCode::EmptyCorpus, "no paragraphs to split");
  SplitResult result;
  for (const auto& [type, group] : by_type(paragraphs)) split_group(group, spec, result.assignment);
  auto typed = spec;
  typed.stratify_by_type = true;
  result.diagnostics = verify_split(result, typed, paragraphs);
  return result;
}

SplitResult split(const std::vector<Paragraph>& paragraphs, const SplitSpec& spec) {
  return spec.stratify_by_type ? split_by_type(paragraphs, spec) : split_by_name(paragraphs, spec);
}

SplitDiagnostics verify_split(const SplitResult& result, const SplitSpec& spec,
                              const std::vector<Paragraph>& paragraphs) {
  spec.validate();
  for (const auto& p : paragraphs)
    if (!result.assignment.count(p.id))
      throw SplitError(SplitErrorCode::IncompleteAssignment, "paragraph '" + p.id + "' is not assigned");
  if (result.assignment.size() != paragraphs.size())
    throw SplitError(SplitErrorCode::IncompleteAssignment, "assignment names paragraphs outside the corpus");

  SplitDiagnostics d;
  for (const auto& p : paragraphs) {
    const auto s = static_cast<std::size_t>(result.assignment.at(p.id));
    ++d.paragraphs[s];
    d.segments[s] += p.segment_count;
    d.sentences[s] += p.payload.size();
  }

  std::map<std::string, std::vector<const Paragraph*>> groups;
  if (spec.stratify_by_type)
    groups = by_type(paragraphs);
  else
    groups[""] = pointers(paragraphs);

  for (const auto& [group, members] : groups) {
    const auto buckets = cut_buckets(members, spec.bucket_count);
    std::array<std::size_t, 3> subset_total{};
    std::vector<std::array<std::size_t, 3>> counts;
    for (std::size_t b = 0; b < buckets.size(); ++b) {
      BucketStats st;
      st.group = group;
      st.bucket = b;
      for (const auto* p : buckets[b]) ++st.paragraphs[static_cast<std::size_t>(result.assignment.at(p->id))];
      if (!buckets[b].empty()) {
        for (std::size_t s = 0; s < 3; ++s) {
          st.proportions[s] = static_cast<double>(st.paragraphs[s]) / static_cast<double>(buckets[b].size());
          st.deviation = std::max(st.deviation, std::fabs(st.proportions[s] - spec.ratios[s]));
        }
      }
      d.max_bucket_deviation = std::max(d.max_bucket_deviation, st.deviation);
      for (std::size_t s = 0; s < 3; ++s) subset_total[s] += st.paragraphs[s];
      counts.push_back(st.paragraphs);
      d.buckets.push_back(st);
    }
    for (std::size_t b = 0; b < buckets.size(); ++b) {
      const double global = static_cast<double>(buckets[b].size()) / static_cast<double>(members.size());
      for (std::size_t s = 0; s < 3; ++s) {
        if (subset_total[s] == 0) continue;
        const double share = static_cast<double>(counts[b][s]) / static_cast<double>(subset_total[s]);
        d.max_distribution_deviation = std::max(d.max_distribution_deviation, std::fabs(share - global));
      }
    }
  }
  return d;
}

std::array<conllu::TreebankFile, 3> materialize(const SplitResult& result, const std::vector<Paragraph>& paragraphs) {
  std::array<conllu::TreebankFile, 3> out;
  for (std::size_t s = 0; s < 3; ++s) out[s].source_name = std::string(to_string(kSubsets[s]));
  for (const auto& p : paragraphs) {
    auto& file = out[static_cast<std::size_t>(result.assignment.at(p.id))];
    file.sentences.insert(file.sentences.end(), p.payload.begin(), p.payload.end());
  }
  return out;
}

Json manifest_json(const SplitResult& result, const SplitSpec& spec, const std::vector<Paragraph>& paragraphs) {
  const auto& d = result.diagnostics;
  Json j;
  j["spec"] = {{"bucket_count", spec.bucket_count},
               {"ratios", spec.ratios},
               {"seed", spec.seed},
               {"by", spec.stratify_by_type ? "type" : "name"}};
  Json assignment = Json::array();
  for (const auto& p : paragraphs)
    assignment.push_back({{"paragraph", p.id},
                          {"document", p.document_id},
                          {"type", p.document_type},
                          {"segments", p.segment_count},
                          {"subset", to_string(result.assignment.at(p.id))}});
  j["assignment"] = std::move(assignment);

  Json subsets = Json::object();
  for (std::size_t s = 0; s < 3; ++s)
    subsets[std::string(to_string(kSubsets[s]))] = {
        {"paragraphs", d.paragraphs[s]}, {"sentences", d.sentences[s]}, {"segments", d.segments[s]}};
  Json buckets = Json::array();
  for (const auto& b : d.buckets) {
    Json row = {{"bucket", b.bucket}, {"paragraphs", b.paragraphs}, {"proportions", b.proportions},
                {"deviation", b.deviation}};
    if (!b.group.empty()) row["type"] = b.group;
    buckets.push_back(std::move(row));
  }
  j["diagnostics"] = {{"subsets", subsets},
                      {"buckets", buckets},
                      {"max_bucket_deviation", d.max_bucket_deviation},
                      {"max_distribution_deviation", d.max_distribution_deviation}};
  return j;
}

}  // namespace nlpre::split
