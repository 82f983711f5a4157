#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace zpr {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NpSpan {
  int sentence_index = 0;
  int start = 0;  // inclusive
  int end = 0;    // exclusive
  bool is_maximal = false;
  bool is_modifier = false;

  int length() const { return end - start; }
  bool same_location(const NpSpan& o) const {
    return sentence_index == o.sentence_index && start == o.start && end == o.end;
  }
  friend bool operator==(const NpSpan&, const NpSpan&) = default;
};

struct Sentence {
  std::vector<int> tokens;
  std::vector<NpSpan> np_spans;
  friend bool operator==(const Sentence&, const Sentence&) = default;
};

struct Document {
  std::string id;
  std::vector<Sentence> sentences;
  std::string source_tag;
  friend bool operator==(const Document&, const Document&) = default;
};

struct ZpLocation {
  int sentence_index = 0;
  int gap_position = 0;  // index of the token the gap precedes
};

struct ZpInstance {
  std::string document_id;
  int sentence_index = 0;
  int gap_position = 0;
  std::vector<NpSpan> candidates;     // document order, earliest first
  std::vector<int> gold_antecedents;  // sorted, unique candidate indices

  ZpLocation location() const { return {sentence_index, gap_position}; }
  bool is_gold(int candidate) const;
  friend bool operator==(const ZpInstance&, const ZpInstance&) = default;
};

// Id 0 is reserved for padding and unknown tokens.
class Vocabulary {
 public:
  Vocabulary();
  explicit Vocabulary(const std::vector<std::string>& tokens);

  int id(const std::string& token) const;
  const std::string& token(int id) const;
  int add(const std::string& token);
  std::size_t size() const { return tokens_.size(); }
  // Tokens 1..size-1 in id order, as written to the corpus file.
  std::vector<std::string> tokens() const { return {tokens_.begin() + 1, tokens_.end()}; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.tokens_ == b.tokens_; }

  static constexpr const char* kUnknown = "<unk>";

 private:
  std::vector<std::string> tokens_;
  std::map<std::string, int> ids_;
};

class Corpus {
 public:
  Vocabulary vocabulary;
  std::vector<Document> documents;
  std::vector<ZpInstance> instances;

  const Document& document(const std::string& id) const;
  const Document& document_of(const ZpInstance& zp) const { return document(zp.document_id); }

  // Checks every invariant of the data model; throws ValidationError
  // naming the offending document.
  void validate() const;
  // Rebuilds the id index; call after mutating `documents`.
  void reindex();

  friend bool operator==(const Corpus& a, const Corpus& b) {
    return a.vocabulary == b.vocabulary && a.documents == b.documents && a.instances == b.instances;
  }

 private:
  std::map<std::string, std::size_t> doc_index_;
};

// Re-expresses every token in `target`'s ids; tokens `target` lacks map
// to id 0. Used to score a corpus with a checkpoint's vocabulary.
Corpus with_vocabulary(const Corpus& corpus, const Vocabulary& target);

Corpus load_corpus(const std::string& path);
Corpus parse_corpus(std::istream& in);
void save_corpus(const Corpus& corpus, const std::string& path);
void write_corpus(const Corpus& corpus, std::ostream& out);

// Maximal or modifier NPs at most two sentences before the zero pronoun,
// restricted to spans ending at or before the gap in the pronoun's own
// sentence. Document order.
std::vector<NpSpan> extract_candidates(const Document& document, ZpLocation zp);

constexpr double kDefaultDevFraction = 0.2;

// Instance-level partition: dev gets round(dev_fraction * n) instances.
// Returns {train, dev}.
std::pair<Corpus, Corpus> split_train_dev(const Corpus& corpus, double dev_fraction,
                                          std::uint64_t seed);

struct ToyCorpusOptions {
  int n_docs = 200;
  int min_candidates = 2;
  int max_candidates = 6;
  int min_gold = 1;
  int max_gold = 3;
  int vocab_size = 64;
  std::uint64_t seed = 7;
  double set_dependent_fraction = 0.3;
  int zps_per_doc = 2;
  int n_markers = 4;
  std::string source_tag = "toy";
};

// Token strings used by the generator.
namespace toy_tokens {
inline constexpr const char* kAntiMarker = "<anti>";
inline constexpr const char* kTwin = "<twin>";
std::string marker(int k);
}  // namespace toy_tokens

// Synthetic corpus with a planted lexical signal: gold antecedents share a
// marker token with the text following the gap, distractors carry the
// anti-marker. Set-dependent instances contain two identical marker-bearing
// mentions of which exactly one is gold; the earlier twin is gold with
// probability 1/2.
Corpus generate_toy_corpus(const ToyCorpusOptions& options);

struct CorpusSummary {
  std::size_t documents = 0;
  std::size_t sentences = 0;
  std::size_t instances = 0;
  std::size_t candidates = 0;
  std::size_t gold_links = 0;
};
CorpusSummary summarize(const Corpus& corpus);

}  // namespace zpr
