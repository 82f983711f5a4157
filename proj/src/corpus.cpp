#include "zpr/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "zpr/rng.hpp"

namespace zpr {

using json = nlohmann::ordered_json;

bool ZpInstance::is_gold(int candidate) const {
  return std::binary_search(gold_antecedents.begin(), gold_antecedents.end(), candidate);
}

Vocabulary::Vocabulary() {
  tokens_.push_back(kUnknown);
  ids_[kUnknown] = 0;
}

Vocabulary::Vocabulary(const std::vector<std::string>& tokens) : Vocabulary() {
  for (const auto& t : tokens) {
    if (ids_.count(t)) throw ValidationError("vocabulary: duplicate token '" + t + "'");
    add(t);
  }
}

int Vocabulary::id(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? 0 : it->second;
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw std::out_of_range("token id " + std::to_string(id) + " outside vocabulary");
  }
  return tokens_[static_cast<std::size_t>(id)];
}

int Vocabulary::add(const std::string& token) {
  auto it = ids_.find(token);
  if (it != ids_.end()) return it->second;
  const int id = static_cast<int>(tokens_.size());
  tokens_.push_back(token);
  ids_[token] = id;
  return id;
}

const Document& Corpus::document(const std::string& id) const {
  auto it = doc_index_.find(id);
  if (it == doc_index_.end()) throw ValidationError("unknown document id '" + id + "'");
  return documents[it->second];
}

void Corpus::reindex() {
  doc_index_.clear();
  for (std::size_t i = 0; i < documents.size(); ++i) {
    if (!doc_index_.emplace(documents[i].id, i).second) {
      throw ValidationError("document " + documents[i].id + ": duplicate id");
    }
  }
}

namespace {

void validate_document(const Document& doc, std::size_t vocab_size) {
  auto fail = [&](const std::string& what) { throw ValidationError("document " + doc.id + ": " + what); };
  for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
    const auto& sent = doc.sentences[s];
    for (int t : sent.tokens) {
      if (t < 0 || static_cast<std::size_t>(t) >= vocab_size) {
        fail("token id " + std::to_string(t) + " out of vocabulary in sentence " + std::to_string(s));
      }
    }
    for (const auto& np : sent.np_spans) {
      if (np.sentence_index != static_cast<int>(s)) fail("np sentence index mismatch");
      if (!(0 <= np.start && np.start < np.end && np.end <= static_cast<int>(sent.tokens.size()))) {
        fail("np span [" + std::to_string(np.start) + "," + std::to_string(np.end) +
             ") outside sentence " + std::to_string(s));
      }
    }
  }
}

bool in_window(const NpSpan& np, ZpLocation zp) {
  if (np.sentence_index < zp.sentence_index - 2 || np.sentence_index > zp.sentence_index) return false;
  return np.sentence_index < zp.sentence_index || np.end <= zp.gap_position;
}

void validate_instance(const ZpInstance& zp, const Document& doc) {
  auto fail = [&](const std::string& what) {
    throw ValidationError("document " + doc.id + ": zp at sentence " + std::to_string(zp.sentence_index) +
                          ", gap " + std::to_string(zp.gap_position) + ": " + what);
  };
  if (zp.sentence_index < 0 || zp.sentence_index >= static_cast<int>(doc.sentences.size())) {
    fail("sentence index out of range");
  }
  const auto& sent = doc.sentences[static_cast<std::size_t>(zp.sentence_index)];
  if (zp.gap_position < 0 || zp.gap_position > static_cast<int>(sent.tokens.size())) fail("gap out of range");
  if (zp.candidates.empty()) fail("no candidates");
  for (const auto& c : zp.candidates) {
    if (c.sentence_index < 0 || c.sentence_index >= static_cast<int>(doc.sentences.size())) {
      fail("candidate sentence out of range");
    }
    const auto& cs = doc.sentences[static_cast<std::size_t>(c.sentence_index)];
    if (!(0 <= c.start && c.start < c.end && c.end <= static_cast<int>(cs.tokens.size()))) {
      fail("candidate span outside sentence");
    }
    if (!in_window(c, zp.location())) fail("candidate outside the two-sentence window");
    if (!c.is_maximal && !c.is_modifier) fail("candidate is neither a maximal nor a modifier NP");
  }
  if (zp.gold_antecedents.empty()) fail("no gold antecedent");
  for (int g : zp.gold_antecedents) {
    if (g < 0 || g >= static_cast<int>(zp.candidates.size())) {
      fail("gold index " + std::to_string(g) + " out of range for " + std::to_string(zp.candidates.size()) +
           " candidates");
    }
  }
  if (!std::is_sorted(zp.gold_antecedents.begin(), zp.gold_antecedents.end()) ||
      std::adjacent_find(zp.gold_antecedents.begin(), zp.gold_antecedents.end()) != zp.gold_antecedents.end()) {
    fail("gold indices must be sorted and unique");
  }
}

}  // namespace

void Corpus::validate() const {
  for (const auto& doc : documents) validate_document(doc, vocabulary.size());
  for (const auto& zp : instances) validate_instance(zp, document_of(zp));
}

// ---------------------------------------------------------------- I/O

namespace {

template <typename T>
T get_field(const json& j, const char* key, std::size_t line) {
  if (!j.contains(key)) throw ParseError(line, std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(line, std::string("field '") + key + "': " + e.what());
  }
}

const NpSpan* find_np(const Document& doc, int sent, int start, int end) {
  if (sent < 0 || sent >= static_cast<int>(doc.sentences.size())) return nullptr;
  for (const auto& np : doc.sentences[static_cast<std::size_t>(sent)].np_spans) {
    if (np.start == start && np.end == end) return &np;
  }
  return nullptr;
}

}  // namespace

Corpus parse_corpus(std::istream& in) {
  Corpus corpus;
  bool have_vocab = false;
  std::map<std::string, std::size_t> seen_docs;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(line, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError(line, "expected a JSON object");
    const auto type = get_field<std::string>(j, "type", line);
    if (type == "vocab") {
      if (have_vocab) throw ParseError(line, "duplicate vocab line");
      const auto tokens = get_field<std::vector<std::string>>(j, "tokens", line);
      for (const auto& t : tokens) {
        if (t == Vocabulary::kUnknown) throw ParseError(line, "reserved token <unk> listed in vocab");
      }
      try {
        corpus.vocabulary = Vocabulary(tokens);
      } catch (const ValidationError& e) {
        throw ParseError(line, e.what());
      }
      have_vocab = true;
    } else if (type == "doc") {
      if (!have_vocab) throw ParseError(line, "doc line before vocab line");
      Document doc;
      doc.id = get_field<std::string>(j, "id", line);
      doc.source_tag = j.contains("source") ? get_field<std::string>(j, "source", line) : "";
      if (seen_docs.count(doc.id)) throw ParseError(line, "duplicate document id '" + doc.id + "'");
      const auto sentences = get_field<json>(j, "sentences", line);
      if (!sentences.is_array()) throw ParseError(line, "'sentences' must be an array");
      for (const auto& sj : sentences) {
        Sentence s;
        s.tokens = get_field<std::vector<int>>(sj, "tokens", line);
        const auto nps = sj.contains("nps") ? get_field<json>(sj, "nps", line) : json::array();
        for (const auto& npj : nps) {
          if (!npj.is_array() || npj.size() != 4) throw ParseError(line, "np must be [start,end,is_max,is_mod]");
          NpSpan np;
          try {
            np.sentence_index = static_cast<int>(doc.sentences.size());
            np.start = npj[0].get<int>();
            np.end = npj[1].get<int>();
            np.is_maximal = npj[2].get<bool>();
            np.is_modifier = npj[3].get<bool>();
          } catch (const json::exception& e) {
            throw ParseError(line, std::string("np: ") + e.what());
          }
          s.np_spans.push_back(np);
        }
        doc.sentences.push_back(std::move(s));
      }
      validate_document(doc, corpus.vocabulary.size());
      seen_docs[doc.id] = corpus.documents.size();
      corpus.documents.push_back(std::move(doc));
    } else if (type == "zp") {
      ZpInstance zp;
      zp.document_id = get_field<std::string>(j, "doc", line);
      auto it = seen_docs.find(zp.document_id);
      if (it == seen_docs.end()) throw ParseError(line, "zp refers to unknown or later document '" + zp.document_id + "'");
      const Document& doc = corpus.documents[it->second];
      zp.sentence_index = get_field<int>(j, "sent", line);
      zp.gap_position = get_field<int>(j, "gap", line);
      for (const auto& cj : get_field<json>(j, "candidates", line)) {
        if (!cj.is_array() || cj.size() != 3) throw ParseError(line, "candidate must be [sent,start,end]");
        NpSpan c;
        try {
          c.sentence_index = cj[0].get<int>();
          c.start = cj[1].get<int>();
          c.end = cj[2].get<int>();
        } catch (const json::exception& e) {
          throw ParseError(line, std::string("candidate: ") + e.what());
        }
        const NpSpan* np = find_np(doc, c.sentence_index, c.start, c.end);
        if (np == nullptr) {
          throw ValidationError("document " + doc.id + ": candidate [" + std::to_string(c.sentence_index) + "," +
                                std::to_string(c.start) + "," + std::to_string(c.end) +
                                "] is not an annotated NP (line " + std::to_string(line) + ")");
        }
        zp.candidates.push_back(*np);
      }
      zp.gold_antecedents = get_field<std::vector<int>>(j, "gold", line);
      std::sort(zp.gold_antecedents.begin(), zp.gold_antecedents.end());
      zp.gold_antecedents.erase(std::unique(zp.gold_antecedents.begin(), zp.gold_antecedents.end()),
                                zp.gold_antecedents.end());
      validate_instance(zp, doc);
      corpus.instances.push_back(std::move(zp));
    } else {
      throw ParseError(line, "unknown line type '" + type + "'");
    }
  }
  corpus.reindex();
  corpus.validate();
  return corpus;
}

Corpus load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path);
  return parse_corpus(in);
}

void write_corpus(const Corpus& corpus, std::ostream& out) {
  out << json{{"type", "vocab"}, {"tokens", corpus.vocabulary.tokens()}}.dump() << '\n';
  std::map<std::string, std::vector<const ZpInstance*>> by_doc;
  for (const auto& zp : corpus.instances) by_doc[zp.document_id].push_back(&zp);
  for (const auto& doc : corpus.documents) {
    json sentences = json::array();
    for (const auto& s : doc.sentences) {
      json nps = json::array();
      for (const auto& np : s.np_spans) nps.push_back(json::array({np.start, np.end, np.is_maximal, np.is_modifier}));
      sentences.push_back(json{{"tokens", s.tokens}, {"nps", nps}});
    }
    out << json{{"type", "doc"}, {"id", doc.id}, {"source", doc.source_tag}, {"sentences", sentences}}.dump()
        << '\n';
    for (const ZpInstance* zp : by_doc[doc.id]) {
      json cands = json::array();
      for (const auto& c : zp->candidates) cands.push_back(json::array({c.sentence_index, c.start, c.end}));
      out << json{{"type", "zp"},         {"doc", zp->document_id}, {"sent", zp->sentence_index},
                  {"gap", zp->gap_position}, {"candidates", cands},   {"gold", zp->gold_antecedents}}
                 .dump()
          << '\n';
    }
  }
}

void save_corpus(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write corpus file: " + path);
  write_corpus(corpus, out);
  if (!out) throw std::runtime_error("write failed: " + path);
}

// ------------------------------------------------------- candidates

std::vector<NpSpan> extract_candidates(const Document& document, ZpLocation zp) {
  std::vector<NpSpan> out;
  const int first = std::max(0, zp.sentence_index - 2);
  for (int s = first; s <= zp.sentence_index && s < static_cast<int>(document.sentences.size()); ++s) {
    auto spans = document.sentences[static_cast<std::size_t>(s)].np_spans;
    std::stable_sort(spans.begin(), spans.end(),
                     [](const NpSpan& a, const NpSpan& b) { return a.start != b.start ? a.start < b.start : a.end < b.end; });
    for (const auto& np : spans) {
      if ((np.is_maximal || np.is_modifier) && in_window(np, zp)) out.push_back(np);
    }
  }
  return out;
}

// ------------------------------------------------------------ split

std::pair<Corpus, Corpus> split_train_dev(const Corpus& corpus, double dev_fraction, std::uint64_t seed) {
  if (!(dev_fraction >= 0.0 && dev_fraction <= 1.0)) {
    throw std::invalid_argument("dev_fraction must be in [0, 1], got " + std::to_string(dev_fraction));
  }
  const std::size_t n = corpus.instances.size();
  const auto n_dev = static_cast<std::size_t>(std::llround(dev_fraction * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  RngStream rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  std::vector<std::size_t> dev_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_dev));
  std::vector<std::size_t> train_idx(order.begin() + static_cast<std::ptrdiff_t>(n_dev), order.end());
  std::sort(dev_idx.begin(), dev_idx.end());
  std::sort(train_idx.begin(), train_idx.end());

  auto build = [&](const std::vector<std::size_t>& idx) {
    Corpus part;
    part.vocabulary = corpus.vocabulary;
    std::set<std::string> used;
    for (std::size_t i : idx) {
      part.instances.push_back(corpus.instances[i]);
      used.insert(corpus.instances[i].document_id);
    }
    for (const auto& doc : corpus.documents) {
      if (used.count(doc.id)) part.documents.push_back(doc);
    }
    part.reindex();
    return part;
  };
  return {build(train_idx), build(dev_idx)};
}

Corpus with_vocabulary(const Corpus& corpus, const Vocabulary& target) {
  Corpus out = corpus;
  out.vocabulary = target;
  std::vector<int> map(corpus.vocabulary.size(), 0);
  for (std::size_t i = 1; i < map.size(); ++i) map[i] = target.id(corpus.vocabulary.token(static_cast<int>(i)));
  for (auto& doc : out.documents) {
    for (auto& sent : doc.sentences) {
      for (auto& t : sent.tokens) t = map[static_cast<std::size_t>(t)];
    }
  }
  out.reindex();
  return out;
}

CorpusSummary summarize(const Corpus& corpus) {
  CorpusSummary s;
  s.documents = corpus.documents.size();
  for (const auto& d : corpus.documents) s.sentences += d.sentences.size();
  s.instances = corpus.instances.size();
  for (const auto& zp : corpus.instances) {
    s.candidates += zp.candidates.size();
    s.gold_links += zp.gold_antecedents.size();
  }
  return s;
}

// -------------------------------------------------------- generator

std::string toy_tokens::marker(int k) { return "<m" + std::to_string(k) + ">"; }

namespace {

struct ToyVocab {
  int anti = 0;
  int twin = 0;
  std::vector<int> markers;
  std::vector<int> fillers;
};

class ToyGenerator {
 public:
  ToyGenerator(const ToyCorpusOptions& opt, Corpus& corpus) : opt_(opt), corpus_(corpus), rng_(opt.seed) {
    auto& v = corpus_.vocabulary;
    ids_.anti = v.add(toy_tokens::kAntiMarker);
    ids_.twin = v.add(toy_tokens::kTwin);
    for (int k = 0; k < opt.n_markers; ++k) ids_.markers.push_back(v.add(toy_tokens::marker(k)));
    for (int w = static_cast<int>(v.size()); w < opt.vocab_size; ++w) ids_.fillers.push_back(v.add("w" + std::to_string(w)));
  }

  void generate() {
    for (int d = 0; d < opt_.n_docs; ++d) {
      Document doc;
      doc.id = "toy-" + std::to_string(d);
      doc.source_tag = opt_.source_tag;
      std::vector<ZpInstance> zps;
      for (int k = 0; k < opt_.zps_per_doc; ++k) {
        zps.push_back(segment(doc));
        if (twins_.first >= 0) zps.push_back(mirror(doc, zps.back()));
      }
      for (auto& zp : zps) {
        zp.document_id = doc.id;
        zp.candidates = extract_candidates(doc, zp.location());
        corpus_.instances.push_back(std::move(zp));
      }
      corpus_.documents.push_back(std::move(doc));
    }
    corpus_.reindex();
    corpus_.validate();
  }

 private:
  int filler() { return ids_.fillers[rng_.below(ids_.fillers.size())]; }

  std::vector<int> fillers(int lo, int hi) {
    std::vector<int> out(static_cast<std::size_t>(rng_.between(lo, hi)));
    for (auto& t : out) t = filler();
    return out;
  }

  std::vector<int> fresh_head(const std::vector<std::vector<int>>& taken, int tail) {
    for (;;) {
      auto content = fillers(1, 2);
      content.push_back(tail);
      if (std::find(taken.begin(), taken.end(), content) == taken.end()) return content;
    }
  }

  // Appends three sentences holding one zero pronoun and its candidates.
  // Returns the instance with gold set filled; candidates are attached by
  // the caller through extract_candidates.
  ZpInstance segment(Document& doc) {
    const int base = static_cast<int>(doc.sentences.size());
    const int n = rng_.between(opt_.min_candidates, opt_.max_candidates);
    const int g = rng_.between(std::min(opt_.min_gold, n), std::min(opt_.max_gold, n));
    const int marker = ids_.markers[rng_.below(ids_.markers.size())];

    std::vector<int> positions(static_cast<std::size_t>(n));
    std::iota(positions.begin(), positions.end(), 0);
    rng_.shuffle(std::span<int>(positions));

    std::vector<bool> gold(static_cast<std::size_t>(n), false);
    std::vector<std::vector<int>> content(static_cast<std::size_t>(n));
    // Set-dependent instances hold two identical mentions, exactly one of
    // them gold (either order). Given the gold memory, the second twin's
    // label follows from whether the first was selected.
    // Each set-dependent segment is emitted twice (see mirror), so the
    // per-segment rate is chosen to make the instance fraction match.
    const double f = opt_.set_dependent_fraction;
    const bool set_dependent = n >= 2 && g < n && rng_.bernoulli(f / (2.0 - f));
    int first = -1, second = -1;
    twins_ = {-1, -1};
    if (set_dependent) {
      twins_ = {positions[0], positions[1]};
      first = std::min(positions[0], positions[1]);
      second = std::max(positions[0], positions[1]);
      gold[static_cast<std::size_t>(rng_.bernoulli(0.5) ? first : second)] = true;
      for (int i = 2; i < g + 1; ++i) gold[static_cast<std::size_t>(positions[static_cast<std::size_t>(i)])] = true;
    } else {
      for (int i = 0; i < g; ++i) gold[static_cast<std::size_t>(positions[static_cast<std::size_t>(i)])] = true;
    }

    for (int i = 0; i < n; ++i) {
      auto& c = content[static_cast<std::size_t>(i)];
      if (i == first) {
        c = {ids_.twin, marker};
      } else if (i == second) {
        c = content[static_cast<std::size_t>(first)];
      } else {
        c = fresh_head(content, gold[static_cast<std::size_t>(i)] ? marker : ids_.anti);
      }
    }

    // Candidates fall into the three sentences in document order.
    std::vector<int> sentence_of(static_cast<std::size_t>(n));
    for (auto& s : sentence_of) s = rng_.between(0, 2);
    std::sort(sentence_of.begin(), sentence_of.end());

    ZpInstance zp;
    zp.sentence_index = base + 2;
    for (int s = 0; s < 3; ++s) {
      Sentence sent;
      sent.tokens = fillers(s == 2 ? 0 : 1, 2);
      auto place_np = [&](const std::vector<int>& tokens, bool candidate) {
        NpSpan np;
        np.sentence_index = base + s;
        np.start = static_cast<int>(sent.tokens.size());
        sent.tokens.insert(sent.tokens.end(), tokens.begin(), tokens.end());
        np.end = static_cast<int>(sent.tokens.size());
        if (candidate) {
          np.is_maximal = rng_.bernoulli(0.7);
          np.is_modifier = !np.is_maximal || rng_.bernoulli(0.2);
        }
        sent.np_spans.push_back(np);
      };
      if (rng_.bernoulli(0.3)) {
        place_np(fillers(1, 2), false);
        auto pad = fillers(1, 1);
        sent.tokens.insert(sent.tokens.end(), pad.begin(), pad.end());
      }
      for (int i = 0; i < n; ++i) {
        if (sentence_of[static_cast<std::size_t>(i)] != s) continue;
        place_np(content[static_cast<std::size_t>(i)], true);
        auto pad = fillers(s == 2 ? 0 : 1, 2);
        sent.tokens.insert(sent.tokens.end(), pad.begin(), pad.end());
      }
      if (s == 2) {
        zp.gap_position = static_cast<int>(sent.tokens.size());
        if (rng_.bernoulli(0.5)) sent.tokens.push_back(filler());
        sent.tokens.push_back(marker);
        auto tail = fillers(1, 3);
        sent.tokens.insert(sent.tokens.end(), tail.begin(), tail.end());
        // Flagged NP after the gap; the candidate window excludes it.
        if (rng_.bernoulli(0.3)) place_np(fillers(1, 2), true);
      }
      doc.sentences.push_back(std::move(sent));
    }
    for (int i = 0; i < n; ++i) {
      if (gold[static_cast<std::size_t>(i)]) zp.gold_antecedents.push_back(i);
    }
    return zp;
  }

  // Copies the segment just written with the other twin marked gold, so
  // that identical inputs carry both labelings.
  ZpInstance mirror(Document& doc, const ZpInstance& original) {
    const int base = static_cast<int>(doc.sentences.size());
    const int shift = base - (original.sentence_index - 2);
    for (int s = 0; s < 3; ++s) {
      Sentence sent = doc.sentences[static_cast<std::size_t>(base - 3 + s)];
      for (auto& np : sent.np_spans) np.sentence_index += shift;
      doc.sentences.push_back(std::move(sent));
    }
    ZpInstance zp = original;
    zp.sentence_index += shift;
    const auto [a, b] = std::minmax(twins_.first, twins_.second);
    for (auto& gidx : zp.gold_antecedents) {
      if (gidx == a) gidx = b; else if (gidx == b) gidx = a;
    }
    std::sort(zp.gold_antecedents.begin(), zp.gold_antecedents.end());
    twins_ = {-1, -1};
    return zp;
  }

  const ToyCorpusOptions& opt_;
  Corpus& corpus_;
  std::pair<int, int> twins_{-1, -1};
  RngStream rng_;
  ToyVocab ids_;
};

}  // namespace

Corpus generate_toy_corpus(const ToyCorpusOptions& options) {
  if (options.min_candidates < 1 || options.min_candidates > options.max_candidates) {
    throw std::invalid_argument("candidate range must be non-empty and positive");
  }
  if (options.min_gold < 1 || options.min_gold > options.max_gold) {
    throw std::invalid_argument("gold range must be non-empty and positive");
  }
  if (options.n_markers < 1) throw std::invalid_argument("n_markers must be positive");
  if (options.vocab_size < 3 + options.n_markers + 6) {
    throw std::invalid_argument("vocab_size must leave at least 6 filler tokens");
  }
  if (options.zps_per_doc < 1) throw std::invalid_argument("zps_per_doc must be positive");
  Corpus corpus;
  ToyGenerator(options, corpus).generate();
  return corpus;
}

}  // namespace zpr
