#include <doctest.h>

#include <set>

#include "helpers.hpp"
#include "zpr/encoders.hpp"
#include "zpr/features.hpp"

using namespace zpr;
using zpr::testing::corpus_from;
using zpr::testing::hand_corpus;

namespace {

std::set<std::size_t> bits(const Vector& f) {
  std::set<std::size_t> out;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] == 1.0) out.insert(i);
  }
  return out;
}

}  // namespace

TEST_SUITE("features") {

TEST_CASE("hand fixture: bits applied from the definitions") {
  const Corpus c = hand_corpus();
  const ZpInstance& zp = c.instances[0];
  const Document& d = c.document_of(zp);
  std::span<const NpSpan> cands(zp.candidates);

  // Nearest, same sentence, one token before the gap, sentence-initial.
  CHECK(token_distance(d, zp.location(), cands[2]) == 1);
  CHECK(bits(extract_features(d, zp.location(), cands, 2)) == std::set<std::size_t>{0, 3, 7, 9, 12});
  // One sentence back: 1 token left in sentence 3 plus 2 before the gap.
  CHECK(token_distance(d, zp.location(), cands[1]) == 3);
  CHECK(bits(extract_features(d, zp.location(), cands, 1)) == std::set<std::size_t>{1, 4});
  // Two sentences back: 2 + 3 + 2 tokens; first candidate.
  CHECK(token_distance(d, zp.location(), cands[0]) == 7);
  CHECK(bits(extract_features(d, zp.location(), cands, 0)) == std::set<std::size_t>{2, 5, 7, 10});
  CHECK_THROWS_AS(extract_features(d, zp.location(), cands, 3), std::out_of_range);
}

TEST_CASE("distance buckets and long spans") {
  const Corpus c = corpus_from(
      R"({"type":"vocab","tokens":["a","b","c"]}
{"type":"doc","id":"x","sentences":[{"tokens":[1,2,3,1,2,3,1,2,3,1,2,3,1,2,3],"nps":[[0,3,true,false],[3,4,true,false],[8,9,true,false]]}]}
{"type":"zp","doc":"x","sent":0,"gap":15,"candidates":[[0,0,3],[0,3,4],[0,8,9]],"gold":[0]}
)");
  const ZpInstance& zp = c.instances[0];
  const Document& d = c.document_of(zp);
  std::span<const NpSpan> cands(zp.candidates);
  const auto f0 = bits(extract_features(d, zp.location(), cands, 0));
  CHECK(f0.count(6));  // 12 tokens
  CHECK(f0.count(8));  // three-token span
  CHECK_FALSE(f0.count(11));
  CHECK(bits(extract_features(d, zp.location(), cands, 1)) == std::set<std::size_t>{0, 6, 12});
  CHECK(bits(extract_features(d, zp.location(), cands, 2)) == std::set<std::size_t>{0, 5, 9, 12});
}

TEST_CASE("lexically identical candidates both carry bit 11") {
  const Corpus c = corpus_from(
      R"({"type":"vocab","tokens":["a","b","c"]}
{"type":"doc","id":"x","sentences":[{"tokens":[1,2,1,3],"nps":[[0,1,true,false],[1,2,true,false],[2,3,true,false]]}]}
{"type":"zp","doc":"x","sent":0,"gap":4,"candidates":[[0,0,1],[0,1,2],[0,2,3]],"gold":[0]}
)");
  const ZpInstance& zp = c.instances[0];
  const Document& d = c.document_of(zp);
  std::span<const NpSpan> cands(zp.candidates);
  CHECK(extract_features(d, zp.location(), cands, 0)[11] == 1.0);
  CHECK(extract_features(d, zp.location(), cands, 1)[11] == 0.0);
  CHECK(extract_features(d, zp.location(), cands, 2)[11] == 1.0);
}

TEST_CASE("nearest ties resolve to the later candidate") {
  const Corpus c = corpus_from(
      R"({"type":"vocab","tokens":["a","b","c"]}
{"type":"doc","id":"x","sentences":[{"tokens":[1,2,3],"nps":[[0,2,true,false],[1,2,false,true]]}]}
{"type":"zp","doc":"x","sent":0,"gap":3,"candidates":[[0,0,2],[0,1,2]],"gold":[0]}
)");
  const ZpInstance& zp = c.instances[0];
  const Document& d = c.document_of(zp);
  std::span<const NpSpan> cands(zp.candidates);
  CHECK(extract_features(d, zp.location(), cands, 0)[9] == 0.0);
  CHECK(extract_features(d, zp.location(), cands, 1)[9] == 1.0);
}

TEST_CASE("group exclusivity and per-instance uniqueness over a toy corpus") {
  ToyCorpusOptions opt;
  opt.n_docs = 80;
  const Corpus c = generate_toy_corpus(opt);
  const int twin = c.vocabulary.id(toy_tokens::kTwin);
  std::size_t twin_hits = 0;
  for (const auto& zp : c.instances) {
    const Document& d = c.document_of(zp);
    std::span<const NpSpan> cands(zp.candidates);
    int nearest = 0, first = 0;
    for (std::size_t i = 0; i < cands.size(); ++i) {
      const Vector f = extract_features(d, zp.location(), cands, i);
      REQUIRE(f.size() == kNumFeatures);
      for (double v : f) CHECK((v == 0.0 || v == 1.0));
      CHECK(f[0] + f[1] + f[2] == 1.0);
      CHECK(f[3] + f[4] + f[5] + f[6] == 1.0);
      CHECK(f[12] == f[0]);
      nearest += static_cast<int>(f[9]);
      first += static_cast<int>(f[10]);
      CHECK(f == extract_features(d, zp.location(), cands, i));
      const auto ids = span_token_ids(d, cands[i]);
      if (std::find(ids.begin(), ids.end(), twin) != ids.end()) {
        CHECK(f[11] == 1.0);
        ++twin_hits;
      }
    }
    CHECK(nearest == 1);
    CHECK(first == 1);
  }
  CHECK(twin_hits > 0);
}

TEST_CASE("feature names are unique") {
  std::set<std::string_view> names(kFeatureNames.begin(), kFeatureNames.end());
  CHECK(names.size() == kNumFeatures);
}

}  // TEST_SUITE
