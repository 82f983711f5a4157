#pragma once

#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "zpr/corpus.hpp"
#include "zpr/math.hpp"
#include "zpr/model.hpp"
#include "zpr/rng.hpp"
#include "zpr/training.hpp"

namespace zpr::testing {

// Five sentences; the zero pronoun sits in sentence 4 before token 2.
// Annotated NPs: s0 [0,1); s1 [0,2), [3,4) unflagged; s2 [0,1) modifier;
// s3 [1,2); s4 [0,1), [1,2) unflagged, [3,4) after the gap.
inline const char* kHandCorpus =
    R"({"type":"vocab","tokens":["a","b","c","d","e","f","g","h","i","j"]}
{"type":"doc","id":"d1","source":"nw","sentences":[{"tokens":[1,2,3],"nps":[[0,1,true,false]]},{"tokens":[4,5,6,7],"nps":[[0,2,true,false],[3,4,false,false]]},{"tokens":[2,3,8],"nps":[[0,1,false,true]]},{"tokens":[9,1,2],"nps":[[1,2,true,false]]},{"tokens":[5,6,7,8,9],"nps":[[0,1,true,false],[1,2,false,false],[3,4,true,false]]}]}
{"type":"zp","doc":"d1","sent":4,"gap":2,"candidates":[[2,0,1],[3,1,2],[4,0,1]],"gold":[1]}
)";

inline Corpus corpus_from(const std::string& text) {
  std::istringstream in(text);
  return parse_corpus(in);
}

inline Corpus hand_corpus() { return corpus_from(kHandCorpus); }

inline ModelConfig tiny_config(std::size_t vocab_size) {
  ModelConfig c;
  c.vocab_size = vocab_size;
  c.d_emb = 4;
  c.d_hidden = 3;
  c.hidden1 = 5;
  c.hidden2 = 4;
  return c;
}

// Weights and biases uniform in [-scale, scale].
inline Model tiny_model(std::size_t vocab_size, std::uint64_t seed, double scale = 0.5) {
  Model m(tiny_config(vocab_size));
  RngStream rng(seed);
  for (auto& p : m.params()) {
    for (auto& v : p.value.span()) v = rng.uniform(-scale, scale);
  }
  return m;
}

inline Model zero_model(std::size_t vocab_size) { return Model(tiny_config(vocab_size)); }

inline Vector random_vector(std::size_t n, RngStream& rng, double scale = 1.0) {
  Vector v(n);
  for (auto& x : v) x = rng.uniform(-scale, scale);
  return v;
}

// Central differences of a scalar function of a plain vector.
inline Vector numeric_grad(const std::function<double(const Vector&)>& f, Vector x, double eps = 1e-5) {
  Vector g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + eps;
    const double up = f(x);
    x[i] = saved - eps;
    const double down = f(x);
    x[i] = saved;
    g[i] = (up - down) / (2 * eps);
  }
  return g;
}

inline double worst_group_error(const std::vector<Tensor>& a, const std::vector<Tensor>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, relative_error(a[i].span(), b[i].span()));
  return worst;
}

// Few epochs, narrow layers: seconds per run.
inline TrainConfig small_train_config(int pretrain_epochs = 3, int rl_epochs = 2) {
  TrainConfig t;
  t.pretrain.epochs = pretrain_epochs;
  t.rl.epochs = rl_epochs;
  t.pretrain.batch = t.rl.batch = 16;
  t.pretrain.learning_rate = 0.05;
  t.rl.learning_rate = 0.01;
  t.d_emb = 8;
  t.d_hidden = 8;
  t.hidden1 = 16;
  t.hidden2 = 16;
  return t;
}

inline Corpus small_toy_corpus(int n_docs = 20, double set_dependent = 0.3) {
  ToyCorpusOptions opt;
  opt.n_docs = n_docs;
  opt.set_dependent_fraction = set_dependent;
  return generate_toy_corpus(opt);
}

// Tokens of `span` as strings.
inline std::vector<std::string> span_tokens(const Corpus& c, const Document& d, const NpSpan& s) {
  std::vector<std::string> out;
  const auto& toks = d.sentences[static_cast<std::size_t>(s.sentence_index)].tokens;
  for (int i = s.start; i < s.end; ++i) out.push_back(c.vocabulary.token(toks[static_cast<std::size_t>(i)]));
  return out;
}

}  // namespace zpr::testing
