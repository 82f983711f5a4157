#include <doctest.h>

#include "helpers.hpp"
#include "zpr/encoders.hpp"

using namespace zpr;
using zpr::testing::corpus_from;
using zpr::testing::hand_corpus;
using zpr::testing::random_vector;
using zpr::testing::tiny_model;
using zpr::testing::worst_group_error;

namespace {

constexpr double kTol = 1e-4;

// Loss = up . f(model), differentiated both ways.
template <typename Forward, typename Backward>
double check_linear_probe(Model& model, const Vector& up, Forward forward, Backward backward) {
  model.params().zero_grads();
  backward(model, up);
  const auto analytic = model.params().grads();
  model.params().zero_grads();
  const auto numeric =
      finite_diff_grad([&](const ParamStore&) { return dot(up, forward(model)); }, model.params(), 1e-5);
  return worst_group_error(analytic, numeric);
}

}  // namespace

TEST_SUITE("encoders") {

TEST_CASE("embedding lookup") {
  Model m = tiny_model(10, 1);
  CHECK(embed(m, std::vector<int>{}).empty());
  const std::vector<int> ids{3, 3};
  const auto v = embed(m, ids);
  REQUIRE(v.size() == 2);
  CHECK(v[0] == v[1]);
  const auto row = m.value(m.embedding()).row(3);
  CHECK(v[0] == Vector(row.begin(), row.end()));
  CHECK_THROWS_AS(embed(m, std::vector<int>{10}), std::out_of_range);
  CHECK_THROWS_AS(embed(m, std::vector<int>{-1}), std::out_of_range);
}

TEST_CASE("repeated ids accumulate gradient additively") {
  Model m = tiny_model(10, 1);
  const std::vector<int> ids{3, 3};
  const Vector g{0.5, -1.0, 2.0, 0.25};
  const std::vector<Vector> d{g, g};
  embed_backward(m, ids, d);
  const auto row = m.grad(m.embedding()).row(3);
  for (std::size_t k = 0; k < g.size(); ++k) CHECK(row[k] == 2 * g[k]);
  for (double x : m.grad(m.embedding()).row(4)) CHECK(x == 0.0);
}

TEST_CASE("embedding gradient matches finite differences") {
  Model m = tiny_model(10, 4);
  RngStream rng(8);
  const std::vector<int> ids{1, 7, 1, 0, 9};
  const Vector up = random_vector(ids.size() * 4, rng);
  auto flat = [&](const Model& model) {
    Vector out;
    for (const auto& v : embed(model, ids)) out.insert(out.end(), v.begin(), v.end());
    return out;
  };
  const double err = check_linear_probe(m, up, flat, [&](Model& model, const Vector& u) {
    std::vector<Vector> d;
    for (std::size_t i = 0; i < ids.size(); ++i) d.emplace_back(u.begin() + 4 * i, u.begin() + 4 * (i + 1));
    embed_backward(model, ids, d);
  });
  CHECK(err <= kTol);
}

TEST_CASE("recurrent base cases") {
  Model m = tiny_model(10, 2);
  const RnnTrace empty = rnn_encode(m, m.np_cell(), {}, false);
  CHECK(empty.final_state() == Vector(3, 0.0));
  CHECK(rnn_backward(m, m.np_cell(), empty, Vector(3, 1.0)).empty());

  Model z = tiny_model(10, 2);
  z.params()[z.np_cell().Wx].value.zero();
  z.params()[z.np_cell().b].value.zero();
  CHECK(rnn_encode(z, z.np_cell(), {Vector{1, 2, 3, 4}}, false).final_state() == Vector(3, 0.0));

  // One step: tanh(Wx x + b).
  const Vector x{0.1, -0.2, 0.3, 0.4};
  const Vector expected = tanh_elem(affine(m.value(m.np_cell().Wx), x, m.value(m.np_cell().b).span()));
  CHECK(rnn_encode(m, m.np_cell(), {x}, false).final_state() == expected);
  CHECK(rnn_encode(m, m.np_cell(), {x}, true).final_state() == expected);
}

TEST_CASE("reversed pass equals forward pass over the reversed inputs") {
  Model m = tiny_model(10, 3);
  RngStream rng(1);
  std::vector<Vector> xs;
  for (int i = 0; i < 5; ++i) xs.push_back(random_vector(4, rng));
  std::vector<Vector> rev(xs.rbegin(), xs.rend());
  CHECK(rnn_encode(m, m.zp_post(), xs, true).final_state() == rnn_encode(m, m.zp_post(), rev, false).final_state());
}

TEST_CASE("BPTT matches finite differences for lengths 1..8") {
  for (std::size_t len = 1; len <= 8; ++len) {
    for (bool reversed : {false, true}) {
      CAPTURE(len);
      CAPTURE(reversed);
      Model m = tiny_model(10, 10 + len);
      RngStream rng(len);
      std::vector<Vector> xs;
      for (std::size_t i = 0; i < len; ++i) xs.push_back(random_vector(4, rng));
      const Vector up = random_vector(3, rng);

      const double err = check_linear_probe(
          m, up, [&](const Model& model) { return rnn_encode(model, model.np_cell(), xs, reversed).final_state(); },
          [&](Model& model, const Vector& u) {
            rnn_backward(model, model.np_cell(), rnn_encode(model, model.np_cell(), xs, reversed), u);
          });
      CHECK(err <= kTol);

      // Input gradients, in original order.
      const RnnTrace tr = rnn_encode(m, m.np_cell(), xs, reversed);
      const auto d_in = rnn_backward(m, m.np_cell(), tr, up);
      for (std::size_t i = 0; i < len; ++i) {
        const Vector numeric = zpr::testing::numeric_grad(
            [&](const Vector& xi) {
              auto copy = xs;
              copy[i] = xi;
              return dot(up, rnn_encode(m, m.np_cell(), copy, reversed).final_state());
            },
            xs[i]);
        CHECK(relative_error(d_in[i], numeric) <= kTol);
      }
    }
  }
}

TEST_CASE("context windows") {
  const Corpus c = hand_corpus();
  const Document& d = c.documents[0];
  CHECK(preceding_context(d, {4, 2}) == std::vector<int>{2, 3, 8, 9, 1, 2, 5, 6});
  CHECK(following_context(d, {4, 2}) == std::vector<int>{7, 8, 9});
  CHECK(preceding_context(d, {0, 0}).empty());
  CHECK(following_context(d, {4, 5}).empty());
  CHECK(preceding_context(d, {1, 1}) == std::vector<int>{1, 2, 3, 4});
}

TEST_CASE("zero pronoun encoding: empty halves and composition") {
  const Corpus c = hand_corpus();
  const Document& d = c.documents[0];
  Model m = tiny_model(c.vocabulary.size(), 5);

  const ZpEncoding start = encode_zp(m, d, {0, 0});
  REQUIRE(start.vec.size() == 6);
  for (std::size_t k = 0; k < 3; ++k) CHECK(start.vec[k] == 0.0);

  const ZpEncoding end = encode_zp(m, d, {4, 5});
  for (std::size_t k = 3; k < 6; ++k) CHECK(end.vec[k] == 0.0);

  const ZpEncoding enc = encode_zp(m, d, {4, 2});
  const Vector pre = rnn_encode(m, m.zp_pre(), embed(m, preceding_context(d, {4, 2})), false).final_state();
  const Vector post = rnn_encode(m, m.zp_post(), embed(m, following_context(d, {4, 2})), true).final_state();
  CHECK(enc.vec == concat({pre, post}));
}

TEST_CASE("zero pronoun encoder gradient") {
  const Corpus c = hand_corpus();
  const Document& d = c.documents[0];
  Model m = tiny_model(c.vocabulary.size(), 6);
  RngStream rng(3);
  const Vector up = random_vector(6, rng);
  const double err = check_linear_probe(
      m, up, [&](const Model& model) { return encode_zp(model, d, {4, 2}).vec; },
      [&](Model& model, const Vector& u) { encode_zp_backward(model, encode_zp(model, d, {4, 2}), u); });
  CHECK(err <= kTol);
}

TEST_CASE("NP encoding is content-only") {
  const Corpus c = corpus_from(
      R"({"type":"vocab","tokens":["a","b","c","d"]}
{"type":"doc","id":"x","sentences":[{"tokens":[1,2,3],"nps":[[1,3,true,false]]},{"tokens":[4,4,2,3,1],"nps":[[2,4,true,false],[4,5,true,false]]}]}
)");
  const Document& d = c.documents[0];
  Model m = tiny_model(c.vocabulary.size(), 7);
  const NpSpan a{0, 1, 3, true, false};
  const NpSpan b{1, 2, 4, true, false};
  CHECK(encode_np(m, d, a).vec == encode_np(m, d, b).vec);
  CHECK(encode_np(m, d, a).vec.size() == 3);

  const NpSpan single{1, 4, 5, true, false};
  const Vector x = embed(m, std::vector<int>{1})[0];
  CHECK(encode_np(m, d, single).vec ==
        tanh_elem(affine(m.value(m.np_cell().Wx), x, m.value(m.np_cell().b).span())));
}

TEST_CASE("NP encoder gradient reaches the embeddings") {
  const Corpus c = hand_corpus();
  const Document& d = c.documents[0];
  Model m = tiny_model(c.vocabulary.size(), 9);
  RngStream rng(4);
  const Vector up = random_vector(3, rng);
  const NpSpan span{1, 0, 2, true, false};
  const double err = check_linear_probe(
      m, up, [&](const Model& model) { return encode_np(model, d, span).vec; },
      [&](Model& model, const Vector& u) { encode_np_backward(model, encode_np(model, d, span), u); });
  CHECK(err <= kTol);
  encode_np_backward(m, encode_np(m, d, span), up);
  double norm = 0.0;
  for (double g : m.grad(m.embedding()).row(4)) norm += std::abs(g);
  CHECK(norm > 0.0);
}

}  // TEST_SUITE
