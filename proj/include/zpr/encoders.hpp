#pragma once

#include <span>
#include <vector>

#include "zpr/corpus.hpp"
#include "zpr/model.hpp"

namespace zpr {

// Rows of the embedding table for `ids`. Throws std::out_of_range for ids
// outside the table.
std::vector<Vector> embed(const Model& model, std::span<const int> ids);
// Adds d_vectors[i] to the gradient row of ids[i]; repeated ids accumulate.
void embed_backward(Model& model, std::span<const int> ids, std::span<const Vector> d_vectors);

// Forward record of one recurrent pass. `inputs` and `hidden` are kept in
// processing order: hidden[t] = tanh(Wx inputs[t] + Wh hidden[t-1] + b),
// with the initial state zero.
struct RnnTrace {
  std::vector<Vector> inputs;
  std::vector<Vector> hidden;
  bool reversed = false;
  std::size_t d_hidden = 0;

  Vector final_state() const { return hidden.empty() ? Vector(d_hidden, 0.0) : hidden.back(); }
};

RnnTrace rnn_encode(const Model& model, const RnnCellRef& cell, std::vector<Vector> inputs, bool reversed);
// Backpropagation through time from a gradient on the final state. Returns
// one input gradient per original (unreversed) input position.
std::vector<Vector> rnn_backward(Model& model, const RnnCellRef& cell, const RnnTrace& trace,
                                 std::span<const double> d_final);

struct ZpEncoding {
  std::vector<int> preceding_ids;  // left to right
  std::vector<int> following_ids;  // left to right; encoded right to left
  RnnTrace pre;
  RnnTrace post;
  Vector vec;  // concat(pre final, post final)
};

// Context words of a zero pronoun: the preceding text spans the two
// sentences before the pronoun's sentence plus its tokens before the gap;
// the following text is the rest of the pronoun's sentence.
std::vector<int> preceding_context(const Document& doc, ZpLocation zp);
std::vector<int> following_context(const Document& doc, ZpLocation zp);

ZpEncoding encode_zp(const Model& model, const Document& doc, ZpLocation zp);
void encode_zp_backward(Model& model, const ZpEncoding& enc, std::span<const double> d_vec);

struct NpEncoding {
  std::vector<int> ids;
  RnnTrace trace;
  Vector vec;
};

std::vector<int> span_token_ids(const Document& doc, const NpSpan& span);
NpEncoding encode_np(const Model& model, const Document& doc, const NpSpan& span);
void encode_np_backward(Model& model, const NpEncoding& enc, std::span<const double> d_vec);

}  // namespace zpr
