#include "zpr/encoders.hpp"

#include <algorithm>
#include <stdexcept>

#include "zpr/math.hpp"

namespace zpr {

std::vector<Vector> embed(const Model& model, std::span<const int> ids) {
  const Tensor& table = model.value(model.embedding());
  std::vector<Vector> out;
  out.reserve(ids.size());
  for (int id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= table.rows()) {
      throw std::out_of_range("embed: token id " + std::to_string(id) + " outside table of " +
                              std::to_string(table.rows()));
    }
    auto row = table.row(static_cast<std::size_t>(id));
    out.emplace_back(row.begin(), row.end());
  }
  return out;
}

void embed_backward(Model& model, std::span<const int> ids, std::span<const Vector> d_vectors) {
  if (ids.size() != d_vectors.size()) throw DimensionError("embed_backward: size mismatch");
  Tensor& g = model.grad(model.embedding());
  for (std::size_t i = 0; i < ids.size(); ++i) axpy(1.0, d_vectors[i], g.row(static_cast<std::size_t>(ids[i])));
}

RnnTrace rnn_encode(const Model& model, const RnnCellRef& cell, std::vector<Vector> inputs, bool reversed) {
  RnnTrace tr;
  tr.reversed = reversed;
  tr.d_hidden = model.config().d_hidden;
  if (reversed) std::reverse(inputs.begin(), inputs.end());
  tr.inputs = std::move(inputs);
  const Tensor& Wx = model.value(cell.Wx);
  const Tensor& Wh = model.value(cell.Wh);
  const Tensor& b = model.value(cell.b);
  Vector h(tr.d_hidden, 0.0);
  for (const auto& x : tr.inputs) {
    Vector pre = affine(Wx, x, b.span());
    const Vector rec = affine(Wh, h, Vector(tr.d_hidden, 0.0));
    axpy(1.0, rec, pre);
    h = tanh_elem(pre);
    tr.hidden.push_back(h);
  }
  return tr;
}

std::vector<Vector> rnn_backward(Model& model, const RnnCellRef& cell, const RnnTrace& trace,
                                 std::span<const double> d_final) {
  const std::size_t T = trace.inputs.size();
  std::vector<Vector> d_inputs(T);
  if (T == 0) return d_inputs;
  const Tensor& Wx = model.value(cell.Wx);
  const Tensor& Wh = model.value(cell.Wh);
  Tensor& gWx = model.grad(cell.Wx);
  Tensor& gWh = model.grad(cell.Wh);
  Tensor& gb = model.grad(cell.b);
  const Vector zero(trace.d_hidden, 0.0);
  Vector dh(d_final.begin(), d_final.end());
  for (std::size_t t = T; t-- > 0;) {
    const Vector dpre = tanh_backward(trace.hidden[t], dh);
    d_inputs[t] = affine_backward_into(Wx, trace.inputs[t], dpre, gWx, gb);
    // The bias gradient is already counted once above.
    Tensor no_bias(trace.d_hidden);
    dh = affine_backward_into(Wh, t > 0 ? trace.hidden[t - 1] : zero, dpre, gWh, no_bias);
  }
  if (trace.reversed) std::reverse(d_inputs.begin(), d_inputs.end());
  return d_inputs;
}

std::vector<int> preceding_context(const Document& doc, ZpLocation zp) {
  std::vector<int> ids;
  for (int s = std::max(0, zp.sentence_index - 2); s < zp.sentence_index; ++s) {
    const auto& t = doc.sentences[static_cast<std::size_t>(s)].tokens;
    ids.insert(ids.end(), t.begin(), t.end());
  }
  const auto& t = doc.sentences[static_cast<std::size_t>(zp.sentence_index)].tokens;
  ids.insert(ids.end(), t.begin(), t.begin() + zp.gap_position);
  return ids;
}

std::vector<int> following_context(const Document& doc, ZpLocation zp) {
  const auto& t = doc.sentences[static_cast<std::size_t>(zp.sentence_index)].tokens;
  return {t.begin() + zp.gap_position, t.end()};
}

ZpEncoding encode_zp(const Model& model, const Document& doc, ZpLocation zp) {
  ZpEncoding enc;
  enc.preceding_ids = preceding_context(doc, zp);
  enc.following_ids = following_context(doc, zp);
  enc.pre = rnn_encode(model, model.zp_pre(), embed(model, enc.preceding_ids), false);
  enc.post = rnn_encode(model, model.zp_post(), embed(model, enc.following_ids), true);
  enc.vec = concat({enc.pre.final_state(), enc.post.final_state()});
  return enc;
}

void encode_zp_backward(Model& model, const ZpEncoding& enc, std::span<const double> d_vec) {
  const std::size_t d = model.config().d_hidden;
  if (d_vec.size() != 2 * d) throw DimensionError("encode_zp_backward: gradient size");
  auto d_pre = rnn_backward(model, model.zp_pre(), enc.pre, d_vec.subspan(0, d));
  embed_backward(model, enc.preceding_ids, d_pre);
  auto d_post = rnn_backward(model, model.zp_post(), enc.post, d_vec.subspan(d, d));
  embed_backward(model, enc.following_ids, d_post);
}

std::vector<int> span_token_ids(const Document& doc, const NpSpan& span) {
  const auto& t = doc.sentences[static_cast<std::size_t>(span.sentence_index)].tokens;
  return {t.begin() + span.start, t.begin() + span.end};
}

NpEncoding encode_np(const Model& model, const Document& doc, const NpSpan& span) {
  NpEncoding enc;
  enc.ids = span_token_ids(doc, span);
  enc.trace = rnn_encode(model, model.np_cell(), embed(model, enc.ids), false);
  enc.vec = enc.trace.final_state();
  return enc;
}

void encode_np_backward(Model& model, const NpEncoding& enc, std::span<const double> d_vec) {
  auto d_in = rnn_backward(model, model.np_cell(), enc.trace, d_vec);
  embed_backward(model, enc.ids, d_in);
}

}  // namespace zpr
