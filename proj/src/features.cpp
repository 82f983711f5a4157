#include "zpr/features.hpp"

#include <stdexcept>
#include <vector>

namespace zpr {

namespace {

std::vector<int> span_tokens(const Document& doc, const NpSpan& np) {
  const auto& toks = doc.sentences[static_cast<std::size_t>(np.sentence_index)].tokens;
  return {toks.begin() + np.start, toks.begin() + np.end};
}

}  // namespace

int token_distance(const Document& document, ZpLocation zp, const NpSpan& span) {
  if (span.sentence_index == zp.sentence_index) return zp.gap_position - span.end;
  int dist = static_cast<int>(document.sentences[static_cast<std::size_t>(span.sentence_index)].tokens.size()) - span.end;
  for (int s = span.sentence_index + 1; s < zp.sentence_index; ++s) {
    dist += static_cast<int>(document.sentences[static_cast<std::size_t>(s)].tokens.size());
  }
  return dist + zp.gap_position;
}

Vector extract_features(const Document& document, ZpLocation zp, std::span<const NpSpan> candidates,
                        std::size_t index) {
  if (index >= candidates.size()) throw std::out_of_range("extract_features: candidate index");
  const NpSpan& c = candidates[index];
  Vector f(kNumFeatures, 0.0);

  const int sent_dist = zp.sentence_index - c.sentence_index;
  if (sent_dist < 0 || sent_dist > 2) throw std::invalid_argument("extract_features: candidate outside window");
  f[static_cast<std::size_t>(sent_dist)] = 1.0;

  const int tok = token_distance(document, zp, c);
  f[tok <= 2 ? 3 : tok <= 5 ? 4 : tok <= 10 ? 5 : 6] = 1.0;

  if (c.start == 0) f[7] = 1.0;
  if (c.length() > 2) f[8] = 1.0;

  // Nearest: smallest token distance, ties to the later candidate.
  std::size_t nearest = 0;
  int best = token_distance(document, zp, candidates[0]);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const int d = token_distance(document, zp, candidates[i]);
    if (d <= best) {
      best = d;
      nearest = i;
    }
  }
  if (nearest == index) f[9] = 1.0;
  if (index == 0) f[10] = 1.0;

  const auto own = span_tokens(document, c);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (i != index && span_tokens(document, candidates[i]) == own) {
      f[11] = 1.0;
      break;
    }
  }
  if (sent_dist == 0) f[12] = 1.0;
  return f;
}

}  // namespace zpr
