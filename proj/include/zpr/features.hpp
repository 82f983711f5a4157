#pragma once

#include <array>
#include <span>
#include <string_view>

#include "zpr/corpus.hpp"
#include "zpr/tensor.hpp"

namespace zpr {

inline constexpr std::size_t kNumFeatures = 13;

// Bumped whenever the list below changes; checkpoints carry it.
inline constexpr std::string_view kFeatureVersion = "posstruct13-v1";

inline constexpr std::array<std::string_view, kNumFeatures> kFeatureNames = {
    "sent_dist_0",        "sent_dist_1",     "sent_dist_2",        "tok_dist_0_2",  "tok_dist_3_5",
    "tok_dist_6_10",      "tok_dist_gt_10",  "sentence_initial",   "long_span",     "nearest_candidate",
    "first_candidate",    "lexical_repeat",  "same_sentence",
};

// Tokens between the end of `span` and the gap.
int token_distance(const Document& document, ZpLocation zp, const NpSpan& span);

// Binary features of candidate `index` among `candidates`, each entry
// 0.0 or 1.0, in kFeatureNames order.
Vector extract_features(const Document& document, ZpLocation zp, std::span<const NpSpan> candidates,
                        std::size_t index);

}  // namespace zpr
