#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>

#include "toklab/textio.hpp"
#include "toklab/vocab.hpp"

namespace toklab {

/// WordPiece training. Words start as first character plus marker-prefixed
/// continuation characters; each step merges the pair maximizing
/// count(ab) / (count(a) * count(b)), ties broken lexicographically.
TokenizerModel train_wpc(std::span<const Corpus> corpora, std::size_t target_size,
                         const TrainingOptions& options = {});

/// Greedy longest-match-first, left to right. Non-initial positions match
/// marker-prefixed tokens; unmatched positions emit a single character.
/// Sequences longer than kMaxWordPieceInput characters are rejected.
Tokenization encode_wpc(const TokenizerModel& model, std::string_view sequence);

inline constexpr std::size_t kMaxWordPieceInput = 256;

/// Token produced by merging two WordPiece units: "un" + "##der" -> "under".
std::string wordpiece_join(std::string_view left, std::string_view right,
                           std::string_view marker = kWordPieceMarker);

}  // namespace toklab
