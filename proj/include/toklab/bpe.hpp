#pragma once

#include <cstddef>
#include <span>
#include <string_view>

#include "toklab/textio.hpp"
#include "toklab/vocab.hpp"

namespace toklab {

/// Byte-pair encoding trained bottom-up from the corpus alphabet. Each step
/// merges the adjacent pair with the highest word-frequency-weighted count;
/// equal counts go to the lexicographically smallest (left, right). Stops at
/// `target_size` tokens or when no pair is left (with a warning).
TokenizerModel train_bpe(std::span<const Corpus> corpora, std::size_t target_size,
                         const TrainingOptions& options = {});

/// Ordered merge application: repeatedly fires the lowest-ranked applicable
/// merge, leftmost occurrence first.
Tokenization encode_bpe(const TokenizerModel& model, std::string_view sequence);

}  // namespace toklab
