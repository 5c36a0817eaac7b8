#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "toklab/textio.hpp"
#include "toklab/vocab.hpp"

namespace toklab {

namespace unigram {

struct Segmentation {
  std::vector<std::string> tokens;
  double log_prob = 0.0;
};

/// Maximum-likelihood segmentation of `word` whose character boundaries are
/// `offsets` (byte offsets, size n + 1). Single characters absent from the
/// lexicon score `fallback_log_prob`. `excluded` masks one token. Ties go to
/// fewer tokens, then to the longest leftmost token.
Segmentation viterbi(const StringMap<double>& log_probs, std::size_t max_chars,
                     double fallback_log_prob, std::string_view word,
                     std::span<const std::size_t> offsets, std::string_view excluded = {});

/// Per prune round diagnostics, recorded when a trace is passed to train_uni.
struct PruneRound {
  std::size_t lexicon_before = 0;
  std::size_t pruned = 0;
  double log_likelihood_before = 0.0;  // corpus Viterbi log-likelihood
  double log_likelihood_after = 0.0;   // same probabilities, pruned tokens masked
  double summed_loss = 0.0;            // sum of per-token leave-one-out losses
  double probability_mass = 0.0;       // sum of exp(log p) after the EM rounds
};

struct TrainingTrace {
  std::size_t seed_size = 0;
  std::vector<PruneRound> rounds;
  double final_probability_mass = 0.0;
};

}  // namespace unigram

/// UnigramLM training: seed lexicon of all characters plus the most useful
/// substrings, Viterbi EM, and leave-one-out likelihood-loss pruning until the
/// lexicon fits `target_size`.
TokenizerModel train_uni(std::span<const Corpus> corpora, std::size_t target_size,
                         const TrainingOptions& options = {},
                         unigram::TrainingTrace* trace = nullptr);

/// Viterbi maximum-likelihood segmentation under the model's lexicon.
Tokenization encode_uni(const TokenizerModel& model, std::string_view sequence);

}  // namespace toklab
