#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "toklab/vocab.hpp"

namespace toklab::detail {

enum class PairScore {
  frequency,   // count(ab)
  likelihood,  // count(ab) / (count(a) * count(b))
};

/// Words as sequences of initial unit ids, with type frequencies.
struct MergeCorpus {
  std::vector<std::string> units;        // id -> string
  std::vector<std::vector<int>> words;   // unit ids per word type
  std::vector<std::uint64_t> freqs;
};

struct MergeTrainerConfig {
  PairScore score = PairScore::frequency;
  std::size_t target_size = 0;
  std::size_t max_token_chars = 32;
  /// Joins two unit strings into the merged token.
  std::function<std::string(const std::string&, const std::string&)> join;
  /// Character count of a unit, continuation marker excluded.
  std::function<std::size_t(const std::string&)> chars;
};

/// Greedy pair merging with a lazily invalidated max-heap. Appends merged
/// tokens to `vocab` until it reaches the target size and returns the merges
/// in learned order. Ties on score break lexicographically on (left, right).
std::vector<MergeRule> train_merges(MergeCorpus corpus, const MergeTrainerConfig& config,
                                    Vocabulary& vocab);

}  // namespace toklab::detail
