#include "merge_trainer.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "toklab/error.hpp"
#include "toklab/log.hpp"

namespace toklab::detail {
namespace {

using PairKey = std::uint64_t;

PairKey make_key(int left, int right) {
  return (static_cast<PairKey>(static_cast<std::uint32_t>(left)) << 32) |
         static_cast<std::uint32_t>(right);
}
int key_left(PairKey k) { return static_cast<int>(k >> 32); }
int key_right(PairKey k) { return static_cast<int>(k & 0xffffffffu); }

struct Candidate {
  std::int64_t count;
  std::int64_t left_count;   // unit counts snapshot (likelihood scoring only)
  std::int64_t right_count;
  int left;
  int right;
};

class Trainer {
 public:
  Trainer(MergeCorpus corpus, const MergeTrainerConfig& config)
      : corpus_(std::move(corpus)), config_(config) {
    for (std::size_t i = 0; i < corpus_.units.size(); ++i) {
      unit_chars_.push_back(config_.chars(corpus_.units[i]));
      unit_ids_.emplace(corpus_.units[i], static_cast<int>(i));
    }
    unit_counts_.assign(corpus_.units.size(), 0);
    unit_pairs_.resize(corpus_.units.size());
  }

  std::vector<MergeRule> run(Vocabulary& vocab) {
    for (std::size_t w = 0; w < corpus_.words.size(); ++w) add_word(w, /*index=*/true);
    std::vector<PairKey> keys;
    for (const auto& [key, count] : pair_counts_) keys.push_back(key);
    std::sort(keys.begin(), keys.end());
    for (const PairKey key : keys) {
      link_pair(key);
      push(key);
    }

    std::vector<MergeRule> merges;
    while (vocab.size() < config_.target_size) {
      const auto best = pop_best();
      if (!best) {
        log::warn("pair counts exhausted at vocabulary size " + std::to_string(vocab.size()) +
                  " (target " + std::to_string(config_.target_size) + ")");
        break;
      }
      const int left = key_left(*best), right = key_right(*best);
      std::string joined = config_.join(corpus_.units[left], corpus_.units[right]);
      merges.push_back({corpus_.units[left], corpus_.units[right], merges.size()});
      apply_merge(*best, joined);
      vocab.add(std::move(joined));
    }
    return merges;
  }

 private:
  // Strict weak order: true if `a` ranks below `b` (heap top is the best).
  bool worse(const Candidate& a, const Candidate& b) const {
    if (config_.score == PairScore::frequency) {
      if (a.count != b.count) return a.count < b.count;
    } else {
      using wide = unsigned __int128;
      const wide lhs = static_cast<wide>(a.count) * static_cast<wide>(b.left_count) *
                       static_cast<wide>(b.right_count);
      const wide rhs = static_cast<wide>(b.count) * static_cast<wide>(a.left_count) *
                       static_cast<wide>(a.right_count);
      if (lhs != rhs) return lhs < rhs;
    }
    const auto& al = corpus_.units[a.left];
    const auto& bl = corpus_.units[b.left];
    if (al != bl) return al > bl;
    return corpus_.units[a.right] > corpus_.units[b.right];
  }

  void push(PairKey key) {
    const auto it = pair_counts_.find(key);
    if (it == pair_counts_.end() || it->second <= 0) return;
    const int l = key_left(key), r = key_right(key);
    if (unit_chars_[l] + unit_chars_[r] > config_.max_token_chars) return;
    heap_.push_back({it->second, unit_counts_[l], unit_counts_[r], l, r});
    std::push_heap(heap_.begin(), heap_.end(), cmp());
  }

  struct Worse {
    const Trainer* self;
    bool operator()(const Candidate& a, const Candidate& b) const { return self->worse(a, b); }
  };

  Worse cmp() const { return Worse{this}; }

  bool is_current(const Candidate& c) const {
    const auto it = pair_counts_.find(make_key(c.left, c.right));
    if (it == pair_counts_.end() || it->second != c.count) return false;
    if (config_.score == PairScore::likelihood) {
      return unit_counts_[c.left] == c.left_count && unit_counts_[c.right] == c.right_count;
    }
    return true;
  }

  std::optional<PairKey> pop_best() {
    while (!heap_.empty()) {
      std::pop_heap(heap_.begin(), heap_.end(), cmp());
      const Candidate c = heap_.back();
      heap_.pop_back();
      if (is_current(c)) return make_key(c.left, c.right);
    }
    return std::nullopt;
  }

  void add_word(std::size_t w, bool index) {
    const auto& syms = corpus_.words[w];
    const auto f = static_cast<std::int64_t>(corpus_.freqs[w]);
    for (std::size_t i = 0; i < syms.size(); ++i) {
      unit_counts_[syms[i]] += f;
      if (i + 1 < syms.size()) {
        const PairKey key = make_key(syms[i], syms[i + 1]);
        pair_counts_[key] += f;
        if (index) where_[key].push_back(static_cast<std::uint32_t>(w));
        touched_.insert(key);
      }
    }
  }

  void remove_word(std::size_t w) {
    const auto& syms = corpus_.words[w];
    const auto f = static_cast<std::int64_t>(corpus_.freqs[w]);
    for (std::size_t i = 0; i < syms.size(); ++i) {
      unit_counts_[syms[i]] -= f;
      if (i + 1 < syms.size()) {
        const PairKey key = make_key(syms[i], syms[i + 1]);
        pair_counts_[key] -= f;
        touched_.insert(key);
      }
    }
  }

  void link_pair(PairKey key) {
    unit_pairs_[key_left(key)].insert(key);
    unit_pairs_[key_right(key)].insert(key);
  }

  void unlink_pair(PairKey key) {
    unit_pairs_[key_left(key)].erase(key);
    unit_pairs_[key_right(key)].erase(key);
  }

  void apply_merge(PairKey key, const std::string& joined) {
    const int left = key_left(key), right = key_right(key);
    // Different pairs can spell the same token; they share one unit id.
    int merged;
    if (const auto it = unit_ids_.find(joined); it != unit_ids_.end()) {
      merged = it->second;
    } else {
      merged = static_cast<int>(corpus_.units.size());
      corpus_.units.push_back(joined);
      unit_ids_.emplace(joined, merged);
      unit_chars_.push_back(unit_chars_[left] + unit_chars_[right]);
      unit_counts_.push_back(0);
      unit_pairs_.emplace_back();
    }

    std::vector<std::uint32_t> affected = std::move(where_[key]);
    where_.erase(key);
    std::sort(affected.begin(), affected.end());
    affected.erase(std::unique(affected.begin(), affected.end()), affected.end());

    touched_.clear();
    for (const std::uint32_t w : affected) {
      auto& syms = corpus_.words[w];
      bool present = false;
      for (std::size_t i = 0; i + 1 < syms.size() && !present; ++i) {
        present = syms[i] == left && syms[i + 1] == right;
      }
      if (!present) continue;
      remove_word(w);
      std::vector<int> next;
      next.reserve(syms.size());
      for (std::size_t i = 0; i < syms.size(); ++i) {
        if (i + 1 < syms.size() && syms[i] == left && syms[i + 1] == right) {
          next.push_back(merged);
          ++i;
        } else {
          next.push_back(syms[i]);
        }
      }
      syms = std::move(next);
      add_word(w, /*index=*/false);
      for (std::size_t i = 0; i + 1 < syms.size(); ++i) {
        if (syms[i] == merged || syms[i + 1] == merged) {
          where_[make_key(syms[i], syms[i + 1])].push_back(w);
        }
      }
    }

    std::vector<PairKey> changed(touched_.begin(), touched_.end());
    std::sort(changed.begin(), changed.end());
    for (const PairKey k : changed) {
      const auto it = pair_counts_.find(k);
      if (it->second < 0) throw InvariantError("negative pair count during merge training");
      if (it->second == 0) {
        pair_counts_.erase(it);
        unlink_pair(k);
        where_.erase(k);
      } else {
        link_pair(k);
        push(k);
      }
    }
    if (config_.score == PairScore::likelihood) {
      // Unit counts of left, right and merged changed; so did every score
      // with one of them in the denominator.
      for (const int unit : {left, right, merged}) {
        std::vector<PairKey> keys(unit_pairs_[unit].begin(), unit_pairs_[unit].end());
        std::sort(keys.begin(), keys.end());
        for (const PairKey k : keys) push(k);
      }
    }
    maybe_compact();
  }

  void maybe_compact() {
    if (heap_.size() < 4 * pair_counts_.size() + (1u << 20)) return;
    heap_.clear();
    std::vector<PairKey> keys;
    keys.reserve(pair_counts_.size());
    for (const auto& [k, c] : pair_counts_) keys.push_back(k);
    std::sort(keys.begin(), keys.end());
    for (const PairKey k : keys) push(k);
  }

  MergeCorpus corpus_;
  const MergeTrainerConfig& config_;
  StringMap<int> unit_ids_;
  std::vector<std::size_t> unit_chars_;
  std::vector<std::int64_t> unit_counts_;
  std::vector<std::unordered_set<PairKey>> unit_pairs_;
  std::unordered_map<PairKey, std::int64_t> pair_counts_;
  std::unordered_map<PairKey, std::vector<std::uint32_t>> where_;
  std::unordered_set<PairKey> touched_;
  std::vector<Candidate> heap_;
};

}  // namespace

std::vector<MergeRule> train_merges(MergeCorpus corpus, const MergeTrainerConfig& config,
                                    Vocabulary& vocab) {
  if (!config.join || !config.chars) throw InvariantError("merge trainer needs join and chars");
  Trainer trainer(std::move(corpus), config);
  return trainer.run(vocab);
}

}  // namespace toklab::detail
