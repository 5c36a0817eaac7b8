#include "toklab/unigram.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "toklab/error.hpp"
#include "toklab/unicode.hpp"

namespace toklab {
namespace unigram {

Segmentation viterbi(const StringMap<double>& log_probs, std::size_t max_chars,
                     double fallback_log_prob, std::string_view word,
                     std::span<const std::size_t> offsets, std::string_view excluded) {
  if (offsets.empty()) throw InvariantError("viterbi needs character offsets");
  const std::size_t n = offsets.size() - 1;
  max_chars = std::max<std::size_t>(max_chars, 1);

  // best[i]: optimal segmentation of the suffix starting at character i.
  struct Cell {
    double score;
    std::size_t tokens;
    std::size_t len;
  };
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  std::vector<Cell> best(n + 1, Cell{kNegInf, 0, 0});
  best[n] = {0.0, 0, 0};
  for (std::size_t i = n; i-- > 0;) {
    Cell cell{kNegInf, 0, 0};
    bool found = false;
    for (std::size_t len = 1; len <= std::min(max_chars, n - i); ++len) {
      const Cell& rest = best[i + len];
      if (!std::isfinite(rest.score)) continue;
      const std::string_view piece = word.substr(offsets[i], offsets[i + len] - offsets[i]);
      if (!excluded.empty() && piece == excluded) continue;
      double lp;
      if (const auto it = log_probs.find(piece); it != log_probs.end()) {
        lp = it->second;
      } else if (len == 1) {
        lp = fallback_log_prob;
      } else {
        continue;
      }
      const double score = lp + rest.score;
      const std::size_t tokens = rest.tokens + 1;
      if (!found || score > cell.score ||
          (score == cell.score && (tokens < cell.tokens || (tokens == cell.tokens && len > cell.len)))) {
        cell = {score, tokens, len};
        found = true;
      }
    }
    best[i] = cell;
  }

  Segmentation seg;
  seg.log_prob = best[0].score;
  for (std::size_t i = 0; i < n; i += best[i].len) {
    if (best[i].len == 0) throw InvariantError("viterbi found no segmentation");
    seg.tokens.emplace_back(word.substr(offsets[i], offsets[i + best[i].len] - offsets[i]));
  }
  return seg;
}

}  // namespace unigram

namespace {

struct WordType {
  std::string text;
  std::vector<std::size_t> offsets;
  std::uint64_t freq;
  std::size_t chars() const { return offsets.size() - 1; }
};

std::vector<std::size_t> char_offsets(std::string_view text) {
  std::vector<std::size_t> offsets{0};
  for (const auto& c : unicode::chars(text)) offsets.push_back(offsets.back() + c.size());
  return offsets;
}

class UnigramTrainer {
 public:
  UnigramTrainer(std::vector<WordType> words, std::set<std::string> alphabet)
      : words_(std::move(words)), alphabet_(std::move(alphabet)) {}

  void seed(const UnigramParams& params, std::size_t target_size) {
    StringMap<std::uint64_t> substrings;
    StringMap<double> counts;
    for (const auto& w : words_) {
      const std::size_t n = w.chars();
      for (std::size_t i = 0; i < n; ++i) {
        counts[w.text.substr(w.offsets[i], w.offsets[i + 1] - w.offsets[i])] +=
            static_cast<double>(w.freq);
        for (std::size_t len = 2; len <= std::min(params.max_piece_chars, n - i); ++len) {
          substrings[w.text.substr(w.offsets[i], w.offsets[i + len] - w.offsets[i])] += w.freq;
        }
      }
    }
    struct Candidate {
      std::string token;
      std::uint64_t count;
      std::uint64_t weight;
    };
    std::vector<Candidate> candidates;
    for (auto& [tok, count] : substrings) {
      if (count >= 2) candidates.push_back({tok, count, count * unicode::length(tok)});
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
      if (a.weight != b.weight) return a.weight > b.weight;
      return a.token < b.token;
    });
    const auto limit = static_cast<std::size_t>(params.seed_factor * static_cast<double>(target_size));
    if (candidates.size() > limit) candidates.resize(limit);
    for (auto& c : candidates) counts.emplace(std::move(c.token), static_cast<double>(c.count));
    set_probabilities(counts);
  }

  std::size_t size() const { return log_probs_.size(); }
  const StringMap<double>& log_probs() const { return log_probs_; }

  unigram::Segmentation segment(const WordType& w, std::string_view excluded = {}) const {
    return unigram::viterbi(log_probs_, max_chars_, kNoFallback, w.text, w.offsets, excluded);
  }

  double corpus_log_likelihood(const StringMap<double>& lexicon) const {
    double ll = 0.0;
    for (const auto& w : words_) {
      ll += static_cast<double>(w.freq) *
            unigram::viterbi(lexicon, max_chars_, kNoFallback, w.text, w.offsets).log_prob;
    }
    return ll;
  }

  /// One hard-EM round: Viterbi counts, then renormalization.
  void em_round() {
    StringMap<double> counts;
    for (const auto& [tok, lp] : log_probs_) counts.emplace(tok, 0.0);
    for (const auto& w : words_) {
      for (const auto& tok : segment(w).tokens) {
        counts.find(tok)->second += static_cast<double>(w.freq);
      }
    }
    // Unused tokens keep one pseudo-occurrence so that log-probabilities stay
    // finite; pruning removes them first (their loss is zero).
    for (auto& [tok, c] : counts) c = std::max(c, 1.0);
    set_probabilities(counts);
  }

  double probability_mass() const {
    double mass = 0.0;
    for (const auto& [tok, lp] : log_probs_) mass += std::exp(lp);
    return mass;
  }

  /// Leave-one-out likelihood losses, then removal of the cheapest tokens.
  unigram::PruneRound prune(double fraction, std::size_t target_size, bool record) {
    unigram::PruneRound round;
    round.lexicon_before = size();

    StringMap<double> loss;
    for (const auto& [tok, lp] : log_probs_) {
      if (!alphabet_.contains(tok)) loss.emplace(tok, 0.0);
    }
    for (const auto& w : words_) {
      const auto seg = segment(w);
      round.log_likelihood_before += static_cast<double>(w.freq) * seg.log_prob;
      std::set<std::string_view> used;
      for (const auto& tok : seg.tokens) {
        if (!alphabet_.contains(tok)) used.insert(tok);
      }
      for (const auto tok : used) {
        const double alt = segment(w, tok).log_prob;
        loss.find(tok)->second += static_cast<double>(w.freq) * (seg.log_prob - alt);
      }
    }

    struct Ranked {
      std::string token;
      double loss;
      double log_prob;
    };
    std::vector<Ranked> ranked;
    for (const auto& [tok, l] : loss) ranked.push_back({tok, l, log_probs_.find(tok)->second});
    std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
      if (a.loss != b.loss) return a.loss < b.loss;
      if (a.log_prob != b.log_prob) return a.log_prob < b.log_prob;
      return a.token < b.token;
    });
    const std::size_t excess = size() - target_size;
    const auto share = static_cast<std::size_t>(fraction * static_cast<double>(ranked.size()));
    const std::size_t count = std::min({excess, std::max<std::size_t>(share, 1), ranked.size()});
    for (std::size_t i = 0; i < count; ++i) {
      log_probs_.erase(ranked[i].token);
      round.summed_loss += ranked[i].loss;
    }
    if (count == 0) throw InvariantError("unigram pruning made no progress");
    round.pruned = count;
    if (record) round.log_likelihood_after = corpus_log_likelihood(log_probs_);
    refresh_max_chars();
    return round;
  }

 private:
  // Every corpus character is in the lexicon, so training never falls back.
  static constexpr double kNoFallback = -std::numeric_limits<double>::infinity();

  void set_probabilities(const StringMap<double>& counts) {
    double total = 0.0;
    for (const auto& [tok, c] : counts) total += c;
    const double log_total = std::log(total);
    log_probs_.clear();
    for (const auto& [tok, c] : counts) log_probs_.emplace(tok, std::log(c) - log_total);
    refresh_max_chars();
  }

  void refresh_max_chars() {
    max_chars_ = 1;
    for (const auto& [tok, lp] : log_probs_) {
      max_chars_ = std::max(max_chars_, unicode::length(tok));
    }
  }

  std::vector<WordType> words_;
  std::set<std::string> alphabet_;
  StringMap<double> log_probs_;
  std::size_t max_chars_ = 1;
};

}  // namespace

TokenizerModel train_uni(std::span<const Corpus> corpora, std::size_t target_size,
                         const TrainingOptions& options, unigram::TrainingTrace* trace) {
  const UnigramParams& params = options.unigram;
  if (!(params.seed_factor > 0.0) || params.em_iters < 1 || !(params.prune_fraction > 0.0) ||
      params.prune_fraction > 1.0 || params.max_piece_chars < 1) {
    throw UsageError("invalid unigram hyperparameters");
  }
  const auto word_counts = count_words(corpora);
  if (word_counts.empty()) throw DataError("empty seed lexicon: training corpora contain no words");

  std::vector<WordType> words;
  std::set<std::string> alphabet;
  for (const auto& [text, freq] : word_counts) {
    for (auto& ch : unicode::chars(text)) alphabet.insert(std::move(ch));
    words.push_back({text, char_offsets(text), freq});
  }
  if (target_size < alphabet.size()) {
    throw UsageError("target size " + std::to_string(target_size) +
                     " is below the alphabet size " + std::to_string(alphabet.size()));
  }

  UnigramTrainer trainer(std::move(words), alphabet);
  trainer.seed(params, target_size);
  if (trace) trace->seed_size = trainer.size();

  while (true) {
    for (int i = 0; i < params.em_iters; ++i) trainer.em_round();
    if (trainer.size() <= target_size) break;
    const double mass = trainer.probability_mass();
    auto round = trainer.prune(params.prune_fraction, target_size, trace != nullptr);
    round.probability_mass = mass;
    if (trace) trace->rounds.push_back(round);
  }
  trainer.em_round();
  if (trace) trace->final_probability_mass = trainer.probability_mass();

  std::vector<std::pair<std::string, double>> entries(trainer.log_probs().begin(),
                                                      trainer.log_probs().end());
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  Vocabulary vocab{std::string()};
  std::vector<double> log_probs;
  for (auto& [tok, lp] : entries) {
    if (alphabet.contains(tok)) {
      vocab.add_alphabet_char(tok);
    } else {
      vocab.add(tok);
    }
    log_probs.push_back(lp);
  }

  TrainingMetadata meta;
  for (const auto& c : corpora) {
    meta.corpus_ids.push_back(c.source_id);
    meta.languages.push_back(c.language);
  }
  meta.target_size = target_size;
  meta.options = options;
  return TokenizerModel::from_lexicon(std::move(vocab), std::move(log_probs), std::move(meta));
}

Tokenization encode_uni(const TokenizerModel& model, std::string_view sequence) {
  if (sequence.empty()) throw UsageError("cannot encode an empty sequence");
  const auto offsets = char_offsets(sequence);
  auto seg = unigram::viterbi(model.lexicon(), model.vocabulary().max_token_chars(),
                              model.fallback_log_prob(), sequence, offsets);
  Tokenization out;
  out.source = std::string(sequence);
  out.n = offsets.size() - 1;
  out.tokens = std::move(seg.tokens);
  out.k = out.tokens.size();
  return out;
}

}  // namespace toklab
