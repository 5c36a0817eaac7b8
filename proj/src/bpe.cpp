#include "toklab/bpe.hpp"

#include <limits>
#include <set>

#include "merge_trainer.hpp"
#include "toklab/error.hpp"
#include "toklab/unicode.hpp"

namespace toklab {

TokenizerModel train_bpe(std::span<const Corpus> corpora, std::size_t target_size,
                         const TrainingOptions& options) {
  const auto word_counts = count_words(corpora);
  if (word_counts.empty()) throw DataError("training corpora contain no words");

  std::vector<std::vector<std::string>> spelled;
  std::set<std::string> alphabet;
  for (const auto& [word, freq] : word_counts) {
    spelled.push_back(unicode::chars(word));
    alphabet.insert(spelled.back().begin(), spelled.back().end());
  }
  if (target_size < alphabet.size()) {
    throw UsageError("target size " + std::to_string(target_size) +
                     " is below the alphabet size " + std::to_string(alphabet.size()));
  }

  Vocabulary vocab{std::string()};
  detail::MergeCorpus corpus;
  StringMap<int> ids;
  for (const auto& ch : alphabet) {
    ids.emplace(ch, static_cast<int>(corpus.units.size()));
    corpus.units.push_back(ch);
    vocab.add_alphabet_char(ch);
  }
  for (std::size_t w = 0; w < word_counts.size(); ++w) {
    std::vector<int> syms;
    for (const auto& ch : spelled[w]) syms.push_back(ids.find(ch)->second);
    corpus.words.push_back(std::move(syms));
    corpus.freqs.push_back(word_counts[w].second);
  }

  detail::MergeTrainerConfig config;
  config.score = detail::PairScore::frequency;
  config.target_size = target_size;
  config.max_token_chars = options.max_token_chars;
  config.join = [](const std::string& l, const std::string& r) { return l + r; };
  config.chars = [](const std::string& u) { return unicode::length(u); };
  auto merges = detail::train_merges(std::move(corpus), config, vocab);

  TrainingMetadata meta;
  for (const auto& c : corpora) {
    meta.corpus_ids.push_back(c.source_id);
    meta.languages.push_back(c.language);
  }
  meta.target_size = target_size;
  meta.options = options;
  return TokenizerModel::from_merges(Algorithm::bpe, std::move(vocab), std::move(merges),
                                     std::move(meta));
}

Tokenization encode_bpe(const TokenizerModel& model, std::string_view sequence) {
  if (sequence.empty()) throw UsageError("cannot encode an empty sequence");
  Tokenization out;
  out.source = std::string(sequence);
  std::vector<std::string> symbols = unicode::chars(sequence);
  out.n = symbols.size();

  constexpr auto kNone = std::numeric_limits<std::size_t>::max();
  while (symbols.size() > 1) {
    std::size_t best_rank = kNone, best_pos = 0;
    for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
      const auto rank = model.merge_rank(symbols[i], symbols[i + 1]);
      if (rank && *rank < best_rank) {
        best_rank = *rank;
        best_pos = i;
      }
    }
    if (best_rank == kNone) break;
    symbols[best_pos] += symbols[best_pos + 1];
    symbols.erase(symbols.begin() + static_cast<std::ptrdiff_t>(best_pos) + 1);
  }
  out.tokens = std::move(symbols);
  out.k = out.tokens.size();
  return out;
}

}  // namespace toklab
