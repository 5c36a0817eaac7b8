#include "toklab/wordpiece.hpp"

#include <algorithm>
#include <set>

#include "merge_trainer.hpp"
#include "toklab/error.hpp"
#include "toklab/unicode.hpp"

namespace toklab {

std::string wordpiece_join(std::string_view left, std::string_view right,
                           std::string_view marker) {
  if (!marker.empty() && right.starts_with(marker)) right.remove_prefix(marker.size());
  std::string out(left);
  out.append(right);
  return out;
}

TokenizerModel train_wpc(std::span<const Corpus> corpora, std::size_t target_size,
                         const TrainingOptions& options) {
  const auto word_counts = count_words(corpora);
  if (word_counts.empty()) throw DataError("training corpora contain no words");

  std::vector<std::vector<std::string>> spelled;
  std::set<std::string> alphabet;
  for (const auto& [word, freq] : word_counts) {
    spelled.push_back(unicode::chars(word));
    alphabet.insert(spelled.back().begin(), spelled.back().end());
  }
  const std::string marker(kWordPieceMarker);
  if (target_size < 2 * alphabet.size()) {
    throw UsageError("target size " + std::to_string(target_size) +
                     " is below the alphabet size " + std::to_string(2 * alphabet.size()) +
                     " (bare and continuation forms)");
  }

  Vocabulary vocab{marker};
  detail::MergeCorpus corpus;
  StringMap<int> ids;
  for (const auto& ch : alphabet) {
    ids.emplace(ch, static_cast<int>(corpus.units.size()));
    corpus.units.push_back(ch);
    vocab.add_alphabet_char(ch);
  }
  for (const auto& ch : alphabet) {
    ids.emplace(marker + ch, static_cast<int>(corpus.units.size()));
    corpus.units.push_back(marker + ch);
    vocab.add(marker + ch);
  }
  for (std::size_t w = 0; w < word_counts.size(); ++w) {
    std::vector<int> syms;
    for (std::size_t i = 0; i < spelled[w].size(); ++i) {
      syms.push_back(ids.find(i == 0 ? spelled[w][i] : marker + spelled[w][i])->second);
    }
    corpus.words.push_back(std::move(syms));
    corpus.freqs.push_back(word_counts[w].second);
  }

  detail::MergeTrainerConfig config;
  config.score = detail::PairScore::likelihood;
  config.target_size = target_size;
  config.max_token_chars = options.max_token_chars;
  config.join = [&marker](const std::string& l, const std::string& r) {
    return wordpiece_join(l, r, marker);
  };
  config.chars = [&marker](const std::string& u) {
    std::string_view body = u;
    if (body.size() > marker.size() && body.starts_with(marker)) body.remove_prefix(marker.size());
    return unicode::length(body);
  };
  auto merges = detail::train_merges(std::move(corpus), config, vocab);

  TrainingMetadata meta;
  for (const auto& c : corpora) {
    meta.corpus_ids.push_back(c.source_id);
    meta.languages.push_back(c.language);
  }
  meta.target_size = target_size;
  meta.options = options;
  return TokenizerModel::from_merges(Algorithm::wordpiece, std::move(vocab), std::move(merges),
                                     std::move(meta));
}

Tokenization encode_wpc(const TokenizerModel& model, std::string_view sequence) {
  if (sequence.empty()) throw UsageError("cannot encode an empty sequence");
  const Vocabulary& vocab = model.vocabulary();
  const std::string& marker = vocab.continuation_marker();

  Tokenization out;
  out.source = std::string(sequence);
  const auto chars = unicode::chars(sequence);
  out.n = chars.size();
  if (out.n > kMaxWordPieceInput) {
    throw UsageError("WordPiece input longer than " + std::to_string(kMaxWordPieceInput) +
                     " characters");
  }
  // Byte offsets of character boundaries.
  std::vector<std::size_t> offsets{0};
  for (const auto& c : chars) offsets.push_back(offsets.back() + c.size());

  const std::size_t max_len = std::max<std::size_t>(1, vocab.max_token_chars());
  std::string piece;
  std::size_t pos = 0;
  while (pos < out.n) {
    const std::string_view prefix = pos == 0 ? std::string_view{} : std::string_view{marker};
    std::size_t take = 0;
    for (std::size_t len = std::min(max_len, out.n - pos); len >= 1; --len) {
      piece.assign(prefix);
      piece.append(sequence.substr(offsets[pos], offsets[pos + len] - offsets[pos]));
      if (vocab.contains(piece) && !vocab.special_tokens().contains(piece)) {
        take = len;
        break;
      }
    }
    if (take == 0) {
      take = 1;
      piece.assign(prefix);
      piece.append(chars[pos]);
    }
    out.tokens.push_back(piece);
    pos += take;
  }
  out.k = out.tokens.size();
  return out;
}

}  // namespace toklab
