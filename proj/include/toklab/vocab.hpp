#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace toklab {

/// Transparent hashing so maps keyed by std::string accept string_view probes.
struct StringHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const noexcept {
    return std::hash<std::string_view>{}(s);
  }
};

template <typename V>
using StringMap = std::unordered_map<std::string, V, StringHash, std::equal_to<>>;

enum class Algorithm { bpe, wordpiece, unigram };

/// Short names used in files and on the command line: "bpe", "wpc", "uni".
std::string_view algorithm_name(Algorithm algo);
Algorithm parse_algorithm(std::string_view name);

inline constexpr std::string_view kWordPieceMarker = "##";

/// Ordered token inventory. Token ids are insertion positions.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::string continuation_marker)
      : marker_(std::move(continuation_marker)) {}

  /// Appends `token` unless present. Returns true if it was added.
  bool add(std::string token);
  /// Registers a single-character alphabet entry (bare form) and adds it.
  void add_alphabet_char(const std::string& ch);
  void add_special(std::string token);

  bool contains(std::string_view token) const { return index_.find(token) != index_.end(); }
  std::optional<std::size_t> id(std::string_view token) const;

  const std::vector<std::string>& tokens() const { return tokens_; }
  std::size_t size() const { return tokens_.size(); }
  const std::string& continuation_marker() const { return marker_; }
  const std::set<std::string>& alphabet() const { return alphabet_; }
  const std::set<std::string>& special_tokens() const { return special_; }

  /// Longest token length in characters, continuation marker excluded.
  std::size_t max_token_chars() const { return max_chars_; }

 private:
  std::vector<std::string> tokens_;
  StringMap<std::size_t> index_;
  std::string marker_;
  std::set<std::string> alphabet_;
  std::set<std::string> special_;
  std::size_t max_chars_ = 0;
};

/// One encoded sequence. `n` counts characters of `source` (markers never
/// count); `k` counts tokens.
struct Tokenization {
  std::string source;
  std::vector<std::string> tokens;
  std::size_t n = 0;
  std::size_t k = 0;
};

struct MergeRule {
  std::string left;
  std::string right;
  std::size_t rank = 0;

  friend bool operator==(const MergeRule&, const MergeRule&) = default;
};

struct UnigramParams {
  double seed_factor = 10.0;
  int em_iters = 2;
  double prune_fraction = 0.25;
  std::size_t max_piece_chars = 20;
};

struct TrainingOptions {
  bool lowercase = true;
  std::uint64_t seed = 0;
  std::size_t max_token_chars = 32;
  UnigramParams unigram;
};

struct TrainingMetadata {
  std::string origin = "trained";  // or "imported:<format>"
  std::vector<std::string> corpus_ids;
  std::vector<std::string> languages;
  std::size_t target_size = 0;
  TrainingOptions options;
};

/// Trained or imported tokenizer. Immutable once built; encode is thread-safe.
class TokenizerModel {
 public:
  /// BPE and WordPiece models: vocabulary plus merges in learned order.
  static TokenizerModel from_merges(Algorithm algo, Vocabulary vocab,
                                    std::vector<MergeRule> merges, TrainingMetadata meta);
  /// WordPiece model from a bare token list (no merge history).
  static TokenizerModel from_wordpiece_vocab(Vocabulary vocab, TrainingMetadata meta);
  /// UnigramLM model: `log_probs[i]` belongs to `vocab.tokens()[i]`.
  static TokenizerModel from_lexicon(Vocabulary vocab, std::vector<double> log_probs,
                                     TrainingMetadata meta);

  Algorithm algorithm() const { return algo_; }
  const Vocabulary& vocabulary() const { return vocab_; }
  const std::vector<MergeRule>& merges() const { return merges_; }
  const std::vector<double>& log_probs() const { return log_probs_; }
  const TrainingMetadata& metadata() const { return meta_; }

  /// Rank of merge (left, right), if any.
  std::optional<std::size_t> merge_rank(std::string_view left, std::string_view right) const;
  /// Log-probability of a lexicon token (unigram models only).
  std::optional<double> log_prob(std::string_view token) const;
  const StringMap<double>& lexicon() const { return lexicon_; }
  /// Log-probability assigned to out-of-alphabet characters during Viterbi.
  double fallback_log_prob() const { return fallback_log_prob_; }

 private:
  TokenizerModel() = default;
  void build_indices();

  Algorithm algo_ = Algorithm::bpe;
  Vocabulary vocab_;
  std::vector<MergeRule> merges_;
  std::vector<double> log_probs_;
  TrainingMetadata meta_;

  StringMap<std::size_t> merge_ranks_;  // key: left + '\0' + right
  StringMap<double> lexicon_;
  double fallback_log_prob_ = 0.0;
};

/// Smaller model from the same merge history (BPE and WordPiece only). Equal
/// to training at `size` on the same corpus, since merge lists are nested.
TokenizerModel truncate_to_size(const TokenizerModel& model, std::size_t size);

/// Dispatches to the algorithm-specific encoder. Throws UsageError for an
/// empty sequence. Characters outside the alphabet become single-character
/// fallback tokens.
Tokenization encode(const TokenizerModel& model, std::string_view sequence);

/// Concatenates tokens, removing `marker` from every token after the first.
std::string strip_markers(std::span<const std::string> tokens, std::string_view marker);

/// Source text reconstructed from a tokenization produced by `model`.
std::string reconstruct(const TokenizerModel& model, const Tokenization& t);

inline constexpr int kModelFormatVersion = 1;

void save_model(const TokenizerModel& model, const std::filesystem::path& path);
/// Throws ModelFormatError on version mismatch, checksum failure or truncation.
TokenizerModel load_model(const std::filesystem::path& path);

/// Serialized JSON document for a model (what save_model writes).
std::string model_to_json(const TokenizerModel& model);
TokenizerModel model_from_json(std::string_view text);

enum class ExternalFormat { wordpiece_list, bpe_merges };
ExternalFormat parse_external_format(std::string_view name);

/// Reads an externally produced vocabulary: one token per line
/// (wordpiece-list) or "left right" merge pairs in rank order (bpe-merges).
TokenizerModel import_external_vocab(const std::filesystem::path& path, ExternalFormat format,
                                     bool lowercase = true);

/// Token-per-line list; for BPE models also writes `<path>.merges`.
void export_vocab(const TokenizerModel& model, const std::filesystem::path& path);

}  // namespace toklab
