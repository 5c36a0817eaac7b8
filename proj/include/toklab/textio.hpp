#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <cstdint>
#include <utility>
#include <string>
#include <string_view>
#include <vector>

namespace toklab {

struct NormalizationOptions {
  bool lowercase = true;
};

/// Training text: one normalized, non-empty sentence per entry.
struct Corpus {
  std::vector<std::string> sentences;
  std::string source_id;
  std::string language = "und";
};

/// One lexical-decision item with per-stimulus aggregate responses.
struct Stimulus {
  std::string sequence;
  bool is_word = true;
  double rt_ms = 0.0;
  double accuracy = 0.0;

  friend bool operator==(const Stimulus&, const Stimulus&) = default;
};

/// Column names for a delimited lexical-decision file.
struct StimulusSchema {
  std::string sequence = "sequence";
  std::string is_word = "is_word";
  std::string rt = "rt";
  std::string accuracy = "accuracy";
};

struct LexicalDecisionData {
  std::vector<Stimulus> stimuli;
  std::size_t rows_read = 0;
  std::size_t rows_dropped = 0;
};

/// Word -> Zipf score. Absent words are reported as std::nullopt.
class FrequencyTable {
 public:
  using ScoreMap = std::map<std::string, double, std::less<>>;

  FrequencyTable() = default;
  explicit FrequencyTable(ScoreMap scores, std::size_t duplicates = 0)
      : scores_(std::move(scores)), duplicates_(duplicates) {}

  std::optional<double> lookup(std::string_view word) const;
  std::size_t size() const { return scores_.size(); }
  const ScoreMap& entries() const { return scores_; }
  /// Duplicate rows seen at load time; the last occurrence wins.
  std::size_t duplicates() const { return duplicates_; }

 private:
  ScoreMap scores_;
  std::size_t duplicates_ = 0;
};

struct MorphemeInventory {
  std::string language;
  std::set<std::string> morphemes;
  std::size_t source_row_count = 0;
  double min_share = 0.0;
};

/// Reads at most `limit` non-empty lines. Lines are trimmed and normalized.
/// Throws DataError for unreadable files, invalid UTF-8 (with line number)
/// and empty corpora.
Corpus load_corpus(const std::filesystem::path& path,
                   std::optional<std::size_t> limit = std::nullopt,
                   const NormalizationOptions& norm = {},
                   std::string language = "und");

/// Comma- or tab-delimited with a header row. Rows with unusable fields are
/// dropped and counted, never repaired.
LexicalDecisionData load_lexical_decision(const std::filesystem::path& path,
                                          const StimulusSchema& schema = {},
                                          const NormalizationOptions& norm = {});

/// Writes stimuli as CSV using `schema` for the header.
void save_lexical_decision(const std::filesystem::path& path,
                           const std::vector<Stimulus>& stimuli,
                           const StimulusSchema& schema = {});

/// Reads one column of sequences from a delimited file with header.
std::vector<std::string> load_sequences(const std::filesystem::path& path,
                                        std::string_view column,
                                        const NormalizationOptions& norm = {});

/// Nearest-rank percentile of `values` (P in [0, 100]); P = 0 gives the minimum.
double nearest_rank_percentile(std::vector<double> values, double percentile);

struct RtBounds {
  double low_ms = 0.0;
  double high_ms = 0.0;
};

/// Response-time bounds at the given nearest-rank percentiles.
RtBounds rt_percentile_bounds(const std::vector<Stimulus>& stimuli, double low,
                              double high);

/// Keeps stimuli with low_ms <= rt <= high_ms, preserving order.
std::vector<Stimulus> filter_rt_range(const std::vector<Stimulus>& stimuli,
                                      RtBounds bounds);

/// Removes stimuli whose RT lies below the `low` or above the `high`
/// nearest-rank percentile of the input RTs.
std::vector<Stimulus> filter_rt_percentiles(const std::vector<Stimulus>& stimuli,
                                            double low, double high);

FrequencyTable load_frequency_table(const std::filesystem::path& path,
                                    const NormalizationOptions& norm = {});

/// Rows: word TAB m1|m2|... TAB tag1|tag2|... with tags in {prefix, root,
/// suffix}. Keeps prefixes and suffixes occurring in at least `min_share` of
/// the rows.
MorphemeInventory load_morpheme_inventory(const std::filesystem::path& path,
                                          double min_share,
                                          const NormalizationOptions& norm = {},
                                          std::string language = "und");

/// Word-type frequencies over all corpora after pre-tokenization, sorted by
/// word so that every downstream iteration order is reproducible.
std::vector<std::pair<std::string, std::uint64_t>> count_words(std::span<const Corpus> corpora);

/// Splits one delimited line. Double quotes group fields; "" escapes a quote.
std::vector<std::string> split_delimited(std::string_view line, char delimiter);

}  // namespace toklab
