#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "toklab/metrics.hpp"
#include "toklab/stats.hpp"
#include "toklab/textio.hpp"
#include "toklab/vocab.hpp"

namespace toklab {

enum class Signal { rt, accuracy };
enum class WordClass { words, nonwords };
enum class CorrelationMethod { pearson, spearman };

/// "rt" / "acc".
std::string_view signal_name(Signal signal);
Signal parse_signal(std::string_view name);
std::string_view word_class_name(WordClass wc);
std::string_view correlation_method_name(CorrelationMethod method);
CorrelationMethod parse_correlation_method(std::string_view name);

/// Identifies one tokenizer inside a report.
struct TokenizerInfo {
  std::string id;
  std::string algorithm;
  std::size_t vocab_size = 0;

  friend bool operator==(const TokenizerInfo&, const TokenizerInfo&) = default;
};

/// A model with the label it carries in reports.
struct NamedModel {
  std::string id;
  const TokenizerModel* model = nullptr;
};

/// Per-stimulus encodings: everything a report is computed from.
struct StimulusMetrics {
  std::vector<Stimulus> stimuli;
  std::vector<std::size_t> chars;                  // n per stimulus
  std::vector<TokenizerInfo> tokenizers;
  std::vector<std::vector<std::size_t>> tokens;    // k per [tokenizer][stimulus]
  std::vector<std::vector<std::string>> segments;  // space-joined tokens, same layout

  /// Metric values of one tokenizer (ignored for the length baseline).
  std::vector<double> values(Metric metric, std::size_t tokenizer) const;
};

/// Encodes every stimulus with every model. `threads` > 1 encodes models in
/// parallel; the result does not depend on it.
StimulusMetrics compute_stimulus_metrics(std::span<const NamedModel> models,
                                         std::span<const Stimulus> stimuli,
                                         std::size_t threads = 1);

/// Long-format CSV, one row per (tokenizer, stimulus), doubles at full
/// precision so the file alone reproduces every report number.
void write_stimulus_metrics(const std::filesystem::path& path, const StimulusMetrics& m);
StimulusMetrics read_stimulus_metrics(const std::filesystem::path& path);

inline constexpr std::string_view kLengthBaselineId = "length-baseline";

struct PairwiseComparison {
  std::string other;  // tokenizer id
  std::optional<stats::SignificanceResult> result;
  std::string note;   // why no result, if any
};

struct CorrelationRow {
  std::string dataset;
  std::string tokenizer_id;
  std::string algorithm;
  std::size_t vocab_size = 0;
  Metric metric = Metric::chunkability;
  Signal signal = Signal::rt;
  WordClass word_class = WordClass::words;
  bool skipped = false;
  std::string note;
  std::optional<double> r;
  std::size_t n_obs = 0;
  std::optional<stats::SignificanceResult> vs_length;
  std::vector<PairwiseComparison> pairwise;
};

struct CorrelationReport {
  std::string dataset;
  CorrelationMethod method = CorrelationMethod::pearson;
  std::vector<CorrelationRow> rows;
};

struct EvalOptions {
  std::string dataset = "dataset";
  std::vector<Metric> metrics{Metric::chunkability, Metric::num_tokens, Metric::char_length};
  std::vector<Signal> signals{Signal::rt, Signal::accuracy};
  CorrelationMethod method = CorrelationMethod::pearson;
  std::size_t threads = 1;
};

/// Correlation cells for every (tokenizer, metric, signal, word class), with
/// the dependent-correlation test against the length baseline and between
/// tokenizers. Words and non-words are never pooled. Cells whose correlation
/// is undefined are kept and marked skipped. Throws DataError if a word class
/// has no stimuli.
CorrelationReport build_report(const StimulusMetrics& metrics, const EvalOptions& options);

/// compute_stimulus_metrics followed by build_report.
CorrelationReport run_cognitive_eval(std::span<const NamedModel> models,
                                     std::span<const Stimulus> stimuli,
                                     const EvalOptions& options,
                                     StimulusMetrics* metrics_out = nullptr);

std::string report_to_json(const CorrelationReport& report);
std::string report_to_csv(const CorrelationReport& report);

// --- Vocabulary-size sweeps -----------------------------------------------------

struct SweepConfig {
  Algorithm algorithm = Algorithm::wordpiece;
  TrainingOptions options;
  std::optional<std::filesystem::path> cache_dir;
};

struct SweepPoint {
  std::size_t vocab_size = 0;
  bool from_cache = false;
  CorrelationReport report;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  std::optional<std::string> error;  // set when a size failed; earlier points are kept
};

/// Default size grid for sweeps.
std::vector<std::size_t> default_size_grid();

/// Cache key over corpus content, algorithm, size and training flags.
std::string model_cache_key(std::span<const Corpus> corpora, Algorithm algo, std::size_t size,
                            const TrainingOptions& options);

TokenizerModel train_model(Algorithm algo, std::span<const Corpus> corpora, std::size_t size,
                           const TrainingOptions& options);

/// One model and one report per size. BPE and WordPiece models for smaller
/// sizes are cut from the largest one (their merge lists are nested).
SweepResult run_sweep(const SweepConfig& config, std::span<const Corpus> corpora,
                      std::span<const std::size_t> sizes, std::span<const Stimulus> stimuli,
                      const EvalOptions& options);

std::string sweep_to_json(const SweepResult& sweep);

// --- Morphological coverage -----------------------------------------------------

/// Fraction of inventory morphemes present in the vocabulary either bare or
/// with the continuation marker. Throws DataError for an empty inventory.
double morph_coverage(const Vocabulary& vocab, const MorphemeInventory& inventory);

struct CoveragePoint {
  std::string tokenizer_id;
  std::string algorithm;
  std::size_t vocab_size = 0;
  std::size_t covered = 0;
  std::size_t total = 0;
  double fraction = 0.0;
};

struct CoverageCurve {
  std::string language;
  std::vector<CoveragePoint> points;  // sorted by (algorithm, vocab_size)
};

CoverageCurve coverage_curve(std::span<const NamedModel> models,
                             const MorphemeInventory& inventory);
std::string coverage_to_csv(const CoverageCurve& curve);

// --- Frequency regression ----------------------------------------------------------

struct RegressionCell {
  Signal signal = Signal::rt;
  std::string feature;  // "chunkability" or "frequency"
  stats::RegressionResult result;
};

struct RegressionReport {
  std::size_t words_used = 0;
  std::size_t words_dropped = 0;  // no frequency entry
  std::uint64_t seed = 0;
  std::vector<RegressionCell> cells;  // rt/chunk, rt/freq, acc/chunk, acc/freq
};

/// Words only. Each signal is min-max scaled; chunkability and frequency
/// regressions share one seeded 80/20 split.
RegressionReport run_regression(std::span<const Stimulus> stimuli, const TokenizerModel& model,
                                const FrequencyTable& frequency, std::uint64_t seed);

std::string regression_to_json(const RegressionReport& report);

}  // namespace toklab
