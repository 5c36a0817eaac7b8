#include "toklab/evalpipe.hpp"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <thread>

#include "json.hpp"
#include "toklab/bpe.hpp"
#include "toklab/error.hpp"
#include "toklab/log.hpp"
#include "toklab/unigram.hpp"
#include "toklab/wordpiece.hpp"

namespace toklab {

using ojson = nlohmann::ordered_json;

std::string_view signal_name(Signal signal) { return signal == Signal::rt ? "rt" : "acc"; }

Signal parse_signal(std::string_view name) {
  if (name == "rt") return Signal::rt;
  if (name == "acc" || name == "accuracy") return Signal::accuracy;
  throw UsageError("unknown signal '" + std::string(name) + "' (expected rt or acc)");
}

std::string_view word_class_name(WordClass wc) {
  return wc == WordClass::words ? "words" : "nonwords";
}

std::string_view correlation_method_name(CorrelationMethod method) {
  return method == CorrelationMethod::pearson ? "pearson" : "spearman";
}

CorrelationMethod parse_correlation_method(std::string_view name) {
  if (name == "pearson") return CorrelationMethod::pearson;
  if (name == "spearman") return CorrelationMethod::spearman;
  throw UsageError("unknown correlation '" + std::string(name) + "' (expected pearson or spearman)");
}

// --- Per-stimulus metrics -----------------------------------------------------------

std::vector<double> StimulusMetrics::values(Metric metric, std::size_t tokenizer) const {
  std::vector<double> out(stimuli.size());
  for (std::size_t i = 0; i < stimuli.size(); ++i) {
    switch (metric) {
      case Metric::char_length:
        out[i] = static_cast<double>(chars[i]);
        break;
      case Metric::num_tokens:
        out[i] = static_cast<double>(tokens.at(tokenizer)[i]);
        break;
      case Metric::chunkability:
        out[i] = chunkability(Tokenization{{}, {}, chars[i], tokens.at(tokenizer)[i]});
        break;
    }
  }
  return out;
}

StimulusMetrics compute_stimulus_metrics(std::span<const NamedModel> models,
                                         std::span<const Stimulus> stimuli, std::size_t threads) {
  StimulusMetrics m;
  m.stimuli.assign(stimuli.begin(), stimuli.end());
  for (const auto& s : stimuli) m.chars.push_back(char_length(s.sequence));
  m.tokens.resize(models.size());
  m.segments.resize(models.size());
  for (const auto& nm : models) {
    if (!nm.model) throw InvariantError("null model in evaluation");
    m.tokenizers.push_back({nm.id, std::string(algorithm_name(nm.model->algorithm())),
                            nm.model->vocabulary().size()});
  }

  std::vector<std::exception_ptr> errors(models.size());
  const auto encode_model = [&](std::size_t t) {
    try {
      auto& ks = m.tokens[t];
      auto& segs = m.segments[t];
      for (std::size_t i = 0; i < stimuli.size(); ++i) {
        const Tokenization tok = encode(*models[t].model, stimuli[i].sequence);
        if (tok.n != m.chars[i]) throw InvariantError("encoder changed the character count");
        ks.push_back(tok.k);
        std::string joined;
        for (const auto& piece : tok.tokens) {
          if (!joined.empty()) joined += ' ';
          joined += piece;
        }
        segs.push_back(std::move(joined));
      }
    } catch (...) {
      errors[t] = std::current_exception();
    }
  };
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(models.size(), 1));
  if (threads == 1) {
    for (std::size_t t = 0; t < models.size(); ++t) encode_model(t);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t t = w; t < models.size(); t += threads) encode_model(t);
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return m;
}

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s, const char* what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw DataError(std::string("malformed ") + what + " value '" + s + "' in metrics file");
  }
  return v;
}

std::size_t parse_size(const std::string& s, const char* what) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw DataError(std::string("malformed ") + what + " value '" + s + "' in metrics file");
  }
  return v;
}

std::string csv_field(std::string_view field) {
  if (field.find_first_of(",\"\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

constexpr std::string_view kMetricsHeader =
    "tokenizer_id,algorithm,vocab_size,stimulus_index,sequence,is_word,rt_ms,accuracy,"
    "char_length,num_tokens,chunkability,tokens";

}  // namespace

void write_stimulus_metrics(const std::filesystem::path& path, const StimulusMetrics& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write metrics file: " + path.string());
  out << kMetricsHeader << '\n';
  const auto write_row = [&](const TokenizerInfo* info, std::size_t t, std::size_t i) {
    const Stimulus& s = m.stimuli[i];
    out << (info ? csv_field(info->id) : "") << ',' << (info ? info->algorithm : "") << ','
        << (info ? std::to_string(info->vocab_size) : "") << ',' << i << ','
        << csv_field(s.sequence) << ',' << (s.is_word ? 1 : 0) << ',' << format_double(s.rt_ms)
        << ',' << format_double(s.accuracy) << ',' << m.chars[i] << ',';
    if (info) {
      const std::size_t k = m.tokens[t][i];
      out << k << ','
          << format_double(chunkability(Tokenization{{}, {}, m.chars[i], k})) << ','
          << csv_field(m.segments.size() > t && m.segments[t].size() > i ? m.segments[t][i] : "");
    } else {
      out << ",,";
    }
    out << '\n';
  };
  if (m.tokenizers.empty()) {
    for (std::size_t i = 0; i < m.stimuli.size(); ++i) write_row(nullptr, 0, i);
  }
  for (std::size_t t = 0; t < m.tokenizers.size(); ++t) {
    for (std::size_t i = 0; i < m.stimuli.size(); ++i) write_row(&m.tokenizers[t], t, i);
  }
  if (!out) throw DataError("failed writing metrics file: " + path.string());
}

StimulusMetrics read_stimulus_metrics(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read metrics file: " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) {
    throw DataError("not a per-stimulus metrics file: " + path.string());
  }
  StimulusMetrics m;
  std::map<std::string, std::size_t> tokenizer_index;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_delimited(line, ',');
    if (f.size() != 12) {
      throw DataError("metrics file row " + std::to_string(line_no) + " has " +
                      std::to_string(f.size()) + " fields");
    }
    const std::size_t idx = parse_size(f[3], "stimulus_index");
    Stimulus s{f[4], f[5] == "1", parse_double(f[6], "rt_ms"), parse_double(f[7], "accuracy")};
    const std::size_t n = parse_size(f[8], "char_length");
    if (idx == m.stimuli.size()) {
      m.stimuli.push_back(s);
      m.chars.push_back(n);
    } else if (idx > m.stimuli.size() || !(m.stimuli[idx] == s) || m.chars[idx] != n) {
      throw DataError("inconsistent stimulus rows in metrics file at row " +
                      std::to_string(line_no));
    }
    if (f[0].empty()) continue;
    auto [it, inserted] = tokenizer_index.emplace(f[0], m.tokenizers.size());
    if (inserted) {
      m.tokenizers.push_back({f[0], f[1], parse_size(f[2], "vocab_size")});
      m.tokens.emplace_back();
      m.segments.emplace_back();
    }
    auto& ks = m.tokens[it->second];
    if (ks.size() != idx) throw DataError("out-of-order stimulus rows in metrics file");
    ks.push_back(parse_size(f[9], "num_tokens"));
    m.segments[it->second].push_back(f[11]);
  }
  for (const auto& ks : m.tokens) {
    if (ks.size() != m.stimuli.size()) throw DataError("incomplete tokenizer rows in metrics file");
  }
  if (m.stimuli.empty()) throw DataError("metrics file has no rows: " + path.string());
  return m;
}

// --- Reports -------------------------------------------------------------------------

namespace {

struct CorrelationOutcome {
  std::optional<double> r;
  std::string note;
};

CorrelationOutcome correlate(std::span<const double> x, std::span<const double> y,
                             CorrelationMethod method) {
  try {
    return {method == CorrelationMethod::pearson ? stats::pearson(x, y) : stats::spearman(x, y),
            {}};
  } catch (const DataError& e) {
    return {std::nullopt, e.what()};
  }
}

std::vector<double> subset(const std::vector<double>& v, const std::vector<std::size_t>& idx) {
  std::vector<double> out;
  out.reserve(idx.size());
  for (const auto i : idx) out.push_back(v[i]);
  return out;
}

struct Significance {
  std::optional<stats::SignificanceResult> result;
  std::string note;
};

Significance dependent_test(const CorrelationOutcome& a, const CorrelationOutcome& b,
                            const CorrelationOutcome& ab, std::size_t n) {
  if (!a.r || !b.r) return {std::nullopt, "correlation undefined"};
  if (n < stats::kMinSignificanceN) return {std::nullopt, "n_obs below significance threshold"};
  if (*a.r == *b.r) {
    stats::SignificanceResult same;
    same.r1 = same.r2 = *a.r;
    same.r12 = ab.r;
    same.n1 = same.n2 = n;
    return {same, {}};
  }
  if (!ab.r) return {std::nullopt, "metric correlation undefined: " + ab.note};
  try {
    return {stats::compare_dependent_correlations(*a.r, *b.r, *ab.r, n), {}};
  } catch (const DataError& e) {
    return {std::nullopt, e.what()};
  }
}

}  // namespace

CorrelationReport build_report(const StimulusMetrics& metrics, const EvalOptions& options) {
  if (metrics.tokens.size() != metrics.tokenizers.size()) {
    throw InvariantError("metrics table is inconsistent");
  }
  std::vector<std::size_t> class_idx[2];
  for (std::size_t i = 0; i < metrics.stimuli.size(); ++i) {
    class_idx[metrics.stimuli[i].is_word ? 0 : 1].push_back(i);
  }
  for (const WordClass wc : {WordClass::words, WordClass::nonwords}) {
    if (class_idx[static_cast<int>(wc)].empty()) {
      throw DataError("empty word-class partition: no " + std::string(word_class_name(wc)));
    }
  }

  std::vector<double> rt, acc;
  for (const auto& s : metrics.stimuli) {
    rt.push_back(s.rt_ms);
    acc.push_back(s.accuracy);
  }
  const std::vector<double> length = metrics.values(Metric::char_length, 0);

  CorrelationReport report;
  report.dataset = options.dataset;
  report.method = options.method;
  const auto method = options.method;

  const bool with_baseline = std::find(options.metrics.begin(), options.metrics.end(),
                                       Metric::char_length) != options.metrics.end();
  for (const Metric metric : options.metrics) {
    if (metric == Metric::char_length) continue;
    std::vector<std::vector<double>> values;
    for (std::size_t t = 0; t < metrics.tokenizers.size(); ++t) {
      values.push_back(metrics.values(metric, t));
    }
    for (std::size_t t = 0; t < metrics.tokenizers.size(); ++t) {
      for (const Signal signal : options.signals) {
        const auto& y_all = signal == Signal::rt ? rt : acc;
        for (const WordClass wc : {WordClass::words, WordClass::nonwords}) {
          const auto& idx = class_idx[static_cast<int>(wc)];
          const auto y = subset(y_all, idx);
          const auto x = subset(values[t], idx);
          const auto len = subset(length, idx);

          CorrelationRow row;
          row.dataset = options.dataset;
          row.tokenizer_id = metrics.tokenizers[t].id;
          row.algorithm = metrics.tokenizers[t].algorithm;
          row.vocab_size = metrics.tokenizers[t].vocab_size;
          row.metric = metric;
          row.signal = signal;
          row.word_class = wc;
          row.n_obs = idx.size();
          const auto own = correlate(x, y, method);
          row.r = own.r;
          row.skipped = !own.r;
          row.note = own.note;

          const auto sig = dependent_test(own, correlate(len, y, method),
                                          correlate(x, len, method), idx.size());
          row.vs_length = sig.result;
          if (row.note.empty() && !sig.result) row.note = sig.note;

          for (std::size_t u = 0; u < metrics.tokenizers.size(); ++u) {
            if (u == t) continue;
            const auto xu = subset(values[u], idx);
            const auto cmp =
                dependent_test(own, correlate(xu, y, method), correlate(x, xu, method), idx.size());
            row.pairwise.push_back({metrics.tokenizers[u].id, cmp.result, cmp.note});
          }
          report.rows.push_back(std::move(row));
        }
      }
    }
  }

  if (with_baseline) {
    for (const Signal signal : options.signals) {
      const auto& y_all = signal == Signal::rt ? rt : acc;
      for (const WordClass wc : {WordClass::words, WordClass::nonwords}) {
        const auto& idx = class_idx[static_cast<int>(wc)];
        CorrelationRow row;
        row.dataset = options.dataset;
        row.tokenizer_id = std::string(kLengthBaselineId);
        row.algorithm = "none";
        row.metric = Metric::char_length;
        row.signal = signal;
        row.word_class = wc;
        row.n_obs = idx.size();
        const auto own = correlate(subset(length, idx), subset(y_all, idx), method);
        row.r = own.r;
        row.skipped = !own.r;
        row.note = own.note;
        if (row.note.empty() && idx.size() < stats::kMinSignificanceN) {
          row.note = "n_obs below significance threshold";
        }
        report.rows.push_back(std::move(row));
      }
    }
  }
  return report;
}

CorrelationReport run_cognitive_eval(std::span<const NamedModel> models,
                                     std::span<const Stimulus> stimuli,
                                     const EvalOptions& options, StimulusMetrics* metrics_out) {
  if (!models.empty()) {
    const bool lower = models.front().model->metadata().options.lowercase;
    for (const auto& nm : models) {
      if (nm.model->metadata().options.lowercase != lower) {
        throw DataError("models disagree on lowercasing; evaluate them separately");
      }
    }
  }
  StimulusMetrics metrics = compute_stimulus_metrics(models, stimuli, options.threads);
  CorrelationReport report = build_report(metrics, options);
  if (metrics_out) *metrics_out = std::move(metrics);
  return report;
}

namespace {

ojson optional_number(const std::optional<double>& v) {
  return v ? ojson(*v) : ojson(nullptr);
}

ojson significance_json(const stats::SignificanceResult& s) {
  return ojson{{"test", stats::test_name(s.test)},
               {"z", s.statistic},
               {"p", s.p_value},
               {"r1", s.r1},
               {"r2", s.r2},
               {"r12", optional_number(s.r12)},
               {"n", s.n1}};
}

ojson report_json(const CorrelationReport& report) {
  ojson rows = ojson::array();
  for (const auto& row : report.rows) {
    ojson pairwise = ojson::array();
    for (const auto& p : row.pairwise) {
      pairwise.push_back({{"other", p.other},
                          {"significance", p.result ? significance_json(*p.result) : ojson(nullptr)},
                          {"note", p.note}});
    }
    rows.push_back({{"dataset", row.dataset},
                    {"tokenizer_id", row.tokenizer_id},
                    {"algorithm", row.algorithm},
                    {"vocab_size", row.vocab_size},
                    {"metric", metric_name(row.metric)},
                    {"signal", signal_name(row.signal)},
                    {"word_class", word_class_name(row.word_class)},
                    {"status", row.skipped ? "skipped" : "ok"},
                    {"note", row.note},
                    {"r", optional_number(row.r)},
                    {"n_obs", row.n_obs},
                    {"vs_length", row.vs_length ? significance_json(*row.vs_length) : ojson(nullptr)},
                    {"pairwise", std::move(pairwise)}});
  }
  return ojson{{"dataset", report.dataset},
               {"correlation", correlation_method_name(report.method)},
               {"rows", std::move(rows)}};
}

}  // namespace

std::string report_to_json(const CorrelationReport& report) {
  return report_json(report).dump(2) + "\n";
}

std::string report_to_csv(const CorrelationReport& report) {
  std::string out =
      "dataset,tokenizer_id,algorithm,vocab_size,metric,signal,word_class,status,r,n_obs,"
      "vs_length_z,vs_length_p,note\n";
  for (const auto& row : report.rows) {
    out += csv_field(row.dataset) + ',' + csv_field(row.tokenizer_id) + ',' + row.algorithm + ',' +
           std::to_string(row.vocab_size) + ',' + std::string(metric_name(row.metric)) + ',' +
           std::string(signal_name(row.signal)) + ',' +
           std::string(word_class_name(row.word_class)) + ',' +
           (row.skipped ? "skipped" : "ok") + ',' + (row.r ? format_double(*row.r) : "") + ',' +
           std::to_string(row.n_obs) + ',' +
           (row.vs_length ? format_double(row.vs_length->statistic) : "") + ',' +
           (row.vs_length ? format_double(row.vs_length->p_value) : "") + ',' +
           csv_field(row.note) + '\n';
  }
  return out;
}

// --- Sweeps -----------------------------------------------------------------------------

std::vector<std::size_t> default_size_grid() {
  return {1000, 2000, 5000, 10000, 20000, 30000, 40000, 50000, 70000};
}

std::string model_cache_key(std::span<const Corpus> corpora, Algorithm algo, std::size_t size,
                            const TrainingOptions& options) {
  uLong crc = crc32(0L, Z_NULL, 0);
  uLong adler = adler32(0L, Z_NULL, 0);
  const auto feed = [&](std::string_view s) {
    crc = crc32(crc, reinterpret_cast<const Bytef*>(s.data()), static_cast<uInt>(s.size()));
    adler = adler32(adler, reinterpret_cast<const Bytef*>(s.data()), static_cast<uInt>(s.size()));
  };
  for (const auto& c : corpora) {
    feed(c.source_id);
    feed("\x1e");
    for (const auto& s : c.sentences) {
      feed(s);
      feed("\n");
    }
    feed("\x1d");
  }
  const auto& u = options.unigram;
  feed(std::string(algorithm_name(algo)) + "|" + std::to_string(size) + "|" +
       std::to_string(options.lowercase) + "|" + std::to_string(options.max_token_chars) + "|" +
       format_double(u.seed_factor) + "|" + std::to_string(u.em_iters) + "|" +
       format_double(u.prune_fraction) + "|" + std::to_string(u.max_piece_chars));
  char buf[32];
  std::snprintf(buf, sizeof buf, "%08lx%08lx", static_cast<unsigned long>(crc),
                static_cast<unsigned long>(adler));
  return buf;
}

TokenizerModel train_model(Algorithm algo, std::span<const Corpus> corpora, std::size_t size,
                           const TrainingOptions& options) {
  switch (algo) {
    case Algorithm::bpe:
      return train_bpe(corpora, size, options);
    case Algorithm::wordpiece:
      return train_wpc(corpora, size, options);
    case Algorithm::unigram:
      return train_uni(corpora, size, options);
  }
  throw InvariantError("unknown algorithm");
}

SweepResult run_sweep(const SweepConfig& config, std::span<const Corpus> corpora,
                      std::span<const std::size_t> sizes, std::span<const Stimulus> stimuli,
                      const EvalOptions& options) {
  if (sizes.empty()) throw UsageError("sweep needs at least one vocabulary size");
  for (std::size_t i = 1; i < sizes.size(); ++i) {
    if (sizes[i] <= sizes[i - 1]) throw UsageError("sweep sizes must be strictly increasing");
  }
  if (config.cache_dir) std::filesystem::create_directories(*config.cache_dir);

  const auto cache_path = [&](std::size_t size) -> std::optional<std::filesystem::path> {
    if (!config.cache_dir) return std::nullopt;
    return *config.cache_dir / (std::string(algorithm_name(config.algorithm)) + "-" +
                                std::to_string(size) + "-" +
                                model_cache_key(corpora, config.algorithm, size, config.options) +
                                ".json");
  };
  const bool nested = config.algorithm != Algorithm::unigram;
  std::optional<TokenizerModel> largest;  // nested algorithms train once

  SweepResult result;
  for (const std::size_t size : sizes) {
    try {
      const auto path = cache_path(size);
      std::optional<TokenizerModel> model;
      bool from_cache = false;
      if (path && std::filesystem::exists(*path)) {
        model = load_model(*path);
        from_cache = true;
      } else if (nested) {
        if (!largest) {
          largest = train_model(config.algorithm, corpora, sizes.back(), config.options);
        }
        model = truncate_to_size(*largest, size);
      } else {
        model = train_model(config.algorithm, corpora, size, config.options);
      }
      if (path && !from_cache) save_model(*model, *path);

      const NamedModel named{std::string(algorithm_name(config.algorithm)) + "-" +
                                 std::to_string(size),
                             &*model};
      result.points.push_back(
          {size, from_cache, run_cognitive_eval(std::span(&named, 1), stimuli, options)});
    } catch (const std::exception& e) {
      result.error = "size " + std::to_string(size) + ": " + e.what();
      log::warn("sweep aborted at " + *result.error);
      break;
    }
  }
  return result;
}

std::string sweep_to_json(const SweepResult& sweep) {
  ojson points = ojson::array();
  for (const auto& p : sweep.points) {
    points.push_back({{"vocab_size", p.vocab_size}, {"report", report_json(p.report)}});
  }
  ojson doc{{"points", std::move(points)},
            {"error", sweep.error ? ojson(*sweep.error) : ojson(nullptr)}};
  return doc.dump(2) + "\n";
}

// --- Morphological coverage ---------------------------------------------------------------

double morph_coverage(const Vocabulary& vocab, const MorphemeInventory& inventory) {
  if (inventory.morphemes.empty()) throw DataError("empty morpheme inventory");
  std::size_t covered = 0;
  for (const auto& m : inventory.morphemes) {
    if (vocab.contains(m) ||
        (!vocab.continuation_marker().empty() && vocab.contains(vocab.continuation_marker() + m))) {
      ++covered;
    }
  }
  return static_cast<double>(covered) / static_cast<double>(inventory.morphemes.size());
}

CoverageCurve coverage_curve(std::span<const NamedModel> models,
                             const MorphemeInventory& inventory) {
  CoverageCurve curve;
  curve.language = inventory.language;
  for (const auto& nm : models) {
    const double fraction = morph_coverage(nm.model->vocabulary(), inventory);
    const std::size_t total = inventory.morphemes.size();
    curve.points.push_back({nm.id, std::string(algorithm_name(nm.model->algorithm())),
                            nm.model->vocabulary().size(),
                            static_cast<std::size_t>(std::llround(fraction * static_cast<double>(total))),
                            total, fraction});
  }
  std::stable_sort(curve.points.begin(), curve.points.end(),
                   [](const CoveragePoint& a, const CoveragePoint& b) {
                     if (a.algorithm != b.algorithm) return a.algorithm < b.algorithm;
                     return a.vocab_size < b.vocab_size;
                   });
  return curve;
}

std::string coverage_to_csv(const CoverageCurve& curve) {
  std::string out = "language,tokenizer_id,algorithm,vocab_size,covered,total,fraction\n";
  for (const auto& p : curve.points) {
    out += csv_field(curve.language) + ',' + csv_field(p.tokenizer_id) + ',' + p.algorithm + ',' +
           std::to_string(p.vocab_size) + ',' + std::to_string(p.covered) + ',' +
           std::to_string(p.total) + ',' + format_double(p.fraction) + '\n';
  }
  return out;
}

// --- Regression --------------------------------------------------------------------------------

RegressionReport run_regression(std::span<const Stimulus> stimuli, const TokenizerModel& model,
                                const FrequencyTable& frequency, std::uint64_t seed) {
  RegressionReport report;
  report.seed = seed;
  std::vector<double> chunk, freq, rt, acc;
  for (const auto& s : stimuli) {
    if (!s.is_word) continue;
    const auto z = frequency.lookup(s.sequence);
    if (!z) {
      ++report.words_dropped;
      continue;
    }
    chunk.push_back(chunkability(encode(model, s.sequence)));
    freq.push_back(*z);
    rt.push_back(s.rt_ms);
    acc.push_back(s.accuracy);
  }
  report.words_used = chunk.size();
  if (report.words_used < 10) {
    throw DataError("too few words with frequency entries for regression (" +
                    std::to_string(report.words_used) + " < 10)");
  }
  const auto rt_scaled = stats::minmax_scale(rt);
  const auto acc_scaled = stats::minmax_scale(acc);
  for (const Signal signal : {Signal::rt, Signal::accuracy}) {
    const auto& y = signal == Signal::rt ? rt_scaled : acc_scaled;
    report.cells.push_back({signal, "chunkability", stats::linreg_holdout(chunk, y, 0.8, seed)});
    report.cells.push_back({signal, "frequency", stats::linreg_holdout(freq, y, 0.8, seed)});
  }
  return report;
}

std::string regression_to_json(const RegressionReport& report) {
  ojson cells = ojson::array();
  for (const auto& c : report.cells) {
    cells.push_back({{"signal", signal_name(c.signal)},
                     {"feature", c.feature},
                     {"mse", c.result.mse},
                     {"explained_variance", c.result.explained_variance},
                     {"slope", c.result.slope},
                     {"intercept", c.result.intercept},
                     {"n_train", c.result.n_train},
                     {"n_test", c.result.n_test}});
  }
  ojson doc{{"words_used", report.words_used},
            {"words_dropped", report.words_dropped},
            {"seed", report.seed},
            {"train_fraction", 0.8},
            {"signal_scaling", "min-max"},
            {"cells", std::move(cells)}};
  return doc.dump(2) + "\n";
}

}  // namespace toklab
