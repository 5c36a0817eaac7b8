#include <cmath>
#include <random>

#include "doctest.h"
#include "support/desk_corpus.hpp"
#include "support/scratch.hpp"
#include "toklab/bpe.hpp"
#include "toklab/error.hpp"
#include "toklab/evalpipe.hpp"
#include "toklab/metrics.hpp"
#include "toklab/unigram.hpp"
#include "toklab/wordpiece.hpp"

using namespace toklab;
using toklab::testing::ScratchDir;

namespace {

const std::vector<Corpus>& corpora() {
  static const std::vector<Corpus> c{toklab::testing::desk_corpus(800)};
  return c;
}

// Words and non-words whose signals follow chunkability under `model`.
std::vector<Stimulus> constructed_stimuli(const TokenizerModel& model, std::size_t per_class,
                                          std::uint64_t seed) {
  toklab::testing::DeskLanguage lang(2024);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<Stimulus> out;
  for (std::size_t i = 0; i < 2 * per_class; ++i) {
    const bool word = i < per_class;
    const std::string seq = word ? lang.word() : lang.nonword();
    const double c = chunkability(encode(model, seq));
    const double sign = word ? 1.0 : -1.0;
    const double rt = 700 - sign * 300 * c + 10 * noise(rng);
    const double acc = std::clamp(0.7 + sign * 0.25 * c + 0.01 * noise(rng), 0.0, 1.0);
    out.push_back({seq, word, rt, acc});
  }
  return out;
}

}  // namespace

TEST_CASE("names round-trip") {
  CHECK(parse_signal("rt") == Signal::rt);
  CHECK(parse_signal("acc") == Signal::accuracy);
  CHECK(signal_name(Signal::accuracy) == "acc");
  CHECK(parse_correlation_method("spearman") == CorrelationMethod::spearman);
  CHECK_THROWS_AS(parse_signal("latency"), UsageError);
}

TEST_CASE("reference tokenizations through an imported vocabulary") {
  const auto m = import_external_vocab(TOKLAB_TEST_DATA "/reference_vocab.txt",
                                       ExternalFormat::wordpiece_list);
  const std::vector<std::pair<std::string, std::vector<std::string>>> expected{
      {"seafood", {"seafood"}},
      {"outfoxed", {"out", "##fo", "##x", "##ed"}},
      {"brithbloom", {"br", "##ith", "##blo", "##om"}},
      {"catchwind", {"catch", "##wind"}}};
  const std::vector<double> chunk{0.86, 0.50, 0.60, 0.78};
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const auto t = encode(m, expected[i].first);
    CHECK(t.tokens == expected[i].second);
    CHECK(std::abs(chunkability(t) - chunk[i]) <= 0.005);
  }
}

TEST_CASE("reference stimuli alone: report computes and flags small n") {
  const auto m = import_external_vocab(TOKLAB_TEST_DATA "/reference_vocab.txt",
                                       ExternalFormat::wordpiece_list);
  const auto stimuli = load_lexical_decision(TOKLAB_TEST_DATA "/reference_stimuli.csv").stimuli;
  const NamedModel named{"reference", &m};
  const auto report = run_cognitive_eval(std::span(&named, 1), stimuli, {});
  CHECK(report.rows.size() == 2 * 2 * 2 + 2 * 2);
  for (const auto& row : report.rows) {
    CHECK(row.n_obs == 2);
    CHECK_FALSE(row.vs_length.has_value());
    CHECK(row.note.find("below significance threshold") != std::string::npos);
  }
}

TEST_CASE("constructed fixture recovers the signs") {
  const auto m = train_wpc(corpora(), 400);
  const auto stimuli = constructed_stimuli(m, 200, 5);
  const NamedModel named{"wpc", &m};
  EvalOptions opts;
  opts.metrics = {Metric::chunkability};
  const auto report = run_cognitive_eval(std::span(&named, 1), stimuli, opts);
  REQUIRE(report.rows.size() == 4);
  for (const auto& row : report.rows) {
    REQUIRE(row.r.has_value());
    const bool word = row.word_class == WordClass::words;
    const bool rt = row.signal == Signal::rt;
    CHECK((*row.r > 0) == (word != rt));
  }
}

TEST_CASE("report covers the full cross-product") {
  const auto bpe = train_bpe(corpora(), 300);
  const auto wpc = train_wpc(corpora(), 300);
  const auto uni = train_uni(corpora(), 300);
  const std::vector<NamedModel> models{{"bpe", &bpe}, {"wpc", &wpc}, {"uni", &uni}};
  const auto stimuli = constructed_stimuli(wpc, 60, 9);
  const auto report = run_cognitive_eval(models, stimuli, {});
  std::set<std::tuple<std::string, Metric, Signal, WordClass>> cells;
  for (const auto& row : report.rows) {
    cells.insert({row.tokenizer_id, row.metric, row.signal, row.word_class});
    if (row.tokenizer_id != kLengthBaselineId) {
      CHECK(row.pairwise.size() == 2);
      CAPTURE(row.tokenizer_id);
      CAPTURE(row.note);
      CHECK(row.vs_length.has_value());
    }
  }
  CHECK(cells.size() == report.rows.size());
  CHECK(report.rows.size() == 3 * 2 * 2 * 2 + 2 * 2);
  for (const auto& id : {"bpe", "wpc", "uni"}) {
    for (const Metric metric : {Metric::chunkability, Metric::num_tokens}) {
      for (const Signal s : {Signal::rt, Signal::accuracy}) {
        for (const WordClass wc : {WordClass::words, WordClass::nonwords}) {
          CHECK(cells.count({id, metric, s, wc}) == 1);
        }
      }
    }
  }
  CHECK(report.rows.back().tokenizer_id == kLengthBaselineId);
}

TEST_CASE("report is a pure function of the per-stimulus metrics file") {
  ScratchDir dir("pure");
  const auto bpe = train_bpe(corpora(), 250);
  const auto uni = train_uni(corpora(), 250);
  const std::vector<NamedModel> models{{"bpe", &bpe}, {"uni", &uni}};
  const auto stimuli = constructed_stimuli(bpe, 50, 4);
  EvalOptions opts;
  opts.method = CorrelationMethod::spearman;
  StimulusMetrics metrics;
  const auto report = run_cognitive_eval(models, stimuli, opts, &metrics);
  write_stimulus_metrics(dir / "m.csv", metrics);
  const auto back = read_stimulus_metrics(dir / "m.csv");
  CHECK(back.stimuli == metrics.stimuli);
  CHECK(back.tokens == metrics.tokens);
  CHECK(back.segments == metrics.segments);
  CHECK(report_to_json(build_report(back, opts)) == report_to_json(report));
  CHECK(report_to_csv(build_report(back, opts)) == report_to_csv(report));
}

TEST_CASE("thread count does not change results") {
  const auto bpe = train_bpe(corpora(), 250);
  const auto wpc = train_wpc(corpora(), 250);
  const std::vector<NamedModel> models{{"bpe", &bpe}, {"wpc", &wpc}};
  const auto stimuli = constructed_stimuli(bpe, 150, 4);
  EvalOptions one, many;
  many.threads = 4;
  CHECK(report_to_json(run_cognitive_eval(models, stimuli, one)) ==
        report_to_json(run_cognitive_eval(models, stimuli, many)));
}

TEST_CASE("word classes are never pooled and must both exist") {
  const auto bpe = train_bpe(corpora(), 200);
  auto stimuli = constructed_stimuli(bpe, 20, 2);
  for (auto& s : stimuli) s.is_word = true;
  const NamedModel named{"bpe", &bpe};
  CHECK_THROWS_AS(run_cognitive_eval(std::span(&named, 1), stimuli, {}), DataError);
}

TEST_CASE("models must agree on lowercasing") {
  TrainingOptions cased;
  cased.lowercase = false;
  const auto a = train_bpe(corpora(), 200);
  const auto b = train_bpe(corpora(), 200, cased);
  const std::vector<NamedModel> models{{"a", &a}, {"b", &b}};
  CHECK_THROWS_AS(run_cognitive_eval(models, constructed_stimuli(a, 10, 1), {}), DataError);
}

TEST_CASE("single-size sweep equals a direct evaluation") {
  const auto stimuli = constructed_stimuli(train_bpe(corpora(), 300), 60, 3);
  SweepConfig config;
  config.algorithm = Algorithm::bpe;
  const std::vector<std::size_t> sizes{300};
  const auto sweep = run_sweep(config, corpora(), sizes, stimuli, {});
  REQUIRE(sweep.points.size() == 1);
  CHECK_FALSE(sweep.error.has_value());
  const auto m = train_bpe(corpora(), 300);
  const NamedModel named{"bpe-300", &m};
  CHECK(report_to_json(sweep.points[0].report) ==
        report_to_json(run_cognitive_eval(std::span(&named, 1), stimuli, {})));
}

TEST_CASE("sweep caching is transparent") {
  ScratchDir dir("cache");
  const auto stimuli = constructed_stimuli(train_wpc(corpora(), 300), 40, 6);
  for (const Algorithm algo : {Algorithm::wordpiece, Algorithm::unigram}) {
    SweepConfig config;
    config.algorithm = algo;
    const std::vector<std::size_t> sizes{200, 300};
    const auto fresh = run_sweep(config, corpora(), sizes, stimuli, {});
    config.cache_dir = dir.path();
    const auto first = run_sweep(config, corpora(), sizes, stimuli, {});
    const auto second = run_sweep(config, corpora(), sizes, stimuli, {});
    REQUIRE(second.points.size() == 2);
    CHECK_FALSE(first.points[0].from_cache);
    CHECK(second.points[0].from_cache);
    CHECK(second.points[1].from_cache);
    CHECK(sweep_to_json(first) == sweep_to_json(second));
    CHECK(sweep_to_json(fresh) == sweep_to_json(second));
  }
}

TEST_CASE("a failing size keeps the earlier points") {
  ScratchDir dir("partial");
  const auto stimuli = constructed_stimuli(train_bpe(corpora(), 300), 40, 6);
  SweepConfig config;
  config.algorithm = Algorithm::bpe;
  config.cache_dir = dir.path();
  const auto key = model_cache_key(corpora(), Algorithm::bpe, 300, config.options);
  dir.file("bpe-300-" + key + ".json", "{\"format\": \"toklab-model\"");
  const std::vector<std::size_t> sizes{200, 300};
  const auto result = run_sweep(config, corpora(), sizes, stimuli, {});
  CHECK(result.points.size() == 1);
  REQUIRE(result.error.has_value());
  CHECK(result.error->find("300") != std::string::npos);
  CHECK_THROWS_AS(run_sweep(config, corpora(), std::vector<std::size_t>{300, 200}, stimuli, {}),
                  UsageError);
}

TEST_CASE("cache key tracks corpus and flags") {
  TrainingOptions a, b;
  b.lowercase = false;
  const auto k1 = model_cache_key(corpora(), Algorithm::bpe, 100, a);
  CHECK(k1 == model_cache_key(corpora(), Algorithm::bpe, 100, a));
  CHECK(k1 != model_cache_key(corpora(), Algorithm::bpe, 100, b));
  CHECK(k1 != model_cache_key(corpora(), Algorithm::wordpiece, 100, a));
  CHECK(k1 != model_cache_key(corpora(), Algorithm::bpe, 101, a));
  auto other = corpora();
  other[0].sentences.back() += "x";
  CHECK(k1 != model_cache_key(other, Algorithm::bpe, 100, a));
  CHECK(default_size_grid().front() == 1000);
  CHECK(default_size_grid().back() == 70000);
}

TEST_CASE("morph coverage definition") {
  MorphemeInventory inv;
  inv.morphemes = {"er", "ness"};
  Vocabulary marked{"##"};
  marked.add("##er");
  CHECK(morph_coverage(marked, inv) == 0.5);
  Vocabulary bare;
  bare.add("er");
  bare.add("ness");
  bare.add("un");
  CHECK(morph_coverage(bare, inv) == 1.0);
  CHECK_THROWS_AS(morph_coverage(bare, MorphemeInventory{}), DataError);
}

TEST_CASE("coverage never falls along a nested vocabulary chain") {
  MorphemeInventory inv;
  for (const auto& a : toklab::testing::DeskLanguage::prefixes()) inv.morphemes.insert(a);
  for (const auto& a : toklab::testing::DeskLanguage::suffixes()) inv.morphemes.insert(a);
  for (const Algorithm algo : {Algorithm::bpe, Algorithm::wordpiece}) {
    const auto full = train_model(algo, corpora(), 800, {});
    double prev = 0;
    for (std::size_t size = 100; size <= 800; size += 50) {
      const auto cut = truncate_to_size(full, size);
      const double c = morph_coverage(cut.vocabulary(), inv);
      CHECK(c >= prev);
      prev = c;
    }
    CHECK(prev > 0.0);
  }
  const auto w = train_wpc(corpora(), 400);
  const auto u = train_uni(corpora(), 400);
  const std::vector<NamedModel> models{{"w", &w}, {"u", &u}};
  const auto curve = coverage_curve(models, inv);
  REQUIRE(curve.points.size() == 2);
  CHECK(curve.points[0].algorithm == "uni");
  CHECK(coverage_to_csv(curve).starts_with("language,tokenizer_id"));
}

TEST_CASE("regression on constructed words") {
  const auto m = train_bpe(corpora(), 400);
  toklab::testing::DeskLanguage lang(2024);
  std::vector<Stimulus> stimuli;
  FrequencyTable::ScoreMap scores;
  std::mt19937_64 rng(3);
  std::set<std::string> seen;
  while (stimuli.size() < 200) {
    const std::string w = lang.word();
    if (!seen.insert(w).second) continue;
    const double c = chunkability(encode(m, w));
    stimuli.push_back({w, true, 900 - 400 * c, 0.5 + 0.4 * c});
    if (stimuli.size() % 10 != 0) scores[w] = std::uniform_real_distribution<double>(1, 7)(rng);
  }
  stimuli.push_back({"blorf", false, 800, 0.5});
  const FrequencyTable freq(scores);
  const auto r = run_regression(stimuli, m, freq, 13);
  CHECK(r.words_dropped == 20);
  CHECK(r.words_used == 180);
  REQUIRE(r.cells.size() == 4);
  for (const auto& cell : r.cells) {
    if (cell.feature == "chunkability") {
      CHECK(cell.result.mse <= 1e-20);
      CHECK(cell.result.explained_variance >= 1 - 1e-12);
    } else {
      CHECK(cell.result.explained_variance < 0.5);
    }
  }
  const auto again = run_regression(stimuli, m, freq, 13);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(again.cells[i].result.mse == r.cells[i].result.mse);
    CHECK(again.cells[i].result.explained_variance == r.cells[i].result.explained_variance);
  }
  CHECK(regression_to_json(again) == regression_to_json(r));
  CHECK_THROWS_AS(run_regression(stimuli, m, FrequencyTable{}, 13), DataError);
}
