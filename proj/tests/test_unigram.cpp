#include <cmath>
#include <map>
#include <random>

#include "doctest.h"
#include "support/desk_corpus.hpp"
#include "support/oracles.hpp"
#include "toklab/error.hpp"
#include "toklab/unigram.hpp"

using namespace toklab;

namespace {

TokenizerModel lexicon_model(const std::vector<std::pair<std::string, double>>& entries) {
  Vocabulary v;
  std::vector<double> lps;
  for (const auto& [tok, lp] : entries) {
    if (tok.size() == 1) {
      v.add_alphabet_char(tok);
    } else {
      v.add(tok);
    }
    lps.push_back(lp);
  }
  return TokenizerModel::from_lexicon(std::move(v), std::move(lps), {});
}

std::vector<std::size_t> ascii_offsets(const std::string& s) {
  std::vector<std::size_t> o;
  for (std::size_t i = 0; i <= s.size(); ++i) o.push_back(i);
  return o;
}

std::vector<Corpus> corpus_of(std::vector<std::string> sentences) {
  Corpus c;
  c.sentences = std::move(sentences);
  return {c};
}

}  // namespace

TEST_CASE("two-case hand computation") {
  const auto m = lexicon_model({{"a", std::log(0.5)}, {"b", std::log(0.3)}, {"ab", std::log(0.2)}});
  CHECK(encode(m, "ab").tokens == std::vector<std::string>{"ab"});
  const auto m2 = lexicon_model({{"a", std::log(0.5)}, {"b", std::log(0.4)}, {"ab", std::log(0.1)}});
  CHECK(encode(m2, "ab").tokens == std::vector<std::string>{"a", "b"});
  CHECK(encode(m, "a").tokens == std::vector<std::string>{"a"});
}

TEST_CASE("viterbi ties: fewer tokens, then leftmost longest") {
  const auto fewer = lexicon_model({{"a", -1.0}, {"b", -1.0}, {"ab", -2.0}});
  CHECK(encode(fewer, "ab").tokens == std::vector<std::string>{"ab"});
  const auto left = lexicon_model({{"a", -1.0}, {"b", -1.0}, {"c", -1.0}, {"ab", -1.5}, {"bc", -1.5}});
  CHECK(encode(left, "abc").tokens == std::vector<std::string>{"ab", "c"});
}

TEST_CASE("viterbi matches exhaustive enumeration") {
  std::mt19937_64 rng(42);
  const std::string alphabet = "abc";
  for (int trial = 0; trial < 300; ++trial) {
    StringMap<double> lexicon;
    std::map<std::string, double> oracle_lexicon;
    const std::size_t entries = 3 + rng() % 25;
    for (std::size_t e = 0; e < entries; ++e) {
      std::string tok;
      const std::size_t len = 1 + rng() % 4;
      for (std::size_t i = 0; i < len; ++i) tok += alphabet[rng() % 3];
      const double lp = std::log(std::uniform_real_distribution<double>(0.001, 1.0)(rng));
      lexicon[tok] = lp;
      oracle_lexicon[tok] = lp;
    }
    const double fallback = -12.0;
    for (std::size_t len = 1; len <= 10; ++len) {
      std::string word;
      for (std::size_t i = 0; i < len; ++i) word += alphabet[rng() % 3];
      const auto seg = unigram::viterbi(lexicon, 4, fallback, word, ascii_offsets(word));
      const double expected = oracle::best_segmentation(oracle_lexicon, word, fallback);
      CHECK(std::abs(seg.log_prob - expected) <= 1e-12);
      double total = 0;
      std::string glued;
      for (const auto& t : seg.tokens) {
        glued += t;
        total += lexicon.count(t) ? lexicon.at(t) : fallback;
      }
      CHECK(glued == word);
      CHECK(std::abs(total - seg.log_prob) <= 1e-12);
    }
  }
}

TEST_CASE("excluded token is masked") {
  StringMap<double> lex{{"a", -1.0}, {"b", -1.0}, {"ab", -0.5}};
  const std::string w = "abab";
  CHECK(unigram::viterbi(lex, 2, -9, w, ascii_offsets(w)).tokens.size() == 2);
  const auto masked = unigram::viterbi(lex, 2, -9, w, ascii_offsets(w), "ab");
  CHECK(masked.tokens == std::vector<std::string>{"a", "b", "a", "b"});
}

TEST_CASE("alphabet plus one keeps the most likely substring") {
  const std::vector<std::pair<std::string, double>> types{{"abab", 50}, {"ab", 20}};
  std::vector<std::string> sentences;
  for (const auto& [w, f] : types) {
    for (int i = 0; i < f; ++i) sentences.push_back(w);
  }
  const auto m = train_uni(corpus_of(sentences), 3);
  REQUIRE(m.vocabulary().size() == 3);
  std::string kept;
  for (const auto& t : m.vocabulary().tokens()) {
    if (t.size() > 1) kept = t;
  }

  // Brute force: for each candidate lexicon {a, b, s}, the best corpus
  // likelihood over every joint choice of per-type segmentations.
  const auto segmentations = [](const std::string& w, const std::string& s) {
    std::vector<std::vector<std::string>> out;
    for (std::size_t mask = 0; mask < (std::size_t{1} << (w.size() - 1)); ++mask) {
      std::vector<std::string> pieces;
      std::size_t start = 0;
      bool ok = true;
      for (std::size_t i = 1; i <= w.size(); ++i) {
        if (i == w.size() || (mask >> (i - 1)) & 1) {
          pieces.push_back(w.substr(start, i - start));
          ok = ok && (pieces.back().size() == 1 || pieces.back() == s);
          start = i;
        }
      }
      if (ok) out.push_back(pieces);
    }
    return out;
  };
  std::map<std::string, double> likelihood;
  for (const std::string s : {"ab", "ba", "aba", "bab", "abab"}) {
    const auto first = segmentations(types[0].first, s);
    const auto second = segmentations(types[1].first, s);
    double best = -INFINITY;
    for (const auto& p0 : first) {
      for (const auto& p1 : second) {
        std::map<std::string, double> counts;
        double total = 0;
        for (const auto& piece : p0) counts[piece] += types[0].second;
        for (const auto& piece : p1) counts[piece] += types[1].second;
        for (const auto& [piece, c] : counts) total += c;
        double ll = 0;
        for (const auto& [piece, c] : counts) ll += c * std::log(c / total);
        best = std::max(best, ll);
      }
    }
    likelihood[s] = best;
  }
  std::string best = "ab";
  for (const auto& [s, ll] : likelihood) {
    if (ll > likelihood[best]) best = s;
  }
  CHECK(best == "ab");
  CHECK(kept == best);
  CHECK(encode(m, "abab").tokens == std::vector<std::string>{"ab", "ab"});
}

TEST_CASE("alphabet-sized target keeps characters only") {
  const auto m = train_uni(corpus_of({"abc cab bca"}), 3);
  CHECK(m.vocabulary().size() == 3);
  CHECK(encode(m, "cab").tokens == std::vector<std::string>{"c", "a", "b"});
  CHECK_THROWS_AS(train_uni(corpus_of({"abc"}), 2), UsageError);
}

TEST_CASE("pruning trace: likelihood never rises, mass stays normalised") {
  const std::vector<Corpus> corpora{toklab::testing::desk_corpus(800)};
  unigram::TrainingTrace trace;
  const auto m = train_uni(corpora, 400, {}, &trace);
  CHECK(m.vocabulary().size() == 400);
  REQUIRE_FALSE(trace.rounds.empty());
  CHECK(trace.seed_size > 400);
  for (const auto& r : trace.rounds) {
    CHECK(r.log_likelihood_after <= r.log_likelihood_before);
    CHECK(std::abs(r.probability_mass - 1.0) < 1e-9);
    CHECK(r.pruned > 0);
  }
  CHECK(std::abs(trace.final_probability_mass - 1.0) < 1e-9);
  double mass = 0;
  for (double lp : m.log_probs()) mass += std::exp(lp);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("unigram training is deterministic") {
  const std::vector<Corpus> corpora{toklab::testing::desk_corpus(600)};
  const auto a = train_uni(corpora, 300);
  const auto b = train_uni(corpora, 300);
  CHECK(a.vocabulary().tokens() == b.vocabulary().tokens());
  CHECK(a.log_probs() == b.log_probs());
  for (const auto& w : toklab::testing::probe_words(200)) {
    CHECK(encode(a, w).tokens == encode(b, w).tokens);
    CHECK(reconstruct(a, encode(a, w)) == w);
  }
}
