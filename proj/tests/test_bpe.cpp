#include "doctest.h"
#include "support/desk_corpus.hpp"
#include "toklab/bpe.hpp"
#include "toklab/error.hpp"
#include "toklab/metrics.hpp"
#include "toklab/unicode.hpp"

using namespace toklab;

namespace {

std::vector<Corpus> corpus_of(std::vector<std::string> sentences) {
  Corpus c;
  c.sentences = std::move(sentences);
  c.source_id = "inline";
  return {c};
}

TokenizerModel model_from(std::vector<std::string> alphabet, std::vector<MergeRule> merges) {
  Vocabulary v;
  for (const auto& ch : alphabet) v.add_alphabet_char(ch);
  for (const auto& m : merges) v.add(m.left + m.right);
  return TokenizerModel::from_merges(Algorithm::bpe, std::move(v), std::move(merges), {});
}

}  // namespace

TEST_CASE("most frequent pair merges first") {
  const auto m = train_bpe(corpus_of({"ab ab ab", "ac"}), 4);
  REQUIRE(m.merges().size() == 1);
  CHECK(m.merges()[0] == MergeRule{"a", "b", 0});
  CHECK(m.vocabulary().size() == 4);
  CHECK(encode(m, "abac").tokens == std::vector<std::string>{"ab", "a", "c"});
}

TEST_CASE("equal pair counts break ties lexicographically") {
  const auto m = train_bpe(corpus_of({"cd ab", "xy"}), 7);
  REQUIRE(m.merges().size() == 1);
  CHECK(m.merges()[0] == MergeRule{"a", "b", 0});
  const auto m2 = train_bpe(corpus_of({"ba ab"}), 3);
  CHECK(m2.merges()[0] == MergeRule{"a", "b", 0});
}

TEST_CASE("alphabet-sized target yields no merges") {
  const auto corpora = corpus_of({"seafood outfoxed", "catch wind"});
  std::set<std::string> chars;
  for (const auto& s : corpora[0].sentences) {
    for (const auto& c : unicode::chars(s)) {
      if (c != " ") chars.insert(c);
    }
  }
  const auto m = train_bpe(corpora, chars.size());
  CHECK(m.merges().empty());
  const auto t = encode(m, "seafood");
  CHECK(t.k == 7);
  CHECK(chunkability(t) == 0.0);
  CHECK_THROWS_AS(train_bpe(corpora, chars.size() - 1), UsageError);
}

TEST_CASE("merges apply by rank") {
  const auto sea = model_from({"a", "e", "s"}, {{"s", "e", 0}, {"se", "a", 1}});
  CHECK(encode(sea, "sea").tokens == std::vector<std::string>{"sea"});
  CHECK(encode(sea, "s").tokens == std::vector<std::string>{"s"});
  const auto abc = model_from({"a", "b", "c"}, {{"a", "b", 0}, {"b", "c", 1}});
  CHECK(encode(abc, "abc").tokens == std::vector<std::string>{"ab", "c"});
  CHECK(encode(abc, "bc").tokens == std::vector<std::string>{"bc"});
  const auto later = model_from({"a", "b", "c"}, {{"b", "c", 0}, {"a", "b", 1}});
  CHECK(encode(later, "abc").tokens == std::vector<std::string>{"a", "bc"});
}

TEST_CASE("leftmost occurrence wins among equal ranks") {
  const auto m = model_from({"a"}, {{"a", "a", 0}});
  CHECK(encode(m, "aaa").tokens == std::vector<std::string>{"aa", "a"});
  CHECK(encode(m, "aaaa").tokens == std::vector<std::string>{"aa", "aa"});
}

TEST_CASE("token length cap is respected") {
  TrainingOptions opts;
  opts.max_token_chars = 3;
  const auto m = train_bpe(corpus_of({"abcdef abcdef abcdef"}), 20, opts);
  CHECK(m.vocabulary().max_token_chars() <= 3);
  CHECK(reconstruct(m, encode(m, "abcdef")) == "abcdef");
}

TEST_CASE("training is deterministic and nested") {
  const std::vector<Corpus> corpora{toklab::testing::desk_corpus(1500)};
  const auto a = train_bpe(corpora, 600);
  const auto b = train_bpe(corpora, 600);
  CHECK(a.merges() == b.merges());
  CHECK(a.vocabulary().tokens() == b.vocabulary().tokens());
  const auto big = train_bpe(corpora, 900);
  REQUIRE(big.merges().size() >= a.merges().size());
  CHECK(std::equal(a.merges().begin(), a.merges().end(), big.merges().begin()));
  for (const auto& w : toklab::testing::probe_words(300)) {
    CHECK(encode(big, w).k <= encode(a, w).k);
  }
}

TEST_CASE("pair exhaustion stops early") {
  const auto m = train_bpe(corpus_of({"ab"}), 50);
  CHECK(m.vocabulary().size() == 3);
}
