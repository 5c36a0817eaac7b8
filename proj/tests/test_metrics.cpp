#include "doctest.h"
#include "toklab/error.hpp"
#include "toklab/metrics.hpp"

using namespace toklab;

namespace {

Tokenization tok(std::string source, std::vector<std::string> tokens) {
  Tokenization t;
  t.n = char_length(source);
  t.source = std::move(source);
  t.k = tokens.size();
  t.tokens = std::move(tokens);
  return t;
}

}  // namespace

TEST_CASE("reference chunkability") {
  CHECK(chunkability(tok("seafood", {"seafood"})) == doctest::Approx(0.86).epsilon(0.005));
  CHECK(chunkability(tok("outfoxed", {"out", "fo", "x", "ed"})) == doctest::Approx(0.50));
  CHECK(chunkability(tok("brithbloom", {"br", "##ith", "##blo", "##om"})) == doctest::Approx(0.60));
  CHECK(chunkability(tok("catchwind", {"catch", "##wind"})) == doctest::Approx(0.78).epsilon(0.005));
}

TEST_CASE("token and character counts") {
  CHECK(num_tokens(tok("catchwind", {"catch", "##wind"})) == 2);
  CHECK(num_tokens(tok("seafood", {"seafood"})) == 1);
  CHECK(num_tokens(tok("brithbloom", {"br", "##ith", "##blo", "##om"})) == 4);
  CHECK(char_length("seafood") == 7);
  CHECK(char_length("outfoxed") == 8);
  CHECK(char_length("brithbloom") == 10);
  CHECK(char_length("ma\xC3\xB1" "ana") == 6);
}

TEST_CASE("full split has zero chunkability") {
  CHECK(chunkability(tok("abc", {"a", "b", "c"})) == 0.0);
}

TEST_CASE("metrics are mutually consistent and bounded") {
  for (std::size_t n = 1; n <= 40; ++n) {
    const std::string s(n, 'x');
    double previous = 1.0;
    for (std::size_t k = 1; k <= n; ++k) {
      Tokenization t = tok(s, std::vector<std::string>(k, "x"));
      const double c = chunkability(t);
      CHECK(c == doctest::Approx(1.0 - double(num_tokens(t)) / double(char_length(s))));
      CHECK(c >= 0.0);
      CHECK(c < 1.0);
      CHECK((c == 0.0) == (k == n));
      CHECK(c < previous);
      previous = c;
      CHECK(metric_value(Metric::num_tokens, t) == double(k));
      CHECK(metric_value(Metric::char_length, t) == double(n));
    }
  }
}

TEST_CASE("unsplit chunkability approaches one") {
  double prev = 0;
  for (std::size_t n = 1; n < 1000; n *= 3) {
    const double c = chunkability(tok(std::string(n, 'a'), {std::string(n, 'a')}));
    CHECK(c >= prev);
    prev = c;
  }
  CHECK(prev > 0.99);
}

TEST_CASE("inconsistent tokenizations are rejected") {
  Tokenization t = tok("abc", {"a", "b", "c"});
  t.k = 4;
  CHECK_THROWS(chunkability(t));
  t.k = 0;
  CHECK_THROWS(chunkability(t));
}

TEST_CASE("metric names") {
  CHECK(parse_metric("chunkability") == Metric::chunkability);
  CHECK(parse_metric("num-tokens") == Metric::num_tokens);
  CHECK(parse_metric("length") == Metric::char_length);
  CHECK(metric_name(Metric::num_tokens) == "num-tokens");
  CHECK_THROWS_AS(parse_metric("entropy"), UsageError);
}
