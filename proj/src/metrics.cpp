#include "toklab/metrics.hpp"

#include "toklab/error.hpp"
#include "toklab/unicode.hpp"

namespace toklab {

std::string_view metric_name(Metric metric) {
  switch (metric) {
    case Metric::chunkability:
      return "chunkability";
    case Metric::num_tokens:
      return "num-tokens";
    case Metric::char_length:
      return "length";
  }
  throw InvariantError("unknown metric");
}

Metric parse_metric(std::string_view name) {
  if (name == "chunkability" || name == "chunk") return Metric::chunkability;
  if (name == "num-tokens" || name == "num_tokens" || name == "splits") return Metric::num_tokens;
  if (name == "length" || name == "char_length" || name == "char-length") {
    return Metric::char_length;
  }
  throw UsageError("unknown metric '" + std::string(name) +
                   "' (expected chunkability, num-tokens or length)");
}

double chunkability(const Tokenization& t) {
  if (t.n == 0) throw UsageError("chunkability of an empty sequence");
  if (t.k == 0 || t.k > t.n) throw InvariantError("tokenization violates 1 <= k <= n");
  return 1.0 - static_cast<double>(t.k) / static_cast<double>(t.n);
}

std::size_t num_tokens(const Tokenization& t) { return t.k; }

std::size_t char_length(std::string_view sequence) { return unicode::length(sequence); }

double metric_value(Metric metric, const Tokenization& t) {
  switch (metric) {
    case Metric::chunkability:
      return chunkability(t);
    case Metric::num_tokens:
      return static_cast<double>(num_tokens(t));
    case Metric::char_length:
      return static_cast<double>(char_length(t.source));
  }
  throw InvariantError("unknown metric");
}

}  // namespace toklab
