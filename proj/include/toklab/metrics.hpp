#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "toklab/vocab.hpp"

namespace toklab {

enum class Metric { chunkability, num_tokens, char_length };

/// "chunkability", "num-tokens", "length".
std::string_view metric_name(Metric metric);
Metric parse_metric(std::string_view name);

/// 1 - k/n. Zero when every character is its own token.
double chunkability(const Tokenization& t);
std::size_t num_tokens(const Tokenization& t);
/// Unicode scalar values; the length baseline.
std::size_t char_length(std::string_view sequence);

double metric_value(Metric metric, const Tokenization& t);

struct MetricValue {
  std::string stimulus_id;
  Metric metric = Metric::chunkability;
  double value = 0.0;
};

}  // namespace toklab
