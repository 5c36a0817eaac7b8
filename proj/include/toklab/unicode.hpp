#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace toklab::unicode {

/// True if `text` is well-formed UTF-8.
bool is_valid_utf8(std::string_view text);

/// Splits UTF-8 text into one string per Unicode scalar value.
/// Throws DataError on malformed input.
std::vector<std::string> chars(std::string_view text);

/// Number of Unicode scalar values in `text`.
std::size_t length(std::string_view text);

std::string nfc(std::string_view text);
std::string lowercase(std::string_view text);

/// NFC, then optional lowercasing. This is the single normalization path for
/// corpora, stimuli, frequency lists and morpheme annotations.
std::string normalize(std::string_view text, bool lowercase);

bool contains_whitespace(std::string_view text);
std::string trim(std::string_view text);

/// Splits a sentence into pre-tokens: maximal runs of word characters
/// (letters, marks, digits, connector punctuation) and maximal runs of other
/// non-space characters. Whitespace is discarded.
std::vector<std::string> pretokenize(std::string_view sentence);

}  // namespace toklab::unicode
