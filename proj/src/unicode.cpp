#include "toklab/unicode.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "toklab/error.hpp"

namespace toklab::unicode {
namespace {

// Decodes the scalar at `i`, advancing it. Returns a negative value on
// malformed input.
UChar32 next_scalar(std::string_view text, int32_t& i) {
  UChar32 c;
  const auto* s = reinterpret_cast<const uint8_t*>(text.data());
  const auto n = static_cast<int32_t>(text.size());
  U8_NEXT(s, i, n, c);
  return c;
}

bool is_word_char(UChar32 c) {
  return u_isalnum(c) || u_hasBinaryProperty(c, UCHAR_ALPHABETIC) ||
         (U_GET_GC_MASK(c) & (U_GC_M_MASK | U_GC_PC_MASK)) != 0;
}

icu::UnicodeString to_icu(std::string_view text) {
  if (!is_valid_utf8(text)) throw DataError("invalid UTF-8 input");
  return icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
}

std::string from_icu(const icu::UnicodeString& u) {
  std::string out;
  u.toUTF8String(out);
  return out;
}

}  // namespace

bool is_valid_utf8(std::string_view text) {
  int32_t i = 0;
  while (i < static_cast<int32_t>(text.size())) {
    if (next_scalar(text, i) < 0) return false;
  }
  return true;
}

std::vector<std::string> chars(std::string_view text) {
  std::vector<std::string> out;
  out.reserve(text.size());
  int32_t i = 0;
  while (i < static_cast<int32_t>(text.size())) {
    const int32_t start = i;
    if (next_scalar(text, i) < 0) throw DataError("invalid UTF-8 input");
    out.emplace_back(text.substr(start, i - start));
  }
  return out;
}

std::size_t length(std::string_view text) {
  std::size_t n = 0;
  int32_t i = 0;
  while (i < static_cast<int32_t>(text.size())) {
    if (next_scalar(text, i) < 0) throw DataError("invalid UTF-8 input");
    ++n;
  }
  return n;
}

std::string nfc(std::string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw InvariantError("ICU NFC normalizer unavailable");
  const icu::UnicodeString src = to_icu(text);
  if (norm->isNormalized(src, status) && U_SUCCESS(status)) {
    return std::string(text);
  }
  status = U_ZERO_ERROR;
  const icu::UnicodeString out = norm->normalize(src, status);
  if (U_FAILURE(status)) throw DataError("NFC normalization failed");
  return from_icu(out);
}

std::string lowercase(std::string_view text) {
  icu::UnicodeString u = to_icu(text);
  u.toLower(icu::Locale::getRoot());
  return from_icu(u);
}

std::string normalize(std::string_view text, bool lower) {
  std::string out = nfc(text);
  // Lowercasing can denormalize (e.g. U+0130), so recompose afterwards.
  if (lower) out = nfc(lowercase(out));
  return out;
}

bool contains_whitespace(std::string_view text) {
  int32_t i = 0;
  while (i < static_cast<int32_t>(text.size())) {
    const UChar32 c = next_scalar(text, i);
    if (c < 0) throw DataError("invalid UTF-8 input");
    if (u_isUWhiteSpace(c)) return true;
  }
  return false;
}

std::string trim(std::string_view text) {
  int32_t begin = -1, end = 0;
  int32_t i = 0;
  while (i < static_cast<int32_t>(text.size())) {
    const int32_t start = i;
    const UChar32 c = next_scalar(text, i);
    if (c < 0) throw DataError("invalid UTF-8 input");
    if (!u_isUWhiteSpace(c)) {
      if (begin < 0) begin = start;
      end = i;
    }
  }
  if (begin < 0) return {};
  return std::string(text.substr(begin, end - begin));
}

std::vector<std::string> pretokenize(std::string_view sentence) {
  std::vector<std::string> out;
  enum class Run { none, word, other } run = Run::none;
  int32_t run_start = 0;
  int32_t i = 0;
  const auto flush = [&](int32_t end) {
    if (run != Run::none) out.emplace_back(sentence.substr(run_start, end - run_start));
    run = Run::none;
  };
  while (i < static_cast<int32_t>(sentence.size())) {
    const int32_t start = i;
    const UChar32 c = next_scalar(sentence, i);
    if (c < 0) throw DataError("invalid UTF-8 input");
    if (u_isUWhiteSpace(c)) {
      flush(start);
      continue;
    }
    const Run kind = is_word_char(c) ? Run::word : Run::other;
    if (kind != run) {
      flush(start);
      run = kind;
      run_start = start;
    }
  }
  flush(static_cast<int32_t>(sentence.size()));
  return out;
}

}  // namespace toklab::unicode
