#pragma once

// UTF-8 handling shared by every module: validation, code point walking,
// NFC normalization, case folding and the word-boundary rule.

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "tokbias/error.hpp"

namespace tokbias::text {

struct DecodedChar {
  char32_t code_point;
  std::size_t length;  // bytes consumed, 0 when the sequence is invalid
};

/// Decodes one code point at `pos`. Rejects overlong forms, surrogates and
/// values above U+10FFFF.
inline DecodedChar decode_utf8(std::string_view s, std::size_t pos) noexcept {
  const auto byte = [&](std::size_t i) { return static_cast<unsigned char>(s[i]); };
  const unsigned char lead = byte(pos);
  if (lead < 0x80) return {lead, 1};
  std::size_t len = 0;
  char32_t cp = 0;
  char32_t min = 0;
  if ((lead & 0xE0) == 0xC0) {
    len = 2, cp = lead & 0x1F, min = 0x80;
  } else if ((lead & 0xF0) == 0xE0) {
    len = 3, cp = lead & 0x0F, min = 0x800;
  } else if ((lead & 0xF8) == 0xF0) {
    len = 4, cp = lead & 0x07, min = 0x10000;
  } else {
    return {0, 0};
  }
  if (pos + len > s.size()) return {0, 0};
  for (std::size_t i = 1; i < len; ++i) {
    const unsigned char c = byte(pos + i);
    if ((c & 0xC0) != 0x80) return {0, 0};
    cp = (cp << 6) | (c & 0x3F);
  }
  if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return {0, 0};
  return {cp, len};
}

/// Byte offset of the first invalid sequence, or nullopt when `s` is valid UTF-8.
inline std::optional<std::size_t> find_invalid_utf8(std::string_view s) noexcept {
  std::size_t pos = 0;
  while (pos < s.size()) {
    const auto d = decode_utf8(s, pos);
    if (d.length == 0) return pos;
    pos += d.length;
  }
  return std::nullopt;
}

inline void require_utf8(std::string_view s, std::size_t line = 0, std::size_t base_offset = 0) {
  if (auto bad = find_invalid_utf8(s)) {
    throw ParseError("invalid UTF-8 at byte offset " + std::to_string(base_offset + *bad), line);
  }
}

/// Byte offsets of code point starts, plus a final entry equal to s.size().
/// Input must be valid UTF-8.
inline std::vector<std::size_t> char_boundaries(std::string_view s) {
  std::vector<std::size_t> out;
  out.reserve(s.size() + 1);
  std::size_t pos = 0;
  while (pos < s.size()) {
    out.push_back(pos);
    const auto d = decode_utf8(s, pos);
    pos += d.length ? d.length : 1;
  }
  out.push_back(s.size());
  return out;
}

inline std::size_t char_count(std::string_view s) { return char_boundaries(s).size() - 1; }

inline std::string append_utf8(std::string out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
  return out;
}

inline std::string nfc(std::string_view s) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw InvariantError("ICU NFC normalizer unavailable");
  const auto in = icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  if (norm->isNormalized(in, status) && U_SUCCESS(status)) return std::string(s);
  status = U_ZERO_ERROR;
  const icu::UnicodeString normalized = norm->normalize(in, status);
  if (U_FAILURE(status)) throw ParseError("NFC normalization failed");
  std::string out;
  normalized.toUTF8String(out);
  return out;
}

/// Locale-independent full case folding.
inline std::string case_fold(std::string_view s) {
  auto u = icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  u.foldCase(U_FOLD_CASE_DEFAULT);
  std::string out;
  u.toUTF8String(out);
  return out;
}

struct Normalization {
  bool nfc = true;
  bool case_fold = false;

  bool operator==(const Normalization&) const = default;
};

/// Applies the configured normalization to one word or query form.
inline std::string normalize(std::string_view s, const Normalization& n) {
  std::string out = n.nfc ? nfc(s) : std::string(s);
  if (n.case_fold) out = case_fold(out);
  return out;
}

inline bool is_word_char(char32_t cp) noexcept {
  return (U_GET_GC_MASK(static_cast<UChar32>(cp)) & (U_GC_L_MASK | U_GC_M_MASK)) != 0;
}

inline bool is_apostrophe(char32_t cp) noexcept { return cp == U'\'' || cp == U'’'; }

/// Calls `fn(std::string_view)` for each word in `s`: a maximal run of
/// Unicode letters and marks, where an apostrophe between two word
/// characters stays inside the word. Everything else separates words.
template <class Fn>
void for_each_word(std::string_view s, Fn&& fn) {
  std::size_t pos = 0;
  std::size_t start = std::string_view::npos;
  std::size_t last_word_end = 0;
  while (pos < s.size()) {
    const auto d = decode_utf8(s, pos);
    const std::size_t len = d.length ? d.length : 1;
    const char32_t cp = d.length ? d.code_point : 0xFFFD;
    if (is_word_char(cp)) {
      if (start == std::string_view::npos) start = pos;
      last_word_end = pos + len;
    } else if (start != std::string_view::npos && is_apostrophe(cp) && pos == last_word_end) {
      const std::size_t next = pos + len;
      bool continues = false;
      if (next < s.size()) {
        const auto nd = decode_utf8(s, next);
        continues = nd.length && is_word_char(nd.code_point);
      }
      if (!continues) {
        fn(s.substr(start, last_word_end - start));
        start = std::string_view::npos;
      }
    } else if (start != std::string_view::npos) {
      fn(s.substr(start, last_word_end - start));
      start = std::string_view::npos;
    }
    pos += len;
  }
  if (start != std::string_view::npos) fn(s.substr(start, last_word_end - start));
}

/// Splits a line into normalized words. NFC runs before the split so that
/// decomposed input yields the same words as composed input.
inline std::vector<std::string> split_words(std::string_view line, const Normalization& n = {}) {
  const std::string composed = n.nfc ? nfc(line) : std::string(line);
  std::vector<std::string> words;
  for_each_word(composed, [&](std::string_view w) {
    words.push_back(n.case_fold ? case_fold(w) : std::string(w));
  });
  return words;
}

inline std::string_view trim_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

inline std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

/// Locale-independent decimal parse of the whole field.
inline std::optional<double> parse_double(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

inline std::optional<std::uint64_t> parse_uint(std::string_view s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

/// Shortest round-trip decimal representation, independent of locale.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (v == 0) return "0";  // folds -0
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace tokbias::text
