#include <gtest/gtest.h>

#include "tokbias/error.hpp"
#include "tokbias/text.hpp"

using namespace tokbias;

TEST(Text, SplitsOnPunctuationAndKeepsInternalApostrophes) {
  EXPECT_EQ(text::split_words("l'ingénieur, der Arzt!"), (std::vector<std::string>{"l'ingénieur", "der", "Arzt"}));
  EXPECT_EQ(text::split_words("'quoted' word'"), (std::vector<std::string>{"quoted", "word"}));
  EXPECT_EQ(text::split_words("d’Artagnan"), (std::vector<std::string>{"d’Artagnan"}));
}

TEST(Text, HebrewAndCombiningMarksStayInsideWords) {
  // U+05E8 U+05D5 U+05E4 U+05D0 ("doctor") and a decomposed "é".
  EXPECT_EQ(text::split_words("הרופא בא"), (std::vector<std::string>{"הרופא", "בא"}));
  EXPECT_EQ(text::split_words("cafe\xCC\x81 ok", {false, false}),
            (std::vector<std::string>{"cafe\xCC\x81", "ok"}));
}

TEST(Text, NfcComposesAndCaseFoldLowers) {
  EXPECT_EQ(text::nfc("A\xCC\x88rztin"), "Ärztin");
  EXPECT_EQ(text::case_fold("ÄRZTIN"), "ärztin");
  EXPECT_EQ(text::normalize("A\xCC\x88RZTIN", {true, true}), "ärztin");
}

TEST(Text, InvalidUtf8ReportsOffset) {
  EXPECT_EQ(text::find_invalid_utf8("ab\xFF"), std::optional<std::size_t>(2));
  EXPECT_EQ(text::find_invalid_utf8("\xC3\xA4"), std::nullopt);
  EXPECT_EQ(text::find_invalid_utf8("\xC0\x80"), std::optional<std::size_t>(0));  // overlong
  try {
    text::require_utf8("ok\xC3", 7, 100);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 7u);
    EXPECT_NE(std::string(e.what()).find("102"), std::string::npos);
  }
}

TEST(Text, NumbersAreLocaleIndependent) {
  EXPECT_EQ(text::parse_double("-1.5"), -1.5);
  EXPECT_EQ(text::parse_double("1e-3"), 1e-3);
  EXPECT_FALSE(text::parse_double("1,5"));
  EXPECT_FALSE(text::parse_double(""));
  EXPECT_EQ(text::parse_uint("42"), 42u);
  EXPECT_FALSE(text::parse_uint("-1"));
  EXPECT_EQ(text::format_double(0.1), "0.1");
  EXPECT_EQ(text::format_double(-0.0), "0");
}

TEST(Text, CharBoundariesCountCodePoints) {
  EXPECT_EQ(text::char_count("Ärztin"), 6u);
  EXPECT_EQ(text::char_count(""), 0u);
  EXPECT_EQ(text::char_boundaries("aä"), (std::vector<std::size_t>{0, 1, 3}));
}
