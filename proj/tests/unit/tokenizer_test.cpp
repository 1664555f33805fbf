#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"
#include "tokbias/lexicon.hpp"
#include "tokbias/rng.hpp"
#include "tokbias/tokenizer.hpp"

using namespace tokbias;

namespace {

UnigramVocab vocab_of(std::vector<UnigramVocab::Entry> entries, MarkerMode marker = MarkerMode::auto_detect) {
  return UnigramVocab(std::move(entries), std::string(kDefaultUnk), marker);
}

UnigramVocab from_text(const std::string& s) {
  std::istringstream in(s);
  return load_vocab(in);
}

ProfessionLexicon lexicon(const std::string& tsv) {
  std::istringstream in(tsv);
  return load_lexicon(in, LexiconFormat::tsv);
}

}  // namespace

TEST(Vocab, LoadAppendsUnkBelowMinimum) {
  const auto v = from_text("a\t-1.0\nb\t-1.0\nab\t-1.5\n");
  EXPECT_EQ(v.size(), 4u);
  EXPECT_TRUE(v.contains("<unk>"));
  EXPECT_DOUBLE_EQ(v.unk_score(), -11.5);
}

TEST(Vocab, EmptyStreamHasOnlyUnk) {
  const auto v = from_text("");
  EXPECT_EQ(v.size(), 1u);
  EXPECT_EQ(v.unk_token(), "<unk>");
}

TEST(Vocab, DuplicateTokenNamesBothLines) {
  try {
    from_text("a\t-1.0\na\t-1.0\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("lines 1 and 2"), std::string::npos);
  }
  EXPECT_THROW(from_text("a\tnope\n"), ParseError);
  EXPECT_THROW(from_text("a\tinf\n"), ParseError);
}

TEST(Vocab, PlaceholderUnkIsRescored) {
  const auto v = from_text("<unk>\t0\na\t-2\n");
  EXPECT_DOUBLE_EQ(v.unk_score(), -12.0);
  const auto w = from_text("<unk>\t-20\na\t-2\n");
  EXPECT_DOUBLE_EQ(w.unk_score(), -20.0);
}

TEST(Vocab, WriteLoadRoundTrip) {
  const auto v = from_text("a\t-1\nb\t-1.25\nab\t-1.5\n");
  std::ostringstream out;
  write_vocab(v, out);
  EXPECT_EQ(from_text(out.str()), v);
}

TEST(Segment, PrefersWholeToken) {
  const auto v = vocab_of({{"a", -1}, {"b", -1}, {"ab", -1.5}});
  const auto s = segment(v, "ab");
  EXPECT_EQ(s.tokens, (std::vector<std::string>{"ab"}));
  EXPECT_DOUBLE_EQ(s.score, -1.5);
  EXPECT_EQ(s.n_tokens, 1u);
}

TEST(Segment, SingleTokenIdentity) {
  const auto s = segment(vocab_of({{"a", -1}}), "a");
  EXPECT_EQ(s.tokens, (std::vector<std::string>{"a"}));
  EXPECT_EQ(s.n_tokens, 1u);
}

TEST(Segment, UnknownCharacterFallsBackToUnk) {
  const auto v = vocab_of({{"a", -1}, {"<unk>", -11}});
  const auto s = segment(v, "ax");
  EXPECT_EQ(s.tokens, (std::vector<std::string>{"a", "<unk>"}));
  EXPECT_EQ(s.n_tokens, 2u);
  EXPECT_DOUBLE_EQ(s.score, -12.0);
  EXPECT_EQ(s.reconstruct(), "ax");
}

TEST(Segment, CountTokensExamples) {
  const auto ab = vocab_of({{"a", -1}, {"b", -1}, {"ab", -1.5}});
  EXPECT_EQ(count_tokens(ab, "ab"), 1u);
  EXPECT_EQ(count_tokens(ab, "abab"), 2u);
  EXPECT_DOUBLE_EQ(segment(ab, "abab").score, -3.0);
  EXPECT_EQ(count_tokens(vocab_of({{"a", -1}, {"b", -1}}), "ab"), 2u);
}

TEST(Segment, TiesPreferFewerTokensThenLongerFirstToken) {
  // "abc": [abc] = -3, [a][bc] = -3, [ab][c] = -3 ; fewest tokens wins.
  const auto v = vocab_of({{"a", -1}, {"b", -2}, {"c", -1}, {"ab", -2}, {"bc", -2}, {"abc", -3}});
  EXPECT_EQ(segment(v, "abc").tokens, (std::vector<std::string>{"abc"}));
  // Without "abc", [ab][c] and [a][bc] tie on score and count; longer first token wins.
  const auto w = vocab_of({{"a", -1}, {"b", -2}, {"c", -1}, {"ab", -2}, {"bc", -2}});
  EXPECT_EQ(segment(w, "abc").tokens, (std::vector<std::string>{"ab", "c"}));
}

TEST(Segment, MarkerIsPrependedWhenVocabUsesIt) {
  const std::string m(kWordMarker);
  const auto v = vocab_of({{m + "Arzt", -3}, {m, -2}, {"A", -4}, {"r", -4}, {"z", -4}, {"t", -4}});
  EXPECT_TRUE(v.uses_marker());
  const auto s = segment(v, "Arzt");
  EXPECT_EQ(s.tokens, (std::vector<std::string>{m + "Arzt"}));
  const auto never = vocab_of({{m + "Arzt", -3}, {"A", -4}, {"r", -4}, {"z", -4}, {"t", -4}}, MarkerMode::never);
  EXPECT_EQ(count_tokens(never, "Arzt"), 4u);
}

TEST(Segment, ControlTokensNeverMatchText) {
  const auto v = vocab_of({{"<", -1}, {"s", -1}, {">", -1}, {"<s>", 0.0}});
  EXPECT_EQ(count_tokens(v, "<s>"), 3u);
}

TEST(Segment, MatchesExhaustiveOracle) {
  Rng rng(7);
  const std::string alphabet = "abcdef";
  for (int trial = 0; trial < 40; ++trial) {
    const auto v = oracle::random_vocab(rng, 60, alphabet);
    for (int i = 0; i < 25; ++i) {
      const auto w = oracle::random_word(rng, 10, alphabet);
      const auto s = segment(v, w);
      const auto best = oracle::exhaustive_best(v, w);
      ASSERT_NEAR(s.score, best.score, 1e-9) << w;
      ASSERT_EQ(s.n_tokens, best.n_tokens) << w;
      ASSERT_EQ(s.reconstruct(), w);
      double sum = 0;
      for (const auto& t : s.tokens) sum += *v.score(t);
      ASSERT_NEAR(sum, s.score, 1e-9);
    }
  }
}

TEST(Protect, MakesFormsSingleTokens) {
  const auto v = vocab_of({{"a", -1}, {"b", -1}});
  const std::vector<std::string> forms{"ab"};
  const auto p = protect_forms(v, forms);
  EXPECT_DOUBLE_EQ(*p.score("ab"), -1.0);
  EXPECT_EQ(count_tokens(p, "ab"), 1u);
  EXPECT_DOUBLE_EQ(*p.score("a"), -1.0);
}

TEST(Protect, RunningExample) {
  const auto v = vocab_of({{"Ä", -5}, {"r", -4}, {"z", -4}, {"t", -4}, {"i", -4}, {"n", -4}, {"in", -3}});
  const std::vector<std::string> forms{"Ärztin"};
  EXPECT_GT(count_tokens(v, "Ärztin"), 1u);
  EXPECT_EQ(count_tokens(protect_forms(v, forms), "Ärztin"), 1u);
}

TEST(Protect, AlreadySingleFormsLeaveVocabUnchanged) {
  const auto v = vocab_of({{"a", -1}, {"b", -1}, {"ab", -1.5}});
  const std::vector<std::string> forms{"ab"};
  EXPECT_EQ(protect_forms(v, forms), v);
}

TEST(Protect, NestedFormsAllEndUpSingle) {
  Rng rng(11);
  const auto v = oracle::random_vocab(rng, 80, "abcdef");
  const std::vector<std::string> forms{"abcdef", "abc", "bcd", "fedcba", "ab"};
  const auto p = protect_forms(v, forms);
  for (const auto& f : forms) EXPECT_EQ(count_tokens(p, f), 1u) << f;
  // Words containing no protected form keep their segmentation.
  for (int i = 0; i < 200; ++i) {
    const auto w = oracle::random_word(rng, 8, "abcdef");
    bool touches = false;
    for (const auto& f : forms) touches = touches || w.find(f) != std::string::npos;
    if (!touches) {
      EXPECT_EQ(segment(p, w).tokens, segment(v, w).tokens) << w;
    }
  }
}

TEST(Histogram, BucketsByGenderAndStereotype) {
  const auto v = vocab_of({{"Arzt", -1}, {"Ärzt", -2}, {"in", -2}});
  const auto lex = lexicon("physician\tmale\tArzt\tÄrztin\n");
  const auto g = token_histogram(v, lex, HistogramGrouping::by_gender);
  EXPECT_EQ(g.buckets, (decltype(g.buckets){{{"male", 1}, 1}, {{"female", 2}, 1}}));
  const auto s = token_histogram(v, lex, HistogramGrouping::by_stereotype);
  EXPECT_EQ(s.buckets, (decltype(s.buckets){{{"pro", 1}, 1}, {{"anti", 2}, 1}}));
  EXPECT_TRUE(token_histogram(v, ProfessionLexicon{}, HistogramGrouping::by_gender).buckets.empty());
}

TEST(Histogram, NeutralEntriesSkippedOnlyByStereotype) {
  const auto v = vocab_of({{"a", -1}, {"b", -1}});
  const auto lex = lexicon("x\tneutral\ta\tb\n");
  EXPECT_EQ(token_histogram(v, lex, HistogramGrouping::by_gender).total(), 2u);
  EXPECT_EQ(token_histogram(v, lex, HistogramGrouping::by_stereotype).total(), 0u);
}
