#include <gtest/gtest.h>

#include <cmath>

#include "tokbias/bleu.hpp"

using namespace tokbias;

TEST(Bleu, IdentityIsExactlyHundred) {
  const std::vector<std::string> s{"Die Ärztin kam spät.", "Der Arzt lachte laut und lange.", "kurz"};
  EXPECT_EQ(bleu(s, s).score, 100.0);
}

TEST(Bleu, DisjointHasSmoothedFloor) {
  // Twenty words, no shared unigram.
  std::string hyp, ref;
  for (int i = 0; i < 20; ++i) {
    hyp += std::string{'x', static_cast<char>('a' + i), ' '};
    ref += std::string{'y', static_cast<char>('a' + i), ' '};
  }
  const std::vector<std::string> h{hyp};
  const std::vector<std::string> r{ref};
  const auto b = bleu(h, r);
  EXPECT_GT(b.score, 0.0);
  EXPECT_LT(b.score, 1.0);
}

TEST(Bleu, HalfLengthBrevityPenalty) {
  const std::vector<std::string> h{"a b c d"};
  const std::vector<std::string> r{"a b c d e f g h"};
  EXPECT_NEAR(bleu(h, r).brevity_penalty, std::exp(-1.0), 1e-15);
  EXPECT_NEAR(bleu(h, r).brevity_penalty, 0.3679, 1e-4);
}

TEST(Bleu, HandComputedSentence) {
  // Matches 5/6, 3/5, 1/4 and 0/3 (smoothed to 0.1/3); equal lengths.
  const std::vector<std::string> h{"the cat sat on the mat"};
  const std::vector<std::string> r{"the cat is on the mat"};
  const auto b = bleu(h, r);
  EXPECT_EQ(b.matches, (std::array<std::uint64_t, 4>{5, 3, 1, 0}));
  EXPECT_EQ(b.totals, (std::array<std::uint64_t, 4>{6, 5, 4, 3}));
  EXPECT_DOUBLE_EQ(b.brevity_penalty, 1.0);
  EXPECT_NEAR(b.score, 25.406637407730738, 1e-9);
}

TEST(Bleu, SegmentOrderInvariant) {
  const std::vector<std::string> h{"a b c", "d e f g", "x y"};
  const std::vector<std::string> r{"a b d", "d e f g h", "x z"};
  const std::vector<std::string> h2{h[2], h[0], h[1]};
  const std::vector<std::string> r2{r[2], r[0], r[1]};
  EXPECT_DOUBLE_EQ(bleu(h, r).score, bleu(h2, r2).score);
}

TEST(Bleu, LengthMismatchIsAnError) {
  const std::vector<std::string> h{"a"};
  const std::vector<std::string> r;
  EXPECT_THROW(bleu(h, r), ArgumentError);
}
