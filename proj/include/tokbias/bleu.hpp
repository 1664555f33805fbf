#pragma once

// Corpus-level BLEU for translation-quality monitoring.
//
// Variant: n-grams of order 1..4 over the shared word-boundary tokenization,
// clipped counts summed over the corpus, add-epsilon (0.1 counts) numerator
// for orders with no match, brevity penalty exp(1 - ref/hyp) capped at 1.
// Orders for which the hypotheses contain no n-gram at all are left out of
// the geometric mean.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "tokbias/error.hpp"
#include "tokbias/text.hpp"

namespace tokbias {

inline constexpr int kBleuMaxOrder = 4;
inline constexpr double kBleuEpsilon = 0.1;

struct BleuScore {
  double score = 0.0;  // 0..100
  std::array<double, kBleuMaxOrder> ngram_precisions{};
  std::array<std::uint64_t, kBleuMaxOrder> matches{};
  std::array<std::uint64_t, kBleuMaxOrder> totals{};
  double brevity_penalty = 1.0;
  std::uint64_t hyp_length = 0;
  std::uint64_t ref_length = 0;
};

namespace detail {

using NgramCounts = std::map<std::vector<std::string>, std::uint64_t>;

inline NgramCounts ngrams(const std::vector<std::string>& words, std::size_t order) {
  NgramCounts out;
  for (std::size_t i = 0; i + order <= words.size(); ++i) {
    ++out[std::vector<std::string>(words.begin() + static_cast<std::ptrdiff_t>(i),
                                   words.begin() + static_cast<std::ptrdiff_t>(i + order))];
  }
  return out;
}

}  // namespace detail

inline BleuScore bleu(std::span<const std::string> hypotheses, std::span<const std::string> references) {
  if (hypotheses.size() != references.size()) {
    throw ArgumentError("BLEU needs one reference per hypothesis: " + std::to_string(hypotheses.size()) +
                        " vs " + std::to_string(references.size()));
  }
  if (hypotheses.empty()) throw ArgumentError("BLEU needs at least one segment");
  BleuScore b;
  for (std::size_t s = 0; s < hypotheses.size(); ++s) {
    const auto hyp = text::split_words(hypotheses[s]);
    const auto ref = text::split_words(references[s]);
    b.hyp_length += hyp.size();
    b.ref_length += ref.size();
    for (int n = 1; n <= kBleuMaxOrder; ++n) {
      const auto h = detail::ngrams(hyp, static_cast<std::size_t>(n));
      const auto r = detail::ngrams(ref, static_cast<std::size_t>(n));
      for (const auto& [gram, count] : h) {
        b.totals[n - 1] += count;
        if (const auto it = r.find(gram); it != r.end()) b.matches[n - 1] += std::min(count, it->second);
      }
    }
  }
  if (b.hyp_length == 0) {
    b.brevity_penalty = 0.0;
    return b;
  }
  double log_sum = 0.0;
  int orders = 0;
  for (int n = 0; n < kBleuMaxOrder; ++n) {
    if (b.totals[n] == 0) continue;
    const double num = b.matches[n] > 0 ? static_cast<double>(b.matches[n]) : kBleuEpsilon;
    b.ngram_precisions[n] = num / static_cast<double>(b.totals[n]);
    log_sum += std::log(b.ngram_precisions[n]);
    ++orders;
  }
  b.brevity_penalty = b.hyp_length >= b.ref_length
                          ? 1.0
                          : std::exp(1.0 - static_cast<double>(b.ref_length) / static_cast<double>(b.hyp_length));
  b.score = 100.0 * b.brevity_penalty * std::exp(log_sum / orders);
  return b;
}

}  // namespace tokbias
