#pragma once

// Brute-force reference implementations used by the unit and acceptance
// tests. They share no code with the library's algorithms.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "tokbias/rng.hpp"
#include "tokbias/text.hpp"
#include "tokbias/tokenizer.hpp"

namespace oracle {

struct BestCover {
  double score = -std::numeric_limits<double>::infinity();
  std::size_t n_tokens = 0;
};

/// Maximum score over every split of `surface` into pieces, where a piece
/// is a regular vocabulary token or a lone character that no single-char
/// token covers (scored as unk). Enumerates all 2^(n-1) cut patterns.
inline BestCover exhaustive_best(const tokbias::UnigramVocab& vocab, const std::string& surface) {
  const auto b = tokbias::text::char_boundaries(surface);
  const std::size_t n = b.size() - 1;
  const auto is_control = [&](const std::string& t) {
    return t == vocab.unk_token() || t == "<s>" || t == "</s>" || t == "<pad>";
  };
  BestCover best;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (n - 1)); ++mask) {
    double total = 0;
    std::size_t pieces = 0;
    std::size_t start = 0;
    bool ok = true;
    for (std::size_t i = 1; i <= n && ok; ++i) {
      if (i < n && !((mask >> (i - 1)) & 1)) continue;
      const std::string piece = surface.substr(b[start], b[i] - b[start]);
      const auto sc = vocab.score(piece);
      if (sc && !is_control(piece)) {
        total += *sc;
      } else if (i - start == 1) {
        total += vocab.unk_score();
      } else {
        ok = false;
      }
      ++pieces;
      start = i;
    }
    if (ok && (total > best.score + 1e-9 || (std::abs(total - best.score) <= 1e-9 && pieces < best.n_tokens))) {
      best = {total, pieces};
    }
  }
  return best;
}

/// Random vocabulary of `size` distinct tokens of length 1..4 over
/// `alphabet`, with two letters of the alphabet left out as single chars so
/// the unk path is exercised.
inline tokbias::UnigramVocab random_vocab(tokbias::Rng& rng, std::size_t size, const std::string& alphabet) {
  std::map<std::string, double> tokens;
  for (std::size_t i = 2; i < alphabet.size(); ++i) tokens[std::string(1, alphabet[i])] = -rng.uniform(2.0, 8.0);
  while (tokens.size() < size) {
    const std::size_t len = 2 + rng.below(3);
    std::string t;
    for (std::size_t k = 0; k < len; ++k) t += alphabet[rng.below(alphabet.size())];
    tokens.emplace(t, -rng.uniform(2.0, 12.0));
  }
  std::vector<tokbias::UnigramVocab::Entry> entries;
  for (const auto& [t, s] : tokens) entries.push_back({t, s});
  return tokbias::UnigramVocab(entries, "<unk>", tokbias::MarkerMode::never);
}

inline std::string random_word(tokbias::Rng& rng, std::size_t max_len, const std::string& alphabet) {
  const std::size_t len = 1 + rng.below(max_len);
  std::string w;
  for (std::size_t k = 0; k < len; ++k) w += alphabet[rng.below(alphabet.size())];
  return w;
}

/// J by direct pair counting, ties worth one half.
inline double jt_statistic(const std::vector<std::vector<double>>& groups) {
  double j = 0;
  for (std::size_t a = 0; a < groups.size(); ++a) {
    for (std::size_t b = a + 1; b < groups.size(); ++b) {
      for (const double x : groups[a]) {
        for (const double y : groups[b]) j += x < y ? 1.0 : (x == y ? 0.5 : 0.0);
      }
    }
  }
  return j;
}

struct JTExact {
  double p_upper = 0;  // P(J >= observed)
  double p_lower = 0;  // P(J <= observed)
  double p_both = 0;   // P(|J - mean| >= |observed - mean|)
  double mean = 0;
  double variance = 0;
  std::size_t arrangements = 0;
};

/// Null distribution of J over every distinct assignment of the pooled
/// values to the group sizes.
inline JTExact jt_enumerate(const std::vector<std::vector<double>>& groups) {
  std::vector<double> pooled;
  std::vector<std::size_t> labels;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (const double v : groups[g]) {
      pooled.push_back(v);
      labels.push_back(g);
    }
  }
  const double observed = jt_statistic(groups);
  std::sort(labels.begin(), labels.end());
  std::size_t n_total = 0;
  for (const auto& g : groups) n_total += g.size();
  double sum_sq_sizes = 0;
  for (const auto& g : groups) sum_sq_sizes += static_cast<double>(g.size() * g.size());
  const double mean = (static_cast<double>(n_total * n_total) - sum_sq_sizes) / 4.0;
  std::size_t both = 0;
  JTExact out;
  double sum = 0, sum_sq = 0;
  std::size_t ge = 0, le = 0;
  do {
    std::vector<std::vector<double>> g(groups.size());
    for (std::size_t i = 0; i < pooled.size(); ++i) g[labels[i]].push_back(pooled[i]);
    const double j = jt_statistic(g);
    sum += j;
    sum_sq += j * j;
    ge += j >= observed - 1e-9;
    le += j <= observed + 1e-9;
    both += std::abs(j - mean) >= std::abs(observed - mean) - 1e-9;
    ++out.arrangements;
  } while (std::next_permutation(labels.begin(), labels.end()));
  const auto n = static_cast<double>(out.arrangements);
  out.p_upper = static_cast<double>(ge) / n;
  out.p_lower = static_cast<double>(le) / n;
  out.p_both = static_cast<double>(both) / n;
  out.mean = sum / n;
  out.variance = sum_sq / n - out.mean * out.mean;
  return out;
}

}  // namespace oracle
