#pragma once

// Desk-scale unigram vocabulary training: frequent-substring seeding, hard-EM
// re-estimation and likelihood-based pruning.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tokbias/error.hpp"
#include "tokbias/text.hpp"
#include "tokbias/tokenizer.hpp"

namespace tokbias {

struct TrainParams {
  std::size_t seed_size = 5000;
  std::size_t em_iterations = 3;
  double prune_fraction = 0.2;
  std::size_t max_token_length = 10;  // in characters
};

using WordCounts = std::map<std::string, std::uint64_t, std::less<>>;

/// Word frequencies of a corpus under the shared word-boundary rule (NFC, case kept).
inline WordCounts count_corpus_words(std::istream& corpus) {
  WordCounts counts;
  std::string line;
  std::size_t line_no = 0;
  std::size_t offset = 0;
  while (std::getline(corpus, line)) {
    ++line_no;
    text::require_utf8(line, line_no, offset);
    offset += line.size() + 1;
    const std::string composed = text::nfc(line);
    text::for_each_word(composed, [&](std::string_view w) {
      auto it = counts.find(w);
      if (it == counts.end()) it = counts.emplace(std::string(w), 0).first;
      ++it->second;
    });
  }
  return counts;
}

namespace detail {

struct ViterbiPath {
  double score = 0.0;
  std::vector<std::size_t> entries;
};

// Best cover of `word` using vocabulary entries, optionally forbidding one
// entry. The training vocabulary always contains every character, so no
// unk pieces are needed.
inline ViterbiPath train_viterbi(const UnigramVocab& vocab, std::string_view word,
                                 std::size_t excluded = std::numeric_limits<std::size_t>::max()) {
  const auto bounds = text::char_boundaries(word);
  const std::size_t n = bounds.size() - 1;
  std::vector<std::int32_t> char_at(word.size() + 1, -1);
  for (std::size_t i = 0; i <= n; ++i) char_at[bounds[i]] = static_cast<std::int32_t>(i);
  constexpr double kNone = -std::numeric_limits<double>::infinity();
  std::vector<double> best(n + 1, kNone);
  std::vector<std::size_t> ntok(n + 1, 0), next(n + 1, 0), via(n + 1, 0);
  best[n] = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    vocab.for_each_prefix_match(word, bounds[i], [&](std::size_t end_byte, std::size_t entry) {
      const auto end = char_at[end_byte];
      if (end < 0 || entry == excluded) return;
      const auto j = static_cast<std::size_t>(end);
      if (best[j] == kNone) return;
      const double sc = vocab.entries()[entry].score + best[j];
      const std::size_t nt = 1 + ntok[j];
      const bool take = best[i] == kNone || sc > best[i] + kScoreTieEps ||
                        (sc >= best[i] - kScoreTieEps && (nt < ntok[i] || (nt == ntok[i] && j > next[i])));
      if (take) {
        best[i] = sc;
        ntok[i] = nt;
        next[i] = j;
        via[i] = entry;
      }
    });
  }
  ViterbiPath path;
  path.score = best[0];
  if (best[0] == kNone) return path;
  for (std::size_t i = 0; i < n; i = next[i]) path.entries.push_back(via[i]);
  return path;
}

inline bool is_single_char(std::string_view token) { return text::char_count(token) == 1; }

// Hard-EM: Viterbi usage counts, then log relative frequency. Multi-character
// tokens that no word uses are dropped; unused characters get half a count.
inline UnigramVocab em_step(const UnigramVocab& vocab, const WordCounts& words) {
  std::vector<std::uint64_t> usage(vocab.size(), 0);
  for (const auto& [word, count] : words) {
    for (const auto e : train_viterbi(vocab, word).entries) usage[e] += count;
  }
  double total = 0;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    const auto& tok = vocab.entries()[i].token;
    if (tok == vocab.unk_token()) continue;
    if (usage[i] > 0) {
      total += static_cast<double>(usage[i]);
    } else if (is_single_char(tok)) {
      total += 0.5;
    }
  }
  std::vector<UnigramVocab::Entry> next;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    const auto& tok = vocab.entries()[i].token;
    if (tok == vocab.unk_token()) continue;
    if (usage[i] > 0) {
      next.push_back({tok, std::log(static_cast<double>(usage[i]) / total)});
    } else if (is_single_char(tok)) {
      next.push_back({tok, std::log(0.5 / total)});
    }
  }
  return UnigramVocab(std::move(next), vocab.unk_token(), MarkerMode::never);
}

inline std::size_t regular_size(const UnigramVocab& v) { return v.size() - 1; }  // unk aside

}  // namespace detail

/// Trains a unigram vocabulary of at most `target_vocab_size` tokens (unk
/// not counted) from word counts. Every character of the corpus stays in
/// the vocabulary. Deterministic: identical inputs give identical output.
inline UnigramVocab train_unigram(const WordCounts& words, std::size_t target_vocab_size,
                                  const TrainParams& params = {}) {
  if (words.empty()) throw ArgumentError("training corpus contains no words");
  if (!(params.prune_fraction > 0.0 && params.prune_fraction < 1.0)) {
    throw ArgumentError("prune_fraction must lie in (0, 1)");
  }
  if (params.max_token_length == 0) throw ArgumentError("max_token_length must be positive");

  std::map<std::string, std::uint64_t, std::less<>> substrings;
  std::set<std::string, std::less<>> alphabet;
  for (const auto& [word, count] : words) {
    const auto b = text::char_boundaries(word);
    const std::size_t n = b.size() - 1;
    for (std::size_t i = 0; i < n; ++i) {
      alphabet.emplace(word.substr(b[i], b[i + 1] - b[i]));
      for (std::size_t len = 1; len <= params.max_token_length && i + len <= n; ++len) {
        substrings[word.substr(b[i], b[i + len] - b[i])] += count;
      }
    }
  }
  if (target_vocab_size < alphabet.size()) {
    throw ArgumentError("target vocabulary size " + std::to_string(target_vocab_size) +
                        " is below the corpus alphabet size " + std::to_string(alphabet.size()));
  }

  std::vector<std::pair<std::string, std::uint64_t>> multi;
  for (const auto& [s, c] : substrings) {
    if (!detail::is_single_char(s)) multi.emplace_back(s, c);
  }
  std::stable_sort(multi.begin(), multi.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  if (multi.size() > params.seed_size) multi.resize(params.seed_size);

  double total = 0;
  for (const auto& ch : alphabet) total += static_cast<double>(substrings.at(ch));
  for (const auto& [s, c] : multi) total += static_cast<double>(c);
  std::vector<UnigramVocab::Entry> seed;
  for (const auto& ch : alphabet) seed.push_back({ch, std::log(static_cast<double>(substrings.at(ch)) / total)});
  for (const auto& [s, c] : multi) seed.push_back({s, std::log(static_cast<double>(c) / total)});
  UnigramVocab vocab(std::move(seed), std::string(kDefaultUnk), MarkerMode::never);

  for (std::size_t it = 0; it < params.em_iterations; ++it) vocab = detail::em_step(vocab, words);

  while (detail::regular_size(vocab) > target_vocab_size) {
    // Likelihood lost when a token disappears: each word that uses it falls
    // back to its best cover without that token.
    struct Use {
      const std::string* word;
      std::uint64_t count;
      double score;
    };
    std::vector<std::vector<Use>> users(vocab.size());
    for (const auto& [word, count] : words) {
      const auto path = detail::train_viterbi(vocab, word);
      const std::set<std::size_t> used(path.entries.begin(), path.entries.end());
      for (const auto e : used) users[e].push_back({&word, count, path.score});
    }
    std::vector<std::pair<double, std::size_t>> losses;
    for (std::size_t e = 0; e < vocab.size(); ++e) {
      const auto& tok = vocab.entries()[e].token;
      if (tok == vocab.unk_token() || detail::is_single_char(tok)) continue;
      double loss = 0;
      for (const auto& use : users[e]) {
        const double without = detail::train_viterbi(vocab, *use.word, e).score;
        loss += static_cast<double>(use.count) * (use.score - without);
      }
      losses.emplace_back(loss, e);
    }
    std::sort(losses.begin(), losses.end(), [&](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first < b.first;
      return vocab.entries()[a.second].token < vocab.entries()[b.second].token;
    });
    const std::size_t excess = detail::regular_size(vocab) - target_vocab_size;
    const auto fraction = static_cast<std::size_t>(params.prune_fraction * static_cast<double>(detail::regular_size(vocab)));
    const std::size_t remove = std::min({excess, std::max<std::size_t>(1, fraction), losses.size()});
    if (remove == 0) break;
    std::set<std::size_t> dropped;
    for (std::size_t i = 0; i < remove; ++i) dropped.insert(losses[i].second);
    std::vector<UnigramVocab::Entry> kept;
    for (std::size_t e = 0; e < vocab.size(); ++e) {
      if (!dropped.contains(e) && vocab.entries()[e].token != vocab.unk_token()) kept.push_back(vocab.entries()[e]);
    }
    vocab = UnigramVocab(std::move(kept), std::string(kDefaultUnk), MarkerMode::never);
    for (std::size_t it = 0; it < std::max<std::size_t>(1, params.em_iterations); ++it) {
      vocab = detail::em_step(vocab, words);
    }
  }

  std::vector<UnigramVocab::Entry> final_entries;
  for (const auto& e : vocab.entries()) {
    if (e.token != vocab.unk_token()) final_entries.push_back(e);
  }
  std::stable_sort(final_entries.begin(), final_entries.end(), [](const auto& a, const auto& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.token < b.token;
  });
  return UnigramVocab(std::move(final_entries), std::string(kDefaultUnk), MarkerMode::never);
}

inline UnigramVocab train_unigram(std::istream& corpus, std::size_t target_vocab_size,
                                  const TrainParams& params = {}) {
  return train_unigram(count_corpus_words(corpus), target_vocab_size, params);
}

}  // namespace tokbias
