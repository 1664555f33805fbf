#pragma once

// Unigram-LM subword tokenization: vocabulary I/O, maximum-score (Viterbi)
// segmentation, token counting and the vocabulary protection intervention.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tokbias/error.hpp"
#include "tokbias/lexicon.hpp"
#include "tokbias/text.hpp"

namespace tokbias {

/// U+2581, the word-boundary prefix used by SentencePiece vocabularies.
inline constexpr std::string_view kWordMarker = "\xE2\x96\x81";
inline constexpr std::string_view kDefaultUnk = "<unk>";
inline constexpr double kUnkPenalty = 10.0;

enum class MarkerMode { auto_detect, always, never };

class UnigramVocab;
inline UnigramVocab protect_forms(const UnigramVocab& vocab, std::span<const std::string> forms);

class UnigramVocab {
 public:
  struct Entry {
    std::string token;
    double score = 0.0;

    bool operator==(const Entry&) const = default;
  };

  UnigramVocab() : UnigramVocab(std::vector<Entry>{}) {}

  /// Validates entries and appends the unk token when it is missing, scored
  /// kUnkPenalty below the lowest regular score. An unk entry scoring at or
  /// above every regular token (the `<unk> 0` placeholder of common dumps)
  /// is rescored the same way.
  explicit UnigramVocab(std::vector<Entry> entries, std::string unk_token = std::string(kDefaultUnk),
                        MarkerMode marker = MarkerMode::auto_detect)
      : entries_(std::move(entries)), unk_token_(std::move(unk_token)), marker_mode_(marker) {
    if (unk_token_.empty()) throw ValidationError("unk token must be non-empty");
    double min_regular = std::numeric_limits<double>::infinity();
    double max_regular = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const auto& e = entries_[i];
      if (e.token.empty()) throw ValidationError("vocabulary token " + std::to_string(i) + " is empty");
      if (!std::isfinite(e.score)) throw ValidationError("vocabulary token '" + e.token + "' has a non-finite score");
      if (!index_.emplace(e.token, i).second) throw ValidationError("duplicate vocabulary token '" + e.token + "'");
      if (!is_control(e.token)) {
        min_regular = std::min(min_regular, e.score);
        max_regular = std::max(max_regular, e.score);
      }
    }
    const double fallback = (std::isfinite(min_regular) ? min_regular : 0.0) - kUnkPenalty;
    if (auto it = index_.find(unk_token_); it == index_.end()) {
      index_.emplace(unk_token_, entries_.size());
      entries_.push_back({unk_token_, fallback});
    } else if (std::isfinite(max_regular) && entries_[it->second].score >= max_regular) {
      entries_[it->second].score = fallback;
    }
    unk_index_ = index_.at(unk_token_);
    for (std::size_t i = 0; i < entries_.size(); ++i) insert_into_trie(i);
    uses_marker_ = marker_mode_ == MarkerMode::always ||
                   (marker_mode_ == MarkerMode::auto_detect &&
                    std::any_of(entries_.begin(), entries_.end(),
                                [](const Entry& e) { return e.token.starts_with(kWordMarker); }));
  }

  const std::vector<Entry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  const std::string& unk_token() const noexcept { return unk_token_; }
  double unk_score() const noexcept { return entries_[unk_index_].score; }
  MarkerMode marker_mode() const noexcept { return marker_mode_; }

  /// True when isolated words are segmented with kWordMarker prepended.
  bool uses_marker() const noexcept { return uses_marker_; }

  bool contains(std::string_view token) const { return index_.contains(std::string(token)); }

  std::optional<double> score(std::string_view token) const {
    const auto it = index_.find(std::string(token));
    if (it == index_.end()) return std::nullopt;
    return entries_[it->second].score;
  }

  /// Text that segmentation actually covers for an isolated word.
  std::string surface(std::string_view word) const {
    return uses_marker_ ? std::string(kWordMarker) + std::string(word) : std::string(word);
  }

  /// Calls fn(end_byte, entry_index) for every matchable token that starts
  /// at byte `begin` of `s`.
  template <class Fn>
  void for_each_prefix_match(std::string_view s, std::size_t begin, Fn&& fn) const {
    std::uint32_t node = 0;
    for (std::size_t pos = begin; pos < s.size(); ++pos) {
      const auto it = trie_.find(edge_key(node, static_cast<unsigned char>(s[pos])));
      if (it == trie_.end()) return;
      node = it->second;
      if (const auto term = terminal_[node]; term >= 0) fn(pos + 1, static_cast<std::size_t>(term));
    }
  }

  bool operator==(const UnigramVocab& o) const {
    return entries_ == o.entries_ && unk_token_ == o.unk_token_ && uses_marker_ == o.uses_marker_;
  }

  /// Sets a token's score, appending it when absent. Returns the new vocabulary.
  UnigramVocab with_token(std::string token, double score) const {
    UnigramVocab out = *this;
    out.upsert(std::move(token), score);
    return out;
  }

  friend UnigramVocab protect_forms(const UnigramVocab& vocab, std::span<const std::string> forms);

 private:
  bool is_control(std::string_view t) const {
    return t == unk_token_ || t == "<s>" || t == "</s>" || t == "<pad>";
  }

  void upsert(std::string token, double score) {
    if (token.empty() || !std::isfinite(score)) throw ArgumentError("invalid token or score");
    if (auto it = index_.find(token); it != index_.end()) {
      entries_[it->second].score = score;
    } else {
      index_.emplace(token, entries_.size());
      entries_.push_back({std::move(token), score});
      insert_into_trie(entries_.size() - 1);
    }
  }

  static std::uint64_t edge_key(std::uint32_t node, unsigned char byte) noexcept {
    return (static_cast<std::uint64_t>(node) << 8) | byte;
  }

  void insert_into_trie(std::size_t entry) {
    if (terminal_.empty()) terminal_.push_back(-1);
    const auto& token = entries_[entry].token;
    if (is_control(token)) return;
    std::uint32_t node = 0;
    for (const char c : token) {
      const auto key = edge_key(node, static_cast<unsigned char>(c));
      auto it = trie_.find(key);
      if (it == trie_.end()) {
        it = trie_.emplace(key, static_cast<std::uint32_t>(terminal_.size())).first;
        terminal_.push_back(-1);
      }
      node = it->second;
    }
    terminal_[node] = static_cast<std::int32_t>(entry);
  }

  std::vector<Entry> entries_;
  std::string unk_token_;
  MarkerMode marker_mode_ = MarkerMode::auto_detect;
  bool uses_marker_ = false;
  std::size_t unk_index_ = 0;
  std::unordered_map<std::string, std::size_t> index_;
  std::unordered_map<std::uint64_t, std::uint32_t> trie_;
  std::vector<std::int32_t> terminal_;
};

/// Reads `token<TAB>score` lines. Blank lines are skipped.
inline UnigramVocab load_vocab(std::istream& in, std::string unk_token = std::string(kDefaultUnk),
                               MarkerMode marker = MarkerMode::auto_detect) {
  std::vector<UnigramVocab::Entry> entries;
  std::unordered_map<std::string, std::size_t> first_line;
  std::string raw;
  std::size_t line_no = 0;
  std::size_t offset = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    text::require_utf8(raw, line_no, offset);
    offset += raw.size() + 1;
    const std::string_view line = text::trim_cr(raw);
    if (line.empty()) continue;
    const auto tab = line.rfind('\t');
    if (tab == std::string_view::npos) throw ParseError("expected token<TAB>score", line_no);
    const std::string token(line.substr(0, tab));
    if (token.empty()) throw ParseError("empty token", line_no);
    const auto score = text::parse_double(line.substr(tab + 1));
    if (!score || !std::isfinite(*score)) {
      throw ParseError("unparsable score '" + std::string(line.substr(tab + 1)) + "'", line_no);
    }
    if (auto [it, fresh] = first_line.emplace(token, line_no); !fresh) {
      throw ParseError("duplicate token '" + token + "' (lines " + std::to_string(it->second) + " and " +
                           std::to_string(line_no) + ")",
                       line_no);
    }
    entries.push_back({token, *score});
  }
  return UnigramVocab(std::move(entries), std::move(unk_token), marker);
}

inline void write_vocab(const UnigramVocab& vocab, std::ostream& out) {
  for (const auto& e : vocab.entries()) out << e.token << '\t' << text::format_double(e.score) << '\n';
}

struct Segmentation {
  struct Piece {
    std::size_t begin = 0;  // byte span in `text`
    std::size_t end = 0;
    bool unk = false;
  };

  std::string text;  // what was segmented: the word, marker-prefixed when the vocabulary uses one
  std::vector<std::string> tokens;
  std::vector<Piece> pieces;
  double score = 0.0;
  std::size_t n_tokens = 0;

  /// Joins the tokens, expanding each unk to the span it stands for.
  std::string reconstruct() const {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (pieces[i].unk) {
        out += text.substr(pieces[i].begin, pieces[i].end - pieces[i].begin);
      } else {
        out += tokens[i];
      }
    }
    return out;
  }
};

namespace detail {

// Score ties closer than this are broken structurally.
inline constexpr double kScoreTieEps = 1e-9;

}  // namespace detail

/// Maximum-score segmentation of one word. Ties go to fewer tokens, then to
/// the longest first token (recursively, leftmost-longest). A character that
/// is not itself a vocabulary token may be emitted as one unk token.
inline Segmentation segment(const UnigramVocab& vocab, std::string_view word) {
  Segmentation seg;
  if (word.empty()) return seg;
  seg.text = vocab.surface(word);
  const std::string_view s = seg.text;
  const auto bounds = text::char_boundaries(s);
  const std::size_t n = bounds.size() - 1;
  std::vector<std::int32_t> char_at(s.size() + 1, -1);
  for (std::size_t i = 0; i <= n; ++i) char_at[bounds[i]] = static_cast<std::int32_t>(i);

  struct Cell {
    double score = -std::numeric_limits<double>::infinity();
    std::size_t n_tokens = 0;
    std::size_t next = 0;   // char index where the following piece starts
    std::int64_t entry = -1;  // -1 marks an unk piece
  };
  std::vector<Cell> best(n + 1);
  best[n].score = 0.0;

  const auto better = [](double score, std::size_t ntok, std::size_t len, const Cell& cur, std::size_t cur_len) {
    if (score > cur.score + detail::kScoreTieEps) return true;
    if (score < cur.score - detail::kScoreTieEps) return false;
    if (ntok != cur.n_tokens) return ntok < cur.n_tokens;
    return len > cur_len;
  };

  for (std::size_t i = n; i-- > 0;) {
    Cell cur;
    std::size_t cur_len = 0;
    bool single_char_token = false;
    vocab.for_each_prefix_match(s, bounds[i], [&](std::size_t end_byte, std::size_t entry) {
      const auto end = char_at[end_byte];
      if (end < 0) return;
      const auto j = static_cast<std::size_t>(end);
      if (j == i + 1) single_char_token = true;
      const double sc = vocab.entries()[entry].score + best[j].score;
      const std::size_t ntok = 1 + best[j].n_tokens;
      if (cur_len == 0 || better(sc, ntok, j - i, cur, cur_len)) {
        cur = {sc, ntok, j, static_cast<std::int64_t>(entry)};
        cur_len = j - i;
      }
    });
    if (!single_char_token) {
      const double sc = vocab.unk_score() + best[i + 1].score;
      const std::size_t ntok = 1 + best[i + 1].n_tokens;
      if (cur_len == 0 || better(sc, ntok, 1, cur, cur_len)) {
        cur = {sc, ntok, i + 1, -1};
        cur_len = 1;
      }
    }
    best[i] = cur;
  }

  seg.score = best[0].score;
  seg.n_tokens = best[0].n_tokens;
  for (std::size_t i = 0; i < n; i = best[i].next) {
    const auto& c = best[i];
    const bool unk = c.entry < 0;
    seg.tokens.push_back(unk ? vocab.unk_token() : vocab.entries()[static_cast<std::size_t>(c.entry)].token);
    seg.pieces.push_back({bounds[i], bounds[c.next], unk});
  }
  return seg;
}

inline std::size_t count_tokens(const UnigramVocab& vocab, std::string_view word) {
  return segment(vocab, word).n_tokens;
}

/// Adds every form as a single token. Each new or updated token is scored
/// 1.0 above the best segmentation score it had just before its own update,
/// which strictly beats every multi-token cover. Forms are processed from
/// shortest to longest so that a protected substring cannot outscore a
/// longer protected form. Forms that already segment as themselves are left
/// untouched.
inline UnigramVocab protect_forms(const UnigramVocab& vocab, std::span<const std::string> forms) {
  std::vector<std::string> ordered;
  for (const auto& f : forms) {
    if (f.empty()) throw ArgumentError("cannot protect an empty form");
    ordered.push_back(text::nfc(f));
  }
  std::stable_sort(ordered.begin(), ordered.end(), [](const std::string& a, const std::string& b) {
    return text::char_count(a) < text::char_count(b);
  });
  UnigramVocab out = vocab;
  for (const auto& form : ordered) {
    const auto seg = segment(out, form);
    if (seg.n_tokens == 1 && !seg.pieces[0].unk) continue;
    out.upsert(seg.text, seg.score + 1.0);
  }
  return out;
}

/// Every male and female form of a lexicon, in lexicon order.
inline std::vector<std::string> lexicon_forms(const ProfessionLexicon& lex) {
  std::vector<std::string> out;
  for (const auto& e : lex.entries()) {
    for (const auto& p : e.pairs) {
      out.push_back(p.male_form);
      out.push_back(p.female_form);
    }
  }
  return out;
}

enum class HistogramGrouping { by_gender, by_stereotype };

inline std::string_view to_string(HistogramGrouping g) noexcept {
  return g == HistogramGrouping::by_gender ? "by_gender" : "by_stereotype";
}

struct TokenHistogram {
  HistogramGrouping grouping = HistogramGrouping::by_gender;
  std::map<std::pair<std::string, std::size_t>, std::size_t> buckets;  // (label, n_tokens) -> forms

  std::size_t total() const {
    std::size_t t = 0;
    for (const auto& [key, count] : buckets) t += count;
    return t;
  }

  std::size_t total(std::string_view label) const {
    std::size_t t = 0;
    for (const auto& [key, count] : buckets) {
      if (key.first == label) t += count;
    }
    return t;
  }

  /// Mean token count of the forms under `label`, NaN when there are none.
  double mean_tokens(std::string_view label) const {
    double sum = 0;
    std::size_t n = 0;
    for (const auto& [key, count] : buckets) {
      if (key.first != label) continue;
      sum += static_cast<double>(key.second * count);
      n += count;
    }
    return n ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
  }
};

/// Buckets forms by token count. by_gender labels forms "male"/"female";
/// by_stereotype labels them "pro"/"anti" relative to the profession's
/// stereotype and skips neutral-stereotype professions.
inline TokenHistogram token_histogram(const UnigramVocab& vocab, const ProfessionLexicon& lex,
                                      HistogramGrouping grouping) {
  TokenHistogram h;
  h.grouping = grouping;
  for (const auto& e : lex.entries()) {
    if (grouping == HistogramGrouping::by_stereotype && e.stereotype == Stereotype::neutral) continue;
    for (const auto& p : e.pairs) {
      for (const Gender g : {Gender::male, Gender::female}) {
        std::string label(to_string(g));
        if (grouping == HistogramGrouping::by_stereotype) label = g == e.stereotype ? "pro" : "anti";
        ++h.buckets[{label, count_tokens(vocab, p.form(g))}];
      }
    }
  }
  return h;
}

}  // namespace tokbias
