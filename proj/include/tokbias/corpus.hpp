#pragma once

// Surface-form frequency tables over plain-text corpora and the
// neutral:female:male form-ratio report.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tokbias/error.hpp"
#include "tokbias/lexicon.hpp"
#include "tokbias/text.hpp"

namespace tokbias {

struct FrequencyTable {
  std::map<std::string, std::uint64_t, std::less<>> counts;
  std::uint64_t total_tokens = 0;
  std::uint64_t n_lines = 0;
  text::Normalization normalization;

  std::uint64_t count(std::string_view normalized_form) const {
    const auto it = counts.find(normalized_form);
    return it == counts.end() ? 0 : it->second;
  }

  bool operator==(const FrequencyTable&) const = default;
};

/// Counts words line by line. Throws ParseError on invalid UTF-8, naming the
/// byte offset in the stream.
inline FrequencyTable build_frequency_table(std::istream& corpus, const text::Normalization& norm = {}) {
  FrequencyTable table;
  table.normalization = norm;
  std::unordered_map<std::string, std::uint64_t> counts;
  std::string line;
  std::uint64_t offset = 0;
  while (std::getline(corpus, line)) {
    ++table.n_lines;
    text::require_utf8(line, table.n_lines, offset);
    offset += line.size() + 1;
    const std::string composed = norm.nfc ? text::nfc(line) : line;
    text::for_each_word(composed, [&](std::string_view w) {
      ++table.total_tokens;
      if (norm.case_fold) {
        ++counts[text::case_fold(w)];
      } else {
        ++counts[std::string(w)];
      }
    });
  }
  for (auto& [form, c] : counts) table.counts.emplace(form, c);
  return table;
}

/// Pointwise sum of two tables built with the same normalization.
inline FrequencyTable merge(const FrequencyTable& a, const FrequencyTable& b) {
  if (!(a.normalization == b.normalization)) throw ArgumentError("cannot merge tables with different normalization");
  FrequencyTable out = a;
  for (const auto& [form, c] : b.counts) out.counts[form] += c;
  out.total_tokens += b.total_tokens;
  out.n_lines += b.n_lines;
  return out;
}

struct QueryOptions {
  /// Clitic prefixes: a corpus word `prefix + form` also counts as `form`.
  std::vector<std::string> strip_prefixes;
};

/// Occurrences of one form, normalized the way the table was built.
inline std::uint64_t query_one(const FrequencyTable& table, std::string_view form, const QueryOptions& opts = {}) {
  const std::string key = text::normalize(form, table.normalization);
  if (key.empty()) return 0;
  std::uint64_t n = table.count(key);
  for (const auto& prefix : opts.strip_prefixes) {
    if (prefix.empty()) continue;
    n += table.count(text::normalize(prefix, table.normalization) + key);
  }
  return n;
}

/// Form -> count; absent forms map to 0. Keys are the forms as given.
inline std::map<std::string, std::uint64_t> query_frequency(const FrequencyTable& table,
                                                            std::span<const std::string> forms,
                                                            const QueryOptions& opts = {}) {
  std::map<std::string, std::uint64_t> out;
  for (const auto& f : forms) out[f] = query_one(table, f, opts);
  return out;
}

/// TSV `form<TAB>count`, descending count then ascending form.
inline void write_frequency_tsv(const FrequencyTable& table, std::ostream& out) {
  std::vector<std::pair<std::string_view, std::uint64_t>> rows(table.counts.begin(), table.counts.end());
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  for (const auto& [form, c] : rows) out << form << '\t' << c << '\n';
}

/// Reads a table written by write_frequency_tsv. Lines starting with '#' are skipped.
inline FrequencyTable read_frequency_tsv(std::istream& in, const text::Normalization& norm = {}) {
  FrequencyTable table;
  table.normalization = norm;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    text::require_utf8(raw, line_no);
    const std::string_view line = text::trim_cr(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto cells = text::split_tabs(line);
    if (cells.size() != 2 || cells[0].empty()) throw ParseError("expected form<TAB>count", line_no);
    const auto c = text::parse_uint(cells[1]);
    if (!c || *c == 0) throw ParseError("count must be a positive integer", line_no);
    table.counts[std::string(cells[0])] += *c;
    table.total_tokens += *c;
  }
  return table;
}

struct FormRatioReport {
  struct Counts {
    std::uint64_t neutral = 0;
    std::uint64_t female = 0;
    std::uint64_t male = 0;
  };
  std::map<std::string, Counts> per_profession;  // neutral stays 0 here: neutral forms are not tied to professions
  Counts aggregate;
  bool neutral_present = false;
  std::string ratio_string;  // "neutral:female:male", or "female:male" when no neutral forms were supplied
};

/// Components scaled so the smallest nonzero one is 1, rounded to integers.
inline std::string scaled_ratio(std::span<const std::uint64_t> parts) {
  std::uint64_t smallest = 0;
  for (const auto p : parts) {
    if (p > 0 && (smallest == 0 || p < smallest)) smallest = p;
  }
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ':';
    const auto scaled =
        smallest ? static_cast<std::uint64_t>(std::llround(static_cast<double>(parts[i]) / static_cast<double>(smallest)))
                 : 0;
    out += std::to_string(scaled);
  }
  return out;
}

/// Aggregates corpus counts of every distinct male form, female form and
/// (optionally) neutral form.
inline FormRatioReport form_ratio(const FrequencyTable& table, const ProfessionLexicon& lex,
                                  const std::optional<std::vector<std::string>>& neutral_forms = std::nullopt,
                                  const QueryOptions& opts = {}) {
  FormRatioReport r;
  std::set<std::string> male_seen, female_seen;
  for (const auto& e : lex.entries()) {
    auto& c = r.per_profession[e.english];
    std::set<std::string> pm, pf;
    for (const auto& p : e.pairs) {
      if (pm.insert(p.male_form).second) c.male += query_one(table, p.male_form, opts);
      if (pf.insert(p.female_form).second) c.female += query_one(table, p.female_form, opts);
      if (male_seen.insert(p.male_form).second) r.aggregate.male += query_one(table, p.male_form, opts);
      if (female_seen.insert(p.female_form).second) r.aggregate.female += query_one(table, p.female_form, opts);
    }
  }
  if (neutral_forms) {
    r.neutral_present = true;
    std::set<std::string> seen;
    for (const auto& f : *neutral_forms) {
      if (seen.insert(f).second) r.aggregate.neutral += query_one(table, f, opts);
    }
    const std::uint64_t parts[] = {r.aggregate.neutral, r.aggregate.female, r.aggregate.male};
    r.ratio_string = scaled_ratio(parts);
  } else {
    const std::uint64_t parts[] = {r.aggregate.female, r.aggregate.male};
    r.ratio_string = scaled_ratio(parts);
  }
  return r;
}

}  // namespace tokbias
