#pragma once

// Gender-balanced "He/She is the <profession>" template pairs.

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "tokbias/error.hpp"
#include "tokbias/lexicon.hpp"

namespace tokbias {

inline constexpr std::string_view kPlaceholder = "{}";

struct TemplateRow {
  std::string source;
  std::string target;
  Gender gender = Gender::male;

  bool operator==(const TemplateRow&) const = default;
};

struct TargetTemplates {
  std::string male_pattern;    // e.g. "Er ist {}."
  std::string female_pattern;  // e.g. "Sie ist {}."
};

namespace detail {

inline std::size_t count_placeholders(std::string_view pattern) {
  std::size_t n = 0;
  for (auto pos = pattern.find(kPlaceholder); pos != std::string_view::npos;
       pos = pattern.find(kPlaceholder, pos + kPlaceholder.size())) {
    ++n;
  }
  return n;
}

inline std::string fill(std::string_view pattern, std::string_view value) {
  const auto pos = pattern.find(kPlaceholder);
  std::string out(pattern.substr(0, pos));
  out += value;
  out += pattern.substr(pos + kPlaceholder.size());
  return out;
}

}  // namespace detail

/// Two rows per (profession, pair) in lexicon order, male first. Target
/// patterns must contain exactly one "{}" placeholder.
inline std::vector<TemplateRow> generate_balanced(const ProfessionLexicon& lex, const TargetTemplates& templates) {
  for (const auto* p : {&templates.male_pattern, &templates.female_pattern}) {
    if (detail::count_placeholders(*p) != 1) {
      throw ArgumentError("target pattern '" + *p + "' must contain exactly one {} placeholder");
    }
  }
  std::vector<TemplateRow> rows;
  for (const auto& e : lex.entries()) {
    for (const auto& p : e.pairs) {
      rows.push_back({"He is the " + e.english, detail::fill(templates.male_pattern, p.male_form), Gender::male});
      rows.push_back({"She is the " + e.english, detail::fill(templates.female_pattern, p.female_form), Gender::female});
    }
  }
  return rows;
}

/// TSV `source<TAB>target<TAB>gender`.
inline void write_dataset_tsv(const std::vector<TemplateRow>& rows, std::ostream& out) {
  for (const auto& r : rows) out << r.source << '\t' << r.target << '\t' << to_string(r.gender) << '\n';
}

}  // namespace tokbias
