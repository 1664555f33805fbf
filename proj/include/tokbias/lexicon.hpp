#pragma once

// Profession lexicon: English profession -> attested gendered target forms.
//
// TSV layout, one profession per row:
//   english <TAB> stereotype <TAB> male_1 <TAB> female_1 ... male_k <TAB> female_k
// Blank trailing cells are allowed, lines starting with '#' are comments.
// A female cell of "=" marks a pair whose single surface form serves both
// genders.

#include <array>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tokbias/error.hpp"
#include "tokbias/text.hpp"

namespace tokbias {

enum class Gender { male, female, neutral };

/// Labor-statistics stereotype of a profession, same value space as Gender.
using Stereotype = Gender;

inline constexpr std::size_t kMaxPairsPerProfession = 5;

inline std::string_view to_string(Gender g) noexcept {
  switch (g) {
    case Gender::male: return "male";
    case Gender::female: return "female";
    case Gender::neutral: return "neutral";
  }
  return "?";
}

inline std::optional<Gender> parse_gender(std::string_view s) noexcept {
  if (s == "male") return Gender::male;
  if (s == "female") return Gender::female;
  if (s == "neutral") return Gender::neutral;
  return std::nullopt;
}

struct TranslationPair {
  std::string male_form;
  std::string female_form;
  bool shared = false;  // one surface form used for both genders

  const std::string& form(Gender g) const {
    if (g == Gender::neutral) throw ArgumentError("translation pairs have no neutral form");
    return g == Gender::male ? male_form : female_form;
  }

  bool operator==(const TranslationPair&) const = default;
};

struct ProfessionEntry {
  std::string english;
  Stereotype stereotype = Stereotype::neutral;
  std::vector<TranslationPair> pairs;

  bool operator==(const ProfessionEntry&) const = default;
};

class ProfessionLexicon {
 public:
  ProfessionLexicon() = default;

  /// NFC-normalizes every text field and enforces the lexicon invariants.
  /// Throws ValidationError on the first violated rule.
  ProfessionLexicon(std::string language, std::vector<ProfessionEntry> entries)
      : language_(std::move(language)), entries_(std::move(entries)) {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      auto& e = entries_[i];
      e.english = text::nfc(e.english);
      for (auto& p : e.pairs) {
        p.male_form = text::nfc(p.male_form);
        p.female_form = text::nfc(p.female_form);
      }
      validate_entry(e);
      if (!index_.emplace(e.english, i).second) {
        throw ValidationError("duplicate profession '" + e.english + "'");
      }
    }
  }

  const std::string& language() const noexcept { return language_; }
  const std::vector<ProfessionEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  const ProfessionEntry* find(std::string_view english) const {
    const auto it = index_.find(english);
    return it == index_.end() ? nullptr : &entries_[it->second];
  }

  const ProfessionEntry& at(std::string_view english) const {
    if (const auto* e = find(english)) return *e;
    throw ArgumentError("unknown profession '" + std::string(english) + "'");
  }

  bool operator==(const ProfessionLexicon& o) const {
    return language_ == o.language_ && entries_ == o.entries_;
  }

  static void validate_entry(const ProfessionEntry& e) {
    if (e.english.empty()) throw ValidationError("profession name is empty");
    if (e.pairs.empty()) throw ValidationError("profession '" + e.english + "' has no translation pairs");
    if (e.pairs.size() > kMaxPairsPerProfession) {
      throw ValidationError("profession '" + e.english + "' has " + std::to_string(e.pairs.size()) +
                            " translation pairs; at most five pairs are kept per profession");
    }
    std::set<std::string, std::less<>> seen;
    for (const auto& p : e.pairs) {
      if (p.male_form.empty() || p.female_form.empty()) {
        throw ValidationError("profession '" + e.english + "' has an empty translation form");
      }
      if (p.shared != (p.male_form == p.female_form)) {
        throw ValidationError("profession '" + e.english + "': form '" + p.male_form +
                              (p.shared ? "' is flagged shared but the forms differ"
                                        : "' is used for both genders without the shared flag"));
      }
      for (const auto* f : {&p.male_form, &p.female_form}) {
        if (f == &p.female_form && p.shared) continue;
        if (!seen.insert(*f).second) {
          throw ValidationError("profession '" + e.english + "': form '" + *f +
                                "' appears in more than one pair");
        }
      }
    }
  }

 private:
  std::string language_;
  std::vector<ProfessionEntry> entries_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

enum class LexiconFormat { tsv, json };

namespace detail {

inline ProfessionLexicon load_lexicon_tsv(std::istream& in, std::string language) {
  std::vector<ProfessionEntry> entries;
  std::map<std::string, std::size_t, std::less<>> first_line;
  std::string raw;
  std::size_t line_no = 0;
  std::size_t offset = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    text::require_utf8(raw, line_no, offset);
    offset += raw.size() + 1;
    const std::string_view line = text::trim_cr(raw);
    if (line.empty() || line.front() == '#') continue;

    auto cells = text::split_tabs(line);
    while (cells.size() > 2 && cells.back().empty()) cells.pop_back();
    if (cells.size() < 4) throw ParseError("expected english, stereotype and at least one form pair", line_no);
    if (cells.size() % 2 != 0) throw ParseError("unpaired translation form", line_no);

    ProfessionEntry e;
    e.english = text::nfc(cells[0]);
    if (e.english.empty()) throw ParseError("empty profession name", line_no);
    const auto st = parse_gender(cells[1]);
    if (!st) throw ParseError("unknown stereotype '" + std::string(cells[1]) + "'", line_no);
    e.stereotype = *st;
    for (std::size_t c = 2; c + 1 < cells.size(); c += 2) {
      if (cells[c].empty() || cells[c + 1].empty()) throw ParseError("blank cell inside a form pair", line_no);
      TranslationPair p;
      p.male_form = text::nfc(cells[c]);
      if (cells[c + 1] == "=") {
        p.female_form = p.male_form;
        p.shared = true;
      } else {
        p.female_form = text::nfc(cells[c + 1]);
      }
      e.pairs.push_back(std::move(p));
    }
    try {
      ProfessionLexicon::validate_entry(e);
    } catch (const ValidationError& err) {
      throw ValidationError("line " + std::to_string(line_no) + ": " + err.what());
    }
    if (auto [it, fresh] = first_line.emplace(e.english, line_no); !fresh) {
      throw ValidationError("line " + std::to_string(line_no) + ": duplicate profession '" + e.english +
                            "' (first defined on line " + std::to_string(it->second) + ")");
    }
    entries.push_back(std::move(e));
  }
  return ProfessionLexicon(std::move(language), std::move(entries));
}

inline ProfessionLexicon load_lexicon_json(std::istream& in, std::string language) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed lexicon JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("lexicon JSON must be an object");
  if (doc.contains("language")) {
    if (!doc["language"].is_string()) throw ParseError("'language' must be a string");
    const auto declared = doc["language"].get<std::string>();
    if (language.empty()) language = declared;
  }
  std::vector<ProfessionEntry> entries;
  if (!doc.contains("entries")) return ProfessionLexicon(std::move(language), {});
  const auto& list = doc["entries"];
  if (!list.is_array()) throw ParseError("'entries' must be an array");
  std::size_t index = 0;
  const auto field = [&](const nlohmann::json& obj, const char* key) -> std::string {
    if (!obj.contains(key) || !obj[key].is_string()) {
      throw ParseError("entry " + std::to_string(index) + ": missing string field '" + key + "'");
    }
    return obj[key].get<std::string>();
  };
  for (const auto& item : list) {
    if (!item.is_object()) throw ParseError("entry " + std::to_string(index) + " is not an object");
    ProfessionEntry e;
    e.english = field(item, "english");
    const auto st_text = field(item, "stereotype");
    const auto st = parse_gender(st_text);
    if (!st) throw ParseError("entry " + std::to_string(index) + ": unknown stereotype '" + st_text + "'");
    e.stereotype = *st;
    if (!item.contains("pairs") || !item["pairs"].is_array()) {
      throw ParseError("entry " + std::to_string(index) + ": 'pairs' must be an array");
    }
    for (const auto& pj : item["pairs"]) {
      if (!pj.is_object()) throw ParseError("entry " + std::to_string(index) + ": pair is not an object");
      TranslationPair p;
      p.male_form = field(pj, "male");
      p.shared = pj.value("shared", false);
      p.female_form = p.shared && !pj.contains("female") ? p.male_form : field(pj, "female");
      text::require_utf8(p.male_form);
      text::require_utf8(p.female_form);
      e.pairs.push_back(std::move(p));
    }
    entries.push_back(std::move(e));
    ++index;
  }
  return ProfessionLexicon(std::move(language), std::move(entries));
}

}  // namespace detail

/// Reads a lexicon. `language` overrides the code stored in a JSON document;
/// TSV files carry no language code of their own.
inline ProfessionLexicon load_lexicon(std::istream& in, LexiconFormat format, std::string language = {}) {
  return format == LexiconFormat::tsv ? detail::load_lexicon_tsv(in, std::move(language))
                                      : detail::load_lexicon_json(in, std::move(language));
}

inline void write_lexicon_tsv(const ProfessionLexicon& lex, std::ostream& out) {
  for (const auto& e : lex.entries()) {
    out << e.english << '\t' << to_string(e.stereotype);
    for (const auto& p : e.pairs) out << '\t' << p.male_form << '\t' << (p.shared ? "=" : p.female_form);
    out << '\n';
  }
}

inline nlohmann::json lexicon_to_json(const ProfessionLexicon& lex) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : lex.entries()) {
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& p : e.pairs) {
      nlohmann::json pj{{"male", p.male_form}, {"female", p.female_form}};
      if (p.shared) pj["shared"] = true;
      pairs.push_back(std::move(pj));
    }
    entries.push_back({{"english", e.english}, {"stereotype", to_string(e.stereotype)}, {"pairs", pairs}});
  }
  return {{"language", lex.language()}, {"entries", entries}};
}

struct LexiconSummary {
  std::size_t n_professions = 0;
  std::size_t n_pairs = 0;
  std::map<Stereotype, std::size_t> n_by_stereotype;
};

inline LexiconSummary lexicon_summary(const ProfessionLexicon& lex) {
  LexiconSummary s;
  for (auto st : {Stereotype::male, Stereotype::female, Stereotype::neutral}) s.n_by_stereotype[st] = 0;
  for (const auto& e : lex.entries()) {
    ++s.n_professions;
    s.n_pairs += e.pairs.size();
    ++s.n_by_stereotype[e.stereotype];
  }
  return s;
}

}  // namespace tokbias
