#pragma once

// Gender-translation scoring against WinoMT-style gold labels: per-profession
// recall, per-form precision and F1, and dataset-level accuracy / ΔG / ΔS.

#include <cstdint>
#include <istream>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "tokbias/error.hpp"
#include "tokbias/lexicon.hpp"
#include "tokbias/text.hpp"

namespace tokbias {

struct EvalInstance {
  Gender gender = Gender::neutral;
  std::size_t entity_index = 0;
  std::string sentence;
  std::string profession;

  bool operator==(const EvalInstance&) const = default;
};

namespace detail {

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

}  // namespace detail

/// Reads `gender<TAB>entity_index<TAB>sentence<TAB>profession` rows.
inline std::vector<EvalInstance> load_winomt(std::istream& in) {
  std::vector<EvalInstance> out;
  std::string raw;
  std::size_t line_no = 0;
  std::size_t offset = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    text::require_utf8(raw, line_no, offset);
    offset += raw.size() + 1;
    const std::string_view line = text::trim_cr(raw);
    if (line.empty()) continue;
    const auto cells = text::split_tabs(line);
    if (cells.size() != 4) {
      throw ParseError("expected 4 tab-separated fields, found " + std::to_string(cells.size()), line_no);
    }
    EvalInstance inst;
    const auto g = parse_gender(cells[0]);
    if (!g) throw ParseError("bad gender '" + std::string(cells[0]) + "'", line_no);
    inst.gender = *g;
    const auto idx = text::parse_uint(cells[1]);
    if (!idx) throw ParseError("entity index '" + std::string(cells[1]) + "' is not a non-negative integer", line_no);
    inst.entity_index = static_cast<std::size_t>(*idx);
    inst.sentence = text::nfc(cells[2]);
    inst.profession = text::nfc(cells[3]);
    if (inst.profession.empty()) throw ParseError("empty profession", line_no);
    if (detail::ascii_lower(inst.sentence).find(detail::ascii_lower(inst.profession)) == std::string::npos) {
      throw ParseError("profession '" + inst.profession + "' does not occur in the sentence", line_no);
    }
    out.push_back(std::move(inst));
  }
  return out;
}

struct GenderTally {
  std::size_t male = 0;
  std::size_t female = 0;
  std::size_t neutral = 0;

  std::size_t total() const noexcept { return male + female + neutral; }
};

inline GenderTally winomt_counts(std::span<const EvalInstance> instances) {
  GenderTally t;
  for (const auto& i : instances) {
    switch (i.gender) {
      case Gender::male: ++t.male; break;
      case Gender::female: ++t.female; break;
      case Gender::neutral: ++t.neutral; break;
    }
  }
  return t;
}

struct MatchConfig {
  text::Normalization normalization;
  std::vector<std::string> strip_prefixes;  // clitics, e.g. Hebrew definite article
};

struct FormHits {
  std::vector<std::string> male_hits;
  std::vector<std::string> female_hits;

  const std::vector<std::string>& hits(Gender g) const { return g == Gender::male ? male_hits : female_hits; }
};

/// Normalized words of one output sentence, ready for whole-word lookups.
class SentenceWords {
 public:
  SentenceWords(std::string_view sentence, const MatchConfig& cfg) : cfg_(&cfg) {
    for (auto& w : text::split_words(sentence, cfg.normalization)) words_.insert(std::move(w));
    for (const auto& p : cfg.strip_prefixes) {
      if (!p.empty()) prefixes_.push_back(text::normalize(p, cfg.normalization));
    }
  }

  bool contains(std::string_view form) const {
    const std::string key = text::normalize(form, cfg_->normalization);
    if (words_.contains(key)) return true;
    for (const auto& p : prefixes_) {
      if (words_.contains(p + key)) return true;
    }
    return false;
  }

 private:
  const MatchConfig* cfg_;
  std::unordered_set<std::string> words_;
  std::vector<std::string> prefixes_;
};

namespace detail {

inline FormHits match_entry(const SentenceWords& words, const ProfessionEntry& entry) {
  FormHits h;
  for (const auto& p : entry.pairs) {
    if (words.contains(p.male_form)) h.male_hits.push_back(p.male_form);
    if (words.contains(p.female_form)) h.female_hits.push_back(p.female_form);
  }
  return h;
}

}  // namespace detail

/// Attested forms of `profession` that occur as whole words in the sentence,
/// in lexicon order. Throws ArgumentError for an unknown profession.
inline FormHits match_forms(std::string_view target_sentence, const ProfessionLexicon& lex,
                            std::string_view profession, const MatchConfig& cfg = {}) {
  const auto& entry = lex.at(profession);
  return detail::match_entry(SentenceWords(target_sentence, cfg), entry);
}

struct CellCounts {
  std::uint64_t correct = 0;
  std::uint64_t source_total = 0;

  bool operator==(const CellCounts&) const = default;
};

struct FormCounts {
  std::uint64_t correct_form = 0;
  std::uint64_t output_occurrences = 0;

  bool operator==(const FormCounts&) const = default;
};

struct ProfessionCounts {
  CellCounts male;
  CellCounts female;
  std::uint64_t neutral_total = 0;
  std::map<std::string, FormCounts> male_forms;
  std::map<std::string, FormCounts> female_forms;

  CellCounts& cell(Gender g) { return g == Gender::male ? male : female; }
  const CellCounts& cell(Gender g) const { return g == Gender::male ? male : female; }
  std::map<std::string, FormCounts>& forms(Gender g) { return g == Gender::male ? male_forms : female_forms; }
  const std::map<std::string, FormCounts>& forms(Gender g) const {
    return g == Gender::male ? male_forms : female_forms;
  }

  bool operator==(const ProfessionCounts&) const = default;
};

struct ProfessionStats {
  std::map<std::string, ProfessionCounts> professions;
  std::uint64_t neutral_instances = 0;
  std::uint64_t skipped_unknown = 0;  // instances whose profession is not in the lexicon

  /// Count-wise sum, for merging chunked evaluations.
  ProfessionStats& operator+=(const ProfessionStats& o) {
    for (const auto& [name, pc] : o.professions) {
      auto& mine = professions[name];
      for (const Gender g : {Gender::male, Gender::female}) {
        mine.cell(g).correct += pc.cell(g).correct;
        mine.cell(g).source_total += pc.cell(g).source_total;
        for (const auto& [form, fc] : pc.forms(g)) {
          mine.forms(g)[form].correct_form += fc.correct_form;
          mine.forms(g)[form].output_occurrences += fc.output_occurrences;
        }
      }
      mine.neutral_total += pc.neutral_total;
    }
    neutral_instances += o.neutral_instances;
    skipped_unknown += o.skipped_unknown;
    return *this;
  }

  bool operator==(const ProfessionStats&) const = default;
};

namespace detail {

inline ProfessionStats empty_stats(const ProfessionLexicon& lex) {
  ProfessionStats s;
  for (const auto& e : lex.entries()) {
    auto& pc = s.professions[e.english];
    for (const auto& p : e.pairs) {
      pc.male_forms[p.male_form];
      pc.female_forms[p.female_form];
    }
  }
  return s;
}

}  // namespace detail

/// Folds (instance, output) pairs into counts. Outputs align with instances
/// by position. For a gendered instance the profession's source total grows;
/// if a correct-gender form hits, the instance is correct and the first such
/// form in lexicon order gets the credit; every hitting form of either gender
/// counts one output occurrence. Neutral instances are tallied separately.
inline ProfessionStats evaluate(std::span<const EvalInstance> instances, std::span<const std::string> outputs,
                                const ProfessionLexicon& lex, const MatchConfig& cfg = {}) {
  if (instances.size() != outputs.size()) {
    throw ArgumentError("outputs are not aligned with instances: " + std::to_string(outputs.size()) +
                        " outputs for " + std::to_string(instances.size()) + " instances");
  }
  ProfessionStats stats = detail::empty_stats(lex);
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& inst = instances[i];
    const auto* entry = lex.find(inst.profession);
    if (!entry) {
      ++stats.skipped_unknown;
      continue;
    }
    auto& pc = stats.professions.at(entry->english);
    if (inst.gender == Gender::neutral) {
      ++stats.neutral_instances;
      ++pc.neutral_total;
      continue;
    }
    const auto hits = detail::match_entry(SentenceWords(outputs[i], cfg), *entry);
    auto& cell = pc.cell(inst.gender);
    ++cell.source_total;
    if (const auto& correct = hits.hits(inst.gender); !correct.empty()) {
      ++cell.correct;
      ++pc.forms(inst.gender).at(correct.front()).correct_form;
    }
    for (const Gender g : {Gender::male, Gender::female}) {
      for (const auto& f : hits.hits(g)) ++pc.forms(g).at(f).output_occurrences;
    }
  }
  return stats;
}

inline double ratio_or_zero(std::uint64_t num, std::uint64_t den) {
  return den ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
}

inline double harmonic_f1(double precision, double recall) {
  return precision + recall > 0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

struct F1Record {
  std::string profession;
  Gender gender = Gender::male;
  std::size_t pair_index = 0;
  std::string form;
  double recall = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
  bool observed = false;  // the form occurred in at least one output
};

/// One record per (profession, pair, gender) in lexicon order, male first.
/// Recall comes from the (profession, gender) cell, precision from the form.
inline std::vector<F1Record> f1_per_translation(const ProfessionStats& stats, const ProfessionLexicon& lex) {
  std::vector<F1Record> out;
  for (const auto& e : lex.entries()) {
    const auto it = stats.professions.find(e.english);
    for (std::size_t pi = 0; pi < e.pairs.size(); ++pi) {
      for (const Gender g : {Gender::male, Gender::female}) {
        F1Record r;
        r.profession = e.english;
        r.gender = g;
        r.pair_index = pi;
        r.form = e.pairs[pi].form(g);
        if (it != stats.professions.end()) {
          const auto& cell = it->second.cell(g);
          r.recall = ratio_or_zero(cell.correct, cell.source_total);
          const auto& forms = it->second.forms(g);
          if (const auto f = forms.find(r.form); f != forms.end()) {
            r.precision = ratio_or_zero(f->second.correct_form, f->second.output_occurrences);
            r.observed = f->second.output_occurrences > 0;
          }
        }
        r.f1 = harmonic_f1(r.precision, r.recall);
        out.push_back(std::move(r));
      }
    }
  }
  return out;
}

struct MicroF1 {
  std::uint64_t correct = 0;
  std::uint64_t source_total = 0;
  std::uint64_t correct_form = 0;
  std::uint64_t output_occurrences = 0;

  double recall() const { return ratio_or_zero(correct, source_total); }
  double precision() const { return ratio_or_zero(correct_form, output_occurrences); }
  double f1() const { return harmonic_f1(precision(), recall()); }
};

struct AggregateBias {
  double accuracy = 0.0;
  double delta_g = 0.0;
  double delta_s = 0.0;
  std::uint64_t evaluable = 0;
  std::uint64_t correct = 0;
  MicroF1 male, female, pro, anti;
};

/// Dataset-level accuracy, ΔG (male − female micro-F1) and ΔS (pro − anti
/// micro-F1). A cell is pro-stereotypical when its gender equals the
/// profession's stereotype; neutral-stereotype professions enter neither side.
inline AggregateBias aggregate_bias(const ProfessionStats& stats, const ProfessionLexicon& lex) {
  AggregateBias b;
  const auto add = [](MicroF1& m, const CellCounts& cell, const std::map<std::string, FormCounts>& forms) {
    m.correct += cell.correct;
    m.source_total += cell.source_total;
    for (const auto& [form, fc] : forms) {
      m.correct_form += fc.correct_form;
      m.output_occurrences += fc.output_occurrences;
    }
  };
  for (const auto& [name, pc] : stats.professions) {
    const auto* entry = lex.find(name);
    for (const Gender g : {Gender::male, Gender::female}) {
      const auto& cell = pc.cell(g);
      b.evaluable += cell.source_total;
      b.correct += cell.correct;
      add(g == Gender::male ? b.male : b.female, cell, pc.forms(g));
      if (entry && entry->stereotype != Stereotype::neutral) {
        add(g == entry->stereotype ? b.pro : b.anti, cell, pc.forms(g));
      }
    }
  }
  b.accuracy = ratio_or_zero(b.correct, b.evaluable);
  b.delta_g = b.male.f1() - b.female.f1();
  b.delta_s = b.pro.f1() - b.anti.f1();
  return b;
}

inline AggregateBias aggregate_bias(std::span<const EvalInstance> instances, std::span<const std::string> outputs,
                                    const ProfessionLexicon& lex, const MatchConfig& cfg = {}) {
  return aggregate_bias(evaluate(instances, outputs, lex, cfg), lex);
}

/// One translation per line, positionally aligned with the instances.
inline std::vector<std::string> load_outputs(std::istream& in) {
  std::vector<std::string> out;
  std::string raw;
  std::size_t line_no = 0;
  std::size_t offset = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    text::require_utf8(raw, line_no, offset);
    offset += raw.size() + 1;
    out.emplace_back(text::trim_cr(raw));
  }
  return out;
}

}  // namespace tokbias
