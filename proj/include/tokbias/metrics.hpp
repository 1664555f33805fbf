#pragma once

// Per-pair bias records joining F1, token counts and corpus frequency.

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "tokbias/corpus.hpp"
#include "tokbias/error.hpp"
#include "tokbias/evaluator.hpp"
#include "tokbias/lexicon.hpp"
#include "tokbias/stats.hpp"
#include "tokbias/tokenizer.hpp"

namespace tokbias {

struct PairMetrics {
  std::string profession;
  Stereotype stereotype = Stereotype::neutral;
  std::string male_form;
  std::string female_form;
  double f1_male = 0.0;
  double f1_female = 0.0;
  double delta_g = 0.0;
  double delta_s = 0.0;  // meaningful only when delta_s_defined
  std::size_t tokens_male = 0;
  std::size_t tokens_female = 0;
  std::int64_t delta_t_g = 0;
  std::int64_t delta_t_s = 0;
  std::uint64_t freq_male = 0;
  std::uint64_t freq_female = 0;
  bool delta_s_defined = false;  // false for neutral-stereotype professions
  bool unobserved_male = false;   // the form never appeared in any output
  bool unobserved_female = false;

  bool operator==(const PairMetrics&) const = default;
};

/// Fills the derived fields from f1_*, tokens_* and the stereotype:
/// ΔG = F1_m − F1_f, ΔT_G = n_m − n_f; ΔS and ΔT_S equal them for a male
/// stereotype and are their negation for a female one.
inline void derive_deltas(PairMetrics& m) {
  m.delta_g = m.f1_male - m.f1_female;
  m.delta_t_g = static_cast<std::int64_t>(m.tokens_male) - static_cast<std::int64_t>(m.tokens_female);
  m.delta_s_defined = m.stereotype != Stereotype::neutral;
  if (m.stereotype == Stereotype::male) {
    m.delta_s = m.delta_g;
    m.delta_t_s = m.delta_t_g;
  } else if (m.stereotype == Stereotype::female) {
    m.delta_s = -m.delta_g;
    m.delta_t_s = -m.delta_t_g;
  } else {
    m.delta_s = 0.0;
    m.delta_t_s = 0;
  }
}

/// True when every delta identity holds exactly.
inline bool identities_hold(const PairMetrics& m) {
  if (m.delta_g != m.f1_male - m.f1_female) return false;
  if (m.delta_t_g != static_cast<std::int64_t>(m.tokens_male) - static_cast<std::int64_t>(m.tokens_female)) {
    return false;
  }
  switch (m.stereotype) {
    case Stereotype::male: return m.delta_s_defined && m.delta_s == m.delta_g && m.delta_t_s == m.delta_t_g;
    case Stereotype::female: return m.delta_s_defined && m.delta_s == -m.delta_g && m.delta_t_s == -m.delta_t_g;
    case Stereotype::neutral: return !m.delta_s_defined;
  }
  return false;
}

/// One record per (profession, pair) in lexicon order. Forms without an F1
/// record get f1 = 0 and are flagged unobserved, as are forms that never
/// appeared in the outputs.
inline std::vector<PairMetrics> pair_metrics(std::span<const F1Record> f1s, const UnigramVocab& vocab,
                                             const FrequencyTable& freq, const ProfessionLexicon& lex,
                                             const QueryOptions& freq_opts = {}) {
  std::map<std::tuple<std::string, Gender, std::string>, const F1Record*> by_form;
  for (const auto& r : f1s) {
    if (!lex.find(r.profession)) {
      throw ArgumentError("F1 record for profession '" + r.profession + "' which is not in the lexicon");
    }
    by_form[{r.profession, r.gender, r.form}] = &r;
  }
  std::vector<PairMetrics> out;
  for (const auto& e : lex.entries()) {
    for (const auto& p : e.pairs) {
      PairMetrics m;
      m.profession = e.english;
      m.stereotype = e.stereotype;
      m.male_form = p.male_form;
      m.female_form = p.female_form;
      const auto lookup = [&](Gender g, double& f1, bool& unobserved) {
        const auto it = by_form.find({e.english, g, p.form(g)});
        f1 = it == by_form.end() ? 0.0 : it->second->f1;
        unobserved = it == by_form.end() || !it->second->observed;
      };
      lookup(Gender::male, m.f1_male, m.unobserved_male);
      lookup(Gender::female, m.f1_female, m.unobserved_female);
      m.tokens_male = count_tokens(vocab, p.male_form);
      m.tokens_female = count_tokens(vocab, p.female_form);
      m.freq_male = query_one(freq, p.male_form, freq_opts);
      m.freq_female = query_one(freq, p.female_form, freq_opts);
      derive_deltas(m);
      out.push_back(std::move(m));
    }
  }
  return out;
}

enum class Field {
  f1_male,
  f1_female,
  delta_g,
  delta_s,
  tokens_male,
  tokens_female,
  delta_t_g,
  delta_t_s,
  freq_male,
  freq_female
};

inline std::optional<Field> parse_field(std::string_view s) {
  static const std::pair<std::string_view, Field> names[] = {
      {"f1_male", Field::f1_male},         {"f1_female", Field::f1_female},     {"delta_g", Field::delta_g},
      {"delta_s", Field::delta_s},         {"tokens_male", Field::tokens_male}, {"tokens_female", Field::tokens_female},
      {"delta_t_g", Field::delta_t_g},     {"delta_t_s", Field::delta_t_s},     {"freq_male", Field::freq_male},
      {"freq_female", Field::freq_female}};
  for (const auto& [name, f] : names) {
    if (name == s) return f;
  }
  return std::nullopt;
}

/// Value of a field, or nullopt when it is undefined for this record.
inline std::optional<double> field_value(const PairMetrics& m, Field f) {
  switch (f) {
    case Field::f1_male: return m.f1_male;
    case Field::f1_female: return m.f1_female;
    case Field::delta_g: return m.delta_g;
    case Field::delta_s: return m.delta_s_defined ? std::optional<double>(m.delta_s) : std::nullopt;
    case Field::tokens_male: return static_cast<double>(m.tokens_male);
    case Field::tokens_female: return static_cast<double>(m.tokens_female);
    case Field::delta_t_g: return static_cast<double>(m.delta_t_g);
    case Field::delta_t_s: return m.delta_s_defined ? std::optional<double>(static_cast<double>(m.delta_t_s)) : std::nullopt;
    case Field::freq_male: return static_cast<double>(m.freq_male);
    case Field::freq_female: return static_cast<double>(m.freq_female);
  }
  return std::nullopt;
}

struct ScatterSeries {
  std::vector<std::pair<double, double>> points;
  std::size_t skipped = 0;  // records where x or y is undefined

  std::vector<double> xs() const {
    std::vector<double> v;
    for (const auto& p : points) v.push_back(p.first);
    return v;
  }
  std::vector<double> ys() const {
    std::vector<double> v;
    for (const auto& p : points) v.push_back(p.second);
    return v;
  }
};

inline ScatterSeries scatter_series(std::span<const PairMetrics> metrics, Field x, Field y,
                                    bool exclude_unobserved = false) {
  ScatterSeries s;
  for (const auto& m : metrics) {
    const auto xv = field_value(m, x);
    const auto yv = field_value(m, y);
    if (!xv || !yv || (exclude_unobserved && (m.unobserved_male || m.unobserved_female))) {
      ++s.skipped;
      continue;
    }
    s.points.emplace_back(*xv, *yv);
  }
  return s;
}

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : (v[mid - 1] + v[mid]) / 2.0;
}

struct MedianRow {
  double x = 0.0;
  std::size_t n = 0;
  double median_y = 0.0;
};

/// Median of y for each distinct x value (integer ΔT columns), ascending x.
inline std::vector<MedianRow> medians_by_x(const ScatterSeries& s) {
  std::map<double, std::vector<double>> cols;
  for (const auto& [x, y] : s.points) cols[x].push_back(y);
  std::vector<MedianRow> out;
  for (auto& [x, ys] : cols) out.push_back({x, ys.size(), median(ys)});
  return out;
}

enum class FormGrouping { pooled, male, female };

/// Per-form (f1, n_tokens, frequency) records for the conditional-independence test.
inline std::vector<stats::CIRecord> form_records(std::span<const PairMetrics> metrics,
                                                 FormGrouping grouping = FormGrouping::pooled,
                                                 bool exclude_unobserved = false) {
  std::vector<stats::CIRecord> out;
  for (const auto& m : metrics) {
    if (grouping != FormGrouping::female && !(exclude_unobserved && m.unobserved_male)) {
      out.push_back({m.f1_male, m.tokens_male, m.freq_male});
    }
    if (grouping != FormGrouping::male && !(exclude_unobserved && m.unobserved_female)) {
      out.push_back({m.f1_female, m.tokens_female, m.freq_female});
    }
  }
  return out;
}

inline constexpr std::string_view kPairMetricsColumns[] = {
    "profession",    "stereotype", "male_form",  "female_form", "f1_male",   "f1_female",
    "delta_g",       "delta_s",    "tokens_male", "tokens_female", "delta_t_g", "delta_t_s",
    "freq_male",     "freq_female", "delta_s_defined", "unobserved_male", "unobserved_female"};

namespace detail {

inline std::string csv_cell(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

inline std::vector<std::string> parse_csv_line(std::string_view line, std::size_t line_no) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw ParseError("unterminated quoted CSV cell", line_no);
  cells.push_back(std::move(cur));
  return cells;
}

}  // namespace detail

/// CSV with a header row and one row per pair; columns named after the fields.
inline void write_pair_metrics_csv(std::span<const PairMetrics> metrics, std::ostream& out) {
  for (std::size_t i = 0; i < std::size(kPairMetricsColumns); ++i) out << (i ? "," : "") << kPairMetricsColumns[i];
  out << '\n';
  for (const auto& m : metrics) {
    out << detail::csv_cell(m.profession) << ',' << to_string(m.stereotype) << ',' << detail::csv_cell(m.male_form)
        << ',' << detail::csv_cell(m.female_form) << ',' << text::format_double(m.f1_male) << ','
        << text::format_double(m.f1_female) << ',' << text::format_double(m.delta_g) << ','
        << (m.delta_s_defined ? text::format_double(m.delta_s) : "") << ',' << m.tokens_male << ','
        << m.tokens_female << ',' << m.delta_t_g << ',' << (m.delta_s_defined ? std::to_string(m.delta_t_s) : "")
        << ',' << m.freq_male << ',' << m.freq_female << ',' << (m.delta_s_defined ? 1 : 0) << ','
        << (m.unobserved_male ? 1 : 0) << ',' << (m.unobserved_female ? 1 : 0) << '\n';
  }
}

/// Reads the CSV written by write_pair_metrics_csv. Lines starting with '#'
/// are skipped. Derived columns are recomputed from the primary ones.
inline std::vector<PairMetrics> read_pair_metrics_csv(std::istream& in) {
  std::vector<PairMetrics> out;
  std::string raw;
  std::size_t line_no = 0;
  std::map<std::string, std::size_t> col;
  while (std::getline(in, raw)) {
    ++line_no;
    text::require_utf8(raw, line_no);
    const std::string_view line = text::trim_cr(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto cells = detail::parse_csv_line(line, line_no);
    if (col.empty()) {
      for (std::size_t i = 0; i < cells.size(); ++i) col[cells[i]] = i;
      for (const auto name : {"profession", "stereotype", "male_form", "female_form", "f1_male", "f1_female",
                              "tokens_male", "tokens_female", "freq_male", "freq_female"}) {
        if (!col.contains(name)) throw ParseError(std::string("missing column '") + name + "'", line_no);
      }
      continue;
    }
    if (cells.size() != col.size()) throw ParseError("wrong number of columns", line_no);
    const auto cell = [&](const char* name) -> const std::string& { return cells[col.at(name)]; };
    const auto real = [&](const char* name) {
      const auto v = text::parse_double(cell(name));
      if (!v) throw ParseError(std::string("bad number in column '") + name + "'", line_no);
      return *v;
    };
    const auto count = [&](const char* name) {
      const auto v = text::parse_uint(cell(name));
      if (!v) throw ParseError(std::string("bad count in column '") + name + "'", line_no);
      return *v;
    };
    const auto flag = [&](const char* name) { return col.contains(name) && cells[col.at(name)] == "1"; };
    PairMetrics m;
    m.profession = cell("profession");
    const auto st = parse_gender(cell("stereotype"));
    if (!st) throw ParseError("bad stereotype '" + cell("stereotype") + "'", line_no);
    m.stereotype = *st;
    m.male_form = cell("male_form");
    m.female_form = cell("female_form");
    m.f1_male = real("f1_male");
    m.f1_female = real("f1_female");
    m.tokens_male = static_cast<std::size_t>(count("tokens_male"));
    m.tokens_female = static_cast<std::size_t>(count("tokens_female"));
    m.freq_male = count("freq_male");
    m.freq_female = count("freq_female");
    m.unobserved_male = flag("unobserved_male");
    m.unobserved_female = flag("unobserved_female");
    derive_deltas(m);
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace tokbias
