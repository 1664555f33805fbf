#pragma once

// JSON views of the result types, shared by the CLI and by callers that
// want machine-readable output.

#include <cmath>
#include <set>
#include <span>
#include <string>

#include <json.hpp>

#include "tokbias/bleu.hpp"
#include "tokbias/corpus.hpp"
#include "tokbias/evaluator.hpp"
#include "tokbias/lexicon.hpp"
#include "tokbias/metrics.hpp"
#include "tokbias/stats.hpp"
#include "tokbias/tokenizer.hpp"

#ifndef TOKBIAS_VERSION
#define TOKBIAS_VERSION "0.1.0"
#endif

namespace tokbias::report {

using nlohmann::json;

inline constexpr std::string_view kToolName = "tokbias";
inline constexpr std::string_view kVersion = TOKBIAS_VERSION;

inline json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json to_json(const TokenHistogram& h) {
  json buckets = json::array();
  for (const auto& [key, count] : h.buckets) {
    buckets.push_back({{"group", key.first}, {"n_tokens", key.second}, {"count", count}});
  }
  json means = json::object();
  std::set<std::string> labels;
  for (const auto& [key, count] : h.buckets) labels.insert(key.first);
  for (const auto& l : labels) means[l] = number(h.mean_tokens(l));
  return {{"grouping", to_string(h.grouping)}, {"buckets", buckets}, {"mean_tokens", means}, {"total", h.total()}};
}

inline json to_json(const ProfessionStats& s) {
  json profs = json::object();
  for (const auto& [name, pc] : s.professions) {
    json p = json::object();
    for (const Gender g : {Gender::male, Gender::female}) {
      json forms = json::object();
      for (const auto& [form, fc] : pc.forms(g)) {
        forms[form] = {{"correct_form", fc.correct_form}, {"output_occurrences", fc.output_occurrences}};
      }
      p[std::string(to_string(g))] = {
          {"correct", pc.cell(g).correct}, {"source_total", pc.cell(g).source_total}, {"forms", forms}};
    }
    p["neutral_total"] = pc.neutral_total;
    profs[name] = p;
  }
  return {{"professions", profs}, {"neutral_instances", s.neutral_instances}, {"skipped_unknown", s.skipped_unknown}};
}

inline json to_json(const F1Record& r) {
  return {{"profession", r.profession}, {"gender", to_string(r.gender)}, {"pair_index", r.pair_index},
          {"form", r.form},             {"recall", r.recall},            {"precision", r.precision},
          {"f1", r.f1},                 {"observed", r.observed}};
}

inline json to_json(const MicroF1& m) {
  return {{"correct", m.correct},
          {"source_total", m.source_total},
          {"correct_form", m.correct_form},
          {"output_occurrences", m.output_occurrences},
          {"recall", m.recall()},
          {"precision", m.precision()},
          {"f1", m.f1()}};
}

inline json to_json(const AggregateBias& b) {
  return {{"accuracy", b.accuracy}, {"delta_g", b.delta_g}, {"delta_s", b.delta_s},
          {"evaluable", b.evaluable}, {"correct", b.correct}, {"male", to_json(b.male)},
          {"female", to_json(b.female)}, {"pro", to_json(b.pro)}, {"anti", to_json(b.anti)}};
}

inline json to_json(const PairMetrics& m) {
  return {{"profession", m.profession},
          {"stereotype", to_string(m.stereotype)},
          {"male_form", m.male_form},
          {"female_form", m.female_form},
          {"f1_male", m.f1_male},
          {"f1_female", m.f1_female},
          {"delta_g", m.delta_g},
          {"delta_s", m.delta_s_defined ? json(m.delta_s) : json(nullptr)},
          {"tokens_male", m.tokens_male},
          {"tokens_female", m.tokens_female},
          {"delta_t_g", m.delta_t_g},
          {"delta_t_s", m.delta_s_defined ? json(m.delta_t_s) : json(nullptr)},
          {"freq_male", m.freq_male},
          {"freq_female", m.freq_female},
          {"delta_s_defined", m.delta_s_defined},
          {"unobserved_male", m.unobserved_male},
          {"unobserved_female", m.unobserved_female}};
}

inline json to_json(const stats::CorrelationResult& c) {
  return {{"r", number(c.r)}, {"p_two_sided", number(c.p_two_sided)}, {"n", c.n}};
}

inline json to_json(const stats::JTResult& r) {
  return {{"statistic", r.statistic},
          {"max_statistic", r.max_statistic},
          {"mean_h0", r.mean_h0},
          {"variance_h0", r.variance_h0},
          {"z", r.z},
          {"p_one_sided", r.p_one_sided},
          {"p_two_sided", r.p_two_sided},
          {"method", stats::to_string(r.method)},
          {"enumerated", r.enumerated},
          {"permutations", r.permutations},
          {"n", r.n},
          {"group_sizes", r.group_sizes}};
}

inline json to_json(const stats::CIResult& r) {
  json strata = json::array();
  for (const auto& s : r.strata) {
    strata.push_back({{"freq_range", {s.freq_min, s.freq_max}},
                      {"n_records", s.n_records},
                      {"token_levels", s.token_levels},
                      {"group_sizes", s.group_sizes},
                      {"jt", s.group_sizes.size() >= 2 ? to_json(s.jt) : json(nullptr)}});
  }
  return {{"strata", strata},
          {"n_strata", r.n_strata},
          {"n_strata_requested", r.n_strata_requested},
          {"statistic", r.statistic},
          {"mean_h0", r.mean_h0},
          {"variance_h0", r.variance_h0},
          {"z", r.z},
          {"combined_p", r.combined_p},
          {"method", stats::to_string(r.method)},
          {"permutations", r.permutations},
          {"testable", r.testable},
          {"alternative", "decreasing"},
          {"seed", r.seed}};
}

inline json to_json(const FormRatioReport& r) {
  json per = json::object();
  for (const auto& [name, c] : r.per_profession) per[name] = {{"female", c.female}, {"male", c.male}};
  json agg = {{"female", r.aggregate.female}, {"male", r.aggregate.male}};
  agg["neutral"] = r.neutral_present ? json(r.aggregate.neutral) : json(nullptr);
  return {{"per_profession", per},
          {"aggregate", agg},
          {"ratio", r.ratio_string},
          {"ratio_components", r.neutral_present ? "neutral:female:male" : "female:male"}};
}

inline json to_json(const BleuScore& b) {
  return {{"score", b.score},           {"ngram_precisions", b.ngram_precisions}, {"matches", b.matches},
          {"totals", b.totals},         {"brevity_penalty", b.brevity_penalty},   {"hyp_length", b.hyp_length},
          {"ref_length", b.ref_length}};
}

inline json to_json(const LexiconSummary& s) {
  json by = json::object();
  for (const auto& [st, n] : s.n_by_stereotype) by[std::string(to_string(st))] = n;
  return {{"n_professions", s.n_professions}, {"n_pairs", s.n_pairs}, {"n_by_stereotype", by}};
}

}  // namespace tokbias::report
