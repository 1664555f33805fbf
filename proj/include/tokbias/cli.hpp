#pragma once

// Command-line front end. `run` is the whole program minus main(), so tests
// can drive every subcommand in-process.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tokbias/bleu.hpp"
#include "tokbias/corpus.hpp"
#include "tokbias/dataset_gen.hpp"
#include "tokbias/error.hpp"
#include "tokbias/evaluator.hpp"
#include "tokbias/lexicon.hpp"
#include "tokbias/metrics.hpp"
#include "tokbias/report.hpp"
#include "tokbias/stats.hpp"
#include "tokbias/tokenizer.hpp"
#include "tokbias/trainer.hpp"

namespace tokbias::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitInternal = 3;

/// A file that a subcommand needs could not be opened or written.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;
  std::string language;
  std::string vocab;
  std::string lexicon;
  std::string corpus;
  std::string freq_table;
  std::string winomt;
  std::string outputs;
  std::string metrics;
  std::string strip_prefixes_file;
  std::string neutral_forms_file;
  std::string out_dir = "tokbias_out";
  bool case_fold = false;
  bool exclude_unobserved = false;
  std::string marker = "auto";
  std::string ci_grouping = "pooled";
  std::size_t strata = 3;
  std::uint64_t seed = 0;
  std::string stat_mode = "auto";
  // train-tokenizer
  std::size_t vocab_size = 8000;
  TrainParams train;
  // gen-dataset
  std::string male_pattern;
  std::string female_pattern;
  // bleu
  std::string hypotheses;
  std::string references;
};

namespace detail {

using nlohmann::json;

inline std::ifstream open_input(const std::string& path, std::string_view what) {
  if (path.empty()) throw InputError("missing required --" + std::string(what) + " path");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + std::string(what) + " file '" + path + "'");
  return in;
}

inline std::filesystem::path out_path(const RunConfig& cfg, std::string_view name) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec) throw InputError("cannot create output directory '" + cfg.out_dir + "': " + ec.message());
  return std::filesystem::path(cfg.out_dir) / std::string(name);
}

inline void write_file(const RunConfig& cfg, std::string_view name, const std::string& content) {
  const auto path = out_path(cfg, name);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw InputError("failed writing '" + path.string() + "'");
}

inline json config_json(const RunConfig& c) {
  json j = {{"language", c.language},
            {"vocab", c.vocab},
            {"lexicon", c.lexicon},
            {"corpus", c.corpus},
            {"freq_table", c.freq_table},
            {"winomt", c.winomt},
            {"outputs", c.outputs},
            {"metrics", c.metrics},
            {"strip_prefixes", c.strip_prefixes_file},
            {"case_fold", c.case_fold},
            {"marker", c.marker},
            {"strata", c.strata},
            {"stat_mode", c.stat_mode},
            {"ci_grouping", c.ci_grouping},
            {"exclude_unobserved", c.exclude_unobserved}};
  return j;
}

inline json meta(const RunConfig& c) {
  return {{"tool", report::kToolName},
          {"version", report::kVersion},
          {"command", c.command},
          {"seed", c.seed},
          {"config", config_json(c)}};
}

inline std::string json_report(const RunConfig& c, json results) {
  json doc = {{"meta", meta(c)}, {"results", std::move(results)}};
  return doc.dump(2) + "\n";
}

inline std::string csv_header(const RunConfig& c) {
  std::ostringstream os;
  os << "# " << report::kToolName << ' ' << report::kVersion << " command=" << c.command << " seed=" << c.seed;
  if (!c.language.empty()) os << " lang=" << c.language;
  os << '\n';
  return os.str();
}

inline std::vector<std::string> read_lines(const std::string& path, std::string_view what) {
  auto in = open_input(path, what);
  std::vector<std::string> out;
  for (auto& l : load_outputs(in)) {
    if (!l.empty() && l.front() != '#') out.push_back(std::move(l));
  }
  return out;
}

inline MarkerMode marker_mode(const RunConfig& c) {
  if (c.marker == "always") return MarkerMode::always;
  if (c.marker == "never") return MarkerMode::never;
  return MarkerMode::auto_detect;
}

inline stats::TestMode stat_mode(const RunConfig& c) {
  if (c.stat_mode == "exact") return stats::TestMode::exact;
  if (c.stat_mode == "normal") return stats::TestMode::normal;
  return stats::TestMode::auto_select;
}

inline FormGrouping ci_grouping(const RunConfig& c) {
  if (c.ci_grouping == "male") return FormGrouping::male;
  if (c.ci_grouping == "female") return FormGrouping::female;
  return FormGrouping::pooled;
}

inline text::Normalization normalization(const RunConfig& c) { return {true, c.case_fold}; }

inline std::vector<std::string> strip_prefixes(const RunConfig& c) {
  if (c.strip_prefixes_file.empty()) return {};
  return read_lines(c.strip_prefixes_file, "strip-prefixes");
}

inline UnigramVocab load_vocab_file(const RunConfig& c) {
  auto in = open_input(c.vocab, "vocab");
  return load_vocab(in, std::string(kDefaultUnk), marker_mode(c));
}

inline ProfessionLexicon load_lexicon_file(const RunConfig& c) {
  auto in = open_input(c.lexicon, "lexicon");
  const bool is_json = std::filesystem::path(c.lexicon).extension() == ".json";
  return load_lexicon(in, is_json ? LexiconFormat::json : LexiconFormat::tsv, c.language);
}

inline FrequencyTable load_frequencies(const RunConfig& c) {
  if (!c.freq_table.empty()) {
    auto in = open_input(c.freq_table, "freq-table");
    return read_frequency_tsv(in, normalization(c));
  }
  if (!c.corpus.empty()) {
    auto in = open_input(c.corpus, "corpus");
    return build_frequency_table(in, normalization(c));
  }
  FrequencyTable empty;
  empty.normalization = normalization(c);
  return empty;
}

inline std::string histogram_csv(const RunConfig& c, const TokenHistogram& h) {
  std::ostringstream os;
  os << csv_header(c) << "group,n_tokens,count\n";
  for (const auto& [key, count] : h.buckets) os << key.first << ',' << key.second << ',' << count << '\n';
  return os.str();
}

inline json tokens_results(const RunConfig& c, std::ostream& out) {
  const auto vocab = load_vocab_file(c);
  const auto lex = load_lexicon_file(c);
  const auto by_gender = token_histogram(vocab, lex, HistogramGrouping::by_gender);
  const auto by_stereo = token_histogram(vocab, lex, HistogramGrouping::by_stereotype);
  write_file(c, "tokens_by_gender.csv", histogram_csv(c, by_gender));
  write_file(c, "tokens_by_stereotype.csv", histogram_csv(c, by_stereo));
  json forms = json::array();
  for (const auto& e : lex.entries()) {
    for (const auto& p : e.pairs) {
      for (const Gender g : {Gender::male, Gender::female}) {
        const auto seg = segment(vocab, p.form(g));
        forms.push_back({{"profession", e.english},
                         {"gender", to_string(g)},
                         {"form", p.form(g)},
                         {"tokens", seg.tokens},
                         {"n_tokens", seg.n_tokens}});
      }
    }
  }
  json results = {{"by_gender", report::to_json(by_gender)},
                  {"by_stereotype", report::to_json(by_stereo)},
                  {"forms", forms},
                  {"lexicon", report::to_json(lexicon_summary(lex))}};
  write_file(c, "tokens.json", json_report(c, results));
  out << "forms tokenized: " << by_gender.total() << '\n';
  for (const auto label : {"male", "female", "pro", "anti"}) {
    const auto& h = std::string_view(label) == "male" || std::string_view(label) == "female" ? by_gender : by_stereo;
    out << "mean tokens (" << label << "): " << text::format_double(h.mean_tokens(label)) << '\n';
  }
  return results;
}

struct EvalOutput {
  std::vector<PairMetrics> metrics;
  json results;
};

inline EvalOutput eval_results(const RunConfig& c, std::ostream& out) {
  const auto lex = load_lexicon_file(c);
  const auto vocab = load_vocab_file(c);
  std::vector<EvalInstance> instances;
  {
    auto in = open_input(c.winomt, "winomt");
    instances = load_winomt(in);
  }
  std::vector<std::string> outputs;
  {
    auto in = open_input(c.outputs, "outputs");
    outputs = load_outputs(in);
  }
  if (instances.size() != outputs.size()) {
    throw ValidationError("alignment error: " + std::to_string(outputs.size()) + " output lines for " +
                          std::to_string(instances.size()) + " WinoMT instances");
  }
  MatchConfig mc{normalization(c), strip_prefixes(c)};
  const auto freq = load_frequencies(c);
  const auto st = evaluate(instances, outputs, lex, mc);
  const auto f1s = f1_per_translation(st, lex);
  const auto agg = aggregate_bias(st, lex);
  auto metrics = pair_metrics(f1s, vocab, freq, lex, QueryOptions{mc.strip_prefixes});

  json forms = json::array();
  for (const auto& r : f1s) forms.push_back(report::to_json(r));
  json pm = json::array();
  for (const auto& m : metrics) pm.push_back(report::to_json(m));
  const auto tally = winomt_counts(instances);
  json results = {{"aggregate", report::to_json(agg)},
                  {"counts", report::to_json(st)},
                  {"forms", forms},
                  {"instances", {{"male", tally.male}, {"female", tally.female}, {"neutral", tally.neutral}}}};
  write_file(c, "eval.json", json_report(c, results));

  std::ostringstream f1csv;
  f1csv << csv_header(c) << "profession,gender,pair_index,form,recall,precision,f1,observed\n";
  for (const auto& r : f1s) {
    f1csv << tokbias::detail::csv_cell(r.profession) << ',' << to_string(r.gender) << ',' << r.pair_index << ','
          << tokbias::detail::csv_cell(r.form) << ',' << text::format_double(r.recall) << ','
          << text::format_double(r.precision) << ',' << text::format_double(r.f1) << ',' << (r.observed ? 1 : 0)
          << '\n';
  }
  write_file(c, "f1.csv", f1csv.str());

  std::ostringstream pmcsv;
  pmcsv << csv_header(c);
  write_pair_metrics_csv(metrics, pmcsv);
  write_file(c, "pair_metrics.csv", pmcsv.str());
  write_file(c, "pair_metrics.json", json_report(c, pm));

  out << "accuracy: " << text::format_double(agg.accuracy) << '\n'
      << "delta_g: " << text::format_double(agg.delta_g) << '\n'
      << "delta_s: " << text::format_double(agg.delta_s) << '\n';
  return {std::move(metrics), std::move(results)};
}

inline json correlation_entry(std::string_view x, std::string_view y, const std::vector<double>& xs,
                              const std::vector<double>& ys, std::size_t skipped) {
  json j = {{"x", x}, {"y", y}, {"skipped", skipped}};
  try {
    const auto r = stats::pearson(xs, ys);
    j["r"] = report::number(r.r);
    j["p_two_sided"] = report::number(r.p_two_sided);
    j["n"] = r.n;
  } catch (const ArgumentError& e) {
    j["r"] = nullptr;
    j["p_two_sided"] = nullptr;
    j["n"] = xs.size();
    j["error"] = e.what();
  }
  return j;
}

inline json analyze_results(const RunConfig& c, const std::vector<PairMetrics>& metrics, std::ostream& out) {
  json correlations = json::array();
  json medians = json::object();
  const std::pair<Field, Field> pairs[] = {{Field::delta_t_g, Field::delta_g}, {Field::delta_t_s, Field::delta_s}};
  for (const auto& [fx, fy] : pairs) {
    const auto s = scatter_series(metrics, fx, fy, c.exclude_unobserved);
    const std::string xn = fx == Field::delta_t_g ? "delta_t_g" : "delta_t_s";
    const std::string yn = fy == Field::delta_g ? "delta_g" : "delta_s";
    correlations.push_back(correlation_entry(xn, yn, s.xs(), s.ys(), s.skipped));
    json rows = json::array();
    for (const auto& m : medians_by_x(s)) rows.push_back({{xn, m.x}, {"n", m.n}, {"median_" + yn, m.median_y}});
    medians[xn + "_vs_" + yn] = rows;
  }
  const auto records = form_records(metrics, ci_grouping(c), c.exclude_unobserved);
  std::vector<double> freq, logfreq, f1, ntok;
  for (const auto& r : records) {
    freq.push_back(static_cast<double>(r.frequency));
    logfreq.push_back(std::log10(static_cast<double>(r.frequency) + 1.0));
    f1.push_back(r.f1);
    ntok.push_back(static_cast<double>(r.n_tokens));
  }
  correlations.push_back(correlation_entry("frequency", "f1", freq, f1, 0));
  correlations.push_back(correlation_entry("frequency", "n_tokens", freq, ntok, 0));
  correlations.push_back(correlation_entry("log_frequency", "f1", logfreq, f1, 0));
  correlations.push_back(correlation_entry("log_frequency", "n_tokens", logfreq, ntok, 0));
  correlations.push_back(correlation_entry("n_tokens", "f1", ntok, f1, 0));

  json ci;
  try {
    const auto res = stats::conditional_independence(records, c.strata, stat_mode(c), c.seed);
    ci = report::to_json(res);
    out << "conditional independence (F1 vs n_tokens | frequency): combined_p = "
        << text::format_double(res.combined_p) << " over " << res.n_strata << " strata\n";
  } catch (const ArgumentError& e) {
    ci = {{"error", e.what()}};
    out << "conditional independence: " << e.what() << '\n';
  }
  json results = {{"correlations", correlations},
                  {"medians", medians},
                  {"conditional_independence", ci},
                  {"n_form_records", records.size()},
                  {"form_grouping", c.ci_grouping}};
  write_file(c, "analysis.json", json_report(c, results));

  std::ostringstream csv;
  csv << csv_header(c) << "test,x,y,n,statistic,p\n";
  for (const auto& j : correlations) {
    csv << "pearson," << j["x"].get<std::string>() << ',' << j["y"].get<std::string>() << ',' << j["n"].dump()
        << ',' << (j["r"].is_null() ? "" : text::format_double(j["r"].get<double>())) << ','
        << (j["p_two_sided"].is_null() ? "" : text::format_double(j["p_two_sided"].get<double>())) << '\n';
  }
  if (ci.contains("combined_p")) {
    csv << "stratified_jonckheere_terpstra,n_tokens,f1," << records.size() << ','
        << text::format_double(ci["statistic"].get<double>()) << ','
        << text::format_double(ci["combined_p"].get<double>()) << '\n';
  }
  write_file(c, "analysis.csv", csv.str());
  for (const auto& j : correlations) {
    out << "pearson(" << j["x"].get<std::string>() << ", " << j["y"].get<std::string>() << "): r = "
        << (j["r"].is_null() ? std::string("undefined") : text::format_double(j["r"].get<double>())) << '\n';
  }
  return results;
}

inline std::vector<PairMetrics> metrics_for_analyze(const RunConfig& c, std::ostream& out) {
  if (!c.metrics.empty()) {
    auto in = open_input(c.metrics, "metrics");
    return read_pair_metrics_csv(in);
  }
  return eval_results(c, out).metrics;
}

inline void freq_command(const RunConfig& c, std::ostream& out) {
  auto in = open_input(c.corpus, "corpus");
  const auto table = build_frequency_table(in, normalization(c));
  std::ostringstream tsv;
  write_frequency_tsv(table, tsv);
  write_file(c, "freq.tsv", tsv.str());
  json results = {{"n_lines", table.n_lines}, {"total_tokens", table.total_tokens}, {"n_forms", table.counts.size()}};
  if (!c.lexicon.empty()) {
    const auto lex = load_lexicon_file(c);
    std::optional<std::vector<std::string>> neutral;
    if (!c.neutral_forms_file.empty()) neutral = read_lines(c.neutral_forms_file, "neutral-forms");
    const auto ratio = form_ratio(table, lex, neutral, QueryOptions{strip_prefixes(c)});
    results["form_ratio"] = report::to_json(ratio);
    out << "form ratio (" << (ratio.neutral_present ? "neutral:female:male" : "female:male")
        << "): " << ratio.ratio_string << '\n';
  }
  write_file(c, "freq.json", json_report(c, results));
  out << "lines: " << table.n_lines << ", words: " << table.total_tokens << ", distinct: " << table.counts.size()
      << '\n';
}

inline void protect_command(const RunConfig& c, std::ostream& out) {
  const auto vocab = load_vocab_file(c);
  const auto lex = load_lexicon_file(c);
  const auto forms = lexicon_forms(lex);
  const auto protectedv = protect_forms(vocab, forms);
  std::ostringstream os;
  write_vocab(protectedv, os);
  write_file(c, "vocab.protected.tsv", os.str());
  out << "protected " << forms.size() << " forms; vocabulary " << vocab.size() << " -> " << protectedv.size()
      << " tokens\n";
}

inline void train_command(const RunConfig& c, std::ostream& out) {
  auto in = open_input(c.corpus, "corpus");
  const auto vocab = train_unigram(in, c.vocab_size, c.train);
  std::ostringstream os;
  write_vocab(vocab, os);
  write_file(c, "vocab.tsv", os.str());
  out << "trained vocabulary of " << vocab.size() - 1 << " tokens (+ " << vocab.unk_token() << ")\n";
}

inline void gen_dataset_command(const RunConfig& c, std::ostream& out) {
  const auto lex = load_lexicon_file(c);
  const auto rows = generate_balanced(lex, {c.male_pattern, c.female_pattern});
  std::ostringstream os;
  write_dataset_tsv(rows, os);
  write_file(c, "dataset.tsv", os.str());
  out << "rows: " << rows.size() << '\n';
}

inline void bleu_command(const RunConfig& c, std::ostream& out) {
  std::vector<std::string> hyp, ref;
  {
    auto in = open_input(c.hypotheses, "hyp");
    hyp = load_outputs(in);
  }
  {
    auto in = open_input(c.references, "ref");
    ref = load_outputs(in);
  }
  const auto b = bleu(hyp, ref);
  write_file(c, "bleu.json", json_report(c, report::to_json(b)));
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(2);
  os << b.score;
  out << "BLEU = " << os.str() << '\n';
}

}  // namespace detail

/// Runs one invocation. Returns the process exit code: 0 success,
/// 2 input or validation error, 3 internal invariant violation.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  RunConfig cfg;
  CLI::App app{"Gender bias, subword tokenization and corpus frequency analysis for MT outputs", "tokbias"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(report::kVersion));

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--lang", cfg.language, "Target language code");
    sub->add_option("--out-dir", cfg.out_dir, "Directory for reports")->capture_default_str();
    sub->add_option("--seed", cfg.seed, "Seed for Monte-Carlo procedures")->capture_default_str();
  };
  const auto inputs = [&](CLI::App* sub) {
    sub->add_option("--vocab", cfg.vocab, "Unigram vocabulary (token<TAB>score)");
    sub->add_option("--lexicon", cfg.lexicon, "Profession lexicon (.tsv or .json)");
    sub->add_option("--marker", cfg.marker, "Word-boundary marker use: auto, always, never")
        ->check(CLI::IsMember({"auto", "always", "never"}))
        ->capture_default_str();
    sub->add_flag("--case-fold", cfg.case_fold, "Case-insensitive matching and counting");
    sub->add_option("--strip-prefixes", cfg.strip_prefixes_file, "File of clitic prefixes, one per line");
  };
  const auto eval_inputs = [&](CLI::App* sub) {
    sub->add_option("--winomt", cfg.winomt, "WinoMT TSV: gender, entity index, sentence, profession");
    sub->add_option("--outputs", cfg.outputs, "Translations, one per line, aligned with --winomt");
    sub->add_option("--corpus", cfg.corpus, "Training-corpus text for form frequencies");
    sub->add_option("--freq-table", cfg.freq_table, "Precomputed frequency table (form<TAB>count)");
  };
  const auto analysis = [&](CLI::App* sub) {
    sub->add_option("--strata", cfg.strata, "Frequency strata for the conditional-independence test")
        ->capture_default_str();
    sub->add_option("--stat-mode", cfg.stat_mode, "auto, exact or normal")
        ->check(CLI::IsMember({"auto", "exact", "normal"}))
        ->capture_default_str();
    sub->add_option("--ci-grouping", cfg.ci_grouping, "Form records used: pooled, male or female")
        ->check(CLI::IsMember({"pooled", "male", "female"}))
        ->capture_default_str();
    sub->add_flag("--exclude-unobserved", cfg.exclude_unobserved, "Drop forms never seen in the outputs");
  };

  auto* tokens = app.add_subcommand("tokens", "Token-count histograms of the lexicon forms");
  common(tokens);
  inputs(tokens);

  auto* eval = app.add_subcommand("eval", "Per-form F1, aggregate bias and pair metrics");
  common(eval);
  inputs(eval);
  eval_inputs(eval);

  auto* analyze = app.add_subcommand("analyze", "Correlations and the conditional-independence test");
  common(analyze);
  inputs(analyze);
  eval_inputs(analyze);
  analysis(analyze);
  analyze->add_option("--metrics", cfg.metrics, "pair_metrics.csv from `eval` (skips re-evaluation)");

  auto* pipeline = app.add_subcommand("pipeline", "tokens, eval and analyze in sequence");
  common(pipeline);
  inputs(pipeline);
  eval_inputs(pipeline);
  analysis(pipeline);

  auto* freq = app.add_subcommand("freq", "Surface-form frequency table of a corpus");
  common(freq);
  inputs(freq);
  freq->add_option("--corpus", cfg.corpus, "Corpus text, one sentence per line");
  freq->add_option("--neutral-forms", cfg.neutral_forms_file, "Neutral forms, one per line, for the form ratio");

  auto* protect = app.add_subcommand("protect-vocab", "Add every lexicon form to the vocabulary as one token");
  common(protect);
  inputs(protect);

  auto* train = app.add_subcommand("train-tokenizer", "Train a unigram vocabulary on a corpus");
  common(train);
  train->add_option("--corpus", cfg.corpus, "Corpus text, one sentence per line");
  train->add_option("--vocab-size", cfg.vocab_size, "Target vocabulary size")->capture_default_str();
  train->add_option("--seed-size", cfg.train.seed_size, "Seed substrings")->capture_default_str();
  train->add_option("--em-iterations", cfg.train.em_iterations, "EM iterations per round")->capture_default_str();
  train->add_option("--prune-fraction", cfg.train.prune_fraction, "Fraction pruned per round")->capture_default_str();
  train->add_option("--max-token-length", cfg.train.max_token_length, "Longest token in characters")
      ->capture_default_str();

  auto* gen = app.add_subcommand("gen-dataset", "Gender-balanced template dataset");
  common(gen);
  gen->add_option("--lexicon", cfg.lexicon, "Profession lexicon (.tsv or .json)");
  gen->add_option("--male-pattern", cfg.male_pattern, "Target template with one {} placeholder")->required();
  gen->add_option("--female-pattern", cfg.female_pattern, "Target template with one {} placeholder")->required();

  auto* bleu_cmd = app.add_subcommand("bleu", "Corpus BLEU of hypotheses against references");
  common(bleu_cmd);
  bleu_cmd->add_option("--hyp", cfg.hypotheses, "Hypotheses, one per line");
  bleu_cmd->add_option("--ref", cfg.references, "References, one per line");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << (dynamic_cast<const CLI::CallForVersion*>(&e) ? e.what() : app.help()) << '\n';
      return kExitOk;
    }
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }

  try {
    std::ostringstream summary;
    if (tokens->parsed()) {
      cfg.command = "tokens";
      detail::tokens_results(cfg, summary);
    } else if (eval->parsed()) {
      cfg.command = "eval";
      detail::eval_results(cfg, summary);
    } else if (analyze->parsed()) {
      cfg.command = "analyze";
      const auto metrics = detail::metrics_for_analyze(cfg, summary);
      detail::analyze_results(cfg, metrics, summary);
    } else if (pipeline->parsed()) {
      cfg.command = "pipeline";
      detail::tokens_results(cfg, summary);
      const auto ev = detail::eval_results(cfg, summary);
      detail::analyze_results(cfg, ev.metrics, summary);
    } else if (freq->parsed()) {
      cfg.command = "freq";
      detail::freq_command(cfg, summary);
    } else if (protect->parsed()) {
      cfg.command = "protect-vocab";
      detail::protect_command(cfg, summary);
    } else if (train->parsed()) {
      cfg.command = "train-tokenizer";
      detail::train_command(cfg, summary);
    } else if (gen->parsed()) {
      cfg.command = "gen-dataset";
      detail::gen_dataset_command(cfg, summary);
    } else if (bleu_cmd->parsed()) {
      cfg.command = "bleu";
      detail::bleu_command(cfg, summary);
    }
    out << summary.str();
    return kExitOk;
  } catch (const InvariantError& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kExitInput;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << '\n';
    return kExitInput;
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  std::vector<const char*> argv{"tokbias"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace tokbias::cli
