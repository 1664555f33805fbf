#pragma once

// Pearson correlation with a t-test, the Jonckheere-Terpstra test for
// ordered alternatives, and a frequency-stratified Jonckheere-Terpstra test
// of F1 ⊥ n_tokens | frequency.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "tokbias/error.hpp"
#include "tokbias/rng.hpp"

namespace tokbias::stats {

struct CorrelationResult {
  double r = 0.0;
  double p_two_sided = 1.0;
  std::size_t n = 0;
};

/// Sample Pearson coefficient; two-sided p from t = r·sqrt((n−2)/(1−r²)) with n−2 df.
inline CorrelationResult pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ArgumentError("pearson: sequences differ in length");
  if (x.size() < 3) throw ArgumentError("pearson: need at least 3 observations");
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0 || syy == 0) throw ArgumentError("pearson: correlation undefined for a constant sequence");
  CorrelationResult res;
  res.n = x.size();
  res.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double df = n - 2;
  if (std::abs(res.r) >= 1.0) {
    res.p_two_sided = 0.0;
  } else {
    const double t = res.r * std::sqrt(df / (1.0 - res.r * res.r));
    const boost::math::students_t dist(df);
    res.p_two_sided = std::clamp(2.0 * boost::math::cdf(dist, -std::abs(t)), 0.0, 1.0);
  }
  return res;
}

enum class Alternative { increasing, decreasing, two_sided };
enum class TestMode { auto_select, exact, normal };
enum class TestMethod { exact_permutation, normal_approx };

inline std::string_view to_string(Alternative a) noexcept {
  switch (a) {
    case Alternative::increasing: return "increasing";
    case Alternative::decreasing: return "decreasing";
    case Alternative::two_sided: return "two_sided";
  }
  return "?";
}

inline std::string_view to_string(TestMode m) noexcept {
  switch (m) {
    case TestMode::auto_select: return "auto";
    case TestMode::exact: return "exact";
    case TestMode::normal: return "normal";
  }
  return "?";
}

inline std::string_view to_string(TestMethod m) noexcept {
  return m == TestMethod::exact_permutation ? "exact_permutation" : "normal_approx";
}

struct JTOptions {
  std::uint64_t monte_carlo_permutations = 20000;
  double enumeration_limit = 1e6;    // enumerate all arrangements up to this many
  std::size_t auto_exact_max_n = 20;  // auto mode goes exact at or below this N
};

struct JTResult {
  double statistic = 0.0;
  double max_statistic = 0.0;  // Σ_{i<j} n_i n_j
  double mean_h0 = 0.0;
  double variance_h0 = 0.0;
  double z = 0.0;
  double p_one_sided = 1.0;  // in the direction of the alternative
  double p_two_sided = 1.0;
  TestMethod method = TestMethod::normal_approx;
  bool enumerated = false;           // exact method by full enumeration
  std::uint64_t permutations = 0;    // Monte-Carlo draws, 0 when enumerated or normal
  std::size_t n = 0;
  std::vector<std::size_t> group_sizes;
};

namespace detail {

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Pooled values sorted ascending, with group labels and tie-block ids.
struct Pooled {
  std::vector<double> values;
  std::vector<std::uint32_t> labels;
  std::vector<std::uint32_t> block;  // equal values share a block id
  std::vector<std::size_t> sizes;
  std::vector<std::size_t> tie_sizes;
};

inline Pooled pool(std::span<const std::vector<double>> groups) {
  struct Item {
    double v;
    std::uint32_t g;
  };
  std::vector<Item> items;
  Pooled p;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    p.sizes.push_back(groups[g].size());
    for (const double v : groups[g]) {
      if (!std::isfinite(v)) throw ArgumentError("jonckheere_terpstra: non-finite observation");
      items.push_back({v, static_cast<std::uint32_t>(g)});
    }
  }
  std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.v < b.v; });
  std::uint32_t block = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0 && items[i].v != items[i - 1].v) {
      ++block;
    }
    if (i == 0 || items[i].v != items[i - 1].v) p.tie_sizes.push_back(0);
    ++p.tie_sizes.back();
    p.values.push_back(items[i].v);
    p.labels.push_back(items[i].g);
    p.block.push_back(block);
  }
  return p;
}

// Twice the JT statistic for labels laid over the sorted pooled values.
inline std::int64_t twice_statistic(std::span<const std::uint32_t> labels, std::span<const std::uint32_t> block,
                                    std::size_t k, std::vector<std::int64_t>& below,
                                    std::vector<std::int64_t>& in_block) {
  std::fill(below.begin(), below.end(), 0);
  std::fill(in_block.begin(), in_block.end(), 0);
  std::int64_t twice = 0;
  std::int64_t block_len = 0;
  for (std::size_t q = 0; q < labels.size(); ++q) {
    if (q > 0 && block[q] != block[q - 1]) {
      for (std::size_t l = 0; l < k; ++l) {
        below[l] += in_block[l];
        in_block[l] = 0;
      }
      block_len = 0;
    }
    const auto lab = labels[q];
    std::int64_t smaller = 0;
    for (std::uint32_t l = 0; l < lab; ++l) smaller += below[l];
    twice += 2 * smaller + (block_len - in_block[lab]);
    ++in_block[lab];
    ++block_len;
  }
  return twice;
}

inline double log_multinomial(std::span<const std::size_t> sizes) {
  std::size_t n = 0;
  double out = 0;
  for (const auto s : sizes) {
    n += s;
    out -= std::lgamma(static_cast<double>(s) + 1.0);
  }
  return out + std::lgamma(static_cast<double>(n) + 1.0);
}

inline double tie_corrected_variance(std::span<const std::size_t> sizes, std::span<const std::size_t> ties) {
  double n = 0;
  for (const auto s : sizes) n += static_cast<double>(s);
  const auto sum = [](std::span<const std::size_t> xs, auto f) {
    double acc = 0;
    for (const auto x : xs) acc += f(static_cast<double>(x));
    return acc;
  };
  const auto a = [](double m) { return m * (m - 1) * (2 * m + 5); };
  const auto b = [](double m) { return m * (m - 1) * (m - 2); };
  const auto c = [](double m) { return m * (m - 1); };
  double v = (a(n) - sum(sizes, a) - sum(ties, a)) / 72.0;
  if (n > 2) v += sum(sizes, b) * sum(ties, b) / (36.0 * n * (n - 1) * (n - 2));
  if (n > 1) v += sum(sizes, c) * sum(ties, c) / (8.0 * n * (n - 1));
  return std::max(v, 0.0);
}

// Null distribution of 2J by enumerating every distinct label arrangement.
inline std::map<std::int64_t, std::uint64_t> enumerate_null(const Pooled& p) {
  std::vector<std::uint32_t> labels = p.labels;
  std::sort(labels.begin(), labels.end());
  std::vector<std::int64_t> below(p.sizes.size()), in_block(p.sizes.size());
  std::map<std::int64_t, std::uint64_t> dist;
  do {
    ++dist[twice_statistic(labels, p.block, p.sizes.size(), below, in_block)];
  } while (std::next_permutation(labels.begin(), labels.end()));
  return dist;
}

struct TailCounts {
  std::uint64_t upper = 0;  // 2J' >= 2J
  std::uint64_t lower = 0;  // 2J' <= 2J
  std::uint64_t both = 0;   // |4J' − 4mean| >= |4J − 4mean|
  std::uint64_t total = 0;
};

inline void tally(TailCounts& t, std::int64_t twice_sim, std::int64_t twice_obs, std::int64_t four_mean,
                  std::uint64_t weight) {
  if (twice_sim >= twice_obs) t.upper += weight;
  if (twice_sim <= twice_obs) t.lower += weight;
  if (std::llabs(2 * twice_sim - four_mean) >= std::llabs(2 * twice_obs - four_mean)) t.both += weight;
  t.total += weight;
}

inline void fill_p_values(JTResult& r, Alternative alt, double p_upper, double p_lower, double p_both) {
  switch (alt) {
    case Alternative::increasing: r.p_one_sided = p_upper; break;
    case Alternative::decreasing: r.p_one_sided = p_lower; break;
    case Alternative::two_sided: r.p_one_sided = std::min(p_upper, p_lower); break;
  }
  r.p_one_sided = std::clamp(r.p_one_sided, 0.0, 1.0);
  r.p_two_sided = std::clamp(p_both, 0.0, 1.0);
}

inline void normal_p_values(JTResult& r, Alternative alt) {
  r.method = TestMethod::normal_approx;
  if (r.variance_h0 <= 0) {
    r.z = 0;
    fill_p_values(r, alt, 1.0, 1.0, 1.0);
    return;
  }
  r.z = (r.statistic - r.mean_h0) / std::sqrt(r.variance_h0);
  fill_p_values(r, alt, normal_cdf(-r.z), normal_cdf(r.z), std::min(1.0, std::erfc(std::abs(r.z) / std::sqrt(2.0))));
}

inline bool use_exact(TestMode mode, std::size_t n, const JTOptions& opts) {
  return mode == TestMode::exact || (mode == TestMode::auto_select && n <= opts.auto_exact_max_n);
}

}  // namespace detail

/// Jonckheere-Terpstra test over groups given in their hypothesized order.
/// J counts, over group pairs i < j, the cross pairs (a from i, b from j)
/// with a < b, plus one half per tie. `increasing` tests for values growing
/// along the group order. Exact mode enumerates all label arrangements when
/// there are at most opts.enumeration_limit of them and otherwise draws
/// seeded Monte-Carlo permutations.
inline JTResult jonckheere_terpstra(std::span<const std::vector<double>> groups, Alternative alt,
                                    TestMode mode = TestMode::auto_select, std::uint64_t seed = 0,
                                    const JTOptions& opts = {}) {
  if (groups.size() < 2) throw ArgumentError("jonckheere_terpstra: need at least 2 groups");
  for (const auto& g : groups) {
    if (g.empty()) throw ArgumentError("jonckheere_terpstra: empty group");
  }
  const auto p = detail::pool(groups);
  const std::size_t k = groups.size();
  JTResult r;
  r.n = p.values.size();
  r.group_sizes = p.sizes;
  const double n = static_cast<double>(r.n);
  double sum_sq = 0;
  for (const auto s : p.sizes) sum_sq += static_cast<double>(s) * static_cast<double>(s);
  r.max_statistic = (n * n - sum_sq) / 2.0;
  r.mean_h0 = (n * n - sum_sq) / 4.0;
  r.variance_h0 = detail::tie_corrected_variance(p.sizes, p.tie_sizes);

  std::vector<std::int64_t> below(k), in_block(k);
  const std::int64_t twice_obs = detail::twice_statistic(p.labels, p.block, k, below, in_block);
  r.statistic = static_cast<double>(twice_obs) / 2.0;
  detail::normal_p_values(r, alt);
  if (!detail::use_exact(mode, r.n, opts)) return r;

  r.method = TestMethod::exact_permutation;
  const auto four_mean = static_cast<std::int64_t>(std::llround(4.0 * r.mean_h0));
  detail::TailCounts tails;
  if (detail::log_multinomial(p.sizes) <= std::log(opts.enumeration_limit)) {
    r.enumerated = true;
    for (const auto& [twice, count] : detail::enumerate_null(p)) {
      detail::tally(tails, twice, twice_obs, four_mean, count);
    }
    const auto total = static_cast<double>(tails.total);
    detail::fill_p_values(r, alt, static_cast<double>(tails.upper) / total, static_cast<double>(tails.lower) / total,
                          static_cast<double>(tails.both) / total);
  } else {
    Rng rng(seed);
    std::vector<std::uint32_t> labels = p.labels;
    for (std::uint64_t b = 0; b < opts.monte_carlo_permutations; ++b) {
      rng.shuffle(std::span<std::uint32_t>(labels));
      detail::tally(tails, detail::twice_statistic(labels, p.block, k, below, in_block), twice_obs, four_mean, 1);
    }
    r.permutations = opts.monte_carlo_permutations;
    const auto denom = static_cast<double>(tails.total + 1);
    detail::fill_p_values(r, alt, static_cast<double>(tails.upper + 1) / denom,
                          static_cast<double>(tails.lower + 1) / denom, static_cast<double>(tails.both + 1) / denom);
  }
  return r;
}

struct CIRecord {
  double f1 = 0.0;
  std::size_t n_tokens = 0;
  std::uint64_t frequency = 0;
};

struct CIStratum {
  std::uint64_t freq_min = 0;
  std::uint64_t freq_max = 0;
  std::size_t n_records = 0;
  std::vector<std::size_t> token_levels;  // ascending n_tokens, one per group
  std::vector<std::size_t> group_sizes;
  JTResult jt;
};

struct CIResult {
  std::vector<CIStratum> strata;
  std::size_t n_strata = 0;           // after merging strata with a single token level
  std::size_t n_strata_requested = 0;
  double statistic = 0.0;             // Σ J over strata
  double mean_h0 = 0.0;
  double variance_h0 = 0.0;
  double z = 0.0;
  double combined_p = 1.0;            // one-sided, alternative: F1 decreases with n_tokens
  TestMethod method = TestMethod::normal_approx;
  std::uint64_t permutations = 0;
  bool testable = true;               // false when no stratum has two token levels
  std::uint64_t seed = 0;
};

namespace detail {

inline std::vector<std::vector<double>> token_groups(std::span<const CIRecord> recs, std::span<const std::size_t> idx,
                                                     std::vector<std::size_t>& levels) {
  std::map<std::size_t, std::vector<double>> by_tokens;
  for (const auto i : idx) by_tokens[recs[i].n_tokens].push_back(recs[i].f1);
  std::vector<std::vector<double>> groups;
  levels.clear();
  for (auto& [tok, vals] : by_tokens) {
    levels.push_back(tok);
    groups.push_back(std::move(vals));
  }
  return groups;
}

inline std::size_t distinct_tokens(std::span<const CIRecord> recs, std::span<const std::size_t> idx) {
  std::vector<std::size_t> t;
  for (const auto i : idx) t.push_back(recs[i].n_tokens);
  std::sort(t.begin(), t.end());
  return static_cast<std::size_t>(std::unique(t.begin(), t.end()) - t.begin());
}

}  // namespace detail

/// Tests F1 ⊥ n_tokens | frequency. Records are sorted by frequency and cut
/// into `n_strata` equal-size quantile strata; a stratum whose records share
/// one token count is merged into its neighbour. Within each stratum F1 is
/// grouped by ascending token count and a Jonckheere-Terpstra test for a
/// decreasing trend is run. Strata combine by summing J − E[J] and pooling
/// variances (normal) or by the convolution / stratified permutation of the
/// per-stratum null distributions (exact). With a single stratum the result
/// is exactly the unconditional test.
inline CIResult conditional_independence(std::span<const CIRecord> records, std::size_t n_strata,
                                         TestMode mode = TestMode::auto_select, std::uint64_t seed = 0,
                                         const JTOptions& opts = {}) {
  if (n_strata == 0) throw ArgumentError("conditional_independence: n_strata must be positive");
  if (records.size() < 3 * n_strata) {
    throw ArgumentError("conditional_independence: need at least " + std::to_string(3 * n_strata) +
                        " records for " + std::to_string(n_strata) + " strata, got " +
                        std::to_string(records.size()));
  }
  CIResult res;
  res.seed = seed;
  res.n_strata_requested = n_strata;

  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return records[a].frequency < records[b].frequency; });

  std::vector<std::vector<std::size_t>> cuts;
  const std::size_t base = records.size() / n_strata;
  const std::size_t extra = records.size() % n_strata;
  std::size_t pos = 0;
  for (std::size_t s = 0; s < n_strata; ++s) {
    const std::size_t len = base + (s < extra ? 1 : 0);
    cuts.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(pos),
                      order.begin() + static_cast<std::ptrdiff_t>(pos + len));
    pos += len;
  }
  // Merge single-level strata forward (the last one backward).
  for (std::size_t s = 0; s < cuts.size() && cuts.size() > 1;) {
    if (detail::distinct_tokens(records, cuts[s]) >= 2) {
      ++s;
      continue;
    }
    const std::size_t into = s + 1 < cuts.size() ? s + 1 : s - 1;
    auto& dst = cuts[into];
    if (into > s) {
      dst.insert(dst.begin(), cuts[s].begin(), cuts[s].end());
    } else {
      dst.insert(dst.end(), cuts[s].begin(), cuts[s].end());
    }
    cuts.erase(cuts.begin() + static_cast<std::ptrdiff_t>(s));
    if (into < s) s = into;
  }
  res.n_strata = cuts.size();

  if (cuts.size() == 1 && detail::distinct_tokens(records, cuts[0]) < 2) {
    res.testable = false;
    CIStratum st;
    st.n_records = cuts[0].size();
    st.freq_min = records[cuts[0].front()].frequency;
    st.freq_max = records[cuts[0].back()].frequency;
    res.strata.push_back(std::move(st));
    return res;
  }

  std::vector<detail::Pooled> pooled;
  std::size_t total_n = 0;
  for (std::size_t s = 0; s < cuts.size(); ++s) {
    CIStratum st;
    st.n_records = cuts[s].size();
    st.freq_min = records[cuts[s].front()].frequency;
    st.freq_max = records[cuts[s].back()].frequency;
    const auto groups = detail::token_groups(records, cuts[s], st.token_levels);
    for (const auto& g : groups) st.group_sizes.push_back(g.size());
    const std::uint64_t stratum_seed = cuts.size() == 1 ? seed : mix_seed(seed, s);
    st.jt = jonckheere_terpstra(groups, Alternative::decreasing, mode, stratum_seed, opts);
    res.statistic += st.jt.statistic;
    res.mean_h0 += st.jt.mean_h0;
    res.variance_h0 += st.jt.variance_h0;
    pooled.push_back(detail::pool(groups));
    total_n += st.n_records;
    res.strata.push_back(std::move(st));
  }

  if (cuts.size() == 1) {
    const auto& jt = res.strata.front().jt;
    res.z = jt.z;
    res.combined_p = jt.p_one_sided;
    res.method = jt.method;
    res.permutations = jt.permutations;
    return res;
  }

  res.z = res.variance_h0 > 0 ? (res.statistic - res.mean_h0) / std::sqrt(res.variance_h0) : 0.0;
  res.method = TestMethod::normal_approx;
  res.combined_p = res.variance_h0 > 0 ? detail::normal_cdf(res.z) : 1.0;
  if (!detail::use_exact(mode, total_n, opts)) return res;

  res.method = TestMethod::exact_permutation;
  const auto twice_obs = static_cast<std::int64_t>(std::llround(2.0 * res.statistic));
  bool enumerable = true;
  for (const auto& p : pooled) enumerable = enumerable && detail::log_multinomial(p.sizes) <= std::log(opts.enumeration_limit);
  if (enumerable) {
    // Exact null of Σ 2J by convolving per-stratum distributions (as probabilities).
    std::map<std::int64_t, double> dist{{0, 1.0}};
    for (const auto& p : pooled) {
      const auto d = detail::enumerate_null(p);
      double total = 0;
      for (const auto& [v, c] : d) total += static_cast<double>(c);
      std::map<std::int64_t, double> next;
      for (const auto& [a, pa] : dist) {
        for (const auto& [b, cb] : d) next[a + b] += pa * static_cast<double>(cb) / total;
      }
      dist = std::move(next);
    }
    double lower = 0;
    for (const auto& [v, pr] : dist) {
      if (v <= twice_obs) lower += pr;
    }
    res.combined_p = std::clamp(lower, 0.0, 1.0);
  } else {
    Rng rng(mix_seed(seed, 0xC0FFEE));
    std::vector<std::vector<std::uint32_t>> labels;
    for (const auto& p : pooled) labels.push_back(p.labels);
    std::uint64_t lower = 0;
    for (std::uint64_t b = 0; b < opts.monte_carlo_permutations; ++b) {
      std::int64_t twice = 0;
      for (std::size_t s = 0; s < pooled.size(); ++s) {
        const std::size_t k = pooled[s].sizes.size();
        std::vector<std::int64_t> below(k), in_block(k);
        rng.shuffle(std::span<std::uint32_t>(labels[s]));
        twice += detail::twice_statistic(labels[s], pooled[s].block, k, below, in_block);
      }
      if (twice <= twice_obs) ++lower;
    }
    res.permutations = opts.monte_carlo_permutations;
    res.combined_p = static_cast<double>(lower + 1) / static_cast<double>(opts.monte_carlo_permutations + 1);
  }
  return res;
}

}  // namespace tokbias::stats
