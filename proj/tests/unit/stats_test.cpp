#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "tokbias/rng.hpp"
#include "tokbias/stats.hpp"

using namespace tokbias;
using namespace tokbias::stats;

namespace {

using Groups = std::vector<std::vector<double>>;

JTResult jt(const Groups& g, Alternative alt, TestMode mode = TestMode::auto_select, std::uint64_t seed = 0) {
  return jonckheere_terpstra(g, alt, mode, seed);
}

Groups random_groups(Rng& rng, const std::vector<std::size_t>& sizes, bool ties) {
  Groups g;
  for (const auto n : sizes) {
    std::vector<double> v;
    for (std::size_t i = 0; i < n; ++i) v.push_back(ties ? static_cast<double>(rng.below(4)) : rng.normal());
    g.push_back(v);
  }
  return g;
}

}  // namespace

TEST(Pearson, PerfectAndHandComputed) {
  const std::vector<double> x{1, 2, 3};
  EXPECT_DOUBLE_EQ(pearson(x, std::vector<double>{2, 4, 6}).r, 1.0);
  EXPECT_DOUBLE_EQ(pearson(x, std::vector<double>{6, 4, 2}).r, -1.0);
  // r = 8 / 10; t = 0.8 * sqrt(3 / 0.36); p from a 50-digit t-CDF evaluation.
  const auto r = pearson(std::vector<double>{1, 2, 3, 4, 5}, std::vector<double>{2, 1, 4, 3, 5});
  EXPECT_NEAR(r.r, 0.8, 1e-15);
  EXPECT_NEAR(r.p_two_sided, 0.10408803866182786, 1e-12);
  EXPECT_EQ(r.n, 5u);
}

TEST(Pearson, RejectsDegenerateInput) {
  EXPECT_THROW(pearson(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}), ArgumentError);
  EXPECT_THROW(pearson(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2}), ArgumentError);
  EXPECT_THROW(pearson(std::vector<double>{1, 2}, std::vector<double>{1, 2}), ArgumentError);
}

TEST(Pearson, SymmetryAndAffineInvariance) {
  Rng rng(2);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> x, y, ax, nx;
    for (int i = 0; i < 12; ++i) {
      x.push_back(rng.normal());
      y.push_back(x.back() * 0.3 + rng.normal());
      ax.push_back(2.5 * x.back() + 7);
      nx.push_back(-0.5 * x.back() + 1);
    }
    const double r = pearson(x, y).r;
    EXPECT_NEAR(pearson(y, x).r, r, 1e-12);
    EXPECT_NEAR(pearson(ax, y).r, r, 1e-12);
    EXPECT_NEAR(pearson(nx, y).r, -r, 1e-12);
    const auto res = pearson(x, y);
    EXPECT_GE(res.p_two_sided, 0.0);
    EXPECT_LE(res.p_two_sided, 1.0);
  }
}

TEST(JT, WorkedStatistics) {
  const auto up = jt({{1, 2}, {3, 4}, {5, 6}}, Alternative::increasing);
  EXPECT_EQ(up.statistic, 12.0);
  EXPECT_EQ(up.max_statistic, 12.0);
  EXPECT_EQ(up.mean_h0, 6.0);
  EXPECT_EQ(jt({{5, 6}, {3, 4}, {1, 2}}, Alternative::increasing).statistic, 0.0);
  EXPECT_EQ(jt({{1, 2}, {1, 2}}, Alternative::two_sided).statistic, 2.0);
}

TEST(JT, ExactMatchesEnumerationOracle) {
  Rng rng(23);
  for (const auto& sizes : {std::vector<std::size_t>{2, 2, 2}, {3, 3, 3}, {2, 3, 4}, {4, 1}}) {
    for (int t = 0; t < 10; ++t) {
      for (const bool ties : {false, true}) {
        const auto g = random_groups(rng, sizes, ties);
        const auto o = oracle::jt_enumerate(g);
        const auto inc = jt(g, Alternative::increasing, TestMode::exact);
        const auto dec = jt(g, Alternative::decreasing, TestMode::exact);
        ASSERT_EQ(inc.method, TestMethod::exact_permutation);
        EXPECT_EQ(inc.statistic, oracle::jt_statistic(g));
        EXPECT_NEAR(inc.p_one_sided, o.p_upper, 1e-12);
        EXPECT_NEAR(dec.p_one_sided, o.p_lower, 1e-12);
        EXPECT_NEAR(inc.mean_h0, o.mean, 1e-9);
        EXPECT_NEAR(inc.variance_h0, o.variance, 1e-9) << (ties ? "ties" : "no ties");
        EXPECT_NEAR(inc.p_two_sided, o.p_both, 1e-12);
      }
    }
  }
}

TEST(JT, MonteCarloIsCloseToEnumeration) {
  Rng rng(29);
  const auto g = random_groups(rng, {4, 4, 4, 4, 4, 4}, false);
  JTOptions mc;
  mc.enumeration_limit = 1;
  const auto a = jonckheere_terpstra(g, Alternative::increasing, TestMode::exact, 1, mc);
  const auto b = jonckheere_terpstra(g, Alternative::increasing, TestMode::exact, 1, mc);
  EXPECT_EQ(a.permutations, 20000u);
  EXPECT_EQ(a.p_one_sided, b.p_one_sided);
  const auto normal = jonckheere_terpstra(g, Alternative::increasing, TestMode::normal);
  EXPECT_NEAR(a.p_one_sided, normal.p_one_sided, 0.03);
}

TEST(JT, RankInvariance) {
  Rng rng(31);
  for (int t = 0; t < 20; ++t) {
    const auto g = random_groups(rng, {3, 4, 3}, t % 2 == 0);
    Groups h = g;
    for (auto& grp : h) {
      for (auto& v : grp) v = std::exp(v) * 3 + 1;
    }
    for (const auto mode : {TestMode::exact, TestMode::normal}) {
      const auto a = jt(g, Alternative::decreasing, mode);
      const auto b = jt(h, Alternative::decreasing, mode);
      EXPECT_EQ(a.statistic, b.statistic);
      EXPECT_DOUBLE_EQ(a.p_one_sided, b.p_one_sided);
      EXPECT_DOUBLE_EQ(a.z, b.z);
    }
  }
}

TEST(JT, ExactAndNormalAgreeAtFifteen) {
  Rng rng(37);
  int close = 0;
  for (int t = 0; t < 100; ++t) {
    const auto g = random_groups(rng, {5, 5, 5}, false);
    const auto e = jt(g, Alternative::increasing, TestMode::exact);
    const auto n = jt(g, Alternative::increasing, TestMode::normal);
    close += std::abs(e.p_one_sided - n.p_one_sided) < 0.05;
  }
  EXPECT_GE(close, 95);
}

TEST(JT, StatisticBounds) {
  Rng rng(41);
  for (int t = 0; t < 200; ++t) {
    std::vector<std::size_t> sizes;
    const auto k = 2 + rng.below(4);
    for (std::uint64_t i = 0; i < k; ++i) sizes.push_back(1 + rng.below(6));
    const auto g = random_groups(rng, sizes, true);
    const auto r = jt(g, Alternative::two_sided, TestMode::normal);
    double max = 0;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      for (std::size_t j = i + 1; j < sizes.size(); ++j) max += static_cast<double>(sizes[i] * sizes[j]);
    }
    ASSERT_GE(r.statistic, 0.0);
    ASSERT_LE(r.statistic, max);
    ASSERT_EQ(r.statistic, oracle::jt_statistic(g));
  }
}

TEST(JT, AutoModeSwitchesAtTwenty) {
  Rng rng(43);
  EXPECT_EQ(jt(random_groups(rng, {10, 10}, false), Alternative::increasing).method, TestMethod::exact_permutation);
  EXPECT_EQ(jt(random_groups(rng, {10, 11}, false), Alternative::increasing).method, TestMethod::normal_approx);
}

TEST(JT, RejectsBadGroups) {
  EXPECT_THROW(jt({{1, 2}}, Alternative::increasing), ArgumentError);
  EXPECT_THROW(jt({{1, 2}, {}}, Alternative::increasing), ArgumentError);
}

namespace {

std::vector<CIRecord> confounded(Rng& rng, std::size_t n, double effect) {
  std::vector<CIRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double logf = rng.uniform(0.0, 10.0);
    const auto tok = static_cast<std::size_t>(std::clamp(std::round(4.0 - 0.25 * logf + rng.normal(0, 0.7)), 1.0, 5.0));
    const double f1 =
        std::clamp(0.2 + 0.05 * logf + rng.normal(0, 0.15) - effect * static_cast<double>(tok - 1), 0.0, 1.0);
    out.push_back({f1, tok, static_cast<std::uint64_t>(std::round(std::exp(logf))) + 1});
  }
  return out;
}

}  // namespace

TEST(CI, SingleStratumEqualsPlainTest) {
  Rng rng(47);
  const auto recs = confounded(rng, 30, 0.0);
  Groups groups;
  std::map<std::size_t, std::vector<double>> by;
  for (const auto& r : recs) by[r.n_tokens].push_back(r.f1);
  for (auto& [k, v] : by) groups.push_back(v);
  for (const auto mode : {TestMode::exact, TestMode::normal, TestMode::auto_select}) {
    const auto ci = conditional_independence(recs, 1, mode, 99);
    const auto plain = jonckheere_terpstra(groups, Alternative::decreasing, mode, 99);
    EXPECT_EQ(ci.statistic, plain.statistic);
    EXPECT_EQ(ci.combined_p, plain.p_one_sided);
    EXPECT_EQ(ci.n_strata, 1u);
  }
}

TEST(CI, StrictWithinStratumDecreaseIsDetected) {
  std::vector<CIRecord> recs;
  for (std::uint64_t s = 0; s < 3; ++s) {
    for (std::size_t i = 0; i < 12; ++i) {
      const std::size_t tok = 1 + i % 4;
      recs.push_back({0.9 - 0.2 * static_cast<double>(tok) + 0.001 * static_cast<double>(i), tok, 100 * s + i});
    }
  }
  for (const auto mode : {TestMode::exact, TestMode::normal}) {
    const auto r = conditional_independence(recs, 3, mode, 1);
    EXPECT_EQ(r.n_strata, 3u);
    EXPECT_LT(r.combined_p, 0.01);
  }
}

TEST(CI, ConfoundedFixtureIsNotRejected) {
  Rng rng(2024);
  const auto recs = confounded(rng, 60, 0.0);
  std::vector<double> f1, tok;
  for (const auto& r : recs) f1.push_back(r.f1), tok.push_back(static_cast<double>(r.n_tokens));
  EXPECT_LT(pearson(tok, f1).r, 0.0);  // marginal association exists
  const auto r = conditional_independence(recs, 5, TestMode::normal, 1);
  EXPECT_GT(r.combined_p, 0.05);
  const auto mc = conditional_independence(recs, 5, TestMode::exact, 1);
  EXPECT_GT(mc.combined_p, 0.05);
}

TEST(CI, MergesSingleLevelStrata) {
  std::vector<CIRecord> recs;
  for (std::uint64_t i = 0; i < 6; ++i) recs.push_back({0.5, 2, i});             // one token level
  for (std::uint64_t i = 0; i < 6; ++i) recs.push_back({0.1 * i, 1 + i % 2, 10 + i});
  const auto r = conditional_independence(recs, 2, TestMode::normal);
  EXPECT_EQ(r.n_strata_requested, 2u);
  EXPECT_EQ(r.n_strata, 1u);
  EXPECT_EQ(r.strata[0].n_records, 12u);
}

TEST(CI, ReproducibleAndValidated) {
  Rng rng(53);
  const auto recs = confounded(rng, 45, 0.1);
  JTOptions mc;
  mc.enumeration_limit = 10;
  const auto a = conditional_independence(recs, 3, TestMode::exact, 7, mc);
  const auto b = conditional_independence(recs, 3, TestMode::exact, 7, mc);
  EXPECT_EQ(a.combined_p, b.combined_p);
  EXPECT_EQ(a.permutations, 20000u);
  EXPECT_GE(a.combined_p, 0.0);
  EXPECT_LE(a.combined_p, 1.0);
  EXPECT_THROW(conditional_independence(std::span(recs).first(8), 3), ArgumentError);
  EXPECT_THROW(conditional_independence(recs, 0), ArgumentError);
}

TEST(CI, ExactConvolutionMatchesBruteForce) {
  // Two tiny strata; brute force over the product of label arrangements.
  const std::vector<CIRecord> recs{{0.9, 1, 1}, {0.5, 2, 2}, {0.7, 1, 3}, {0.2, 2, 4},
                                   {0.8, 1, 10}, {0.6, 2, 11}, {0.4, 2, 12}, {0.3, 3, 13}};
  const auto r = conditional_independence(recs, 2, TestMode::exact);
  ASSERT_EQ(r.n_strata, 2u);
  const Groups g1{{0.9, 0.7}, {0.5, 0.2}};
  const Groups g2{{0.8}, {0.6, 0.4}, {0.3}};
  const double obs = oracle::jt_statistic(g1) + oracle::jt_statistic(g2);
  const auto all = [](const Groups& g) {
    std::vector<double> pooled;
    std::vector<std::size_t> labels;
    for (std::size_t k = 0; k < g.size(); ++k) {
      for (const double v : g[k]) pooled.push_back(v), labels.push_back(k);
    }
    std::vector<double> js;
    do {
      Groups h(g.size());
      for (std::size_t i = 0; i < pooled.size(); ++i) h[labels[i]].push_back(pooled[i]);
      js.push_back(oracle::jt_statistic(h));
    } while (std::next_permutation(labels.begin(), labels.end()));
    return js;
  };
  const auto a = all(g1), b = all(g2);
  double lower = 0;
  for (const double x : a) {
    for (const double y : b) lower += x + y <= obs + 1e-9;
  }
  EXPECT_NEAR(r.combined_p, lower / static_cast<double>(a.size() * b.size()), 1e-12);
}
