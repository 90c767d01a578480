#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "fallacy/stats.hpp"
#include "oracles.hpp"

using namespace fallacy;
using namespace fallacy::stats;

namespace {

std::vector<double> draws(std::mt19937_64& gen, std::size_t n, double shift) {
  std::normal_distribution<double> d(shift, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = d(gen);
  return v;
}

}  // namespace

TEST(MannWhitney, StatisticCountsPairs) {
  const std::vector<double> a{1, 2, 2, 5}, b{2, 3};
  double u = 0;
  for (double x : a)
    for (double y : b) u += x > y ? 1.0 : (x == y ? 0.5 : 0.0);
  EXPECT_EQ(mann_whitney_statistic(a, b), u);
  EXPECT_EQ(mann_whitney_statistic(a, b) + mann_whitney_statistic(b, a), 8.0);
}

TEST(MannWhitney, NullCountsSumToBinomial) {
  for (std::size_t n1 = 1; n1 <= 9; ++n1)
    for (std::size_t n2 = 1; n2 <= 9; ++n2) {
      const auto c = mann_whitney_null_counts(n1, n2);
      const auto total = std::accumulate(c.begin(), c.end(), std::uint64_t{0});
      std::uint64_t binom = 1;
      for (std::size_t i = 1; i <= n1; ++i) binom = binom * (n2 + i) / i;
      EXPECT_EQ(total, binom);
      for (std::size_t u = 0; u < c.size(); ++u) EXPECT_EQ(c[u], c[c.size() - 1 - u]);
    }
}

TEST(MannWhitney, ExactMatchesEnumeration) {
  std::mt19937_64 gen(1);
  for (std::size_t n1 = 1; n1 <= 6; ++n1)
    for (std::size_t n2 = 1; n2 <= 6; ++n2) {
      const auto a = draws(gen, n1, 0.7), b = draws(gen, n2, 0.0);
      const auto r = mann_whitney_u(a, b, MwuMode::exact);
      EXPECT_EQ(r.method, MwuMethod::exact);
      EXPECT_NEAR(r.p_two_sided, oracle::mwu_enumeration_p(a, b), 1e-12);
    }
}

TEST(MannWhitney, KnownSmallCase) {
  // Complete separation with n1 = n2 = 3: P(U = 9) = 1 / 20, two-sided 0.1.
  const std::vector<double> a{4, 5, 6}, b{1, 2, 3};
  const auto r = mann_whitney_u(a, b);
  EXPECT_EQ(r.u, 9.0);
  EXPECT_DOUBLE_EQ(r.p_two_sided, 0.1);
}

TEST(MannWhitney, TiesUseCorrectedNormalApproximation) {
  const std::vector<double> a{1, 2, 3, 3, 3, 3}, b{1, 2, 2, 2, 4};
  const auto r = mann_whitney_u(a, b);
  EXPECT_EQ(r.method, MwuMethod::normal_approx);
  EXPECT_THROW(mann_whitney_u(a, b, MwuMode::exact), InvalidArgument);
  // Hand-computed: U = 19, mu = 15, tie groups (2,4,4,1) of n = 11.
  EXPECT_EQ(r.u, 19.0);
  const double tie = (8 - 2) + (64 - 4) + (64 - 4);
  const double var = 30.0 / 12.0 * (12.0 - tie / 110.0);
  const double z = 3.5 / std::sqrt(var);
  EXPECT_NEAR(r.p_two_sided, std::erfc(z / std::sqrt(2.0)), 1e-12);
  const std::vector<double> same{2, 2, 2};
  EXPECT_DOUBLE_EQ(mann_whitney_u(same, same).p_two_sided, 1.0);
  EXPECT_THROW(mann_whitney_u({}, same), InvalidArgument);
}

TEST(MannWhitney, LargeSamplesFallBackToNormal) {
  std::mt19937_64 gen(2);
  const auto a = draws(gen, 30, 0.0), b = draws(gen, 30, 0.0);
  EXPECT_EQ(mann_whitney_u(a, b).method, MwuMethod::normal_approx);
  EXPECT_EQ(mann_whitney_u(a, b, MwuMode::exact).method, MwuMethod::exact);
  const auto big = draws(gen, 40, 0.0);
  EXPECT_THROW(mann_whitney_u(big, a, MwuMode::exact), InvalidArgument);
}

TEST(FleissKappa, TextbookExample) {
  const std::vector<std::vector<std::int64_t>> r{{0, 0, 0, 0, 14}, {0, 2, 6, 4, 2}, {0, 0, 3, 5, 6}, {0, 3, 9, 2, 0},
                                                 {2, 2, 8, 1, 1},  {7, 7, 0, 0, 0}, {3, 2, 6, 3, 0}, {2, 5, 3, 2, 2},
                                                 {6, 5, 2, 1, 0},  {0, 2, 2, 3, 7}};
  const auto k = fleiss_kappa(r);
  EXPECT_NEAR(k.observed_agreement, 0.378, 5e-4);
  EXPECT_NEAR(k.expected_agreement, 0.213, 5e-4);
  EXPECT_NEAR(k.kappa, 0.210, 5e-4);
}

TEST(FleissKappa, UnanimityAndErrors) {
  const std::vector<std::vector<std::int64_t>> unanimous{{3, 0}, {0, 3}, {3, 0}, {0, 3}, {0, 3}};
  EXPECT_EQ(fleiss_kappa(unanimous).kappa, 1.0);
  EXPECT_THROW(fleiss_kappa({{3, 0}, {2, 0}}), InvalidArgument);
  EXPECT_THROW(fleiss_kappa({{3, 0}, {3, 0}}), InvalidArgument);
  EXPECT_THROW(fleiss_kappa({{1, 0}, {0, 1}}), InvalidArgument);
  EXPECT_THROW(fleiss_kappa({{3, 0}}), InvalidArgument);
  EXPECT_THROW(fleiss_kappa({{3, 0}, {-1, 4}}), InvalidArgument);
}

TEST(Metrics, ConfusionAndZeroDivision) {
  const std::vector<Label> truth{Label::adhominem, Label::adhominem, Label::none, Label::none, Label::none};
  const std::vector<Label> pred{Label::adhominem, Label::none, Label::none, Label::none, Label::adhominem};
  const auto m = classification_metrics(pred, truth);
  EXPECT_DOUBLE_EQ(m.accuracy, 0.6);
  EXPECT_DOUBLE_EQ(m.of(Label::adhominem).precision, 0.5);
  EXPECT_DOUBLE_EQ(m.of(Label::adhominem).recall, 0.5);
  EXPECT_DOUBLE_EQ(m.of(Label::none).f1, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.macro_f1, 0.5 * (0.5 + 2.0 / 3.0));

  const std::vector<Label> all_none(5, Label::none);
  const auto z = classification_metrics(all_none, truth);
  EXPECT_TRUE(z.of(Label::adhominem).zero_division);
  EXPECT_EQ(z.of(Label::adhominem).f1, 0.0);
  EXPECT_FALSE(z.of(Label::none).zero_division);
  EXPECT_THROW(classification_metrics(all_none, std::vector<Label>{}), InvalidArgument);
}

TEST(FractionBand, WilsonAndMonthlyBand) {
  const auto zero = wilson_interval(0, 10);
  EXPECT_EQ(zero.lo, 0.0);
  EXPECT_NEAR(zero.hi, 0.27754, 1e-5);
  const auto half = wilson_interval(50, 100);
  EXPECT_NEAR(half.lo, 0.40383, 1e-5);
  EXPECT_NEAR(half.hi, 0.59617, 1e-5);
  const std::vector<double> monthly{0.1, 0.2, 0.3};
  const auto b = fraction_band(6, 30, monthly);
  EXPECT_DOUBLE_EQ(b.point, 0.2);
  EXPECT_NEAR(b.monthly_std, std::sqrt(0.02 / 3.0), 1e-15);
  EXPECT_THROW(fraction_band(3, 2, monthly), InvalidArgument);
  EXPECT_THROW(fraction_band(0, 0, monthly), InvalidArgument);
  EXPECT_FALSE(fraction_band(1, 2, {}).monthly_std_band.has_value());
}

TEST(Descriptive, MeanAndSampleStd) {
  const std::vector<double> xs{2, 4, 4, 4, 5, 5, 7, 9};
  EXPECT_DOUBLE_EQ(mean(xs), 5.0);
  EXPECT_DOUBLE_EQ(sample_std(xs), std::sqrt(32.0 / 7.0));
  EXPECT_EQ(sample_std(std::vector<double>{1.0}), 0.0);
}
