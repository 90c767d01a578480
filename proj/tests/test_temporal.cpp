#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fallacy/temporal.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace fallacy;
using namespace testing_support;

namespace {

std::vector<double> random_walk(std::mt19937_64& gen, std::size_t t, std::size_t dim) {
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> x(t * dim);
  for (auto& v : x) v = noise(gen);
  return x;
}

std::vector<double> planted(std::mt19937_64& gen, std::size_t t, std::vector<std::size_t> cps, double shift, double sigma) {
  std::normal_distribution<double> noise(0.0, sigma);
  std::vector<double> x(t);
  for (std::size_t i = 0; i < t; ++i) {
    const auto level = static_cast<double>(std::upper_bound(cps.begin(), cps.end(), i) - cps.begin());
    x[i] = level * shift + noise(gen);
  }
  return x;
}

// Comments spread over months, each by one of three users, with an AH flag encoded in the id.
Corpus monthly_corpus(std::vector<std::tuple<const char*, const char*, bool>> rows, std::set<std::string>& ah) {
  std::vector<CommentRecord> comments;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& [when, who, flag] = rows[i];
    const std::string id = "c" + std::to_string(i);
    comments.push_back(comment(id, "p", std::nullopt, who, "x", when));
    if (flag) ah.insert(id);
  }
  return Corpus::build({post("p", "x", "2014-12-01T00:00:00Z"), post("q", "y", "2014-12-01T00:00:00Z")}, comments);
}

}  // namespace

TEST(Temporal, MonthlySeriesMatchesRecount) {
  std::set<std::string> ah;
  const auto corpus = monthly_corpus({{"2015-01-03T00:00:00Z", "a", true},
                                      {"2015-01-04T00:00:00Z", "a", false},
                                      {"2015-01-05T00:00:00Z", "b", false},
                                      {"2015-01-05T00:00:00Z", "b", false},
                                      {"2015-01-06T00:00:00Z", "b", true},
                                      {"2015-03-01T00:00:00Z", "c", true}},
                                     ah);
  const auto s = monthly_series(annotate(corpus, ah), "x");
  ASSERT_EQ(s.months.size(), 3u);
  const auto& jan = s.months[0];
  EXPECT_EQ(jan.total_comments, 5u);
  EXPECT_EQ(jan.ah_comments, 2u);
  EXPECT_DOUBLE_EQ(jan.ah_fraction, 0.4);
  EXPECT_EQ(jan.active_users, 2u);
  EXPECT_EQ(jan.ah_users, 1u);  // a: 1 of 2 counts (>= half); b: 1 of 3 does not
  EXPECT_DOUBLE_EQ(jan.ah_user_fraction, 0.5);
  EXPECT_FALSE(s.months[1].active());
  EXPECT_EQ(s.months[1].ah_fraction, 0.0);
  EXPECT_EQ(s.months[2].ah_users, 1u);
  EXPECT_EQ(month_label(s.first_month), "2015-01");
}

TEST(Temporal, MovingAverageMatchesDirectMeans) {
  std::mt19937_64 gen(1);
  const auto x = random_walk(gen, 40, 1);
  for (std::size_t w : {1u, 3u, 12u, 50u}) {
    const auto ma = moving_average(x, w);
    for (std::size_t i = 0; i < x.size(); ++i) {
      double sum = 0;
      std::size_t n = 0;
      for (std::size_t j = 0; j <= i; ++j)
        if (i - j < w) sum += x[j], ++n;
      EXPECT_NEAR(ma[i], sum / static_cast<double>(n), 1e-12);
    }
  }
  EXPECT_THROW(moving_average(x, 0), InvalidArgument);
}

TEST(Temporal, SignalMatrixStandardizesAndDropsConstants) {
  MonthlySeries a{"a", 100, {}}, b{"b", 98, {}};
  for (int i = 0; i < 10; ++i) a.months.push_back({static_cast<std::size_t>(i * i), 0, 0, 0.0, 3, 0, 0.0});
  for (int i = 0; i < 10; ++i) b.months.push_back({static_cast<std::size_t>(10 - i), 0, 0, 0.0, 1, 0, 0.0});
  const std::vector<MonthlySeries> series{a, b};
  const std::vector<Quantity> q{Quantity::comments, Quantity::active_users};
  const auto m = build_signal_matrix(series, q);
  EXPECT_EQ(m.first_month, 100);
  EXPECT_EQ(m.rows, 8u);
  EXPECT_EQ(m.cols(), 2u);
  EXPECT_EQ(m.dropped.size(), 2u);
  EXPECT_FALSE(m.warnings.empty());
  for (std::size_t d = 0; d < m.cols(); ++d) {
    double mean = 0, var = 0;
    for (std::size_t t = 0; t < m.rows; ++t) mean += m.at(t, d);
    mean /= static_cast<double>(m.rows);
    for (std::size_t t = 0; t < m.rows; ++t) var += (m.at(t, d) - mean) * (m.at(t, d) - mean);
    EXPECT_NEAR(mean, 0.0, 1e-12);
    EXPECT_NEAR(var / static_cast<double>(m.rows), 1.0, 1e-12);
  }
  MonthlySeries far{"far", 500, a.months};
  const std::vector<MonthlySeries> disjoint{a, far};
  EXPECT_THROW(build_signal_matrix(disjoint, q), DataError);
}

TEST(Temporal, KernelCostMatchesDirectDefinition) {
  std::mt19937_64 gen(2);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t dim = 1 + trial % 3, t = 25;
    const auto x = random_walk(gen, t, dim);
    const KernelCost cost(x, dim);
    for (std::size_t a = 0; a < t; ++a)
      for (std::size_t b = a + 1; b <= t; ++b) {
        const double c = cost(a, b);
        EXPECT_GE(c, 0.0);
        EXPECT_NEAR(c, oracle::kernel_cost(x, dim, cost.gamma(), a, b), 1e-10);
      }
    EXPECT_EQ(cost(3, 4), 0.0);
  }
}

TEST(Temporal, MedianHeuristic) {
  const std::vector<double> x{0.0, 1.0, 3.0};  // squared distances 1, 4, 9
  EXPECT_DOUBLE_EQ(KernelCost(x, 1).gamma(), 1.0 / 4.0);
  const std::vector<double> y{0.0, 1.0, 3.0, 4.0};  // 1,9,16,4,9,1 -> sorted 1,1,4,9,9,16
  EXPECT_DOUBLE_EQ(KernelCost(y, 1).gamma(), 1.0 / 6.5);
  const std::vector<double> flat(5, 2.0);
  EXPECT_DOUBLE_EQ(KernelCost(flat, 1).gamma(), 1.0);
  EXPECT_THROW(KernelCost(x, 1, -1.0), InvalidArgument);
}

TEST(Temporal, StepExample) {
  const std::vector<double> x{0, 0, 0, 0, 10, 10, 10, 10};
  const auto seg = detect_changepoints(KernelCost(x, 1), 1, 2);
  EXPECT_EQ(seg.change_points, (std::vector<std::size_t>{4}));
  EXPECT_NEAR(seg.total_cost, 0.0, 1e-12);
  EXPECT_EQ(seg.segment_costs.size(), 2u);
}

TEST(Temporal, ConstantSignalPicksEarliestBoundaries) {
  const std::vector<double> x(30, 1.5);
  const auto seg = detect_changepoints(KernelCost(x, 1), 2, 6);
  EXPECT_EQ(seg.change_points, (std::vector<std::size_t>{6, 12}));
  EXPECT_EQ(seg.total_cost, 0.0);
}

TEST(Temporal, DynamicProgramMatchesExhaustiveSearch) {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t t = 6 + static_cast<std::size_t>(trial % 9), dim = 1 + trial % 2;
    const std::size_t k = 1 + trial % 3, min_size = 1 + trial % 2;
    if (t < (k + 1) * min_size) continue;
    const auto x = random_walk(gen, t, dim);
    const KernelCost cost(x, dim);
    const auto seg = detect_changepoints(cost, k, min_size);
    const auto ref = oracle::exhaustive_segmentation(cost, k, min_size);
    EXPECT_EQ(seg.optimal_cost, ref.cost);
    EXPECT_EQ(seg.change_points, ref.boundaries);
    EXPECT_NEAR(seg.total_cost, seg.optimal_cost, 1e-9);
  }
}

TEST(Temporal, InvariantUnderShiftAndSegmentsRespectMinSize) {
  std::mt19937_64 gen(4);
  for (int trial = 0; trial < 20; ++trial) {
    auto x = planted(gen, 60, {20, 40}, 3.0, 0.5);
    const auto seg = detect_changepoints(KernelCost(x, 1), 2, 6);
    for (auto& v : x) v += 1000.0;
    EXPECT_EQ(detect_changepoints(KernelCost(x, 1), 2, 6).change_points, seg.change_points);
    std::size_t prev = 0;
    for (auto cp : seg.change_points) {
      EXPECT_GE(cp - prev, 6u);
      prev = cp;
    }
    EXPECT_GE(60 - prev, 6u);
  }
}

TEST(Temporal, RecoversPlantedRegimes) {
  std::mt19937_64 gen(5);
  int hits = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = planted(gen, 120, {40, 80}, 3.0, 0.1);
    const auto seg = detect_changepoints(KernelCost(x, 1), 2, 6);
    hits += std::abs(static_cast<long>(seg.change_points[0]) - 40) <= 1 &&
            std::abs(static_cast<long>(seg.change_points[1]) - 80) <= 1;
  }
  EXPECT_EQ(hits, 20);
}

TEST(Temporal, DetectionErrors) {
  const std::vector<double> x(11, 0.0);
  EXPECT_THROW(detect_changepoints(KernelCost(x, 1), 0, 1), InvalidArgument);
  EXPECT_THROW(detect_changepoints(KernelCost(x, 1), 1, 0), InvalidArgument);
  try {
    detect_changepoints(KernelCost(x, 1), 1, 6);
    FAIL();
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("needs 12"), std::string::npos);
  }
  EXPECT_NO_THROW(detect_changepoints(KernelCost(x, 1), 1, 5));
}

TEST(Temporal, PartitionCoversEveryCommentOnce) {
  std::set<std::string> ah;
  std::vector<std::tuple<const char*, const char*, bool>> rows;
  const char* months[] = {"2015-01-10T00:00:00Z", "2015-02-10T00:00:00Z", "2015-03-10T00:00:00Z",
                          "2015-04-10T00:00:00Z", "2015-05-10T00:00:00Z", "2015-06-10T00:00:00Z"};
  for (int i = 0; i < 30; ++i) rows.emplace_back(months[(i * 7) % 6], "a", false);
  const auto corpus = monthly_corpus(rows, ah);
  const std::vector<std::size_t> cps{2, 5};
  const auto parts = partition_corpus(corpus, cps);
  ASSERT_EQ(parts.size(), 3u);
  std::vector<std::size_t> all;
  for (const auto& p : parts) {
    for (const auto i : p.comments) {
      EXPECT_GE(corpus.month_of(i), p.first);
      EXPECT_LT(corpus.month_of(i), p.last);
    }
    all.insert(all.end(), p.comments.begin(), p.comments.end());
  }
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> expected(corpus.comments().size());
  std::iota(expected.begin(), expected.end(), 0u);
  EXPECT_EQ(all, expected);
  EXPECT_EQ(parts.back().last, 6u);
  const std::vector<std::size_t> bad{0}, unordered{3, 3}, beyond{6};
  EXPECT_THROW(partition_corpus(corpus, bad), InvalidArgument);
  EXPECT_THROW(partition_corpus(corpus, unordered), InvalidArgument);
  EXPECT_THROW(partition_corpus(corpus, beyond), InvalidArgument);
}
