#include <gtest/gtest.h>

#include "fundmatch/analytics.hpp"
#include "fundmatch/error.hpp"

using namespace fundmatch;

namespace {

Assignment asg(const std::string& r, const std::string& ind, const std::string& call, double pct = 100.0) {
  Assignment a;
  a.researcher_id = r;
  a.indicator_name = ind;
  a.call_id = call;
  a.percentile = pct;
  return a;
}

}  // namespace

TEST(Spearman, HandExamples) {
  std::vector<double> a{1, 2, 3}, b{3, 2, 1};
  EXPECT_EQ(spearman(a, a).value(), 1.0);
  EXPECT_EQ(spearman(a, b).value(), -1.0);
  std::vector<double> x{1, 2, 3, 4}, y{1, 3, 2, 4};
  EXPECT_NEAR(spearman(x, y).value(), 0.8, 1e-15);
  std::vector<double> flat{5, 5, 5};
  EXPECT_FALSE(spearman(a, flat).has_value());
  std::vector<double> single{1};
  EXPECT_FALSE(spearman(single, single).has_value());
  EXPECT_THROW(spearman(a, x), ValidationError);
}

TEST(Spearman, TiesAndMonotoneInvariance) {
  std::vector<double> v{10, 20, 20, 30};
  EXPECT_EQ(average_ranks(v), (std::vector<double>{1, 2.5, 2.5, 4}));
  std::vector<double> x{0.3, 0.1, 0.9, 0.4, 0.4, 0.7}, y{2, 1, 5, 3, 9, 4};
  std::vector<double> x2;
  for (double d : x) x2.push_back(d * d * d + 1);
  EXPECT_NEAR(spearman(x, y).value(), spearman(x2, y).value(), 1e-15);
}

TEST(Quantile, InclusiveInterpolation) {
  EXPECT_EQ(quantile({13}, 0.5), 13);
  EXPECT_EQ(quantile({20, 10, 13}, 0.5), 13);
  EXPECT_EQ(quantile({10, 13, 20}, 0.25), 11.5);
  EXPECT_EQ(quantile({10, 13, 20}, 0.75), 16.5);
}

TEST(Distribution, Examples) {
  std::vector<Assignment> as;
  auto give = [&](const std::string& r, int n) {
    for (int i = 0; i < n; ++i) as.push_back(asg(r, "A", "C" + std::to_string(i)));
  };
  give("R1", 10);
  give("R2", 13);
  give("R3", 20);
  auto d = distribution(as, "A");
  EXPECT_EQ(d.researchers, 3u);
  EXPECT_EQ(d.median, 13);
  EXPECT_EQ(d.q1, 11.5);
  EXPECT_EQ(d.q3, 16.5);
  std::size_t total = 0;
  for (auto [calls, count] : d.histogram) total += count;
  EXPECT_EQ(total, 3u);
  auto empty = distribution(as, "B");
  EXPECT_EQ(empty.researchers, 0u);
  EXPECT_TRUE(empty.histogram.empty());
}

TEST(Summary, CombinedCountsUniquePairs) {
  std::vector<Assignment> as{asg("R1", "A", "C1"), asg("R1", "A", "C2"), asg("R1", "A", "C3"),
                             asg("R1", "B", "C3"), asg("R1", "B", "C4"), asg("R1", "B", "C5")};
  auto s = summary(as, {"A", "B"}, 10);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[0].avg_calls_per_researcher, 3.0);
  EXPECT_EQ(s[2].indicator_name, kCombinedRow);
  EXPECT_EQ(s[2].avg_calls_per_researcher, 5.0);
  EXPECT_EQ(s[2].researchers_assigned, 1u);
  EXPECT_FALSE(s[2].unique_researchers.has_value());
  EXPECT_EQ(s[0].unique_researchers.value(), 0u);

  auto empty = summary({}, {"A", "B"}, 10);
  ASSERT_EQ(empty.size(), 3u);
  for (const auto& row : empty) {
    EXPECT_EQ(row.researchers_assigned, 0u);
    EXPECT_EQ(row.avg_calls_per_researcher, 0.0);
  }
}

TEST(Summary, NoExclusiveAssignments) {
  // B's researchers are all also assigned under A: B adds nobody exclusive.
  std::vector<Assignment> as{asg("R1", "A", "C1"), asg("R2", "A", "C1"), asg("R3", "A", "C2"),
                             asg("R1", "B", "C2"), asg("R2", "B", "C2")};
  auto s = summary(as, {"A", "B"}, 2);
  EXPECT_EQ(s[0].unique_researchers.value(), 1u);
  EXPECT_EQ(s[1].unique_researchers.value(), 0u);
  EXPECT_EQ(s[0].avg_researchers_per_call, 1.5);
}

TEST(Overlap, HandExampleAndIdentity) {
  std::vector<Assignment> as{asg("r1", "row", "c1", 99), asg("r1", "row", "c2"), asg("r2", "row", "c1", 97),
                             asg("r2", "row", "c2"), asg("r1", "col", "c1", 96), asg("r2", "col", "c1", 98)};
  auto cells = overlap_matrix(as, {"row", "col"});
  ASSERT_EQ(cells.size(), 2u);
  EXPECT_EQ(cells[0].row_indicator, "row");
  EXPECT_EQ(cells[0].overlap_pct, 50.0);
  EXPECT_EQ(cells[1].overlap_pct, 100.0);
  EXPECT_EQ(cells[0].overlap_pct * cells[0].row_pairs, cells[1].overlap_pct * cells[1].row_pairs);
  EXPECT_EQ(cells[0].spearman_rho.value(), -1.0);

  auto same = overlap_matrix(std::vector<Assignment>{asg("r", "A", "c"), asg("r", "B", "c")}, {"A", "B"});
  EXPECT_EQ(same[0].overlap_pct, 100.0);
  EXPECT_EQ(same[1].overlap_pct, 100.0);
  auto disjoint = overlap_matrix(std::vector<Assignment>{asg("r", "A", "c"), asg("s", "B", "c")}, {"A", "B"});
  EXPECT_EQ(disjoint[0].overlap_pct, 0.0);
  EXPECT_FALSE(disjoint[0].spearman_rho.has_value());
}

TEST(Analytics, JsonFieldNames) {
  std::vector<Assignment> as{asg("r1", "A", "c1"), asg("r1", "B", "c1")};
  auto j = to_json(analyze(as, {"A", "B"}, 1));
  for (const char* k : {"summary", "overlap", "distributions"}) EXPECT_TRUE(j.contains(k));
  for (const char* k : {"indicator_name", "researchers_assigned", "unique_researchers", "avg_calls_per_researcher",
                        "avg_researchers_per_call"})
    EXPECT_TRUE(j["summary"][0].contains(k)) << k;
  for (const char* k : {"row_indicator", "col_indicator", "overlap_pct", "spearman_rho"})
    EXPECT_TRUE(j["overlap"][0].contains(k)) << k;
  for (const char* k : {"indicator_name", "median", "q1", "q3", "histogram"})
    EXPECT_TRUE(j["distributions"][0].contains(k)) << k;
}
