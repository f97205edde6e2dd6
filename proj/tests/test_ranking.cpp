#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fundmatch/error.hpp"
#include "fundmatch/ranking.hpp"
#include "helpers.hpp"
#include "reference.hpp"

using namespace fundmatch;

namespace {

std::vector<ScoreRow> group_of(const std::vector<double>& z, const std::string& ind = "I", const std::string& call = "C") {
  std::vector<ScoreRow> rows;
  for (std::size_t i = 0; i < z.size(); ++i) {
    ScoreRow r;
    char id[16];
    std::snprintf(id, sizeof id, "R%05zu", i);
    r.researcher_id = id;
    r.indicator = ind;
    r.call_id = call;
    r.z = z[i];
    rows.push_back(r);
  }
  return rows;
}

std::vector<double> distinct(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = static_cast<double>(i) * 0.001 - 1.0;
  std::shuffle(z.begin(), z.end(), rng);
  return z;
}

const PercentileEntry& nth_highest(const std::vector<PercentileEntry>& e, int rank) {
  for (const auto& x : e)
    if (x.rank == rank) return x;
  throw std::logic_error("rank not present");
}

}  // namespace

TEST(Percentiles, PublishedPopulations) {
  struct Case {
    std::size_t n;
    int rank;
    const char* want;
  };
  for (auto c : {Case{2540, 2, "99.96"}, Case{2004, 2, "99.95"}, Case{1883, 2, "99.95"}, Case{1432, 1, "100.00"}}) {
    auto entries = percentiles(group_of(distinct(c.n, static_cast<unsigned>(c.n))));
    const auto& e = nth_highest(entries, c.rank);
    EXPECT_EQ(format_percentile(e.percentile), c.want) << c.n;
    EXPECT_EQ(e.rank, c.rank);
  }
}

TEST(Percentiles, AllEqualAndTies) {
  auto e = percentiles(group_of({0.5, 0.5, 0.5}));
  for (const auto& x : e) {
    EXPECT_EQ(x.percentile, 100.0);
    EXPECT_EQ(x.rank, 1);
  }
  e = percentiles(group_of({0.1, 0.9, 0.5, 0.9}));
  ASSERT_EQ(e.size(), 4u);
  EXPECT_EQ(e[0].rank, 1);
  EXPECT_EQ(e[1].rank, 1);
  EXPECT_EQ(e[0].percentile, 100.0);
  EXPECT_EQ(e[2].rank, 3);
  EXPECT_EQ(e[2].percentile, 50.0);
  EXPECT_EQ(e[3].rank, 4);
  EXPECT_EQ(e[3].percentile, 25.0);
  EXPECT_EQ(percentiles(group_of({-3.0}))[0].percentile, 100.0);
}

TEST(Percentiles, MatchBruteForceWithTies) {
  std::mt19937_64 rng(5);
  for (int round = 0; round < 50; ++round) {
    std::vector<double> z(1 + rng() % 60);
    for (auto& x : z) x = static_cast<double>(rng() % 7) / 3.0;
    auto want = reference::percentiles(z);
    auto rows = group_of(z);
    auto got = percentiles(rows);
    for (const auto& e : got) {
      const std::size_t i = std::stoul(e.researcher_id.substr(1));
      EXPECT_EQ(e.percentile, want[i].percentile);
      EXPECT_EQ(e.rank, want[i].rank);
    }
    // Permutation of input leaves output unchanged.
    std::shuffle(rows.begin(), rows.end(), rng);
    EXPECT_EQ(percentiles(rows), got);
    double lo = 101;
    for (const auto& e : got) lo = std::min(lo, e.percentile);
    EXPECT_GE(lo, 100.0 / static_cast<double>(z.size()) - 1e-12);
  }
}

TEST(Assign, HundredDistinctScores) {
  auto entries = percentiles(group_of(distinct(100, 1)));
  auto a = assign(entries);
  ASSERT_EQ(a.size(), 6u);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].percentile, 100.0 - static_cast<double>(i));
  EXPECT_EQ(assign(entries, 100.0).size(), 1u);
  EXPECT_EQ(assign(percentiles(group_of({0.2, 0.2, 0.1})), 100.0).size(), 2u);
  EXPECT_EQ(assign(percentiles(group_of({0.7}))).size(), 1u);
}

TEST(Assign, CountFormulaForDistinctScores) {
  // With distinct scores the top N - ceil(c*N/100) + 1 entries qualify.
  for (std::size_t n : {1u, 7u, 19u, 20u, 21u, 100u, 333u, 1432u, 2540u})
    for (double c : {50.0, 90.0, 95.0, 99.0}) {
      auto a = assign(percentiles(group_of(distinct(n, 3))), c);
      const auto need = static_cast<std::size_t>(std::ceil(c * static_cast<double>(n) / 100.0 - 1e-9));
      EXPECT_EQ(a.size(), n - std::max<std::size_t>(need, 1) + 1) << n << " " << c;
    }
}

TEST(Assign, MonotoneTransformInvariance) {
  auto z = distinct(250, 9);
  for (std::size_t i = 0; i < z.size(); i += 7) z[i] = z[0];  // some ties
  auto base = percentiles(group_of(z));
  std::vector<double> t;
  for (double x : z) t.push_back(std::exp(3 * x) + 5);
  auto moved = percentiles(group_of(t));
  ASSERT_EQ(base.size(), moved.size());
  for (std::size_t i = 0; i < base.size(); ++i) {
    EXPECT_EQ(base[i].researcher_id, moved[i].researcher_id);
    EXPECT_EQ(base[i].rank, moved[i].rank);
    EXPECT_EQ(base[i].percentile, moved[i].percentile);
  }
  EXPECT_EQ(assign(base).size(), assign(moved).size());
}

namespace {

RankingBook small_book(double cutoff = 95.0) {
  std::vector<ScoreRow> rows;
  for (const char* ind : {"A", "B"})
    for (const char* call : {"C1", "C2"}) {
      auto g = group_of(distinct(40, static_cast<unsigned>(ind[0] + call[1])), ind, call);
      rows.insert(rows.end(), g.begin(), g.end());
    }
  std::set<std::string> researchers;
  for (const auto& r : rows) researchers.insert(r.researcher_id);
  researchers.insert("IDLE");
  return RankingBook(rows, cutoff, {"A", "B"}, researchers, {"C1", "C2", "C3"});
}

}  // namespace

TEST(RankingBook, Lookups) {
  auto book = small_book();
  // 40 distinct: percentiles >= 95 -> top 3 per group.
  EXPECT_EQ(book.assignments().size(), 12u);
  for (const auto& a : book.assignments()) {
    auto recs = book.recommend_for_researcher(a.researcher_id);
    ASSERT_EQ(recs.size(), 2u);
    bool found = false;
    for (const auto& block : recs) {
      for (std::size_t i = 1; i < block.calls.size(); ++i)
        EXPECT_GE(block.calls[i - 1].percentile, block.calls[i].percentile);
      for (const auto& c : block.calls) found |= block.indicator == a.indicator_name && c.call_id == a.call_id;
    }
    EXPECT_TRUE(found);
  }
  auto idle = book.recommend_for_researcher("IDLE");
  ASSERT_EQ(idle.size(), 2u);
  EXPECT_TRUE(idle[0].calls.empty());
  EXPECT_THROW(book.recommend_for_researcher("NOBODY"), NotFoundError);

  auto all = book.candidates_for_call("C1", "A", 0.0);
  EXPECT_EQ(all.size(), 40u);
  EXPECT_EQ(all.front().rank, 1);
  EXPECT_EQ(all.front().percentile, 100.0);
  EXPECT_EQ(book.candidates_for_call("C1", "A", 95.0).size(), 3u);
  EXPECT_TRUE(book.candidates_for_call("C3", "A", 0.0).empty());
  EXPECT_THROW(book.candidates_for_call("C9", "A", 0.0), NotFoundError);
  EXPECT_THROW(book.candidates_for_call("C1", "Z", 0.0), NotFoundError);
}

TEST(RankingBook, LowerCutoffAssignsMore) {
  EXPECT_GT(small_book(90.0).assignments().size(), small_book(95.0).assignments().size());
}

TEST(RankingBook, ManyDistinctCandidates) {
  auto rows = group_of(distinct(2000, 77), "A", "C1");
  std::set<std::string> rs;
  for (const auto& r : rows) rs.insert(r.researcher_id);
  RankingBook book(rows, 95.0, {"A"}, rs, {"C1"});
  EXPECT_EQ(book.candidates_for_call("C1", "A", 95.0).size(), 101u);
}

TEST(AssignmentsCsv, RoundTrip) {
  testutil::TempDir tmp;
  auto book = small_book();
  write_assignments_csv(tmp / "a.csv", book.assignments());
  auto back = read_assignments_csv(tmp / "a.csv");
  ASSERT_EQ(back.size(), book.assignments().size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    const auto& x = book.assignments()[i];
    EXPECT_EQ(back[i].researcher_id, x.researcher_id);
    EXPECT_EQ(back[i].call_id, x.call_id);
    EXPECT_EQ(back[i].indicator_name, x.indicator_name);
    EXPECT_EQ(back[i].z, x.z);
    EXPECT_EQ(back[i].percentile, x.percentile);
    EXPECT_EQ(back[i].rank, x.rank);
  }
  testutil::write_file(tmp / "bad.csv", "indicator,call_id,researcher_id,z,percentile,rank\nA,C1,R1,x,1,1\n");
  EXPECT_THROW(read_assignments_csv(tmp / "bad.csv"), ValidationError);
  EXPECT_THROW(read_assignments_csv(tmp / "missing.csv"), IoError);
}

TEST(FormatPercentile, TwoDecimals) {
  EXPECT_EQ(format_percentile(100.0 * 2539 / 2540), "99.96");
  EXPECT_EQ(format_percentile(100.0), "100.00");
}
