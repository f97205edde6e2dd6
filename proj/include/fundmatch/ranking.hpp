#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fundmatch/scoring.hpp"

namespace fundmatch {

/// Institution-relative standing of one researcher for one (indicator, call).
/// percentile = 100 * at_or_below / population; rank = 1 + count strictly above.
struct PercentileEntry {
  std::string researcher_id;
  std::string indicator_name;
  std::string call_id;
  double z = 0.0;
  double percentile = 0.0;
  int rank = 1;
  std::size_t at_or_below = 0;
  std::size_t population = 0;

  bool operator==(const PercentileEntry&) const = default;
};

using Assignment = PercentileEntry;

/// Exact form of percentile >= cutoff, free of division rounding.
inline bool meets_cutoff(const PercentileEntry& e, double cutoff) {
  return 100.0 * static_cast<double>(e.at_or_below) >= cutoff * static_cast<double>(e.population);
}

/// Scores of one (indicator, call). Output ordered by rank, then researcher_id.
std::vector<PercentileEntry> percentiles(std::span<const ScoreRow> group);

std::vector<Assignment> assign(std::span<const PercentileEntry> entries, double cutoff = 95.0);

struct Recommendation {
  std::string call_id;
  int rank = 0;
  double percentile = 0.0;
};

struct IndicatorRecommendations {
  std::string indicator;
  std::vector<Recommendation> calls;  // percentile descending, call_id
};

/// All percentile entries and assignments of a run, indexed for lookups.
class RankingBook {
 public:
  RankingBook() = default;
  /// `indicators` fixes the reporting order; `researchers` and `calls` are the
  /// ids lookups accept.
  RankingBook(std::span<const ScoreRow> scores, double cutoff, std::vector<std::string> indicators,
              std::set<std::string> researchers, std::set<std::string> calls);

  double cutoff() const { return cutoff_; }
  const std::vector<std::string>& indicators() const { return indicators_; }
  const std::vector<PercentileEntry>& entries() const { return entries_; }
  /// Ordered by indicator, call_id, rank, researcher_id.
  const std::vector<Assignment>& assignments() const { return assignments_; }

  /// Assigned calls per indicator (every configured indicator present).
  /// Throws NotFoundError for an unknown researcher.
  std::vector<IndicatorRecommendations> recommend_for_researcher(std::string_view researcher_id) const;

  /// Throws NotFoundError for an unknown call or indicator.
  std::vector<PercentileEntry> candidates_for_call(std::string_view call_id, std::string_view indicator,
                                                   double min_percentile) const;

  bool has_researcher(std::string_view id) const { return researchers_.count(std::string(id)) > 0; }
  bool has_call(std::string_view id) const { return calls_.count(std::string(id)) > 0; }

 private:
  double cutoff_ = 95.0;
  std::vector<std::string> indicators_;
  std::set<std::string> researchers_;
  std::set<std::string> calls_;
  std::vector<PercentileEntry> entries_;
  std::vector<Assignment> assignments_;
  std::map<std::pair<std::string, std::string>, std::pair<std::size_t, std::size_t>> groups_;  // (ind, call) -> range
  std::map<std::string, std::vector<std::size_t>, std::less<>> by_researcher_;                // assignment indices
};

/// Percentile rounded to two decimals for reports.
std::string format_percentile(double percentile);

void write_assignments_csv(const std::filesystem::path& path, std::span<const Assignment> assignments);
std::vector<Assignment> read_assignments_csv(const std::filesystem::path& path);
void write_recommendations_csv(const std::filesystem::path& path, const RankingBook& book);

}  // namespace fundmatch
