#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "fundmatch/ranking.hpp"

namespace fundmatch {

inline constexpr std::string_view kCombinedRow = "combined";

struct IndicatorSummary {
  std::string indicator_name;
  std::size_t researchers_assigned = 0;
  /// Assigned under this indicator and no other; absent on the combined row.
  std::optional<std::size_t> unique_researchers;
  double avg_calls_per_researcher = 0.0;
  double avg_researchers_per_call = 0.0;
};

struct OverlapCell {
  std::string row_indicator;
  std::string col_indicator;
  double overlap_pct = 0.0;  // share of row pairs also present in col
  std::optional<double> spearman_rho;
  std::size_t row_pairs = 0;
  std::size_t shared_pairs = 0;
};

struct DistributionStats {
  std::string indicator_name;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  std::vector<std::pair<std::size_t, std::size_t>> histogram;  // (calls, researchers)
  std::size_t researchers = 0;
};

/// One row per indicator (in the given order) plus the combined row, which
/// counts unique (researcher, call) pairs across indicators.
/// `n_calls` is the number of calls in the run.
std::vector<IndicatorSummary> summary(std::span<const Assignment> assignments,
                                      const std::vector<std::string>& indicators, std::size_t n_calls);

/// Off-diagonal cells, row-major over `indicators`. rho is computed over the
/// pairs both indicators assigned, correlating their percentiles.
std::vector<OverlapCell> overlap_matrix(std::span<const Assignment> assignments,
                                        const std::vector<std::string>& indicators);

/// Pearson correlation of average ranks. Empty when either side has no rank
/// variance. Throws ValidationError on length mismatch.
std::optional<double> spearman(std::span<const double> x, std::span<const double> y);

/// Average ranks (1-based), ties share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values);

/// Inclusive linear interpolation (position p * (n - 1) over sorted values).
double quantile(std::vector<double> values, double p);

/// Calls per assigned researcher under one indicator.
DistributionStats distribution(std::span<const Assignment> assignments, const std::string& indicator);

struct Analytics {
  std::vector<IndicatorSummary> summary;
  std::vector<OverlapCell> overlap;
  std::vector<DistributionStats> distributions;
};

Analytics analyze(std::span<const Assignment> assignments, const std::vector<std::string>& indicators,
                  std::size_t n_calls);

nlohmann::json to_json(const IndicatorSummary& s);
nlohmann::json to_json(const OverlapCell& c);
nlohmann::json to_json(const DistributionStats& d);
nlohmann::json to_json(const Analytics& a);

}  // namespace fundmatch
