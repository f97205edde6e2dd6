#pragma once

#include <string>

#include "fundmatch/analytics.hpp"
#include "fundmatch/config.hpp"
#include "fundmatch/ranking.hpp"

namespace fundmatch {

struct ReportOptions {
  std::size_t sample_researchers = 5;  // researchers shown in the recommendations section
  std::size_t calls_per_indicator = 2;
};

/// Markdown summary of a run. Deterministic for identical inputs.
std::string render_report(const PipelineConfig& config, const RankingBook& ranking, const Analytics& analytics,
                          const ReportOptions& options = {});

}  // namespace fundmatch
