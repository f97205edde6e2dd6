#include "fundmatch/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

namespace fundmatch {

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string render_report(const PipelineConfig& config, const RankingBook& ranking, const Analytics& analytics,
                          const ReportOptions& options) {
  std::ostringstream md;
  md << "# fundmatch report\n\n";
  md << "- reference year: " << config.reference_year << "\n";
  md << "- percentile cutoff: " << fixed(config.percentile_cutoff, 2) << "\n";
  md << "- top fraction denominator: " << config.top_fraction_denominator << "\n";
  md << "- normalization: " << to_string(config.normalization_scope) << "\n";
  md << "- assignments: " << ranking.assignments().size() << "\n\n";

  md << "## Indicators\n\n| indicator | authors | window (years) | min publications |\n|---|---|---|---|\n";
  for (const auto& ind : config.indicators)
    md << "| " << ind.name << " | " << to_string(ind.author_filter) << " | " << ind.window_years << " | "
       << ind.min_pubs << " |\n";

  md << "\n## Assignment summary\n\n"
     << "| indicator | researchers | unique researchers | calls per researcher | researchers per call |\n"
     << "|---|---|---|---|---|\n";
  for (const auto& s : analytics.summary)
    md << "| " << s.indicator_name << " | " << s.researchers_assigned << " | "
       << (s.unique_researchers ? std::to_string(*s.unique_researchers) : std::string("-")) << " | "
       << fixed(s.avg_calls_per_researcher, 1) << " | " << fixed(s.avg_researchers_per_call, 1) << " |\n";

  md << "\n## Indicator overlap\n\nShare of the row indicator's (researcher, call) assignments that the column "
        "indicator also makes, with Spearman's rho over the shared pairs.\n\n| |";
  const auto& names = ranking.indicators();
  for (const auto& n : names) md << ' ' << n << " |";
  md << "\n|---|";
  for (std::size_t i = 0; i < names.size(); ++i) md << "---|";
  md << '\n';
  std::map<std::pair<std::string, std::string>, const OverlapCell*> cells;
  for (const auto& c : analytics.overlap) cells[{c.row_indicator, c.col_indicator}] = &c;
  for (const auto& row : names) {
    md << "| " << row << " |";
    for (const auto& col : names) {
      auto it = cells.find({row, col});
      if (it == cells.end()) {
        md << " - |";
        continue;
      }
      md << ' ' << fixed(it->second->overlap_pct, 1) << "%";
      if (it->second->spearman_rho) md << " (rho " << fixed(*it->second->spearman_rho, 2) << ")";
      md << " |";
    }
    md << '\n';
  }

  md << "\n## Calls per assigned researcher\n\n| indicator | researchers | q1 | median | q3 |\n|---|---|---|---|---|\n";
  for (const auto& d : analytics.distributions)
    md << "| " << d.indicator_name << " | " << d.researchers << " | " << fixed(d.q1, 1) << " | " << fixed(d.median, 1)
       << " | " << fixed(d.q3, 1) << " |\n";

  // Researchers with the most assignments, ties by id.
  std::map<std::string, std::size_t> counts;
  for (const auto& a : ranking.assignments()) ++counts[a.researcher_id];
  std::vector<std::pair<std::string, std::size_t>> order(counts.begin(), counts.end());
  std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  if (order.size() > options.sample_researchers) order.resize(options.sample_researchers);

  md << "\n## Sample recommendations\n";
  if (order.empty()) md << "\nNo assignments.\n";
  for (const auto& [rid, n] : order) {
    md << "\n### " << rid << " (" << n << " assignments)\n\n| indicator | call | rank | percentile |\n|---|---|---|---|\n";
    for (const auto& block : ranking.recommend_for_researcher(rid)) {
      if (block.calls.empty()) {
        md << "| " << block.indicator << " | - | - | - |\n";
        continue;
      }
      for (std::size_t i = 0; i < block.calls.size() && i < options.calls_per_indicator; ++i)
        md << "| " << block.indicator << " | " << block.calls[i].call_id << " | " << block.calls[i].rank << " | "
           << format_percentile(block.calls[i].percentile) << " |\n";
    }
  }
  return md.str();
}

}  // namespace fundmatch
