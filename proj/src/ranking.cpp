#include "fundmatch/ranking.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "fundmatch/csv.hpp"
#include "fundmatch/error.hpp"

namespace fundmatch {

std::vector<PercentileEntry> percentiles(std::span<const ScoreRow> group) {
  std::vector<std::size_t> order(group.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (group[x].z != group[y].z) return group[x].z > group[y].z;
    return group[x].researcher_id < group[y].researcher_id;
  });
  const std::size_t n = group.size();
  std::vector<PercentileEntry> out;
  out.reserve(n);
  std::size_t block_start = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = group[order[i]];
    if (i > 0 && row.z != group[order[i - 1]].z) block_start = i;
    const std::size_t at_or_below = n - block_start;
    out.push_back({row.researcher_id, row.indicator, row.call_id, row.z,
                   100.0 * static_cast<double>(at_or_below) / static_cast<double>(n),
                   static_cast<int>(block_start + 1), at_or_below, n});
  }
  return out;
}

std::vector<Assignment> assign(std::span<const PercentileEntry> entries, double cutoff) {
  std::vector<Assignment> out;
  for (const auto& e : entries)
    if (meets_cutoff(e, cutoff)) out.push_back(e);
  return out;
}

RankingBook::RankingBook(std::span<const ScoreRow> scores, double cutoff, std::vector<std::string> indicators,
                         std::set<std::string> researchers, std::set<std::string> calls)
    : cutoff_(cutoff), indicators_(std::move(indicators)), researchers_(std::move(researchers)),
      calls_(std::move(calls)) {
  // Group boundaries over the canonical (indicator, call_id) ordering.
  std::vector<ScoreRow> sorted(scores.begin(), scores.end());
  sort_canonical(sorted);
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j].indicator == sorted[i].indicator && sorted[j].call_id == sorted[i].call_id)
      ++j;
    ranges.emplace_back(i, j);
    i = j;
  }
  std::vector<std::vector<PercentileEntry>> per_group(ranges.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t g = 0; g < static_cast<std::ptrdiff_t>(ranges.size()); ++g) {
    const auto [first, last] = ranges[static_cast<std::size_t>(g)];
    per_group[static_cast<std::size_t>(g)] =
        percentiles(std::span<const ScoreRow>(sorted.data() + first, last - first));
  }
  for (auto& group : per_group) {
    const std::size_t first = entries_.size();
    entries_.insert(entries_.end(), group.begin(), group.end());
    if (!group.empty())
      groups_[{group.front().indicator_name, group.front().call_id}] = {first, entries_.size()};
  }
  assignments_ = assign(entries_, cutoff_);
  for (std::size_t i = 0; i < assignments_.size(); ++i) by_researcher_[assignments_[i].researcher_id].push_back(i);
}

std::vector<IndicatorRecommendations> RankingBook::recommend_for_researcher(std::string_view researcher_id) const {
  if (!has_researcher(researcher_id)) throw NotFoundError("unknown researcher '" + std::string(researcher_id) + "'");
  std::vector<IndicatorRecommendations> out;
  for (const auto& ind : indicators_) out.push_back({ind, {}});
  auto it = by_researcher_.find(researcher_id);
  if (it == by_researcher_.end()) return out;
  for (auto i : it->second) {
    const auto& a = assignments_[i];
    for (auto& block : out)
      if (block.indicator == a.indicator_name) block.calls.push_back({a.call_id, a.rank, a.percentile});
  }
  for (auto& block : out)
    std::stable_sort(block.calls.begin(), block.calls.end(), [](const Recommendation& x, const Recommendation& y) {
      if (x.percentile != y.percentile) return x.percentile > y.percentile;
      return x.call_id < y.call_id;
    });
  return out;
}

std::vector<PercentileEntry> RankingBook::candidates_for_call(std::string_view call_id, std::string_view indicator,
                                                              double min_percentile) const {
  if (!has_call(call_id)) throw NotFoundError("unknown call '" + std::string(call_id) + "'");
  if (std::find(indicators_.begin(), indicators_.end(), indicator) == indicators_.end())
    throw NotFoundError("unknown indicator '" + std::string(indicator) + "'");
  std::vector<PercentileEntry> out;
  auto it = groups_.find({std::string(indicator), std::string(call_id)});
  if (it == groups_.end()) return out;
  for (std::size_t i = it->second.first; i < it->second.second; ++i)
    if (meets_cutoff(entries_[i], min_percentile)) out.push_back(entries_[i]);
  return out;
}

std::string format_percentile(double percentile) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", percentile);
  return buf;
}

namespace {

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

void write_assignments_csv(const std::filesystem::path& path, std::span<const Assignment> assignments) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  csv::write_row(out, {"indicator", "call_id", "researcher_id", "z", "percentile", "rank"});
  for (const auto& a : assignments)
    csv::write_row(out, {a.indicator_name, a.call_id, a.researcher_id, format_double(a.z),
                         format_double(a.percentile), std::to_string(a.rank)});
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<Assignment> read_assignments_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  csv::Row row;
  std::vector<Assignment> out;
  if (!csv::read_row(in, row)) return out;
  std::size_t line = 1;
  while (csv::read_row(in, row)) {
    ++line;
    if (row.size() != 6) throw ValidationError(path.string() + ":" + std::to_string(line) + ": expected 6 columns");
    Assignment a;
    a.indicator_name = row[0];
    a.call_id = row[1];
    a.researcher_id = row[2];
    try {
      a.z = std::stod(row[3]);
      a.percentile = std::stod(row[4]);
      a.rank = std::stoi(row[5]);
    } catch (const std::exception&) {
      throw ValidationError(path.string() + ":" + std::to_string(line) + ": malformed number");
    }
    out.push_back(std::move(a));
  }
  return out;
}

void write_recommendations_csv(const std::filesystem::path& path, const RankingBook& book) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  csv::write_row(out, {"researcher_id", "indicator", "call_id", "rank", "percentile"});
  std::set<std::string> assigned;
  for (const auto& a : book.assignments()) assigned.insert(a.researcher_id);
  for (const auto& rid : assigned)
    for (const auto& block : book.recommend_for_researcher(rid))
      for (const auto& rec : block.calls)
        csv::write_row(out, {rid, block.indicator, rec.call_id, std::to_string(rec.rank),
                             format_percentile(rec.percentile)});
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace fundmatch
