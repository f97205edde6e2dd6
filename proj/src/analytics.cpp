#include "fundmatch/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "fundmatch/error.hpp"

namespace fundmatch {

using nlohmann::json;

namespace {

using Pair = std::pair<std::string, std::string>;  // (researcher, call)

std::map<std::string, std::map<Pair, double>> pairs_by_indicator(std::span<const Assignment> assignments) {
  std::map<std::string, std::map<Pair, double>> out;
  for (const auto& a : assignments) out[a.indicator_name][{a.researcher_id, a.call_id}] = a.percentile;
  return out;
}

}  // namespace

std::vector<IndicatorSummary> summary(std::span<const Assignment> assignments,
                                      const std::vector<std::string>& indicators, std::size_t n_calls) {
  std::map<std::string, std::set<std::string>> researchers_by_indicator;
  std::map<std::string, std::size_t> count_by_indicator;
  std::map<std::string, std::set<std::string>> indicators_by_researcher;
  std::set<Pair> unique_pairs;
  for (const auto& a : assignments) {
    researchers_by_indicator[a.indicator_name].insert(a.researcher_id);
    ++count_by_indicator[a.indicator_name];
    indicators_by_researcher[a.researcher_id].insert(a.indicator_name);
    unique_pairs.insert({a.researcher_id, a.call_id});
  }
  auto ratio = [](std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  std::vector<IndicatorSummary> out;
  for (const auto& ind : indicators) {
    const auto& rs = researchers_by_indicator[ind];
    std::size_t exclusive = 0;
    for (const auto& r : rs)
      if (indicators_by_researcher[r].size() == 1) ++exclusive;
    const auto n = count_by_indicator[ind];
    out.push_back({ind, rs.size(), exclusive, ratio(n, rs.size()), ratio(n, n_calls)});
  }
  const auto total_researchers = indicators_by_researcher.size();
  out.push_back({std::string(kCombinedRow), total_researchers, std::nullopt,
                 ratio(unique_pairs.size(), total_researchers), ratio(unique_pairs.size(), n_calls)});
  return out;
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = avg;
    i = j;
  }
  return ranks;
}

std::optional<double> spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("spearman: length mismatch");
  if (x.size() < 2) return std::nullopt;
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(rx.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

std::vector<OverlapCell> overlap_matrix(std::span<const Assignment> assignments,
                                        const std::vector<std::string>& indicators) {
  auto pairs = pairs_by_indicator(assignments);
  std::vector<OverlapCell> cells;
  for (const auto& row : indicators) {
    for (const auto& col : indicators) {
      if (row == col) continue;
      const auto& rp = pairs[row];
      const auto& cp = pairs[col];
      std::vector<double> xs, ys;
      for (const auto& [pair, pct] : rp)
        if (auto it = cp.find(pair); it != cp.end()) {
          xs.push_back(pct);
          ys.push_back(it->second);
        }
      OverlapCell cell{row, col, 0.0, spearman(xs, ys), rp.size(), xs.size()};
      if (!rp.empty()) cell.overlap_pct = 100.0 * static_cast<double>(xs.size()) / static_cast<double>(rp.size());
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

DistributionStats distribution(std::span<const Assignment> assignments, const std::string& indicator) {
  std::map<std::string, std::size_t> per_researcher;
  for (const auto& a : assignments)
    if (a.indicator_name == indicator) ++per_researcher[a.researcher_id];
  DistributionStats d;
  d.indicator_name = indicator;
  d.researchers = per_researcher.size();
  if (per_researcher.empty()) return d;
  std::vector<double> counts;
  std::map<std::size_t, std::size_t> hist;
  for (const auto& [r, n] : per_researcher) {
    counts.push_back(static_cast<double>(n));
    ++hist[n];
  }
  d.median = quantile(counts, 0.5);
  d.q1 = quantile(counts, 0.25);
  d.q3 = quantile(counts, 0.75);
  for (std::size_t b = hist.begin()->first; b <= hist.rbegin()->first; ++b) {
    auto it = hist.find(b);
    d.histogram.emplace_back(b, it == hist.end() ? 0 : it->second);
  }
  return d;
}

Analytics analyze(std::span<const Assignment> assignments, const std::vector<std::string>& indicators,
                  std::size_t n_calls) {
  Analytics a;
  a.summary = summary(assignments, indicators, n_calls);
  a.overlap = overlap_matrix(assignments, indicators);
  for (const auto& ind : indicators) a.distributions.push_back(distribution(assignments, ind));
  return a;
}

json to_json(const IndicatorSummary& s) {
  return {{"indicator_name", s.indicator_name},
          {"researchers_assigned", s.researchers_assigned},
          {"unique_researchers", s.unique_researchers ? json(*s.unique_researchers) : json(nullptr)},
          {"avg_calls_per_researcher", s.avg_calls_per_researcher},
          {"avg_researchers_per_call", s.avg_researchers_per_call}};
}

json to_json(const OverlapCell& c) {
  return {{"row_indicator", c.row_indicator},
          {"col_indicator", c.col_indicator},
          {"overlap_pct", c.overlap_pct},
          {"spearman_rho", c.spearman_rho ? json(*c.spearman_rho) : json(nullptr)},
          {"row_pairs", c.row_pairs},
          {"shared_pairs", c.shared_pairs}};
}

json to_json(const DistributionStats& d) {
  json hist = json::array();
  for (const auto& [bucket, count] : d.histogram) hist.push_back({{"bucket", bucket}, {"count", count}});
  return {{"indicator_name", d.indicator_name}, {"median", d.median}, {"q1", d.q1}, {"q3", d.q3},
          {"histogram", hist}, {"researchers", d.researchers}};
}

json to_json(const Analytics& a) {
  json out{{"summary", json::array()}, {"overlap", json::array()}, {"distributions", json::array()}};
  for (const auto& s : a.summary) out["summary"].push_back(to_json(s));
  for (const auto& c : a.overlap) out["overlap"].push_back(to_json(c));
  for (const auto& d : a.distributions) out["distributions"].push_back(to_json(d));
  return out;
}

}  // namespace fundmatch
