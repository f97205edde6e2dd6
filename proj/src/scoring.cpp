#include "fundmatch/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>

#include "fundmatch/error.hpp"
#include "fundmatch/kernels.hpp"
#include "fundmatch/parallel.hpp"

namespace fundmatch {

using nlohmann::json;

std::string_view to_string(AggregationRule rule) {
  return rule == AggregationRule::full_mean ? "full_mean" : "top_third_mean";
}

AggregationRule parse_rule(std::string_view name) {
  if (name == "full_mean") return AggregationRule::full_mean;
  if (name == "top_third_mean") return AggregationRule::top_third_mean;
  throw ValidationError("unknown aggregation rule '" + std::string(name) + "'");
}

std::string_view to_string(NormalizationScope scope) {
  switch (scope) {
    case NormalizationScope::per_indicator_across_calls: return "per_indicator_across_calls";
    case NormalizationScope::across_indicators: return "across_indicators";
    case NormalizationScope::pre_aggregation: return "pre_aggregation";
  }
  return "";
}

NormalizationScope parse_scope(std::string_view name) {
  for (auto s : {NormalizationScope::per_indicator_across_calls, NormalizationScope::across_indicators,
                 NormalizationScope::pre_aggregation})
    if (name == to_string(s)) return s;
  throw ValidationError("unknown normalization_scope '" + std::string(name) + "'");
}

double cosine(const EmbeddingVector& p, const EmbeddingVector& c) {
  if (p.dim() != c.dim())
    throw ValidationError("cosine: dim mismatch between '" + p.doc_id + "' and '" + c.doc_id + "'");
  return kernels::cosine(p.components, c.components);
}

TopK top_k_for(std::size_t n_set, int denominator) {
  if (n_set == 0) throw ValidationError("top_k_for: empty publication set");
  if (denominator < 2) throw ValidationError("top_fraction_denominator must be >= 2");
  const auto d = static_cast<std::size_t>(denominator);
  const std::size_t k = (n_set + d - 1) / d;
  if (k <= 2) return {AggregationRule::full_mean, n_set};
  return {AggregationRule::top_third_mean, k};
}

double aggregate(std::span<const double> pair_sims, AggregationRule rule, std::size_t k) {
  if (pair_sims.empty()) throw ValidationError("aggregate: empty similarity list");
  if (rule == AggregationRule::full_mean) {
    double sum = 0.0;
    for (double s : pair_sims) sum += s;
    return sum / static_cast<double>(pair_sims.size());
  }
  if (k == 0 || k > pair_sims.size()) throw ValidationError("aggregate: k out of range");
  std::vector<double> sorted(pair_sims.begin(), pair_sims.end());
  std::partial_sort(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k), sorted.end(),
                    std::greater<>());
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum += sorted[i];
  return sum / static_cast<double>(k);
}

namespace {

struct Moments {
  double mu = 0.0;
  double sigma = 0.0;
};

// Two-pass population mean and standard deviation in iteration order.
template <typename Range, typename Get>
Moments moments(const Range& values, Get get) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& v : values) {
    sum += get(v);
    ++n;
  }
  if (n == 0) return {};
  const double mu = sum / static_cast<double>(n);
  double ss = 0.0;
  for (const auto& v : values) {
    const double d = get(v) - mu;
    ss += d * d;
  }
  return {mu, std::sqrt(ss / static_cast<double>(n))};
}

double zscore(double a, Moments m) { return m.sigma < kSigmaFloor ? 0.0 : (a - m.mu) / m.sigma; }

}  // namespace

std::map<std::string, NormalizedScore> normalize(const std::string& researcher_id, const std::string& indicator_name,
                                                 const std::map<std::string, double>& scores) {
  const auto m = moments(scores, [](const auto& kv) { return kv.second; });
  std::map<std::string, NormalizedScore> out;
  for (const auto& [call_id, a] : scores)
    out.emplace(call_id, NormalizedScore{researcher_id, indicator_name, call_id, zscore(a, m), m.mu, m.sigma});
  return out;
}

std::vector<PairScore> pair_scores(const PublicationSet& set, const VectorStore& store,
                                   std::span<const std::string> call_ids) {
  std::vector<PairScore> out;
  for (const auto& pub : set.pub_ids)
    for (const auto& call : call_ids)
      out.push_back({pub, call, kernels::cosine(store.at(pub), store.at(call))});
  return out;
}

std::vector<ScoreRow> score_matrix(std::span<const PublicationSet> sets, const VectorStore& store,
                                   std::span<const std::string> call_ids, const ScoringOptions& options) {
  std::vector<const PublicationSet*> eligible;
  for (const auto& s : sets)
    if (s.eligible && !s.pub_ids.empty()) eligible.push_back(&s);
  if (eligible.empty() || call_ids.empty()) return {};
  // Validates the denominator before any work is done.
  (void)top_k_for(1, options.top_fraction_denominator);

  std::vector<std::string> calls(call_ids.begin(), call_ids.end());
  std::sort(calls.begin(), calls.end());
  calls.erase(std::unique(calls.begin(), calls.end()), calls.end());

  std::vector<std::string> pubs;
  for (const auto* s : eligible) pubs.insert(pubs.end(), s->pub_ids.begin(), s->pub_ids.end());
  std::sort(pubs.begin(), pubs.end());
  pubs.erase(std::unique(pubs.begin(), pubs.end()), pubs.end());

  const std::size_t dim = store.dim();
  auto gather = [&](const std::vector<std::string>& ids) {
    std::vector<double> m(ids.size() * dim);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      auto r = store.at(ids[i]);
      std::copy(r.begin(), r.end(), m.begin() + static_cast<std::ptrdiff_t>(i * dim));
    }
    return m;
  };
  const auto pub_matrix = gather(pubs);
  const auto call_matrix = gather(calls);
  const std::size_t n_calls = calls.size();
  std::vector<double> sims(pubs.size() * n_calls);
  const kernels::MatrixView left{pub_matrix.data(), pubs.size(), dim};
  const kernels::MatrixView right{call_matrix.data(), n_calls, dim};
  if (options.kernel == KernelChoice::omp)
    kernels::cosine_matrix_omp(left, right, sims);
  else
    kernels::cosine_matrix_serial(left, right, sims);

  // rows[s * n_calls + c] for eligible set s; z filled in afterwards.
  std::vector<ScoreRow> rows(eligible.size() * n_calls);
  std::vector<Moments> pair_moments(eligible.size());
  parallel::FirstError error;
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t si = 0; si < static_cast<std::ptrdiff_t>(eligible.size()); ++si) {
    error.run([&] {
      const auto s = static_cast<std::size_t>(si);
      const auto& set = *eligible[s];
      // Fixed pub_id order so reductions do not depend on input order.
      std::vector<std::size_t> idx;
      idx.reserve(set.pub_ids.size());
      for (const auto& id : set.pub_ids)
        idx.push_back(static_cast<std::size_t>(std::lower_bound(pubs.begin(), pubs.end(), id) - pubs.begin()));
      std::sort(idx.begin(), idx.end());
      idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
      const auto topk = top_k_for(idx.size(), options.top_fraction_denominator);
      std::vector<double> column(idx.size());
      for (std::size_t c = 0; c < n_calls; ++c) {
        for (std::size_t i = 0; i < idx.size(); ++i) column[i] = sims[idx[i] * n_calls + c];
        auto& row = rows[s * n_calls + c];
        row.researcher_id = set.researcher_id;
        row.indicator = set.indicator_name;
        row.call_id = calls[c];
        row.a = aggregate(column, topk.rule, topk.k);
        row.n_set = idx.size();
        row.k_used = topk.k;
        row.rule = topk.rule;
      }
      if (options.scope == NormalizationScope::pre_aggregation) {
        std::vector<double> all;
        all.reserve(idx.size() * n_calls);
        for (auto i : idx)
          for (std::size_t c = 0; c < n_calls; ++c) all.push_back(sims[i * n_calls + c]);
        pair_moments[s] = moments(all, [](double v) { return v; });
      }
    });
  }
  error.rethrow();

  auto apply = [&](std::size_t first, std::size_t count, Moments m) {
    for (std::size_t i = first; i < first + count; ++i) {
      rows[i].mu = m.mu;
      rows[i].sigma = m.sigma;
      rows[i].z = zscore(rows[i].a, m);
    }
  };
  switch (options.scope) {
    case NormalizationScope::per_indicator_across_calls:
#pragma omp parallel for schedule(static)
      for (std::ptrdiff_t s = 0; s < static_cast<std::ptrdiff_t>(eligible.size()); ++s) {
        const auto first = static_cast<std::size_t>(s) * n_calls;
        const std::span<const ScoreRow> group(rows.data() + first, n_calls);
        apply(first, n_calls, moments(group, [](const ScoreRow& r) { return r.a; }));
      }
      break;
    case NormalizationScope::pre_aggregation:
      for (std::size_t s = 0; s < eligible.size(); ++s) apply(s * n_calls, n_calls, pair_moments[s]);
      break;
    case NormalizationScope::across_indicators: {
      // One distribution per researcher over every eligible indicator and
      // call, visited in (indicator, call_id) order.
      std::map<std::string, std::vector<std::size_t>> by_researcher;
      for (std::size_t s = 0; s < eligible.size(); ++s) by_researcher[eligible[s]->researcher_id].push_back(s);
      for (auto& [rid, set_idx] : by_researcher) {
        std::sort(set_idx.begin(), set_idx.end(), [&](std::size_t x, std::size_t y) {
          return eligible[x]->indicator_name < eligible[y]->indicator_name;
        });
        std::vector<double> values;
        for (auto s : set_idx)
          for (std::size_t c = 0; c < n_calls; ++c) values.push_back(rows[s * n_calls + c].a);
        const auto m = moments(values, [](double v) { return v; });
        for (auto s : set_idx) apply(s * n_calls, n_calls, m);
      }
      break;
    }
  }
  sort_canonical(rows);
  return rows;
}

void sort_canonical(std::vector<ScoreRow>& rows) {
  std::sort(rows.begin(), rows.end(), [](const ScoreRow& x, const ScoreRow& y) {
    if (x.indicator != y.indicator) return x.indicator < y.indicator;
    if (x.call_id != y.call_id) return x.call_id < y.call_id;
    if (x.z != y.z) return x.z > y.z;
    return x.researcher_id < y.researcher_id;
  });
}

json to_json(const ScoreRow& row) {
  return {{"researcher_id", row.researcher_id}, {"indicator", row.indicator}, {"call_id", row.call_id},
          {"a", row.a},         {"z", row.z},         {"n_set", row.n_set},
          {"k_used", row.k_used}, {"rule", to_string(row.rule)}};
}

ScoreRow score_from_json(const json& j) {
  ScoreRow row;
  row.researcher_id = j.at("researcher_id").get<std::string>();
  row.indicator = j.at("indicator").get<std::string>();
  row.call_id = j.at("call_id").get<std::string>();
  row.a = j.at("a").get<double>();
  row.z = j.at("z").get<double>();
  row.n_set = j.at("n_set").get<std::size_t>();
  row.k_used = j.at("k_used").get<std::size_t>();
  row.rule = parse_rule(j.at("rule").get<std::string>());
  return row;
}

void write_scores(const std::filesystem::path& path, const std::vector<ScoreRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& r : rows) out << to_json(r).dump() << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<ScoreRow> read_scores(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<ScoreRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      rows.push_back(score_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return rows;
}

}  // namespace fundmatch
