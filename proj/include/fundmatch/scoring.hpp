#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fundmatch/embedding.hpp"
#include "fundmatch/profiling.hpp"

namespace fundmatch {

enum class AggregationRule { full_mean, top_third_mean };
enum class NormalizationScope { per_indicator_across_calls, across_indicators, pre_aggregation };
enum class KernelChoice { omp, serial };

std::string_view to_string(AggregationRule rule);
AggregationRule parse_rule(std::string_view name);
std::string_view to_string(NormalizationScope scope);
NormalizationScope parse_scope(std::string_view name);

struct PairScore {
  std::string pub_id;
  std::string call_id;
  double sim = 0.0;
};

struct TopK {
  AggregationRule rule;
  std::size_t k;
  bool operator==(const TopK&) const = default;
};

struct NormalizedScore {
  std::string researcher_id;
  std::string indicator_name;
  std::string call_id;
  double z = 0.0;
  double mu = 0.0;
  double sigma = 0.0;
};

/// One row of the score book: aggregate and normalized score for a
/// (researcher, indicator, call).
struct ScoreRow {
  std::string researcher_id;
  std::string indicator;
  std::string call_id;
  double a = 0.0;
  double z = 0.0;
  double mu = 0.0;
  double sigma = 0.0;
  std::size_t n_set = 0;
  std::size_t k_used = 0;
  AggregationRule rule = AggregationRule::full_mean;

  bool operator==(const ScoreRow&) const = default;
};

/// Below this the standard deviation is treated as zero and z is 0.
inline constexpr double kSigmaFloor = 1e-12;

/// Throws ValidationError on dimension mismatch; 0 for a zero vector.
double cosine(const EmbeddingVector& p, const EmbeddingVector& c);

/// k = ceil(n/denominator); when k <= 2 the full mean is used instead.
TopK top_k_for(std::size_t n_set, int denominator = 3);

/// full_mean: arithmetic mean. top_third_mean: mean of the k largest values.
double aggregate(std::span<const double> pair_sims, AggregationRule rule, std::size_t k);

/// Population z-scores of one researcher's aggregates across calls.
std::map<std::string, NormalizedScore> normalize(const std::string& researcher_id, const std::string& indicator_name,
                                                 const std::map<std::string, double>& scores);

std::vector<PairScore> pair_scores(const PublicationSet& set, const VectorStore& store,
                                   std::span<const std::string> call_ids);

struct ScoringOptions {
  int top_fraction_denominator = 3;
  NormalizationScope scope = NormalizationScope::per_indicator_across_calls;
  KernelChoice kernel = KernelChoice::omp;
};

/// Scores every eligible set against every call. Output in canonical order:
/// indicator, call_id, z descending, researcher_id.
std::vector<ScoreRow> score_matrix(std::span<const PublicationSet> sets, const VectorStore& store,
                                   std::span<const std::string> call_ids, const ScoringOptions& options = {});

void sort_canonical(std::vector<ScoreRow>& rows);

nlohmann::json to_json(const ScoreRow& row);
ScoreRow score_from_json(const nlohmann::json& j);
void write_scores(const std::filesystem::path& path, const std::vector<ScoreRow>& rows);
std::vector<ScoreRow> read_scores(const std::filesystem::path& path);

}  // namespace fundmatch
