#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "fundmatch/analytics.hpp"
#include "fundmatch/config.hpp"
#include "fundmatch/corpus.hpp"
#include "fundmatch/embedding.hpp"
#include "fundmatch/ranking.hpp"
#include "fundmatch/scoring.hpp"

namespace fundmatch {

// File names inside a pipeline workspace directory.
namespace files {
inline constexpr const char* publications = "publications.jsonl";
inline constexpr const char* calls = "calls.jsonl";
inline constexpr const char* masters = "masters.jsonl";
inline constexpr const char* author_profiles = "author_profiles.jsonl";
inline constexpr const char* rejects = "rejects.jsonl";
inline constexpr const char* researchers = "researchers.jsonl";
inline constexpr const char* unmatched = "unmatched.jsonl";
inline constexpr const char* vectors = "vectors.jsonl";
inline constexpr const char* sets = "sets.jsonl";
inline constexpr const char* scores = "scores.jsonl";
inline constexpr const char* assignments = "assignments.csv";
inline constexpr const char* recommendations = "recommendations.csv";
inline constexpr const char* analytics = "analytics.json";
inline constexpr const char* report = "report.md";
}  // namespace files

/// Everything the post-embedding stages read. Immutable once loaded.
struct Corpus {
  std::vector<PublicationRecord> publications;
  std::vector<CallRecord> calls;
  std::vector<ResearcherProfile> researchers;
  VectorStore vectors;
};

/// Reads publications, calls, researchers and vectors from a workspace.
Corpus load_workspace(const std::filesystem::path& dir, int reference_year);
std::string corpus_digest(const Corpus& corpus);

/// Provider named by the config. `workspace` resolves relative paths.
std::unique_ptr<EmbeddingProvider> make_provider(const PipelineConfig& config, const std::filesystem::path& workspace);

/// Embeds every publication and call; projects out the baseline unless
/// provider_options.debias is "false".
VectorStore embed_corpus(EmbeddingProvider& provider, const std::vector<PublicationRecord>& pubs,
                         const std::vector<CallRecord>& calls, bool debias_vectors = true);

struct RunResult {
  std::vector<ResearcherProfile> population;
  std::vector<PublicationSet> sets;
  std::vector<ScoreRow> scores;
  RankingBook ranking;
  Analytics analytics;
};

std::vector<std::string> indicator_names(const PipelineConfig& config);
std::vector<std::string> call_ids(const std::vector<CallRecord>& calls);

/// Population filter, publication sets, scoring, ranking and analytics.
RunResult run_pipeline(const Corpus& corpus, const PipelineConfig& config, KernelChoice kernel = KernelChoice::omp);

struct RunSnapshot {
  std::string snapshot_id;
  std::string config_digest;
  std::string corpus_digest;
  std::string created_at;
  PipelineConfig config;
  std::shared_ptr<const Corpus> corpus;
  RunResult result;
};

/// The snapshot id is derived from both digests, so identical inputs give
/// the same id.
std::shared_ptr<const RunSnapshot> make_snapshot(std::shared_ptr<const Corpus> corpus, const PipelineConfig& config,
                                                 std::string corpus_digest_hint = {});

}  // namespace fundmatch
