#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fundmatch/config.hpp"
#include "fundmatch/scoring.hpp"

// The CLI stages. Each reads its inputs from a workspace directory and writes
// its outputs there, using the names in fundmatch::files.
namespace fundmatch::stages {

struct IngestInputs {
  std::filesystem::path publications;
  std::filesystem::path calls;
  std::filesystem::path masters;
  std::filesystem::path profiles;
  std::optional<std::filesystem::path> topics;
};

struct IngestReport {
  std::size_t publications = 0;
  std::size_t calls = 0;
  std::size_t masters = 0;
  std::size_t profiles = 0;
  std::size_t enriched = 0;
  std::vector<std::string> rejects;  // "file:line: reason"
};

IngestReport ingest(const IngestInputs& in, const std::filesystem::path& workspace, const PipelineConfig& config);

struct ResolveReport {
  std::size_t researchers = 0;
  std::size_t unmatched = 0;
  std::vector<std::string> absorbed;
};

ResolveReport resolve(const std::filesystem::path& workspace, const PipelineConfig& config);

/// Returns the number of vectors written (baseline excluded).
std::size_t embed(const std::filesystem::path& workspace, const PipelineConfig& config);

/// Writes sets.jsonl and scores.jsonl; returns the number of score rows.
std::size_t score(const std::filesystem::path& workspace, const PipelineConfig& config,
                  KernelChoice kernel = KernelChoice::omp);

/// Writes assignments.csv and recommendations.csv; returns the assignment count.
std::size_t rank(const std::filesystem::path& workspace, const PipelineConfig& config);

void analyze(const std::filesystem::path& workspace, const PipelineConfig& config);

void report(const std::filesystem::path& workspace, const PipelineConfig& config);

}  // namespace fundmatch::stages
