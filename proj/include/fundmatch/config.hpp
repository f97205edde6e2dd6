#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fundmatch/profiling.hpp"
#include "fundmatch/scoring.hpp"

namespace fundmatch {

struct PipelineConfig {
  int reference_year = 2025;
  int population_min_pubs = 3;
  std::vector<IndicatorSpec> indicators = default_indicators();
  double percentile_cutoff = 95.0;
  int top_fraction_denominator = 3;
  NormalizationScope normalization_scope = NormalizationScope::per_indicator_across_calls;
  std::string provider = "hash";  // hash | import | sidecar
  std::map<std::string, std::string> provider_options{{"dim", "256"}, {"debias", "true"}};
  std::uint64_t seed = 7;

  bool operator==(const PipelineConfig&) const = default;
};

/// Throws ValidationError naming the offending key.
void validate(const PipelineConfig& config);

nlohmann::json to_json(const PipelineConfig& config);
/// Strict: unknown keys and wrong types are ValidationErrors. Missing keys
/// keep their defaults.
PipelineConfig config_from_json(const nlohmann::json& j);

PipelineConfig load_config(const std::filesystem::path& path);
void save_config(const PipelineConfig& config, const std::filesystem::path& path);

/// Applies a partial override object. Only profiling/scoring/ranking keys may
/// change; provider, provider_options and seed would require re-embedding.
PipelineConfig apply_overrides(const PipelineConfig& base, const nlohmann::json& overrides);

/// Years covered by the widest indicator window.
YearRange study_window(const PipelineConfig& config);

std::string sha256_hex(std::string_view bytes);
std::string config_digest(const PipelineConfig& config);

}  // namespace fundmatch
