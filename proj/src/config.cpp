#include "fundmatch/config.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <fstream>

#include "fundmatch/error.hpp"

namespace fundmatch {

using nlohmann::json;

void validate(const PipelineConfig& c) {
  if (c.reference_year < 1900 || c.reference_year > 9999) throw ValidationError("reference_year out of range");
  if (c.population_min_pubs < 0) throw ValidationError("population_min_pubs must be >= 0");
  if (c.indicators.empty()) throw ValidationError("indicators must not be empty");
  validate_indicators(c.indicators);
  if (!(c.percentile_cutoff > 0.0 && c.percentile_cutoff <= 100.0))
    throw ValidationError("percentile_cutoff must be in (0, 100]");
  if (c.top_fraction_denominator < 2) throw ValidationError("top_fraction_denominator must be >= 2");
  if (c.provider != "hash" && c.provider != "import" && c.provider != "sidecar")
    throw ValidationError("provider must be hash, import or sidecar");
}

json to_json(const PipelineConfig& c) {
  json indicators = json::array();
  for (const auto& ind : c.indicators) indicators.push_back(to_json(ind));
  return {{"reference_year", c.reference_year},
          {"population_min_pubs", c.population_min_pubs},
          {"indicators", indicators},
          {"percentile_cutoff", c.percentile_cutoff},
          {"top_fraction_denominator", c.top_fraction_denominator},
          {"normalization_scope", to_string(c.normalization_scope)},
          {"provider", c.provider},
          {"provider_options", c.provider_options},
          {"seed", c.seed}};
}

namespace {

void apply_key(PipelineConfig& c, const std::string& key, const json& v) {
  try {
    if (key == "reference_year") {
      c.reference_year = v.get<int>();
    } else if (key == "population_min_pubs") {
      c.population_min_pubs = v.get<int>();
    } else if (key == "indicators") {
      if (!v.is_array()) throw ValidationError("indicators must be an array");
      c.indicators.clear();
      for (const auto& ind : v) c.indicators.push_back(indicator_from_json(ind));
    } else if (key == "percentile_cutoff") {
      if (!v.is_number()) throw ValidationError("percentile_cutoff must be a number");
      c.percentile_cutoff = v.get<double>();
    } else if (key == "top_fraction_denominator") {
      c.top_fraction_denominator = v.get<int>();
    } else if (key == "normalization_scope") {
      c.normalization_scope = parse_scope(v.get<std::string>());
    } else if (key == "provider") {
      c.provider = v.get<std::string>();
    } else if (key == "provider_options") {
      c.provider_options = v.get<std::map<std::string, std::string>>();
    } else if (key == "seed") {
      c.seed = v.get<std::uint64_t>();
    } else {
      throw ValidationError("unknown config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ValidationError("config key '" + key + "': " + e.what());
  }
}

}  // namespace

PipelineConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  PipelineConfig c;
  for (const auto& [key, v] : j.items()) apply_key(c, key, v);
  validate(c);
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

void save_config(const PipelineConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << to_json(config).dump(2) << '\n';
}

PipelineConfig apply_overrides(const PipelineConfig& base, const json& overrides) {
  if (overrides.is_null()) return base;
  if (!overrides.is_object()) throw ValidationError("overrides must be a JSON object");
  static const std::vector<std::string> fixed{"provider", "provider_options", "seed"};
  PipelineConfig c = base;
  for (const auto& [key, v] : overrides.items()) {
    if (std::find(fixed.begin(), fixed.end(), key) != fixed.end())
      throw ValidationError("'" + key + "' cannot be overridden without re-embedding");
    apply_key(c, key, v);
  }
  validate(c);
  return c;
}

YearRange study_window(const PipelineConfig& config) {
  int widest = 1;
  for (const auto& ind : config.indicators) widest = std::max(widest, ind.window_years);
  return {config.reference_year - widest + 1, config.reference_year};
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xF]);
  }
  return out;
}

std::string config_digest(const PipelineConfig& config) { return sha256_hex(to_json(config).dump()); }

}  // namespace fundmatch
