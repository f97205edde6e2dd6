#include <gtest/gtest.h>

#include <functional>

#include "fundmatch/config.hpp"
#include "fundmatch/error.hpp"
#include "helpers.hpp"

using namespace fundmatch;
using nlohmann::json;

namespace {

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ValidationError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(Config, DefaultsAndRoundTrip) {
  PipelineConfig c;
  EXPECT_EQ(c.percentile_cutoff, 95.0);
  EXPECT_EQ(c.top_fraction_denominator, 3);
  EXPECT_EQ(c.population_min_pubs, 3);
  EXPECT_EQ(c.indicators, default_indicators());
  EXPECT_EQ(config_from_json(to_json(c)), c);
  EXPECT_EQ(config_from_json(json::object()), c);
  testutil::TempDir tmp;
  save_config(c, tmp / "config.json");
  EXPECT_EQ(load_config(tmp / "config.json"), c);
  EXPECT_THROW(load_config(tmp / "absent.json"), IoError);
  testutil::write_file(tmp / "broken.json", "{");
  EXPECT_THROW(load_config(tmp / "broken.json"), ValidationError);
}

TEST(Config, StrictKeysAndBounds) {
  EXPECT_NE(error_of([] { config_from_json({{"percentile_cutof", 90}}); }).find("percentile_cutof"), std::string::npos);
  EXPECT_NE(error_of([] { config_from_json({{"seed", "x"}}); }).find("seed"), std::string::npos);
  EXPECT_THROW(config_from_json({{"percentile_cutoff", 0}}), ValidationError);
  EXPECT_THROW(config_from_json({{"percentile_cutoff", 100.5}}), ValidationError);
  EXPECT_NO_THROW(config_from_json({{"percentile_cutoff", 100}}));
  EXPECT_THROW(config_from_json({{"top_fraction_denominator", 1}}), ValidationError);
  EXPECT_THROW(config_from_json({{"normalization_scope", "global"}}), ValidationError);
  EXPECT_THROW(config_from_json({{"provider", "magic"}}), ValidationError);
  EXPECT_THROW(config_from_json({{"indicators", json::array()}}), ValidationError);
  EXPECT_THROW(config_from_json(json::array()), ValidationError);
}

TEST(Config, Overrides) {
  PipelineConfig base;
  auto c = apply_overrides(base, {{"percentile_cutoff", 90}, {"normalization_scope", "across_indicators"}});
  EXPECT_EQ(c.percentile_cutoff, 90.0);
  EXPECT_EQ(c.normalization_scope, NormalizationScope::across_indicators);
  EXPECT_EQ(apply_overrides(base, json::object()), base);
  for (const char* k : {"provider", "provider_options", "seed"})
    EXPECT_NE(error_of([&] { apply_overrides(base, {{k, json()}}); }).find(k), std::string::npos);
  EXPECT_THROW(apply_overrides(base, {{"percentile_cutoff", -1}}), ValidationError);
  EXPECT_THROW(apply_overrides(base, json::array()), ValidationError);
}

TEST(Config, DigestsAndWindow) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  PipelineConfig a, b;
  EXPECT_EQ(config_digest(a), config_digest(b));
  b.percentile_cutoff = 90;
  EXPECT_NE(config_digest(a), config_digest(b));
  EXPECT_EQ(study_window(a).first, 2021);
  EXPECT_EQ(study_window(a).last, 2025);
}
