#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "fundmatch/corpus.hpp"

namespace fundmatch {

struct SynthOptions {
  std::size_t researchers = 50;
  std::size_t calls = 20;
  std::size_t themes = 12;
  // Publications per researcher, inclusive. Six of them are always leading
  // (three in the last two years), so every researcher clears the default
  // indicator thresholds.
  std::size_t min_pubs = 6;
  std::size_t max_pubs = 14;
  int reference_year = 2025;
  std::uint64_t seed = 7;
};

/// A seeded, topic-structured corpus with fragmented author identities.
struct SynthCorpus {
  std::vector<PublicationRecord> publications;
  std::vector<CallRecord> calls;
  std::vector<MasterRecord> masters;
  std::vector<SourceAuthorProfile> profiles;
  std::vector<std::pair<std::string, std::string>> topic_map;  // (doi, topic)
};

SynthCorpus synthesize(const SynthOptions& options);

/// publications.jsonl, calls.jsonl, masters.csv, author_profiles.jsonl, topics.csv.
void write_synth(const SynthCorpus& corpus, const std::filesystem::path& dir);

}  // namespace fundmatch
