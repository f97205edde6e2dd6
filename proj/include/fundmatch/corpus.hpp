#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace fundmatch {

struct AuthorSlot {
  std::string source_author_id;
  int position = 0;
  bool is_corresponding = false;
  std::string raw_name;

  bool operator==(const AuthorSlot&) const = default;
};

struct PublicationRecord {
  std::string pub_id;
  std::optional<std::string> doi;
  std::string title;
  std::optional<std::string> abstract;
  std::vector<std::string> keywords;
  std::vector<std::string> topics;
  int year = 0;
  std::vector<AuthorSlot> authors;  // sorted by position
  std::vector<std::string> source_tags;

  bool operator==(const PublicationRecord&) const = default;
};

struct SourceAuthorProfile {
  std::string source_author_id;
  std::vector<std::string> name_variants;
  std::optional<std::string> orcid;
  std::set<std::string> emails;  // lowercased, trimmed
  std::vector<std::string> affiliations;

  bool operator==(const SourceAuthorProfile&) const = default;
};

struct MasterRecord {
  std::string researcher_key;
  std::set<std::string> verified_source_ids;
  std::optional<std::string> orcid;
  std::optional<std::string> email;
  std::string canonical_name;

  bool operator==(const MasterRecord&) const = default;
};

/// One step of identity resolution: which rule attached which source id.
struct MergeStep {
  std::string rule;  // id | orcid | email | name | name+email
  std::string source_id;

  bool operator==(const MergeStep&) const = default;
};

struct ResearcherProfile {
  std::string researcher_id;
  std::set<std::string> merged_source_ids;
  std::optional<std::string> orcid;
  std::set<std::string> emails;
  std::string normalized_name;
  std::set<std::string> publication_ids;
  std::vector<MergeStep> provenance;

  bool operator==(const ResearcherProfile&) const = default;
};

enum class CallPart { description, destination, expected_outcome, scope };

struct LabeledText {
  CallPart label;
  std::string text;

  bool operator==(const LabeledText&) const = default;
};

struct CallRecord {
  std::string call_id;
  std::string title;
  std::vector<LabeledText> description_parts;  // canonical label order
  std::vector<std::string> classification_terms;

  bool operator==(const CallRecord&) const = default;
};

enum class DocKind { publication, call };

/// The unified text unit shared by publications and calls.
struct ScholarlyDocument {
  std::string doc_id;
  DocKind kind = DocKind::publication;
  std::string title;
  std::string body;
  std::vector<std::string> keywords;
};

enum class FileFormat { jsonl, csv };
FileFormat parse_format(std::string_view name);
/// Picks csv for a .csv extension, jsonl otherwise.
FileFormat format_from_path(const std::filesystem::path& path);

struct Reject {
  std::size_t line = 0;  // 1-based physical record number
  std::string original;
  std::string reason;
};

template <typename T>
struct Ingested {
  std::vector<T> records;
  std::vector<Reject> rejects;
};

struct IngestOptions {
  int reference_year = 2025;
};

Ingested<PublicationRecord> ingest_publications(const std::filesystem::path& path, FileFormat format,
                                                const IngestOptions& options = {});
Ingested<CallRecord> ingest_calls(const std::filesystem::path& path, FileFormat format);
/// Duplicate researcher_key is fatal (ValidationError naming the key).
Ingested<MasterRecord> ingest_master_list(const std::filesystem::path& path, FileFormat format);
Ingested<SourceAuthorProfile> ingest_author_profiles(const std::filesystem::path& path);

// Canonical serialization. Re-ingesting the written file yields equal records.
nlohmann::json to_json(const PublicationRecord& pub);
nlohmann::json to_json(const CallRecord& call);
nlohmann::json to_json(const MasterRecord& master);
nlohmann::json to_json(const SourceAuthorProfile& profile);
nlohmann::json to_json(const ResearcherProfile& researcher);
ResearcherProfile researcher_from_json(const nlohmann::json& j);

void write_json_lines(const std::filesystem::path& path, const std::vector<nlohmann::json>& lines);

template <typename T>
void write_jsonl(const std::filesystem::path& path, const std::vector<T>& records) {
  std::vector<nlohmann::json> lines;
  lines.reserve(records.size());
  for (const auto& r : records) lines.push_back(to_json(r));
  write_json_lines(path, lines);
}
void write_rejects(const std::filesystem::path& path, const std::vector<Reject>& rejects);
std::vector<ResearcherProfile> read_researchers(const std::filesystem::path& path);

std::string_view part_label(CallPart part);
std::optional<CallPart> parse_part_label(std::string_view label);
/// Non-empty parts in canonical label order, joined by one blank line.
std::string call_body(const CallRecord& call);

/// Lowercase, strip diacritics, punctuation to spaces, collapse whitespace.
/// With a comma: "surname tokens, given initials". Idempotent.
std::string normalize_name(std::string_view raw);

struct Resolution {
  std::vector<ResearcherProfile> researchers;  // sorted by researcher_id
  std::vector<std::string> unmatched_source_ids;
  std::vector<std::string> absorbed_keys;  // masters merged into another profile
};

Resolution resolve_identities(const std::vector<MasterRecord>& masters,
                              const std::vector<SourceAuthorProfile>& profiles,
                              const std::vector<PublicationRecord>& pubs);

ScholarlyDocument to_document(const PublicationRecord& pub);
ScholarlyDocument to_document(const CallRecord& call);

struct YearRange {
  int first = 0;
  int last = 0;
  bool contains(int year) const { return first <= year && year <= last; }
};

using PublicationIndex = std::map<std::string, const PublicationRecord*, std::less<>>;
PublicationIndex index_publications(const std::vector<PublicationRecord>& pubs);

std::vector<ResearcherProfile> filter_population(const std::vector<ResearcherProfile>& researchers,
                                                 const PublicationIndex& pubs, YearRange study_window,
                                                 int min_total_pubs = 3);

/// Returns the number of publications that gained a topic.
std::size_t enrich_topics(std::vector<PublicationRecord>& pubs, const std::filesystem::path& topic_map);

}  // namespace fundmatch
