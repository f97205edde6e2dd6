#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "fundmatch/corpus.hpp"
#include "fundmatch/error.hpp"
#include "helpers.hpp"

using namespace fundmatch;
using testutil::pub;
using testutil::slot;
namespace fs = std::filesystem;

namespace {

const fs::path kIngest = fs::path(FIXTURES_DIR) / "ingest";
const fs::path kIdentity = fs::path(FIXTURES_DIR) / "identity";

}  // namespace

TEST(IngestPublications, TenLineFixtureWithOneBadLine) {
  auto r = ingest_publications(kIngest / "publications_10.jsonl", FileFormat::jsonl);
  EXPECT_EQ(r.records.size(), 9u);
  ASSERT_EQ(r.rejects.size(), 1u);
  EXPECT_EQ(r.rejects[0].line, 7u);
  EXPECT_EQ(r.rejects[0].reason, "empty title");
  EXPECT_NE(r.rejects[0].original.find("\"P07\""), std::string::npos);
  const auto& first = r.records.front();
  ASSERT_EQ(first.authors.size(), 2u);
  EXPECT_EQ(first.authors[0].position, 1);
  EXPECT_EQ(first.authors[1].position, 2);
  EXPECT_TRUE(first.authors[0].is_corresponding);
  EXPECT_EQ(first.abstract, "Abstract text.");
  EXPECT_FALSE(r.records[1].abstract.has_value());
}

TEST(IngestPublications, RejectReasons) {
  auto r = ingest_publications(kIngest / "publications_bad.jsonl", FileFormat::jsonl);
  auto expected = nlohmann::json::parse(testutil::read_file(kIngest / "publications_bad.expected.json"));
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.records[0].pub_id, "B1");
  std::vector<std::string> reasons;
  for (const auto& rej : r.rejects) reasons.push_back(rej.reason);
  std::vector<std::string> want;
  for (const auto& e : expected)
    if (!e.is_null()) want.push_back(e.get<std::string>());
  EXPECT_EQ(reasons, want);
  EXPECT_EQ(r.rejects[3].line, 5u);  // the duplicate keeps its own line number
}

TEST(IngestPublications, CsvWithQuotedMultilineFields) {
  auto r = ingest_publications(kIngest / "publications.csv", FileFormat::csv);
  ASSERT_EQ(r.records.size(), 2u);
  ASSERT_EQ(r.rejects.size(), 1u);
  EXPECT_EQ(r.rejects[0].reason, "empty title");
  const auto& p = r.records[0];
  EXPECT_EQ(p.title, "Graphs, trees and \"forests\"");
  EXPECT_EQ(p.abstract, "Multi\nline abstract");
  EXPECT_EQ(p.keywords, (std::vector<std::string>{"graphs", "trees"}));
  ASSERT_EQ(p.authors.size(), 2u);
  EXPECT_EQ(p.authors[0].raw_name, "Ruiz, Ana");
  EXPECT_TRUE(p.authors[0].is_corresponding);
  EXPECT_FALSE(r.records[1].doi.has_value());
}

TEST(IngestPublications, CsvRowWithExtraColumnsIsRejected) {
  testutil::TempDir tmp;
  testutil::write_file(tmp / "p.csv",
                       "pub_id,doi,title,abstract,keywords,topics,year,authors,source_tags\n"
                       "P1,,Title,,,,2024,A1|1|true|Ruiz, Ana,scopus\n");
  auto r = ingest_publications(tmp / "p.csv", FileFormat::csv);
  EXPECT_TRUE(r.records.empty());
  ASSERT_EQ(r.rejects.size(), 1u);
  EXPECT_EQ(r.rejects[0].reason, "wrong column count");
}

TEST(IngestPublications, MissingFileIsIoError) {
  EXPECT_THROW(ingest_publications(kIngest / "nope.jsonl", FileFormat::jsonl), IoError);
}

TEST(IngestPublications, RoundTripIsBitwiseStable) {
  testutil::TempDir tmp;
  auto first = ingest_publications(kIngest / "publications_10.jsonl", FileFormat::jsonl);
  write_jsonl(tmp / "a.jsonl", first.records);
  auto second = ingest_publications(tmp / "a.jsonl", FileFormat::jsonl);
  EXPECT_TRUE(second.rejects.empty());
  EXPECT_EQ(second.records, first.records);
  write_jsonl(tmp / "b.jsonl", second.records);
  EXPECT_EQ(testutil::read_file(tmp / "a.jsonl"), testutil::read_file(tmp / "b.jsonl"));
}

TEST(IngestCalls, PartsConcatenateInSchemaOrder) {
  auto r = ingest_calls(kIngest / "calls.jsonl", FileFormat::jsonl);
  ASSERT_EQ(r.records.size(), 2u);
  EXPECT_EQ(call_body(r.records[0]), "Only the description.");
  EXPECT_EQ(call_body(r.records[1]), "Description text.\n\nDestination text.\n\nOutcome text.\n\nScope text.");
  ASSERT_EQ(r.rejects.size(), 2u);
  EXPECT_EQ(r.rejects[0].reason, "empty title");
  EXPECT_EQ(r.rejects[1].reason, "unknown part label");

  auto doc = to_document(r.records[0]);
  EXPECT_EQ(doc.kind, DocKind::call);
  EXPECT_EQ(doc.keywords.size(), 2u);
  EXPECT_EQ(doc.body, "Only the description.");
}

TEST(IngestCalls, Csv) {
  auto r = ingest_calls(kIngest / "calls.csv", FileFormat::csv);
  ASSERT_EQ(r.records.size(), 1u);
  ASSERT_EQ(r.rejects.size(), 1u);
  EXPECT_EQ(r.records[0].description_parts.size(), 3u);  // empty expected_outcome dropped
  EXPECT_EQ(r.records[0].classification_terms, (std::vector<std::string>{"quantum", "sensing"}));
  EXPECT_EQ(call_body(r.records[0]), "Describe\n\nDest\n\nScope here");
}

TEST(IngestMasters, DistinctKeysAndSingleChannel) {
  auto r = ingest_master_list(kIngest / "masters.csv", FileFormat::csv);
  ASSERT_EQ(r.records.size(), 3u);
  EXPECT_TRUE(r.rejects.empty());
  EXPECT_EQ(r.records[0].verified_source_ids, (std::set<std::string>{"S1", "S2"}));
  // R3 has neither orcid nor email, only a verified source id.
  EXPECT_FALSE(r.records[2].orcid);
  EXPECT_FALSE(r.records[2].email);
  EXPECT_EQ(r.records[2].verified_source_ids.size(), 1u);
}

TEST(IngestMasters, DuplicateKeyIsFatalAndNamed) {
  try {
    ingest_master_list(kIngest / "masters_dup.csv", FileFormat::csv);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("'R1'"), std::string::npos);
  }
}

TEST(IngestMasters, JsonlRoundTrip) {
  testutil::TempDir tmp;
  auto r = ingest_master_list(kIngest / "masters.csv", FileFormat::csv);
  write_jsonl(tmp / "m.jsonl", r.records);
  auto back = ingest_master_list(tmp / "m.jsonl", FileFormat::jsonl);
  EXPECT_EQ(back.records, r.records);
}

TEST(NormalizeName, Examples) {
  EXPECT_EQ(normalize_name("garcia lopez, j m"), "garcia lopez, j m");
  EXPECT_EQ(normalize_name("García-López, José M."), "garcia lopez, j m");
  EXPECT_EQ(normalize_name(""), "");
  EXPECT_EQ(normalize_name("  Müller   Hans "), "muller hans");
  EXPECT_EQ(normalize_name("O'Brien,   Seán"), "o brien, s");
  EXPECT_EQ(normalize_name(", Ana"), "ana");
}

TEST(NormalizeName, Idempotent) {
  for (const char* raw : {"García-López, José M.", "Ñúñez, Ángela María", "  Smith  ", "Doe, J.-P.", "Łukasz Żółw",
                          "van der Berg, Pieter Jan", "Ruiz, A", "x,y,z", ""}) {
    auto once = normalize_name(raw);
    EXPECT_EQ(normalize_name(once), once) << raw;
  }
}

TEST(ToDocument, PublicationFields) {
  auto p = pub("P1", 2024, {slot("A", 1)}, "Title");
  p.keywords = {"ai"};
  p.topics = {"law", "AI"};
  auto d = to_document(p);
  EXPECT_EQ(d.keywords, (std::vector<std::string>{"ai", "law"}));
  EXPECT_EQ(d.body, "");  // no abstract is not an error
  EXPECT_EQ(d.title, "Title");
  EXPECT_EQ(d.kind, DocKind::publication);
}

TEST(FilterPopulation, ThresholdAndWindow) {
  std::vector<PublicationRecord> pubs;
  for (int i = 0; i < 5; ++i) pubs.push_back(pub("P" + std::to_string(i), 2022, {slot("A", 1)}));
  pubs.push_back(pub("OLD", 2015, {slot("A", 1)}));
  auto index = index_publications(pubs);
  std::vector<ResearcherProfile> rs;
  for (int n = 1; n <= 5; ++n) {
    std::set<std::string> ids;
    for (int i = 0; i < n; ++i) ids.insert("P" + std::to_string(i));
    rs.push_back(testutil::researcher("R" + std::to_string(n), {}, ids));
  }
  rs.push_back(testutil::researcher("Rold", {}, {"P0", "P1", "OLD"}));
  auto kept = filter_population(rs, index, {2021, 2025}, 3);
  std::vector<std::string> ids;
  for (const auto& r : kept) ids.push_back(r.researcher_id);
  EXPECT_EQ(ids, (std::vector<std::string>{"R3", "R4", "R5"}));
}

TEST(EnrichTopics, MatchesDoiCaseInsensitively) {
  std::vector<PublicationRecord> pubs{pub("P1", 2024, {slot("A", 1)}), pub("P2", 2024, {slot("A", 1)}),
                                      pub("P3", 2024, {slot("A", 1)})};
  pubs[0].doi = "10.1000/x1";
  pubs[1].doi = "10.1000/x2";
  EXPECT_EQ(enrich_topics(pubs, kIngest / "topics.csv"), 1u);
  EXPECT_EQ(pubs[0].topics, (std::vector<std::string>{"Machine learning"}));
  EXPECT_TRUE(pubs[1].topics.empty());
  EXPECT_TRUE(pubs[2].topics.empty());
  EXPECT_THROW(enrich_topics(pubs, kIngest / "missing.csv"), IoError);
}

// ---- identity cascade, data-driven over fixtures/identity/<case> ----

namespace {

struct IdentityCase {
  std::vector<MasterRecord> masters;
  std::vector<SourceAuthorProfile> profiles;
  std::vector<PublicationRecord> pubs;
  nlohmann::json expected;
};

IdentityCase load_case(const fs::path& dir) {
  IdentityCase c;
  c.masters = ingest_master_list(dir / "masters.jsonl", FileFormat::jsonl).records;
  c.profiles = ingest_author_profiles(dir / "author_profiles.jsonl").records;
  c.pubs = ingest_publications(dir / "publications.jsonl", FileFormat::jsonl).records;
  c.expected = nlohmann::json::parse(testutil::read_file(dir / "expected.json"));
  return c;
}

std::vector<fs::path> identity_cases() {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(kIdentity)) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

void check_resolution(const Resolution& res, const nlohmann::json& expected) {
  std::map<std::string, const ResearcherProfile*> by_id;
  for (const auto& r : res.researchers) by_id[r.researcher_id] = &r;
  ASSERT_EQ(by_id.size(), expected["researchers"].size());
  for (const auto& [key, want] : expected["researchers"].items()) {
    ASSERT_TRUE(by_id.count(key)) << key;
    const auto& r = *by_id[key];
    std::set<std::string> sources;
    for (const auto& [sid, rule] : want["sources"].items()) {
      sources.insert(sid);
      auto it = std::find_if(r.provenance.begin(), r.provenance.end(),
                             [&](const MergeStep& s) { return s.source_id == sid; });
      ASSERT_NE(it, r.provenance.end()) << sid;
      EXPECT_EQ(it->rule, rule.get<std::string>()) << key << "/" << sid;
    }
    EXPECT_EQ(r.merged_source_ids, sources) << key;
    EXPECT_EQ(r.publication_ids, want["publications"].get<std::set<std::string>>()) << key;
  }
  EXPECT_EQ(res.unmatched_source_ids, expected["unmatched"].get<std::vector<std::string>>());
  EXPECT_EQ(res.absorbed_keys, expected["absorbed"].get<std::vector<std::string>>());
}

}  // namespace

class IdentityCascade : public ::testing::TestWithParam<fs::path> {};

TEST_P(IdentityCascade, MatchesExpectation) {
  auto c = load_case(GetParam());
  if (c.expected.contains("error")) {
    try {
      resolve_identities(c.masters, c.profiles, c.pubs);
      FAIL() << "expected a fatal conflict";
    } catch (const ValidationError& e) {
      for (const auto& needle : c.expected["error"])
        EXPECT_NE(std::string(e.what()).find("'" + needle.get<std::string>() + "'"), std::string::npos) << e.what();
    }
    return;
  }
  check_resolution(resolve_identities(c.masters, c.profiles, c.pubs), c.expected);
}

TEST_P(IdentityCascade, IndependentOfInputOrder) {
  auto c = load_case(GetParam());
  if (c.expected.contains("error")) return;
  auto baseline = resolve_identities(c.masters, c.profiles, c.pubs);
  std::mt19937 rng(5);
  for (int round = 0; round < 5; ++round) {
    std::shuffle(c.masters.begin(), c.masters.end(), rng);
    std::shuffle(c.profiles.begin(), c.profiles.end(), rng);
    std::shuffle(c.pubs.begin(), c.pubs.end(), rng);
    auto again = resolve_identities(c.masters, c.profiles, c.pubs);
    EXPECT_EQ(again.researchers, baseline.researchers);
    EXPECT_EQ(again.unmatched_source_ids, baseline.unmatched_source_ids);
  }
}

INSTANTIATE_TEST_SUITE_P(Fixtures, IdentityCascade, ::testing::ValuesIn(identity_cases()),
                         [](const auto& info) { return info.param.filename().string().substr(3); });

TEST(IdentityCascadeProps, ConflictingOrcidIsFatal) {
  std::vector<MasterRecord> masters{{"K1", {}, "0000-0001-0000-0001", std::nullopt, "A, B"},
                                    {"K2", {}, "0000-0001-0000-0001", std::nullopt, "C, D"}};
  try {
    resolve_identities(masters, {}, {});
    FAIL();
  } catch (const ValidationError& e) {
    std::string msg = e.what();
    EXPECT_NE(msg.find("'K1'"), std::string::npos);
    EXPECT_NE(msg.find("'K2'"), std::string::npos);
  }
}

TEST(IdentityCascadeProps, DisjointOwnershipOnRandomCorpora) {
  std::mt19937 rng(17);
  for (int round = 0; round < 30; ++round) {
    std::vector<MasterRecord> masters;
    std::vector<SourceAuthorProfile> profiles;
    std::vector<PublicationRecord> pubs;
    const int n_masters = 6;
    for (int m = 0; m < n_masters; ++m) {
      MasterRecord rec{"M" + std::to_string(m), {}, std::nullopt, std::nullopt, "Name" + std::to_string(m % 4) + ", X"};
      if (rng() % 2) rec.verified_source_ids.insert("S" + std::to_string(m));
      if (rng() % 2) rec.orcid = "0000-0000-0000-000" + std::to_string(m);
      if (rng() % 2) rec.email = "m" + std::to_string(m) + "@x.example";
      masters.push_back(rec);
    }
    for (int s = 0; s < 12; ++s) {
      SourceAuthorProfile p{"S" + std::to_string(s), {"Name" + std::to_string(rng() % 5) + ", X"}, std::nullopt, {}, {}};
      if (rng() % 3 == 0) p.orcid = "0000-0000-0000-000" + std::to_string(rng() % n_masters);
      if (rng() % 2) p.emails.insert("m" + std::to_string(rng() % n_masters) + "@x.example");
      profiles.push_back(p);
    }
    for (int i = 0; i < 15; ++i) {
      std::vector<AuthorSlot> authors;
      std::set<std::string> used;
      for (int pos = 1; pos <= 3; ++pos) {
        std::string sid = "S" + std::to_string(rng() % 12);
        if (!used.insert(sid).second) sid = "X" + std::to_string(i) + "_" + std::to_string(pos);
        authors.push_back(slot(sid, pos, rng() % 2 == 0));
      }
      pubs.push_back(pub("P" + std::to_string(i), 2024, authors));
    }
    auto res = resolve_identities(masters, profiles, pubs);
    std::map<std::string, std::string> owner;
    for (const auto& r : res.researchers) {
      for (const auto& sid : r.merged_source_ids) {
        auto [it, fresh] = owner.emplace(sid, r.researcher_id);
        EXPECT_TRUE(fresh) << sid << " owned by " << it->second << " and " << r.researcher_id;
      }
      for (const auto& step : r.provenance)
        EXPECT_TRUE(step.rule == "id" || step.rule == "orcid" || step.rule == "email" || step.rule == "name" ||
                    step.rule == "name+email");
      // publication_ids come only from slots of merged source ids.
      for (const auto& pid : r.publication_ids) {
        auto p = std::find_if(pubs.begin(), pubs.end(), [&](const auto& x) { return x.pub_id == pid; });
        ASSERT_NE(p, pubs.end());
        EXPECT_TRUE(std::any_of(p->authors.begin(), p->authors.end(),
                                [&](const AuthorSlot& a) { return r.merged_source_ids.count(a.source_author_id); }));
      }
    }
    for (const auto& sid : res.unmatched_source_ids) EXPECT_FALSE(owner.count(sid)) << sid;
  }
}
