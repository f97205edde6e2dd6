#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "fundmatch/corpus.hpp"
#include "fundmatch/csv.hpp"
#include "fundmatch/error.hpp"
#include "fundmatch/text.hpp"

namespace fundmatch {

using nlohmann::json;

namespace {

// Raised for a single bad record; turned into a Reject by the reader loop.
struct RecordError {
  std::string reason;
};

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

const json& field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) throw RecordError{std::string("missing field: ") + key};
  return *it;
}

std::string string_field(const json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_string()) throw RecordError{std::string("wrong type: ") + key};
  return v.get<std::string>();
}

std::optional<std::string> optional_string(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw RecordError{std::string("wrong type: ") + key};
  return it->get<std::string>();
}

std::vector<std::string> string_list(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return {};
  if (!it->is_array()) throw RecordError{std::string("wrong type: ") + key};
  std::vector<std::string> out;
  for (const auto& v : *it) {
    if (!v.is_string()) throw RecordError{std::string("wrong type: ") + key};
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::optional<std::string> non_blank(std::optional<std::string> v) {
  if (v && text::trim(*v).empty()) return std::nullopt;
  return v;
}

int parse_int(std::string_view s, const char* what) {
  s = text::trim(s);
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw RecordError{std::string("wrong type: ") + what};
  return value;
}

bool parse_bool(std::string_view s) {
  auto t = text::lower_ascii(text::trim(s));
  if (t == "1" || t == "true" || t == "yes") return true;
  if (t == "0" || t == "false" || t == "no" || t.empty()) return false;
  throw RecordError{"wrong type: is_corresponding"};
}

// Runs parse() on every non-blank JSONL line; RecordError becomes a reject.
template <typename T, typename Parse>
Ingested<T> read_jsonl(const std::filesystem::path& path, Parse&& parse) {
  auto in = open_input(path);
  Ingested<T> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    try {
      json j = json::parse(line);
      if (!j.is_object()) throw RecordError{"record is not an object"};
      out.records.push_back(parse(j));
    } catch (const json::parse_error&) {
      out.rejects.push_back({line_no, line, "malformed json"});
    } catch (const RecordError& e) {
      out.rejects.push_back({line_no, line, e.reason});
    }
  }
  return out;
}

using HeaderMap = std::map<std::string, std::size_t, std::less<>>;

std::string_view column(const csv::Row& row, const HeaderMap& header, std::string_view name) {
  auto it = header.find(name);
  if (it == header.end() || it->second >= row.size()) return {};
  return row[it->second];
}

template <typename T, typename Parse>
Ingested<T> read_csv(const std::filesystem::path& path, std::initializer_list<std::string_view> required,
                     Parse&& parse) {
  auto in = open_input(path);
  Ingested<T> out;
  csv::Row row;
  if (!csv::read_row(in, row)) return out;
  HeaderMap header;
  const std::size_t width = row.size();
  for (std::size_t i = 0; i < row.size(); ++i) header.emplace(text::lower_ascii(text::trim(row[i])), i);
  for (auto name : required)
    if (!header.count(name)) throw ValidationError(path.string() + ": missing CSV column '" + std::string(name) + "'");
  std::size_t record_no = 1;
  while (csv::read_row(in, row)) {
    ++record_no;
    if (row.size() == 1 && text::trim(row[0]).empty()) continue;
    std::ostringstream original;
    csv::write_row(original, row);
    auto line = original.str();
    line.pop_back();
    try {
      if (row.size() != width) throw RecordError{"wrong column count"};
      out.records.push_back(parse(row, header));
    } catch (const RecordError& e) {
      out.rejects.push_back({record_no, line, e.reason});
    }
  }
  return out;
}

void validate_publication(PublicationRecord& pub, const IngestOptions& options) {
  if (text::trim(pub.pub_id).empty()) throw RecordError{"empty pub_id"};
  if (text::trim(pub.title).empty()) throw RecordError{"empty title"};
  if (pub.authors.empty()) throw RecordError{"no authors"};
  if (pub.year < 1900 || pub.year > options.reference_year) throw RecordError{"year out of range"};
  std::sort(pub.authors.begin(), pub.authors.end(),
            [](const AuthorSlot& a, const AuthorSlot& b) { return a.position < b.position; });
  for (std::size_t i = 0; i < pub.authors.size(); ++i) {
    if (text::trim(pub.authors[i].source_author_id).empty()) throw RecordError{"empty source_author_id"};
    if (pub.authors[i].position != static_cast<int>(i + 1))
      throw RecordError{"author positions not contiguous 1..n"};
  }
}

PublicationRecord publication_from_json(const json& j) {
  PublicationRecord pub;
  pub.pub_id = string_field(j, "pub_id");
  pub.doi = non_blank(optional_string(j, "doi"));
  pub.title = string_field(j, "title");
  pub.abstract = optional_string(j, "abstract");
  pub.keywords = string_list(j, "keywords");
  pub.topics = string_list(j, "topics");
  const auto& year = field(j, "year");
  if (!year.is_number_integer()) throw RecordError{"wrong type: year"};
  pub.year = year.get<int>();
  const auto& authors = field(j, "authors");
  if (!authors.is_array()) throw RecordError{"wrong type: authors"};
  for (const auto& a : authors) {
    if (!a.is_object()) throw RecordError{"wrong type: authors"};
    AuthorSlot slot;
    slot.source_author_id = string_field(a, "source_author_id");
    const auto& pos = field(a, "position");
    if (!pos.is_number_integer()) throw RecordError{"wrong type: position"};
    slot.position = pos.get<int>();
    if (auto it = a.find("is_corresponding"); it != a.end() && !it->is_null()) {
      if (!it->is_boolean()) throw RecordError{"wrong type: is_corresponding"};
      slot.is_corresponding = it->get<bool>();
    }
    slot.raw_name = optional_string(a, "raw_name").value_or("");
    pub.authors.push_back(std::move(slot));
  }
  pub.source_tags = string_list(j, "source_tags");
  return pub;
}

PublicationRecord publication_from_csv(const csv::Row& row, const HeaderMap& h) {
  PublicationRecord pub;
  pub.pub_id = std::string(column(row, h, "pub_id"));
  auto doi = std::string(text::trim(column(row, h, "doi")));
  if (!doi.empty()) pub.doi = doi;
  pub.title = std::string(column(row, h, "title"));
  auto abstract = std::string(column(row, h, "abstract"));
  if (!abstract.empty()) pub.abstract = abstract;
  pub.keywords = csv::split_list(column(row, h, "keywords"));
  pub.topics = csv::split_list(column(row, h, "topics"));
  pub.year = parse_int(column(row, h, "year"), "year");
  // authors: "source_author_id|position|is_corresponding|raw_name;..."
  for (const auto& entry : csv::split_list(column(row, h, "authors"))) {
    std::vector<std::string> bits;
    std::size_t start = 0;
    for (int i = 0; i < 3; ++i) {
      auto bar = entry.find('|', start);
      if (bar == std::string::npos) throw RecordError{"wrong type: authors"};
      bits.push_back(entry.substr(start, bar - start));
      start = bar + 1;
    }
    bits.push_back(entry.substr(start));
    pub.authors.push_back({std::string(text::trim(bits[0])), parse_int(bits[1], "position"), parse_bool(bits[2]),
                           std::string(text::trim(bits[3]))});
  }
  pub.source_tags = csv::split_list(column(row, h, "source_tags"));
  return pub;
}

void validate_call(CallRecord& call) {
  if (text::trim(call.call_id).empty()) throw RecordError{"empty call_id"};
  if (text::trim(call.title).empty()) throw RecordError{"empty title"};
  std::stable_sort(call.description_parts.begin(), call.description_parts.end(),
                   [](const LabeledText& a, const LabeledText& b) { return a.label < b.label; });
  for (std::size_t i = 1; i < call.description_parts.size(); ++i)
    if (call.description_parts[i].label == call.description_parts[i - 1].label)
      throw RecordError{"duplicate part label"};
  if (text::trim(call_body(call)).empty()) throw RecordError{"empty description"};
}

CallRecord call_from_json(const json& j) {
  CallRecord call;
  call.call_id = string_field(j, "call_id");
  call.title = optional_string(j, "title").value_or("");
  if (auto it = j.find("parts"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) throw RecordError{"wrong type: parts"};
    for (const auto& p : *it) {
      if (!p.is_object()) throw RecordError{"wrong type: parts"};
      auto label = parse_part_label(string_field(p, "label"));
      if (!label) throw RecordError{"unknown part label"};
      call.description_parts.push_back({*label, optional_string(p, "text").value_or("")});
    }
  }
  call.classification_terms = string_list(j, "terms");
  return call;
}

CallRecord call_from_csv(const csv::Row& row, const HeaderMap& h) {
  CallRecord call;
  call.call_id = std::string(column(row, h, "call_id"));
  call.title = std::string(column(row, h, "title"));
  for (auto part : {CallPart::description, CallPart::destination, CallPart::expected_outcome, CallPart::scope}) {
    auto value = column(row, h, part_label(part));
    if (!text::trim(value).empty()) call.description_parts.push_back({part, std::string(value)});
  }
  call.classification_terms = csv::split_list(column(row, h, "terms"));
  return call;
}

void validate_master(const MasterRecord& m) {
  if (text::trim(m.researcher_key).empty()) throw RecordError{"empty researcher_key"};
  if (m.verified_source_ids.empty() && !m.orcid && !m.email && text::trim(m.canonical_name).empty())
    throw RecordError{"no identifier channel"};
}

MasterRecord master_from_json(const json& j) {
  MasterRecord m;
  m.researcher_key = string_field(j, "researcher_key");
  for (auto& id : string_list(j, "source_ids")) {
    auto t = text::trim(id);
    if (!t.empty()) m.verified_source_ids.emplace(t);
  }
  if (auto o = non_blank(optional_string(j, "orcid"))) m.orcid = text::normalize_orcid(*o);
  if (auto e = non_blank(optional_string(j, "email"))) m.email = text::normalize_email(*e);
  m.canonical_name = optional_string(j, "name").value_or("");
  return m;
}

MasterRecord master_from_csv(const csv::Row& row, const HeaderMap& h) {
  MasterRecord m;
  m.researcher_key = std::string(text::trim(column(row, h, "researcher_key")));
  for (auto& id : csv::split_list(column(row, h, "source_ids"))) m.verified_source_ids.insert(id);
  if (auto o = text::trim(column(row, h, "orcid")); !o.empty()) m.orcid = text::normalize_orcid(o);
  if (auto e = text::trim(column(row, h, "email")); !e.empty()) m.email = text::normalize_email(e);
  m.canonical_name = std::string(column(row, h, "name"));
  return m;
}

json optional_json(const std::optional<std::string>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

FileFormat parse_format(std::string_view name) {
  auto n = text::lower_ascii(name);
  if (n == "jsonl") return FileFormat::jsonl;
  if (n == "csv") return FileFormat::csv;
  throw ValidationError("unknown format '" + std::string(name) + "'");
}

FileFormat format_from_path(const std::filesystem::path& path) {
  return text::lower_ascii(path.extension().string()) == ".csv" ? FileFormat::csv : FileFormat::jsonl;
}

std::string_view part_label(CallPart part) {
  switch (part) {
    case CallPart::description: return "description";
    case CallPart::destination: return "destination";
    case CallPart::expected_outcome: return "expected_outcome";
    case CallPart::scope: return "scope";
  }
  return "";
}

std::optional<CallPart> parse_part_label(std::string_view label) {
  auto l = text::lower_ascii(text::trim(label));
  std::replace(l.begin(), l.end(), ' ', '_');
  std::replace(l.begin(), l.end(), '-', '_');
  for (auto part : {CallPart::description, CallPart::destination, CallPart::expected_outcome, CallPart::scope})
    if (l == part_label(part)) return part;
  return std::nullopt;
}

std::string call_body(const CallRecord& call) {
  std::string body;
  for (const auto& part : call.description_parts) {
    if (text::trim(part.text).empty()) continue;
    if (!body.empty()) body += "\n\n";
    body += part.text;
  }
  return body;
}

namespace {

// First occurrence of an id wins; later duplicates are rejected.
class UniqueIds {
 public:
  explicit UniqueIds(const char* what) : what_(what) {}
  void claim(const std::string& id) {
    if (!seen_.insert(id).second) throw RecordError{std::string("duplicate ") + what_};
  }

 private:
  const char* what_;
  std::unordered_set<std::string> seen_;
};

}  // namespace

Ingested<PublicationRecord> ingest_publications(const std::filesystem::path& path, FileFormat format,
                                                const IngestOptions& options) {
  UniqueIds ids("pub_id");
  auto finish = [&](PublicationRecord pub) {
    validate_publication(pub, options);
    ids.claim(pub.pub_id);
    return pub;
  };
  if (format == FileFormat::jsonl)
    return read_jsonl<PublicationRecord>(path, [&](const json& j) { return finish(publication_from_json(j)); });
  return read_csv<PublicationRecord>(
      path, {"pub_id", "title", "year", "authors"},
      [&](const csv::Row& row, const HeaderMap& h) { return finish(publication_from_csv(row, h)); });
}

Ingested<CallRecord> ingest_calls(const std::filesystem::path& path, FileFormat format) {
  UniqueIds ids("call_id");
  auto finish = [&](CallRecord call) {
    validate_call(call);
    ids.claim(call.call_id);
    return call;
  };
  if (format == FileFormat::jsonl)
    return read_jsonl<CallRecord>(path, [&](const json& j) { return finish(call_from_json(j)); });
  return read_csv<CallRecord>(path, {"call_id", "title"},
                              [&](const csv::Row& row, const HeaderMap& h) { return finish(call_from_csv(row, h)); });
}

Ingested<MasterRecord> ingest_master_list(const std::filesystem::path& path, FileFormat format) {
  Ingested<MasterRecord> out;
  if (format == FileFormat::jsonl) {
    out = read_jsonl<MasterRecord>(path, [](const json& j) {
      auto m = master_from_json(j);
      validate_master(m);
      return m;
    });
  } else {
    out = read_csv<MasterRecord>(path, {"researcher_key"}, [](const csv::Row& row, const HeaderMap& h) {
      auto m = master_from_csv(row, h);
      validate_master(m);
      return m;
    });
  }
  std::unordered_set<std::string> seen;
  for (const auto& m : out.records)
    if (!seen.insert(m.researcher_key).second)
      throw ValidationError(path.string() + ": duplicate researcher_key '" + m.researcher_key + "'");
  return out;
}

Ingested<SourceAuthorProfile> ingest_author_profiles(const std::filesystem::path& path) {
  UniqueIds ids("source_author_id");
  return read_jsonl<SourceAuthorProfile>(path, [&](const json& j) {
    SourceAuthorProfile p;
    p.source_author_id = string_field(j, "source_author_id");
    if (text::trim(p.source_author_id).empty()) throw RecordError{"empty source_author_id"};
    p.name_variants = string_list(j, "names");
    if (auto o = non_blank(optional_string(j, "orcid"))) p.orcid = text::normalize_orcid(*o);
    for (const auto& e : string_list(j, "emails")) {
      auto n = text::normalize_email(e);
      if (!n.empty()) p.emails.insert(n);
    }
    p.affiliations = string_list(j, "affiliations");
    ids.claim(p.source_author_id);
    return p;
  });
}

json to_json(const PublicationRecord& pub) {
  json authors = json::array();
  for (const auto& a : pub.authors)
    authors.push_back({{"source_author_id", a.source_author_id},
                       {"position", a.position},
                       {"is_corresponding", a.is_corresponding},
                       {"raw_name", a.raw_name}});
  return {{"pub_id", pub.pub_id},     {"doi", optional_json(pub.doi)},
          {"title", pub.title},       {"abstract", optional_json(pub.abstract)},
          {"keywords", pub.keywords}, {"topics", pub.topics},
          {"year", pub.year},         {"authors", authors},
          {"source_tags", pub.source_tags}};
}

json to_json(const CallRecord& call) {
  json parts = json::array();
  for (const auto& p : call.description_parts) parts.push_back({{"label", part_label(p.label)}, {"text", p.text}});
  return {{"call_id", call.call_id}, {"title", call.title}, {"parts", parts}, {"terms", call.classification_terms}};
}

json to_json(const MasterRecord& m) {
  return {{"researcher_key", m.researcher_key},
          {"source_ids", m.verified_source_ids},
          {"orcid", optional_json(m.orcid)},
          {"email", optional_json(m.email)},
          {"name", m.canonical_name}};
}

json to_json(const SourceAuthorProfile& p) {
  return {{"source_author_id", p.source_author_id},
          {"names", p.name_variants},
          {"orcid", optional_json(p.orcid)},
          {"emails", p.emails},
          {"affiliations", p.affiliations}};
}

json to_json(const ResearcherProfile& r) {
  json provenance = json::array();
  for (const auto& step : r.provenance) provenance.push_back({{"rule", step.rule}, {"source_id", step.source_id}});
  return {{"researcher_id", r.researcher_id},
          {"merged_source_ids", r.merged_source_ids},
          {"orcid", optional_json(r.orcid)},
          {"emails", r.emails},
          {"normalized_name", r.normalized_name},
          {"publication_ids", r.publication_ids},
          {"provenance", provenance}};
}

ResearcherProfile researcher_from_json(const json& j) {
  ResearcherProfile r;
  r.researcher_id = j.at("researcher_id").get<std::string>();
  r.merged_source_ids = j.at("merged_source_ids").get<std::set<std::string>>();
  if (!j.at("orcid").is_null()) r.orcid = j.at("orcid").get<std::string>();
  r.emails = j.at("emails").get<std::set<std::string>>();
  r.normalized_name = j.at("normalized_name").get<std::string>();
  r.publication_ids = j.at("publication_ids").get<std::set<std::string>>();
  for (const auto& step : j.at("provenance"))
    r.provenance.push_back({step.at("rule").get<std::string>(), step.at("source_id").get<std::string>()});
  return r;
}

void write_json_lines(const std::filesystem::path& path, const std::vector<json>& lines) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& line : lines) out << line.dump() << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

void write_rejects(const std::filesystem::path& path, const std::vector<Reject>& rejects) {
  std::vector<json> lines;
  for (const auto& r : rejects) lines.push_back({{"line", r.line}, {"original", r.original}, {"reason", r.reason}});
  write_json_lines(path, lines);
}

std::vector<ResearcherProfile> read_researchers(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<ResearcherProfile> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      out.push_back(researcher_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace fundmatch
