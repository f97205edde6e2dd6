#include <unicode/translit.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <algorithm>
#include <fstream>
#include <memory>
#include <numeric>
#include <unordered_map>

#include "fundmatch/corpus.hpp"
#include "fundmatch/csv.hpp"
#include "fundmatch/error.hpp"
#include "fundmatch/text.hpp"

namespace fundmatch {

namespace {

icu::Transliterator& ascii_folder() {
  // ICU transliterators are not safe for concurrent use.
  thread_local std::unique_ptr<icu::Transliterator> folder = [] {
    UErrorCode status = U_ZERO_ERROR;
    std::unique_ptr<icu::Transliterator> t(icu::Transliterator::createInstance(
        "NFD; [:Nonspacing Mark:] Remove; NFC; Latin-ASCII", UTRANS_FORWARD, status));
    if (U_FAILURE(status)) throw std::runtime_error(std::string("ICU transliterator: ") + u_errorName(status));
    return t;
  }();
  return *folder;
}

std::vector<icu::UnicodeString> name_tokens(const icu::UnicodeString& s) {
  std::vector<icu::UnicodeString> tokens;
  icu::UnicodeString current;
  for (int32_t i = 0; i < s.length();) {
    UChar32 c = s.char32At(i);
    i += U16_LENGTH(c);
    if (u_isalnum(c)) {
      current.append(c);
    } else if (!current.isEmpty()) {
      tokens.push_back(current);
      current.remove();
    }
  }
  if (!current.isEmpty()) tokens.push_back(current);
  return tokens;
}

std::string join_tokens(const std::vector<icu::UnicodeString>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    t.toUTF8String(out);
  }
  return out;
}

}  // namespace

std::string normalize_name(std::string_view raw) {
  auto u = icu::UnicodeString::fromUTF8(icu::StringPiece(raw.data(), static_cast<int32_t>(raw.size())));
  ascii_folder().transliterate(u);
  u.toLower();
  const int32_t comma = u.indexOf(u',');
  if (comma < 0) return join_tokens(name_tokens(u));

  auto surname = name_tokens(icu::UnicodeString(u, 0, comma));
  auto given = name_tokens(icu::UnicodeString(u, comma + 1));
  if (surname.empty() || given.empty()) {
    surname.insert(surname.end(), given.begin(), given.end());
    return join_tokens(surname);
  }
  std::vector<icu::UnicodeString> initials;
  for (const auto& g : given) initials.emplace_back(g.char32At(0));
  return join_tokens(surname) + ", " + join_tokens(initials);
}

namespace {

struct SourceView {
  std::set<std::string> names;  // normalized
  std::optional<std::string> orcid;
  std::set<std::string> verified_emails;
};

bool intersects(const std::set<std::string>& a, const std::set<std::string>& b) {
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i == *j) return true;
    if (*i < *j) ++i; else ++j;
  }
  return false;
}

// Union-find over researcher keys; the lexicographically smallest key of a
// component is its representative.
class KeyUnion {
 public:
  std::string find(const std::string& k) {
    auto it = parent_.find(k);
    if (it == parent_.end() || it->second == k) return k;
    auto root = find(it->second);
    parent_[k] = root;
    return root;
  }
  void unite(const std::string& a, const std::string& b) {
    auto ra = find(a);
    auto rb = find(b);
    if (ra == rb) return;
    if (rb < ra) std::swap(ra, rb);
    parent_[rb] = ra;
  }

 private:
  std::map<std::string, std::string> parent_;
};

}  // namespace

Resolution resolve_identities(const std::vector<MasterRecord>& masters,
                              const std::vector<SourceAuthorProfile>& profiles,
                              const std::vector<PublicationRecord>& pubs) {
  // Source universe: explicit profiles plus ids that only appear in author slots.
  std::map<std::string, SourceView> sources;
  std::set<std::string> corresponding;
  std::map<std::string, std::set<std::string>> slot_names;
  for (const auto& pub : pubs) {
    for (const auto& slot : pub.authors) {
      if (slot.is_corresponding) corresponding.insert(slot.source_author_id);
      if (!slot.raw_name.empty()) slot_names[slot.source_author_id].insert(normalize_name(slot.raw_name));
      sources.try_emplace(slot.source_author_id);
    }
  }
  for (const auto& p : profiles) {
    auto& view = sources[p.source_author_id];
    for (const auto& n : p.name_variants) {
      auto norm = normalize_name(n);
      if (!norm.empty()) view.names.insert(norm);
    }
    view.orcid = p.orcid;
    if (corresponding.count(p.source_author_id)) view.verified_emails = p.emails;
  }
  for (auto& [id, view] : sources)
    if (view.names.empty())
      if (auto it = slot_names.find(id); it != slot_names.end()) view.names = it->second;

  std::vector<const MasterRecord*> ordered;
  for (const auto& m : masters) ordered.push_back(&m);
  std::sort(ordered.begin(), ordered.end(),
            [](const MasterRecord* a, const MasterRecord* b) { return a->researcher_key < b->researcher_key; });

  std::map<std::string, std::string> claimed_by;
  std::map<std::string, std::string> orcid_owner;
  std::map<std::string, std::string> email_owner;
  std::map<std::string, std::vector<std::string>> name_owners;
  for (const auto* m : ordered) {
    for (const auto& sid : m->verified_source_ids) {
      auto [it, fresh] = claimed_by.emplace(sid, m->researcher_key);
      if (!fresh)
        throw ValidationError("source id '" + sid + "' claimed by both '" + it->second + "' and '" +
                              m->researcher_key + "'");
    }
    if (m->orcid) {
      auto [it, fresh] = orcid_owner.emplace(*m->orcid, m->researcher_key);
      if (!fresh)
        throw ValidationError("orcid '" + *m->orcid + "' claimed by both '" + it->second + "' and '" +
                              m->researcher_key + "'");
    }
    if (m->email) {
      auto [it, fresh] = email_owner.emplace(*m->email, m->researcher_key);
      if (!fresh)
        throw ValidationError("email '" + *m->email + "' claimed by both '" + it->second + "' and '" +
                              m->researcher_key + "'");
    }
    auto norm = normalize_name(m->canonical_name);
    if (!norm.empty()) name_owners[norm].push_back(m->researcher_key);
  }

  std::map<std::string, std::string> attached;  // source id -> researcher key
  std::map<std::string, std::vector<MergeStep>> provenance;
  auto attach = [&](const std::string& sid, const std::string& key, const char* rule) {
    attached[sid] = key;
    provenance[key].push_back({rule, sid});
  };

  for (const auto& [sid, key] : claimed_by) {
    sources.try_emplace(sid);
    attach(sid, key, "id");
  }
  for (const auto& [sid, view] : sources) {
    if (attached.count(sid) || !view.orcid) continue;
    if (auto it = orcid_owner.find(*view.orcid); it != orcid_owner.end()) attach(sid, it->second, "orcid");
  }
  for (const auto& [sid, view] : sources) {
    if (attached.count(sid)) continue;
    std::set<std::string> owners;
    for (const auto& e : view.verified_emails)
      if (auto it = email_owner.find(e); it != email_owner.end()) owners.insert(it->second);
    if (owners.size() == 1) attach(sid, *owners.begin(), "email");
  }
  for (const auto& [sid, view] : sources) {
    if (attached.count(sid)) continue;
    std::set<std::string> owners;
    for (const auto& n : view.names)
      if (auto it = name_owners.find(n); it != name_owners.end() && it->second.size() == 1)
        owners.insert(it->second.front());
    if (owners.size() == 1) attach(sid, *owners.begin(), "name");
  }

  // Same verified name and at least one shared email: merge. Unattached
  // profiles join the matching researcher; researchers that match each other
  // are unified under the smallest key.
  KeyUnion unions;
  for (bool changed = true; changed;) {
    changed = false;
    std::map<std::pair<std::string, std::string>, std::string> owner_of;  // (name, email) -> key
    for (const auto& [sid, key] : attached) {
      const auto& view = sources.at(sid);
      for (const auto& n : view.names)
        for (const auto& e : view.verified_emails) {
          auto [it, fresh] = owner_of.emplace(std::pair{n, e}, unions.find(key));
          if (!fresh) unions.unite(it->second, key);
        }
    }
    for (const auto& [sid, view] : sources) {
      if (attached.count(sid)) continue;
      std::set<std::string> owners;
      for (const auto& n : view.names)
        for (const auto& e : view.verified_emails)
          if (auto it = owner_of.find({n, e}); it != owner_of.end()) owners.insert(unions.find(it->second));
      if (owners.size() == 1) {
        attach(sid, *owners.begin(), "name+email");
        changed = true;
      }
    }
  }

  std::map<std::string, ResearcherProfile> by_key;
  Resolution out;
  for (const auto* m : ordered) {
    auto root = unions.find(m->researcher_key);
    if (root != m->researcher_key) {
      out.absorbed_keys.push_back(m->researcher_key);
      continue;
    }
    auto& r = by_key[root];
    r.researcher_id = root;
    r.orcid = m->orcid;
    if (m->email) r.emails.insert(*m->email);
    r.normalized_name = normalize_name(m->canonical_name);
  }
  for (const auto* m : ordered) {
    auto root = unions.find(m->researcher_key);
    auto& r = by_key[root];
    auto& steps = provenance[m->researcher_key];
    r.provenance.insert(r.provenance.end(), steps.begin(), steps.end());
    if (root != m->researcher_key) {
      for (const auto& step : steps) r.provenance.push_back({"name+email", step.source_id});
      if (!r.orcid) r.orcid = m->orcid;
      if (m->email) r.emails.insert(*m->email);
    }
  }
  for (const auto& [sid, key] : attached) {
    auto& r = by_key[unions.find(key)];
    r.merged_source_ids.insert(sid);
    const auto& view = sources.at(sid);
    r.emails.insert(view.verified_emails.begin(), view.verified_emails.end());
    if (!r.orcid) r.orcid = view.orcid;
    if (r.normalized_name.empty() && !view.names.empty()) r.normalized_name = *view.names.begin();
  }

  std::map<std::string, std::string> owner_of_source;
  for (const auto& [key, r] : by_key)
    for (const auto& sid : r.merged_source_ids) owner_of_source[sid] = key;
  for (const auto& pub : pubs)
    for (const auto& slot : pub.authors)
      if (auto it = owner_of_source.find(slot.source_author_id); it != owner_of_source.end())
        by_key[it->second].publication_ids.insert(pub.pub_id);

  for (auto& [key, r] : by_key) out.researchers.push_back(std::move(r));
  for (const auto& [sid, view] : sources)
    if (!attached.count(sid)) out.unmatched_source_ids.push_back(sid);
  return out;
}

ScholarlyDocument to_document(const PublicationRecord& pub) {
  std::vector<std::string> terms = pub.keywords;
  terms.insert(terms.end(), pub.topics.begin(), pub.topics.end());
  return {pub.pub_id, DocKind::publication, pub.title, pub.abstract.value_or(""),
          text::dedupe_case_insensitive(terms)};
}

ScholarlyDocument to_document(const CallRecord& call) {
  return {call.call_id, DocKind::call, call.title, call_body(call),
          text::dedupe_case_insensitive(call.classification_terms)};
}

PublicationIndex index_publications(const std::vector<PublicationRecord>& pubs) {
  PublicationIndex index;
  for (const auto& p : pubs) index.emplace(p.pub_id, &p);
  return index;
}

std::vector<ResearcherProfile> filter_population(const std::vector<ResearcherProfile>& researchers,
                                                 const PublicationIndex& pubs, YearRange study_window,
                                                 int min_total_pubs) {
  std::vector<ResearcherProfile> kept;
  for (const auto& r : researchers) {
    int count = 0;
    for (const auto& id : r.publication_ids)
      if (auto it = pubs.find(id); it != pubs.end() && study_window.contains(it->second->year)) ++count;
    if (count >= min_total_pubs) kept.push_back(r);
  }
  return kept;
}

namespace {

std::string doi_key(std::string_view doi) {
  auto d = text::lower_ascii(text::trim(doi));
  for (std::string_view prefix : {"https://doi.org/", "http://doi.org/", "doi:"})
    if (std::string_view(d).substr(0, prefix.size()) == prefix) return d.substr(prefix.size());
  return d;
}

}  // namespace

std::size_t enrich_topics(std::vector<PublicationRecord>& pubs, const std::filesystem::path& topic_map) {
  std::ifstream in(topic_map, std::ios::binary);
  if (!in) throw IoError("cannot open " + topic_map.string());
  std::unordered_map<std::string, std::vector<std::string>> topics;
  csv::Row row;
  bool first = true;
  while (csv::read_row(in, row)) {
    bool header = first && !row.empty() && text::lower_ascii(text::trim(row[0])) == "doi";
    first = false;
    if (header || row.size() < 2) continue;
    auto key = doi_key(row[0]);
    auto topic = text::trim(row[1]);
    if (!key.empty() && !topic.empty()) topics[key].emplace_back(topic);
  }
  std::size_t modified = 0;
  for (auto& pub : pubs) {
    if (!pub.doi) continue;
    auto it = topics.find(doi_key(*pub.doi));
    if (it == topics.end()) continue;
    auto before = pub.topics.size();
    std::vector<std::string> merged = pub.topics;
    merged.insert(merged.end(), it->second.begin(), it->second.end());
    pub.topics = text::dedupe_case_insensitive(merged);
    if (pub.topics.size() != before) ++modified;
  }
  return modified;
}

}  // namespace fundmatch
