#include "fundmatch/synth.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>

#include "fundmatch/csv.hpp"
#include "fundmatch/error.hpp"

namespace fundmatch {

namespace {

// std::*_distribution output is implementation-defined; these helpers keep
// corpora identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::size_t below(std::size_t n) { return n == 0 ? 0 : static_cast<std::size_t>(engine_() % n); }
  std::size_t between(std::size_t lo, std::size_t hi) { return lo + below(hi - lo + 1); }
  bool chance(unsigned percent) { return below(100) < percent; }
  template <typename T>
  const T& pick(const std::vector<T>& v) { return v[below(v.size())]; }

 private:
  std::mt19937_64 engine_;
};

const std::vector<std::string> kSyllables{"ba", "cor", "den", "fal", "gen", "hor", "ist", "jun", "kel", "lum",
                                          "mor", "nex", "ost", "pra", "qui", "ras", "sol", "tem", "ul",  "ver",
                                          "wen", "xis", "yor", "zan", "al",  "bri", "cla", "dro", "eph", "fon"};

const std::vector<std::string> kStyle{"study", "analysis", "results", "approach", "framework", "evidence",
                                      "method", "data", "model", "research", "findings", "impact"};

const std::vector<std::string> kGiven{"José", "María", "Ana", "Luis", "Carmen", "Javier", "Lucía", "Pablo",
                                      "Elena", "Andrés", "Marta", "Sergio", "Irene", "Tomás", "Nuria", "Raúl"};

const std::vector<std::string> kSurname{"García", "López", "Martínez", "Sánchez", "Pérez", "Gómez", "Ruiz",
                                        "Díaz",   "Moreno", "Muñoz",   "Álvarez", "Romero", "Navarro", "Torres",
                                        "Ramírez", "Gil",   "Serrano", "Molina",  "Ortega", "Castro"};

std::vector<std::vector<std::string>> make_vocabulary(Rng& rng, std::size_t themes) {
  std::set<std::string> used;
  std::vector<std::vector<std::string>> vocab(themes);
  for (auto& words : vocab) {
    while (words.size() < 40) {
      std::string w;
      for (std::size_t s = 0, n = rng.between(2, 3); s < n; ++s) w += rng.pick(kSyllables);
      if (used.insert(w).second) words.push_back(w);
    }
  }
  return vocab;
}

std::string sentence(Rng& rng, const std::vector<std::vector<std::string>>& vocab,
                     const std::vector<std::size_t>& themes, std::size_t words) {
  std::string out;
  for (std::size_t i = 0; i < words; ++i) {
    if (!out.empty()) out.push_back(' ');
    if (rng.chance(25))
      out += rng.pick(kStyle);
    else
      out += rng.pick(vocab[rng.pick(themes)]);
  }
  return out;
}

std::string padded(const char* prefix, std::size_t n, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, n);
  return buf;
}

}  // namespace

SynthCorpus synthesize(const SynthOptions& o) {
  if (o.themes == 0) throw ValidationError("synth: themes must be >= 1");
  if (o.min_pubs < 6 || o.max_pubs < o.min_pubs) throw ValidationError("synth: need 6 <= min_pubs <= max_pubs");
  Rng rng(o.seed);
  SynthCorpus out;
  const auto vocab = make_vocabulary(rng, o.themes);
  const int ref = o.reference_year;

  struct Person {
    std::string key, name, surname, given, email, orcid, main_id, fragment_id;
    std::vector<std::size_t> themes;
  };
  std::vector<Person> people(o.researchers);
  for (std::size_t i = 0; i < o.researchers; ++i) {
    auto& p = people[i];
    p.key = padded("R", i + 1, 5);
    p.given = rng.pick(kGiven);
    p.surname = rng.pick(kSurname) + " " + rng.pick(kSurname);
    p.name = p.surname + ", " + p.given;
    p.email = padded("researcher", i + 1, 5) + "@univ.example";
    char orcid[32];
    std::snprintf(orcid, sizeof orcid, "0000-0002-%04zu-%04zu", (i / 10000) % 10000, i % 10000);
    p.orcid = orcid;
    p.main_id = padded("S", i + 1, 6);
    p.themes.push_back(rng.below(o.themes));
    if (rng.chance(50)) p.themes.push_back(rng.below(o.themes));
    if (rng.chance(15)) p.fragment_id = p.main_id + "b";
  }

  for (std::size_t i = 0; i < people.size(); ++i) {
    const auto& p = people[i];
    out.masters.push_back({p.key, {p.main_id}, p.orcid, p.email, p.name});
    out.profiles.push_back({p.main_id, {p.name}, p.orcid, {}, {"University"}});
    if (!p.fragment_id.empty()) {
      // Rotates through the channels the later cascade stages match on.
      SourceAuthorProfile frag{p.fragment_id, {p.surname + ", " + p.given.substr(0, 1) + "."}, std::nullopt, {}, {"Hospital"}};
      switch (i % 3) {
        case 0: frag.orcid = p.orcid; break;
        case 1: frag.emails.insert(p.email); break;
        default: break;
      }
      out.profiles.push_back(std::move(frag));
    }
  }

  std::size_t pub_no = 0;
  std::size_t external_no = 0;
  for (std::size_t i = 0; i < people.size(); ++i) {
    const auto& p = people[i];
    const std::size_t total = rng.between(o.min_pubs, o.max_pubs);
    for (std::size_t j = 0; j < total; ++j) {
      PublicationRecord pub;
      pub.pub_id = padded("P", ++pub_no, 7);
      const bool core = j < 6;
      pub.year = core ? (j < 3 ? ref - static_cast<int>(rng.below(2)) : ref - 2 - static_cast<int>(rng.below(3)))
                      : ref - static_cast<int>(rng.below(5));
      auto themes = p.themes;
      if (rng.chance(20)) themes.push_back(rng.below(o.themes));
      pub.title = sentence(rng, vocab, themes, rng.between(6, 10));
      if (rng.chance(85)) pub.abstract = sentence(rng, vocab, themes, rng.between(30, 60));
      for (std::size_t k = 0, n = rng.between(2, 4); k < n; ++k) pub.keywords.push_back(rng.pick(vocab[rng.pick(themes)]));
      pub.doi = "10.5555/synth." + pub.pub_id;
      pub.source_tags = {"synthetic"};

      const std::size_t n_authors = rng.between(1, 5);
      std::size_t own_pos = 1;
      bool own_corresponding = false;
      if (core) {
        const auto mode = rng.below(3);
        own_pos = mode == 0 ? 1 : (mode == 1 ? n_authors : 1 + rng.below(n_authors));
        own_corresponding = mode == 2;
      } else {
        own_pos = 1 + rng.below(n_authors);
        own_corresponding = rng.chance(15);
      }
      const bool via_fragment = !core && !p.fragment_id.empty() && rng.chance(60);
      for (std::size_t pos = 1; pos <= n_authors; ++pos) {
        AuthorSlot slot;
        slot.position = static_cast<int>(pos);
        if (pos == own_pos) {
          slot.source_author_id = via_fragment ? p.fragment_id : p.main_id;
          slot.is_corresponding = own_corresponding || (via_fragment && i % 3 == 1);
          slot.raw_name = p.name;
        } else if (!people.empty() && rng.chance(10)) {
          const auto& co = people[rng.below(people.size())];
          if (co.main_id == p.main_id) {
            slot.source_author_id = padded("X", ++external_no, 7);
            slot.raw_name = "External Author";
          } else {
            slot.source_author_id = co.main_id;
            slot.raw_name = co.name;
          }
        } else {
          slot.source_author_id = padded("X", ++external_no, 7);
          slot.raw_name = rng.pick(kSurname) + ", " + rng.pick(kGiven);
        }
        pub.authors.push_back(std::move(slot));
      }
      // A researcher may appear once per author list.
      std::set<std::string> seen;
      for (auto& slot : pub.authors)
        if (!seen.insert(slot.source_author_id).second) {
          slot.source_author_id = padded("X", ++external_no, 7);
          slot.raw_name = "External Author";
        }
      if (rng.chance(30)) out.topic_map.emplace_back(*pub.doi, "Topic " + std::to_string(themes.front()));
      out.publications.push_back(std::move(pub));
    }
  }

  for (std::size_t c = 0; c < o.calls; ++c) {
    CallRecord call;
    call.call_id = padded("HORIZON-SYN-" , c + 1, 4);
    call.call_id.insert(12, std::to_string(ref) + "-");
    std::vector<std::size_t> themes{rng.below(o.themes)};
    if (rng.chance(40)) themes.push_back(rng.below(o.themes));
    call.title = sentence(rng, vocab, themes, rng.between(6, 12));
    for (auto part : {CallPart::description, CallPart::destination, CallPart::expected_outcome, CallPart::scope})
      call.description_parts.push_back({part, sentence(rng, vocab, themes, rng.between(20, 40))});
    for (std::size_t k = 0, n = rng.between(2, 3); k < n; ++k)
      call.classification_terms.push_back(rng.pick(vocab[rng.pick(themes)]));
    out.calls.push_back(std::move(call));
  }
  return out;
}

void write_synth(const SynthCorpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_jsonl(dir / "publications.jsonl", corpus.publications);
  write_jsonl(dir / "calls.jsonl", corpus.calls);
  write_jsonl(dir / "author_profiles.jsonl", corpus.profiles);
  {
    std::ofstream out(dir / "masters.csv", std::ios::binary);
    if (!out) throw IoError("cannot write " + (dir / "masters.csv").string());
    csv::write_row(out, {"researcher_key", "source_ids", "orcid", "email", "name"});
    for (const auto& m : corpus.masters)
      csv::write_row(out, {m.researcher_key,
                           csv::join_list(std::vector<std::string>(m.verified_source_ids.begin(),
                                                                   m.verified_source_ids.end())),
                           m.orcid.value_or(""), m.email.value_or(""), m.canonical_name});
  }
  std::ofstream topics(dir / "topics.csv", std::ios::binary);
  if (!topics) throw IoError("cannot write " + (dir / "topics.csv").string());
  csv::write_row(topics, {"doi", "topic"});
  for (const auto& [doi, topic] : corpus.topic_map) csv::write_row(topics, {doi, topic});
}

}  // namespace fundmatch
