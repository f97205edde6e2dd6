#include "fundmatch/profiling.hpp"

#include <algorithm>
#include <set>

#include "fundmatch/error.hpp"
#include "fundmatch/parallel.hpp"

namespace fundmatch {

std::vector<IndicatorSpec> default_indicators() {
  return {
      {"Research background", AuthorFilter::all, 5, 5},
      {"Current focus", AuthorFilter::all, 2, 3},
      {"Research leadership", AuthorFilter::leading, 5, 4},
      {"Current leadership", AuthorFilter::leading, 2, 2},
  };
}

std::string_view to_string(AuthorFilter filter) { return filter == AuthorFilter::all ? "all" : "leading"; }

AuthorFilter parse_author_filter(std::string_view name) {
  if (name == "all") return AuthorFilter::all;
  if (name == "leading") return AuthorFilter::leading;
  throw ValidationError("unknown author_filter '" + std::string(name) + "'");
}

nlohmann::json to_json(const IndicatorSpec& spec) {
  return {{"name", spec.name},
          {"author_filter", to_string(spec.author_filter)},
          {"window_years", spec.window_years},
          {"min_pubs", spec.min_pubs}};
}

IndicatorSpec indicator_from_json(const nlohmann::json& j) {
  try {
    return {j.at("name").get<std::string>(), parse_author_filter(j.at("author_filter").get<std::string>()),
            j.at("window_years").get<int>(), j.at("min_pubs").get<int>()};
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("indicator: ") + e.what());
  }
}

void validate_indicators(const std::vector<IndicatorSpec>& indicators) {
  std::set<std::string> names;
  for (const auto& ind : indicators) {
    if (ind.name.empty()) throw ValidationError("indicator with empty name");
    if (!names.insert(ind.name).second) throw ValidationError("duplicate indicator '" + ind.name + "'");
    if (ind.window_years < 1) throw ValidationError("indicator '" + ind.name + "': window_years must be >= 1");
    if (ind.min_pubs < 1) throw ValidationError("indicator '" + ind.name + "': min_pubs must be >= 1");
  }
}

const IndicatorSpec& find_indicator(const std::vector<IndicatorSpec>& indicators, std::string_view name) {
  for (const auto& ind : indicators)
    if (ind.name == name) return ind;
  throw NotFoundError("unknown indicator '" + std::string(name) + "'");
}

bool is_leading(const PublicationRecord& pub, const ResearcherProfile& researcher) {
  const auto n = static_cast<int>(pub.authors.size());
  bool authored = false;
  for (const auto& slot : pub.authors) {
    if (!researcher.merged_source_ids.count(slot.source_author_id)) continue;
    authored = true;
    if (slot.position == 1 || slot.position == n || slot.is_corresponding) return true;
  }
  if (!authored)
    throw ValidationError("researcher '" + researcher.researcher_id + "' is not an author of '" + pub.pub_id + "'");
  return false;
}

PublicationSet build_set(const ResearcherProfile& researcher, const IndicatorSpec& indicator, int reference_year,
                         const PublicationIndex& pubs) {
  std::vector<const PublicationRecord*> selected;
  for (const auto& id : researcher.publication_ids) {
    auto it = pubs.find(id);
    if (it == pubs.end()) continue;
    const auto& pub = *it->second;
    if (!in_window(pub, indicator.window_years, reference_year)) continue;
    if (indicator.author_filter == AuthorFilter::leading && !is_leading(pub, researcher)) continue;
    selected.push_back(&pub);
  }
  std::sort(selected.begin(), selected.end(), [](const PublicationRecord* a, const PublicationRecord* b) {
    return a->year != b->year ? a->year > b->year : a->pub_id < b->pub_id;
  });
  PublicationSet set{researcher.researcher_id, indicator.name, {}, false};
  for (const auto* p : selected) set.pub_ids.push_back(p->pub_id);
  set.eligible = static_cast<int>(set.pub_ids.size()) >= indicator.min_pubs;
  return set;
}

PublicationSet build_set(const ResearcherProfile& researcher, std::string_view indicator_name,
                         const std::vector<IndicatorSpec>& indicators, int reference_year,
                         const PublicationIndex& pubs) {
  return build_set(researcher, find_indicator(indicators, indicator_name), reference_year, pubs);
}

std::vector<PublicationSet> build_sets(const std::vector<ResearcherProfile>& researchers,
                                       const std::vector<IndicatorSpec>& indicators, int reference_year,
                                       const PublicationIndex& pubs) {
  const auto n_ind = indicators.size();
  std::vector<PublicationSet> sets(researchers.size() * n_ind);
  parallel::FirstError error;
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(researchers.size()); ++r)
    error.run([&] {
      for (std::size_t s = 0; s < n_ind; ++s)
        sets[static_cast<std::size_t>(r) * n_ind + s] = build_set(researchers[r], indicators[s], reference_year, pubs);
    });
  error.rethrow();
  return sets;
}

nlohmann::json to_json(const PublicationSet& set) {
  return {{"researcher_id", set.researcher_id},
          {"indicator", set.indicator_name},
          {"pub_ids", set.pub_ids},
          {"eligible", set.eligible}};
}

}  // namespace fundmatch
