#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fundmatch/corpus.hpp"

namespace fundmatch {

enum class AuthorFilter { all, leading };

/// A publication-set criterion: author filter x time window x threshold.
struct IndicatorSpec {
  std::string name;
  AuthorFilter author_filter = AuthorFilter::all;
  int window_years = 5;
  int min_pubs = 1;

  bool operator==(const IndicatorSpec&) const = default;
};

struct PublicationSet {
  std::string researcher_id;
  std::string indicator_name;
  std::vector<std::string> pub_ids;  // year descending, then pub_id
  bool eligible = false;
};

/// Research background, Current focus, Research leadership, Current leadership.
std::vector<IndicatorSpec> default_indicators();

std::string_view to_string(AuthorFilter filter);
AuthorFilter parse_author_filter(std::string_view name);
nlohmann::json to_json(const IndicatorSpec& spec);
IndicatorSpec indicator_from_json(const nlohmann::json& j);

/// Throws ValidationError on duplicate names or out-of-range bounds.
void validate_indicators(const std::vector<IndicatorSpec>& indicators);
const IndicatorSpec& find_indicator(const std::vector<IndicatorSpec>& indicators, std::string_view name);

/// First, last or corresponding author. Throws ValidationError when the
/// researcher holds no slot on the publication.
bool is_leading(const PublicationRecord& pub, const ResearcherProfile& researcher);

inline bool in_window(const PublicationRecord& pub, int window_years, int reference_year) {
  return reference_year - window_years + 1 <= pub.year && pub.year <= reference_year;
}

PublicationSet build_set(const ResearcherProfile& researcher, const IndicatorSpec& indicator, int reference_year,
                         const PublicationIndex& pubs);
PublicationSet build_set(const ResearcherProfile& researcher, std::string_view indicator_name,
                         const std::vector<IndicatorSpec>& indicators, int reference_year,
                         const PublicationIndex& pubs);

/// Every (researcher, indicator) set, ineligible ones included; ordered by
/// researcher then indicator position.
std::vector<PublicationSet> build_sets(const std::vector<ResearcherProfile>& researchers,
                                       const std::vector<IndicatorSpec>& indicators, int reference_year,
                                       const PublicationIndex& pubs);

nlohmann::json to_json(const PublicationSet& set);

}  // namespace fundmatch
