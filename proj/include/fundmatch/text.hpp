#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace fundmatch::text {

std::string_view trim(std::string_view s);
std::string lower_ascii(std::string_view s);

// Unicode case fold of UTF-8 input; used as the key for case-insensitive
// comparisons.
std::string fold_case(std::string_view s);

// Keeps the first occurrence of each case-folded value, drops blanks.
std::vector<std::string> dedupe_case_insensitive(const std::vector<std::string>& values);

std::string normalize_email(std::string_view email);

// Strips an https://orcid.org/ prefix and uppercases the check digit.
std::string normalize_orcid(std::string_view orcid);

}  // namespace fundmatch::text
