#include "fundmatch/text.hpp"

#include <unicode/unistr.h>

#include <algorithm>
#include <cctype>
#include <unordered_set>

namespace fundmatch::text {

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string fold_case(std::string_view s) {
  auto u = icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  u.foldCase();
  std::string out;
  u.toUTF8String(out);
  return out;
}

std::vector<std::string> dedupe_case_insensitive(const std::vector<std::string>& values) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& v : values) {
    auto t = trim(v);
    if (t.empty()) continue;
    if (seen.insert(fold_case(t)).second) out.emplace_back(t);
  }
  return out;
}

std::string normalize_email(std::string_view email) { return lower_ascii(trim(email)); }

std::string normalize_orcid(std::string_view orcid) {
  auto t = trim(orcid);
  for (std::string_view prefix : {"https://orcid.org/", "http://orcid.org/", "orcid.org/"}) {
    if (t.substr(0, prefix.size()) == prefix) {
      t.remove_prefix(prefix.size());
      break;
    }
  }
  std::string out(t);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

}  // namespace fundmatch::text
