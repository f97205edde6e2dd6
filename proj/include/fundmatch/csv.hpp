#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace fundmatch::csv {

using Row = std::vector<std::string>;

// Comma-delimited, double-quote quoting ("" escapes a quote). Quoted fields
// may span lines. Returns false at end of input.
bool read_row(std::istream& in, Row& row);

std::string quote(std::string_view field);
void write_row(std::ostream& out, const Row& row);

// Split "a;b;c" into trimmed, non-empty parts.
std::vector<std::string> split_list(std::string_view joined, char sep = ';');
std::string join_list(const std::vector<std::string>& parts, char sep = ';');

}  // namespace fundmatch::csv
