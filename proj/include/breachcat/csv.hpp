#pragma once

#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace breachcat::csv {

// Splits one CSV record (RFC 4180 quoting, no embedded newlines).
std::vector<std::string> split_row(std::string_view line);

// Quotes a field if it contains a delimiter, quote or newline.
std::string escape(std::string_view field);

std::string trim(std::string_view s);
std::string lower(std::string_view s);

// Reads a header line and returns a lowercase column-name -> index map.
// Returns false on an empty stream.
bool read_header(std::istream& in, std::map<std::string, std::size_t>& columns);

// Reads the next non-blank line; `line_no` tracks physical line numbers.
bool next_row(std::istream& in, std::vector<std::string>& fields, std::size_t& line_no);

} // namespace breachcat::csv
