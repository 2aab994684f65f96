#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace mus::csv {

/// Reads exactly one RFC 4180 record from the stream and stops at its
/// terminating line break; nothing after the record is consumed. Quoted
/// fields may contain commas, doubled quotes and line breaks. A leading
/// UTF-8 byte-order mark is skipped. Returns an empty vector at end of input.
std::vector<std::string> read_record(std::istream& in);

/// Parses a single record held in memory (trailing line break optional).
std::vector<std::string> parse_record(std::string_view line);

/// Quotes a field when it contains a delimiter, quote or line break.
std::string escape_field(std::string_view field);

}  // namespace mus::csv
