#include "mus/csv.hpp"
#include "mus/error.hpp"

#include <sstream>

namespace mus::csv {

std::vector<std::string> read_record(std::istream& in) {
  std::vector<std::string> fields;
  std::string field;
  bool in_quotes = false;
  bool field_was_quoted = false;
  bool saw_any = false;

  // BOM only matters at the very start of a file.
  if (in.tellg() == std::streampos(0)) {
    if (in.peek() == 0xEF) {
      char bom[3];
      in.read(bom, 3);
      if (!(static_cast<unsigned char>(bom[1]) == 0xBB && static_cast<unsigned char>(bom[2]) == 0xBF)) {
        in.clear();
        in.seekg(0);
      }
    }
  }

  int ch;
  while ((ch = in.get()) != std::char_traits<char>::eof()) {
    saw_any = true;
    const char c = static_cast<char>(ch);
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get();
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && field.empty() && !field_was_quoted) {
      in_quotes = true;
      field_was_quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      field_was_quoted = false;
    } else if (c == '\r') {
      if (in.peek() == '\n') in.get();
      break;
    } else if (c == '\n') {
      break;
    } else {
      // Lenient: text after a closing quote is appended verbatim.
      field.push_back(c);
    }
  }
  if (in_quotes) throw input_error("unterminated quoted field in CSV record");
  if (!saw_any) return {};
  fields.push_back(std::move(field));
  return fields;
}

std::vector<std::string> parse_record(std::string_view line) {
  std::istringstream in{std::string(line)};
  return read_record(in);
}

std::string escape_field(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace mus::csv
