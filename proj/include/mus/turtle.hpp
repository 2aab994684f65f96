#pragma once

#include "mus/catalog.hpp"
#include "mus/error.hpp"

#include <string>
#include <string_view>

namespace mus {

namespace ns {
inline constexpr std::string_view dsv = "https://w3id.org/dsv-ontology#";
inline constexpr std::string_view dcterms = "http://purl.org/dc/terms/";
inline constexpr std::string_view rdfs = "http://www.w3.org/2000/01/rdf-schema#";
inline constexpr std::string_view dbpedia = "http://dbpedia.org/ontology/";
inline constexpr std::string_view rdf = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
}  // namespace ns

/// Parse failure carrying the 1-based source line it was detected on.
class TurtleParseError : public Error {
public:
  TurtleParseError(int line, const std::string& message)
      : Error(ErrorKind::input, "turtle line " + std::to_string(line) + ": " + message), line_(line) {}
  int line() const noexcept { return line_; }

private:
  int line_;
};

/// Emits the dataset as a dsv:Dataset node with a blank-node schema that
/// lists its dsv:Column IRIs, followed by one node per column. Only the
/// dsv, dcterms, rdfs and dbpedia prefixes are used. Query datasets are
/// marked with `dcterms:type "query"` on the dataset node.
std::string serialize_turtle(const DatasetMeta& dataset, std::string_view base_iri = kDefaultBaseIri);

/// Inverse of serialize_turtle over the same Turtle subset. Accepts both
/// `@prefix` and SPARQL-style `prefix` directives. Unrecognised triples are
/// skipped with a warning.
DatasetMeta parse_turtle(std::string_view document);

}  // namespace mus
