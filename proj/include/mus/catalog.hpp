#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mus {

inline constexpr std::string_view kDefaultBaseIri = "http://metaUnionSearch";

enum class Role { query, candidate };

std::string_view to_string(Role role) noexcept;
Role parse_role(std::string_view text);

/// One column of a dataless table. Never carries cell values.
struct ColumnMeta {
  std::string label;                          // trimmed header text, non-empty
  std::optional<std::string> semantic_type;   // dcterms:type
  std::optional<std::string> vocab_property;  // dsv:columnProperty, absolute IRI

  friend bool operator==(const ColumnMeta&, const ColumnMeta&) = default;
};

struct DatasetMeta {
  std::string id;     // IRI-safe, unique within a catalog
  std::string title;  // source filename
  std::string topic;
  std::vector<ColumnMeta> columns;
  Role role = Role::candidate;

  friend bool operator==(const DatasetMeta&, const DatasetMeta&) = default;
};

/// Throws input_error when an invariant of ColumnMeta / DatasetMeta is violated.
void validate(const ColumnMeta& column);
void validate(const DatasetMeta& dataset);

/// Immutable after load; safe for concurrent reads.
struct Catalog {
  std::map<std::string, DatasetMeta> datasets;
  std::filesystem::path provenance;

  const DatasetMeta& at(const std::string& id) const;
  bool contains(const std::string& id) const { return datasets.count(id) != 0; }

  std::vector<std::string> topics() const;  // sorted, unique
  std::vector<const DatasetMeta*> with_role(Role role) const;

  friend bool operator==(const Catalog& a, const Catalog& b) { return a.datasets == b.datasets; }
};

std::string trim(std::string_view text);
bool is_absolute_iri(std::string_view text);

/// "Psychology_UEA3GE8N.csv" -> "PsychologyUEA3GE8N": drop the extension,
/// split on non-alphanumerics and join the pieces with their first letter
/// upper-cased.
std::string dataset_id_from_title(std::string_view title);

/// Per-column IRI segments, unique within the dataset. A segment shared by
/// several labels gets "_<n>" appended, n being the 1-based ordinal of the
/// occurrence among the duplicates.
std::vector<std::string> column_ids(const DatasetMeta& dataset);

DatasetMeta extract_metadata(const std::vector<std::string>& header_row, std::string_view title,
                             std::string_view topic, Role role);

/// Streams only the first record of the file.
DatasetMeta extract_metadata_from_file(const std::filesystem::path& csv_path, std::string_view topic,
                                       Role role);

struct ManifestEntry {
  std::string topic;
  Role role = Role::candidate;
};

/// manifest.json: {"<filename>": {"topic": "...", "role": "query"|"candidate"}}
std::map<std::string, ManifestEntry> read_manifest(const std::filesystem::path& path);

/// Loads every .csv (via the manifest) and .ttl file in dir. Duplicate ids
/// across files are an input error naming both sources.
Catalog load_catalog(const std::filesystem::path& dir,
                     std::optional<std::filesystem::path> manifest = std::nullopt);

/// Writes {id}.ttl for every dataset plus a catalog.json index.
void write_catalog(const Catalog& catalog, const std::filesystem::path& out_dir,
                   std::string_view base_iri = kDefaultBaseIri);

}  // namespace mus
