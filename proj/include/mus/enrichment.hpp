#pragma once

#include "mus/catalog.hpp"
#include "mus/embedding.hpp"
#include "mus/http_client.hpp"
#include "mus/settings.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mus {

// ---------------------------------------------------------------------------
// Semantic data types

/// The closed 78-type inventory of the Sherlock column-type model, version 1.
/// Annotator outputs outside this list are rejected.
std::span<const std::string_view> semantic_type_inventory() noexcept;
inline constexpr std::string_view kTypeInventoryVersion = "sherlock-78/v1";
bool in_type_inventory(std::string_view type) noexcept;

class TypeAnnotator {
public:
  virtual ~TypeAnnotator() = default;
  virtual std::optional<std::string> annotate(const ColumnMeta& column) = 0;
  virtual bool concurrent_safe() const { return false; }
};

/// Header-only stand-in for a value-based classifier. The label is split
/// into lower-case words (camelCase, '_', '-', spaces); a small synonym
/// table maps common variants ("occupation" -> "position"). The type whose
/// words occur as the longest contiguous run wins; among equal lengths the
/// right-most run (the English head noun) wins.
class DictionaryTypeAnnotator final : public TypeAnnotator {
public:
  std::optional<std::string> annotate(const ColumnMeta& column) override;
  bool concurrent_safe() const override { return true; }
};

/// Exact label -> type table; returns nothing for unknown labels.
class FixedTypeAnnotator final : public TypeAnnotator {
public:
  explicit FixedTypeAnnotator(std::map<std::string, std::string> table) : table_(std::move(table)) {}
  std::optional<std::string> annotate(const ColumnMeta& column) override;
  bool concurrent_safe() const override { return true; }

private:
  std::map<std::string, std::string> table_;
};

/// Copy of the column with semantic_type set when the annotator returns an
/// inventory type. Annotator failures and out-of-inventory answers leave the
/// column unchanged and emit a warning.
ColumnMeta annotate_semantic_type(const ColumnMeta& column, TypeAnnotator& annotator);

// ---------------------------------------------------------------------------
// Vocabulary properties

struct VocabularyEntry {
  std::string iri;
  std::string label;

  friend bool operator==(const VocabularyEntry&, const VocabularyEntry&) = default;
};

/// Two-column TSV, `iri<TAB>label`, UTF-8, no header. Blank lines skipped.
std::vector<VocabularyEntry> load_vocabulary(const std::filesystem::path& path);
std::vector<VocabularyEntry> parse_vocabulary(std::string_view tsv);

inline constexpr std::size_t kPropertyCandidates = 10;

struct PropertyCandidate {
  VocabularyEntry entry;
  double cosine = 0.0;

  friend bool operator==(const PropertyCandidate&, const PropertyCandidate&) = default;
};

/// At most kPropertyCandidates entries, cosine descending, ties by ascending IRI.
struct PropertyCandidateSet {
  std::string column_label;
  std::vector<PropertyCandidate> candidates;

  bool contains(std::string_view iri) const;
  friend bool operator==(const PropertyCandidateSet&, const PropertyCandidateSet&) = default;
};

/// Vocabulary with its label embeddings computed once.
class VocabularyIndex {
public:
  VocabularyIndex(std::vector<VocabularyEntry> vocab, EmbeddingProvider& provider);

  PropertyCandidateSet rank(std::string_view column_label, const EmbeddingVector& label_vector,
                            std::size_t limit = kPropertyCandidates) const;
  std::size_t size() const noexcept { return entries_.size(); }

private:
  std::vector<VocabularyEntry> entries_;
  std::vector<EmbeddingVector> vectors_;
};

PropertyCandidateSet rank_property_candidates(std::string_view column_label,
                                              const std::vector<VocabularyEntry>& vocab,
                                              EmbeddingProvider& embedder);

class PropertySelector {
public:
  virtual ~PropertySelector() = default;
  /// IRI of the chosen candidate, or nothing to leave the column unenriched.
  virtual std::optional<std::string> select(std::string_view column_label, const PropertyCandidateSet& cs) = 0;
  virtual bool concurrent_safe() const { return false; }
};

/// Picks the highest-cosine candidate.
class TopCandidateSelector final : public PropertySelector {
public:
  std::optional<std::string> select(std::string_view column_label, const PropertyCandidateSet& cs) override;
  bool concurrent_safe() const override { return true; }
};

/// Exact label -> IRI table, falling back to the top candidate otherwise.
class FixedPropertySelector final : public PropertySelector {
public:
  explicit FixedPropertySelector(std::map<std::string, std::string> table) : table_(std::move(table)) {}
  std::optional<std::string> select(std::string_view column_label, const PropertyCandidateSet& cs) override;
  bool concurrent_safe() const override { return true; }

private:
  std::map<std::string, std::string> table_;
};

/// POST {prefix}/select with {"column": text, "candidates": [{"iri","label"}...]}
/// and expects {"iri": text}.
class HttpPropertySelector final : public PropertySelector {
public:
  explicit HttpPropertySelector(const std::string& url, HttpOptions options = {});
  std::optional<std::string> select(std::string_view column_label, const PropertyCandidateSet& cs) override;
  bool concurrent_safe() const override { return true; }

private:
  Endpoint endpoint_;
  HttpOptions options_;
};

struct SelectionOutcome {
  std::optional<VocabularyEntry> entry;
  bool fell_back = false;  // selector answer rejected, top-1 used instead
};

/// The selector's answer restricted to members of cs. An answer outside cs
/// (or a selector failure) falls back to the top candidate with a warning.
SelectionOutcome select_property(const PropertyCandidateSet& cs, PropertySelector& selector);

// ---------------------------------------------------------------------------
// Catalog enrichment

struct EnrichmentSettings {
  EnrichmentSetting setting = EnrichmentSetting::base;
  TypeAnnotator* annotator = nullptr;                    // required for dtypes
  PropertySelector* selector = nullptr;                  // required for dbpedia
  const std::vector<VocabularyEntry>* vocab = nullptr;   // required for dbpedia
  EmbeddingProvider* embedder = nullptr;                 // required for dbpedia
};

/// Applies the enrichment layers selected by settings.setting. `base` is the
/// identity. Labels, ids, topics and column order are never touched;
/// per-column failures leave that column unenriched.
Catalog enrich_catalog(const Catalog& catalog, const EnrichmentSettings& settings);

}  // namespace mus
