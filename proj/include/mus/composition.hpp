#pragma once

#include "mus/catalog.hpp"
#include "mus/embedding.hpp"
#include "mus/settings.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mus {

inline constexpr double kDefaultTopicWeight = 0.25;

struct CompositionConfig {
  Scenario scenario = Scenario::td;
  double topic_weight = kDefaultTopicWeight;  // TG only

  void validate() const;
};

struct DatasetVector {
  std::string dataset_id;
  EmbeddingVector vector;  // unit norm unless degenerate
  Scenario scenario = Scenario::td;
  std::string config_digest;
  bool degenerate = false;

  friend bool operator==(const DatasetVector&, const DatasetVector&) = default;
};

/// "educationLevel" -> "education level"; also splits on '_' and '-' and
/// before the last capital of an acronym run ("URLPath" -> "url path").
std::string split_identifier_words(std::string_view identifier);

/// Human-readable label of a vocabulary IRI: its local name, word-split.
std::string property_label(std::string_view iri);

/// Embedding terms for a column: the label, then the semantic type and the
/// property label when present and enabled by the setting.
std::vector<std::string> column_terms(const ColumnMeta& column,
                                      EnrichmentSetting setting = EnrichmentSetting::dtypes_dbpedia);

/// All terms of a dataset in column order.
std::vector<std::string> dataset_terms(const DatasetMeta& dataset, EnrichmentSetting setting);

/// Deterministic digest of (provider identity, scenario, setting, weight).
std::string config_digest(const std::string& provider_identity, const CompositionConfig& cfg,
                          EnrichmentSetting setting);

/// Mean of the unit-normalised, non-degenerate term vectors, renormalised.
/// Terms are accumulated in a canonical order (sorted by text), so the
/// result does not depend on column order. Returns the zero vector when
/// every term is degenerate.
EmbeddingVector column_composite(const std::vector<std::string>& terms,
                                 const std::vector<EmbeddingVector>& term_vectors, std::size_t dim);

/// normalize(w * unit(topic) + (1 - w) * columns); w == 0 returns the
/// column composite unchanged.
EmbeddingVector topic_guided(const EmbeddingVector& columns, const EmbeddingVector& topic, double weight);

DatasetVector compose_dataset_vector(const DatasetMeta& dataset, const CompositionConfig& cfg,
                                     EmbeddingProvider& provider,
                                     EnrichmentSetting setting = EnrichmentSetting::dtypes_dbpedia);

/// Composes every dataset in the catalog (or the listed ids). Unique texts
/// are embedded once in a single batch; the per-dataset arithmetic runs in
/// parallel. Degenerate datasets are kept but flagged, with a warning.
std::map<std::string, DatasetVector> compose_catalog(const Catalog& catalog, const CompositionConfig& cfg,
                                                     EmbeddingProvider& provider, EnrichmentSetting setting,
                                                     const std::vector<std::string>* ids = nullptr);

/// JSON Lines: {"id","scenario","dim","vector","config_digest"} per dataset.
void write_vector_cache(const std::filesystem::path& path, const std::map<std::string, DatasetVector>& vectors);
std::map<std::string, DatasetVector> read_vector_cache(const std::filesystem::path& path);

}  // namespace mus
