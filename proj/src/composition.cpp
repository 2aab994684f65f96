#include "mus/composition.hpp"
#include "mus/diagnostics.hpp"
#include "mus/error.hpp"
#include "mus/kernels.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace mus {

using nlohmann::json;

void CompositionConfig::validate() const {
  if (!(topic_weight >= 0.0 && topic_weight <= 1.0)) {
    throw input_error("topic weight must lie in [0, 1], got " + std::to_string(topic_weight));
  }
}

std::string split_identifier_words(std::string_view id) {
  auto is_upper = [](char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; };
  auto is_lower = [](char c) { return std::islower(static_cast<unsigned char>(c)) != 0; };
  auto is_digit = [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; };
  std::string out;
  for (std::size_t i = 0; i < id.size(); ++i) {
    const char c = id[i];
    if (c == '_' || c == '-' || std::isspace(static_cast<unsigned char>(c))) {
      if (!out.empty() && out.back() != ' ') out.push_back(' ');
      continue;
    }
    if (is_upper(c) && i > 0 && !out.empty() && out.back() != ' ') {
      const char prev = id[i - 1];
      const bool after_lower = is_lower(prev) || is_digit(prev);
      const bool acronym_end = is_upper(prev) && i + 1 < id.size() && is_lower(id[i + 1]);
      if (after_lower || acronym_end) out.push_back(' ');
    }
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

std::string property_label(std::string_view iri) {
  auto cut = iri.find_last_of("/#");
  return split_identifier_words(cut == std::string_view::npos ? iri : iri.substr(cut + 1));
}

std::vector<std::string> column_terms(const ColumnMeta& column, EnrichmentSetting setting) {
  std::vector<std::string> terms{column.label};
  if (uses_types(setting) && column.semantic_type) terms.push_back(*column.semantic_type);
  if (uses_properties(setting) && column.vocab_property) terms.push_back(property_label(*column.vocab_property));
  return terms;
}

std::vector<std::string> dataset_terms(const DatasetMeta& dataset, EnrichmentSetting setting) {
  std::vector<std::string> terms;
  for (const auto& c : dataset.columns) {
    for (auto& t : column_terms(c, setting)) terms.push_back(std::move(t));
  }
  return terms;
}

std::string config_digest(const std::string& provider_identity, const CompositionConfig& cfg,
                          EnrichmentSetting setting) {
  std::string descriptor = "provider=" + provider_identity + ";scenario=" + std::string(to_string(cfg.scenario)) +
                           ";setting=" + std::string(to_string(setting));
  if (cfg.scenario == Scenario::tg) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", cfg.topic_weight);
    descriptor += ";topic_weight=";
    descriptor += buf;
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a64(descriptor)));
  return hex;
}

EmbeddingVector column_composite(const std::vector<std::string>& terms,
                                 const std::vector<EmbeddingVector>& term_vectors, std::size_t dim) {
  if (terms.size() != term_vectors.size()) throw input_error("terms and term vectors differ in length");
  std::vector<EmbeddingVector> units;
  units.reserve(term_vectors.size());
  for (const auto& v : term_vectors) {
    if (v.dim() != dim) throw input_error("term vector has the wrong dimension");
    units.push_back(normalized(v));
  }
  std::vector<std::size_t> order(terms.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return terms[a] < terms[b]; });
  std::vector<const EmbeddingVector*> ordered;
  ordered.reserve(order.size());
  for (std::size_t i : order) ordered.push_back(&units[i]);
  return kernels::mean_of_units(ordered, dim);
}

EmbeddingVector topic_guided(const EmbeddingVector& columns, const EmbeddingVector& topic, double weight) {
  if (weight == 0.0 || is_degenerate(columns)) return columns;
  if (columns.dim() != topic.dim()) throw input_error("topic vector has the wrong dimension");
  const EmbeddingVector unit_topic = normalized(topic);
  EmbeddingVector mix{std::vector<double>(columns.dim())};
  for (std::size_t i = 0; i < columns.dim(); ++i) {
    mix.components[i] = weight * unit_topic.components[i] + (1.0 - weight) * columns.components[i];
  }
  return normalized(std::move(mix));
}

DatasetVector compose_dataset_vector(const DatasetMeta& dataset, const CompositionConfig& cfg,
                                     EmbeddingProvider& provider, EnrichmentSetting setting) {
  cfg.validate();
  if (dataset.columns.empty()) throw input_error("dataset " + dataset.id + " has no columns");
  const std::size_t dim = provider.dim();

  // Trimmed text is what gets embedded, so it is also the ordering key.
  std::vector<std::string> terms = dataset_terms(dataset, setting);
  for (auto& t : terms) t = trim(t);
  const auto vectors = embed_texts(terms, provider);

  DatasetVector out;
  out.dataset_id = dataset.id;
  out.scenario = cfg.scenario;
  out.config_digest = config_digest(provider.identity(), cfg, setting);
  out.vector = column_composite(terms, vectors, dim);
  if (cfg.scenario == Scenario::tg) {
    out.vector = topic_guided(out.vector, embed_text(dataset.topic, provider), cfg.topic_weight);
  }
  out.degenerate = is_degenerate(out.vector);
  return out;
}

std::map<std::string, DatasetVector> compose_catalog(const Catalog& catalog, const CompositionConfig& cfg,
                                                     EmbeddingProvider& provider, EnrichmentSetting setting,
                                                     const std::vector<std::string>* ids) {
  cfg.validate();
  std::vector<const DatasetMeta*> datasets;
  if (ids) {
    for (const auto& id : *ids) datasets.push_back(&catalog.at(id));
  } else {
    for (const auto& [id, d] : catalog.datasets) datasets.push_back(&d);
  }

  // Unique text table; std::map keeps texts sorted, so ascending index order
  // is ascending text order, matching column_composite.
  std::map<std::string, std::size_t> text_index;
  std::vector<std::vector<std::string>> per_dataset_terms;
  per_dataset_terms.reserve(datasets.size());
  for (const auto* d : datasets) {
    auto terms = dataset_terms(*d, setting);
    for (auto& t : terms) {
      t = trim(t);
      text_index.emplace(t, 0);
    }
    per_dataset_terms.push_back(std::move(terms));
    if (cfg.scenario == Scenario::tg) text_index.emplace(trim(d->topic), 0);
  }
  std::vector<std::string> texts;
  texts.reserve(text_index.size());
  for (auto& [text, idx] : text_index) {
    idx = texts.size();
    texts.push_back(text);
  }

  const std::size_t dim = provider.dim();
  const std::vector<EmbeddingVector> raw = embed_texts(texts, provider);
  std::vector<EmbeddingVector> table;
  table.reserve(raw.size());
  for (const auto& v : raw) table.push_back(normalized(v));

  std::vector<std::vector<std::size_t>> groups(datasets.size());
  for (std::size_t i = 0; i < datasets.size(); ++i) {
    for (const auto& t : per_dataset_terms[i]) groups[i].push_back(text_index.at(t));
    std::sort(groups[i].begin(), groups[i].end());
  }
  auto composites = kernels::mean_composites_parallel(groups, table, dim);

  const std::string digest = config_digest(provider.identity(), cfg, setting);
  std::map<std::string, DatasetVector> out;
  for (std::size_t i = 0; i < datasets.size(); ++i) {
    DatasetVector dv;
    dv.dataset_id = datasets[i]->id;
    dv.scenario = cfg.scenario;
    dv.config_digest = digest;
    dv.vector = std::move(composites[i]);
    if (cfg.scenario == Scenario::tg) {
      dv.vector = topic_guided(dv.vector, raw[text_index.at(trim(datasets[i]->topic))], cfg.topic_weight);
    }
    dv.degenerate = is_degenerate(dv.vector);
    if (dv.degenerate) warn("dataset " + dv.dataset_id + " has no embeddable terms; excluded from ranking");
    out.emplace(dv.dataset_id, std::move(dv));
  }
  return out;
}

void write_vector_cache(const std::filesystem::path& path, const std::map<std::string, DatasetVector>& vectors) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw input_error("cannot write " + path.string());
  for (const auto& [id, dv] : vectors) {
    json record = {{"id", id},
                   {"scenario", std::string(to_string(dv.scenario))},
                   {"dim", dv.vector.dim()},
                   {"vector", dv.vector.components},
                   {"config_digest", dv.config_digest}};
    out << record.dump() << '\n';
  }
}

std::map<std::string, DatasetVector> read_vector_cache(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open " + path.string());
  std::map<std::string, DatasetVector> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      auto rec = json::parse(line);
      DatasetVector dv;
      dv.dataset_id = rec.at("id").get<std::string>();
      dv.scenario = parse_scenario(rec.at("scenario").get<std::string>());
      dv.vector.components = rec.at("vector").get<std::vector<double>>();
      dv.config_digest = rec.at("config_digest").get<std::string>();
      if (rec.at("dim").get<std::size_t>() != dv.vector.dim()) throw input_error("dim does not match vector length");
      dv.degenerate = is_degenerate(dv.vector);
      out.emplace(dv.dataset_id, std::move(dv));
    } catch (const json::exception& e) {
      throw input_error(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace mus
