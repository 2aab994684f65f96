#pragma once

#include <string_view>

namespace mus {

/// TD restricts candidate pools to the query's topic and never embeds the
/// topic; TG pools every candidate and mixes in a topic embedding.
enum class Scenario { td, tg };

/// Which column annotations exist in the catalog and take part in
/// embedding composition.
enum class EnrichmentSetting { base, dtypes, dbpedia, dtypes_dbpedia };

std::string_view to_string(Scenario s) noexcept;
std::string_view to_string(EnrichmentSetting s) noexcept;

/// "td"/"tg" (case-insensitive). Throws input_error otherwise.
Scenario parse_scenario(std::string_view text);

/// "base", "dtypes", "dbpedia", "dtypes+dbpedia". Throws input_error otherwise.
EnrichmentSetting parse_enrichment(std::string_view text);

constexpr bool uses_types(EnrichmentSetting s) noexcept {
  return s == EnrichmentSetting::dtypes || s == EnrichmentSetting::dtypes_dbpedia;
}
constexpr bool uses_properties(EnrichmentSetting s) noexcept {
  return s == EnrichmentSetting::dbpedia || s == EnrichmentSetting::dtypes_dbpedia;
}

}  // namespace mus
