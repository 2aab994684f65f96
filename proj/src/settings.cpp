#include "mus/settings.hpp"
#include "mus/error.hpp"

#include <algorithm>
#include <cctype>
#include <string>

namespace mus {

std::string_view to_string(Scenario s) noexcept { return s == Scenario::td ? "td" : "tg"; }

std::string_view to_string(EnrichmentSetting s) noexcept {
  switch (s) {
    case EnrichmentSetting::base: return "base";
    case EnrichmentSetting::dtypes: return "dtypes";
    case EnrichmentSetting::dbpedia: return "dbpedia";
    case EnrichmentSetting::dtypes_dbpedia: return "dtypes+dbpedia";
  }
  return "base";
}

namespace {
std::string lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}
}  // namespace

Scenario parse_scenario(std::string_view text) {
  auto t = lower(text);
  if (t == "td") return Scenario::td;
  if (t == "tg") return Scenario::tg;
  throw input_error("unknown scenario '" + std::string(text) + "' (expected td or tg)");
}

EnrichmentSetting parse_enrichment(std::string_view text) {
  auto t = lower(text);
  if (t == "base") return EnrichmentSetting::base;
  if (t == "dtypes") return EnrichmentSetting::dtypes;
  if (t == "dbpedia") return EnrichmentSetting::dbpedia;
  if (t == "dtypes+dbpedia") return EnrichmentSetting::dtypes_dbpedia;
  throw input_error("unknown enrichment setting '" + std::string(text) +
                    "' (expected base, dtypes, dbpedia or dtypes+dbpedia)");
}

}  // namespace mus
