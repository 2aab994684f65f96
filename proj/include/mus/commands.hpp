#pragma once

#include "mus/calibration.hpp"
#include "mus/composition.hpp"
#include "mus/embedding.hpp"
#include "mus/evaluation.hpp"
#include "mus/settings.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>

namespace mus {

enum class ProviderKind { local, http };

struct RunConfig {
  Scenario scenario = Scenario::td;
  EnrichmentSetting enrichment = EnrichmentSetting::base;
  double topic_weight = kDefaultTopicWeight;
  std::size_t k = kDefaultK;
  double split_ratio = kDefaultSplitRatio;
  std::uint64_t seed = 42;
  ProviderKind provider = ProviderKind::local;
  std::optional<std::string> endpoint;           // required iff provider == http
  std::optional<std::string> selector_endpoint;  // optional HTTP property selector
  std::size_t local_dim = kDefaultLocalDim;
  std::string base_iri = std::string(kDefaultBaseIri);
  bool cross_topic_negatives = false;

  std::filesystem::path catalog;
  std::optional<std::filesystem::path> manifest;
  std::optional<std::filesystem::path> vocab;
  std::optional<std::filesystem::path> ground_truth;
  std::filesystem::path out = "out";

  /// Checks cross-field invariants (endpoint iff http, ranges).
  void validate() const;
  CompositionConfig composition() const { return {scenario, topic_weight}; }
};

/// Reads RunConfig fields from a JSON object; relative paths resolve against
/// the config file's directory. Unknown keys are an input error.
RunConfig load_run_config(const std::filesystem::path& path);
void apply_run_config_json(RunConfig& cfg, std::string_view json_text, const std::filesystem::path& base_dir = {});

std::unique_ptr<EmbeddingProvider> make_provider(const RunConfig& cfg);

/// CSV (via manifest) -> one .ttl per dataset plus catalog.json.
std::size_t cmd_ingest(const std::filesystem::path& input_dir, const std::optional<std::filesystem::path>& manifest,
                       const std::filesystem::path& out_dir, const std::string& base_iri);

/// Loads the catalog, applies the enrichment setting and writes it to out_dir.
void cmd_enrich(const RunConfig& cfg, const std::filesystem::path& out_dir);

/// Writes the dataset vectors as JSON Lines to out/vectors.jsonl.
void cmd_embed(const RunConfig& cfg);

/// Writes out/split.json and out/calibration.json.
CalibrationResult cmd_calibrate(const RunConfig& cfg);

/// Ranks every query (cut to k) and writes out/rankings.csv. Labels are added
/// when a threshold is supplied.
void cmd_rank(const RunConfig& cfg, std::optional<double> threshold);

/// Evaluates with an existing calibration (and split, or one derived from the
/// seed); writes out/report.json and prints the tables.
EvalReport cmd_evaluate(const RunConfig& cfg, const std::filesystem::path& calibration_file,
                        const std::optional<std::filesystem::path>& split_file, bool csv, std::ostream& report_out);

/// ingest/enrich -> split -> calibrate -> rank/classify -> evaluate. Writes
/// split.json, calibration.json, rankings.csv and report.json to cfg.out.
EvalReport cmd_pipeline(const RunConfig& cfg, std::ostream& report_out, bool csv = false);

}  // namespace mus
