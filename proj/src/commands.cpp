#include "mus/commands.hpp"
#include "mus/catalog.hpp"
#include "mus/diagnostics.hpp"
#include "mus/enrichment.hpp"
#include "mus/error.hpp"
#include "mus/http_client.hpp"
#include "mus/search.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace mus {

namespace fs = std::filesystem;
using nlohmann::json;

void RunConfig::validate() const {
  if (provider == ProviderKind::http && !endpoint) throw input_error("provider http requires --endpoint");
  if (provider == ProviderKind::local && endpoint) throw input_error("--endpoint is only valid with provider http");
  if (k == 0) throw input_error("k must be positive");
  if (!(split_ratio > 0.0 && split_ratio < 1.0)) throw input_error("split ratio must lie in (0, 1)");
  composition().validate();
  if (local_dim < 8) throw input_error("local embedding dimension must be >= 8");
}

void apply_run_config_json(RunConfig& cfg, std::string_view json_text, const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw input_error(std::string("malformed config: ") + e.what());
  }
  if (!doc.is_object()) throw input_error("config must be a JSON object");
  auto path_of = [&](const json& v) {
    fs::path p = v.get<std::string>();
    return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  };
  try {
    for (const auto& [key, v] : doc.items()) {
      if (key == "scenario") cfg.scenario = parse_scenario(v.get<std::string>());
      else if (key == "enrichment") cfg.enrichment = parse_enrichment(v.get<std::string>());
      else if (key == "topic_weight") cfg.topic_weight = v.get<double>();
      else if (key == "k") cfg.k = v.get<std::size_t>();
      else if (key == "split_ratio") cfg.split_ratio = v.get<double>();
      else if (key == "seed") cfg.seed = v.get<std::uint64_t>();
      else if (key == "provider") {
        const auto p = v.get<std::string>();
        if (p == "local") cfg.provider = ProviderKind::local;
        else if (p == "http") cfg.provider = ProviderKind::http;
        else throw input_error("unknown provider '" + p + "' (expected local or http)");
      } else if (key == "endpoint") {
        if (v.is_null()) cfg.endpoint.reset();
        else cfg.endpoint = v.get<std::string>();
      } else if (key == "selector_endpoint") {
        if (v.is_null()) cfg.selector_endpoint.reset();
        else cfg.selector_endpoint = v.get<std::string>();
      } else if (key == "local_dim") cfg.local_dim = v.get<std::size_t>();
      else if (key == "base_iri") cfg.base_iri = v.get<std::string>();
      else if (key == "cross_topic_negatives") cfg.cross_topic_negatives = v.get<bool>();
      else if (key == "catalog") cfg.catalog = path_of(v);
      else if (key == "manifest") cfg.manifest = path_of(v);
      else if (key == "vocab") cfg.vocab = path_of(v);
      else if (key == "ground_truth") cfg.ground_truth = path_of(v);
      else if (key == "out") cfg.out = path_of(v);
      else throw input_error("unknown config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw input_error(std::string("config has a value of the wrong type: ") + e.what());
  }
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  RunConfig cfg;
  apply_run_config_json(cfg, buf.str(), path.parent_path());
  return cfg;
}

namespace {

class OwnedCachingProvider final : public EmbeddingProvider {
public:
  explicit OwnedCachingProvider(std::unique_ptr<EmbeddingProvider> inner)
      : inner_(std::move(inner)), cache_(*inner_) {}
  std::string identity() const override { return cache_.identity(); }
  std::size_t dim() const override { return cache_.dim(); }
  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) override {
    return cache_.embed_batch(texts);
  }
  bool concurrent_safe() const override { return true; }

private:
  std::unique_ptr<EmbeddingProvider> inner_;
  CachingProvider cache_;
};

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw input_error("cannot write " + path.string());
  out << content;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Catalog load_nonempty(const RunConfig& cfg) {
  if (cfg.catalog.empty()) throw input_error("no catalog directory given");
  Catalog cat = load_catalog(cfg.catalog, cfg.manifest);
  if (cat.datasets.empty()) throw input_error("catalog " + cfg.catalog.string() + " contains no datasets");
  return cat;
}

bool has_properties(const Catalog& cat) {
  for (const auto& [id, d] : cat.datasets) {
    for (const auto& c : d.columns) {
      if (c.vocab_property) return true;
    }
  }
  return false;
}

Catalog load_enriched(const RunConfig& cfg, EmbeddingProvider& provider) {
  Catalog cat = load_nonempty(cfg);
  if (cfg.enrichment == EnrichmentSetting::base) return cat;
  // A catalog written by `enrich` keeps its annotations unless a vocabulary is supplied.
  if (uses_properties(cfg.enrichment) && !cfg.vocab && has_properties(cat)) return cat;

  DictionaryTypeAnnotator annotator;
  TopCandidateSelector top;
  std::unique_ptr<HttpPropertySelector> remote;
  std::vector<VocabularyEntry> vocab;
  EnrichmentSettings settings;
  settings.setting = cfg.enrichment;
  settings.annotator = &annotator;
  settings.selector = &top;
  if (uses_properties(cfg.enrichment)) {
    if (!cfg.vocab) throw input_error("enrichment " + std::string(to_string(cfg.enrichment)) + " requires --vocab");
    vocab = load_vocabulary(*cfg.vocab);
    settings.vocab = &vocab;
    settings.embedder = &provider;
    if (cfg.selector_endpoint) {
      remote = std::make_unique<HttpPropertySelector>(*cfg.selector_endpoint);
      settings.selector = remote.get();
    }
  }
  return enrich_catalog(cat, settings);
}

SplitSpec split_for(const RunConfig& cfg, const Catalog& cat, const std::optional<fs::path>& split_file) {
  if (split_file) return split_from_json(read_file(*split_file));
  return split_by_topic(cat, cfg.split_ratio, cfg.seed);
}

GroundTruth ground_truth_for(const RunConfig& cfg, const Catalog& cat) {
  if (!cfg.ground_truth) throw input_error("no ground truth given (--ground-truth)");
  return load_ground_truth(*cfg.ground_truth, &cat);
}

}  // namespace

std::unique_ptr<EmbeddingProvider> make_provider(const RunConfig& cfg) {
  std::unique_ptr<EmbeddingProvider> inner;
  if (cfg.provider == ProviderKind::http) inner = std::make_unique<HttpEmbeddingProvider>(*cfg.endpoint);
  else inner = std::make_unique<LocalEmbedder>(cfg.local_dim);
  return std::make_unique<OwnedCachingProvider>(std::move(inner));
}

std::size_t cmd_ingest(const fs::path& input_dir, const std::optional<fs::path>& manifest, const fs::path& out_dir,
                       const std::string& base_iri) {
  Catalog cat = load_catalog(input_dir, manifest);
  if (cat.datasets.empty()) throw input_error("no datasets found in " + input_dir.string());
  write_catalog(cat, out_dir, base_iri);
  return cat.datasets.size();
}

void cmd_enrich(const RunConfig& cfg, const fs::path& out_dir) {
  cfg.validate();
  auto provider = make_provider(cfg);
  Catalog cat = load_enriched(cfg, *provider);
  write_catalog(cat, out_dir, cfg.base_iri);
}

void cmd_embed(const RunConfig& cfg) {
  cfg.validate();
  auto provider = make_provider(cfg);
  Catalog cat = load_enriched(cfg, *provider);
  auto vectors = compose_catalog(cat, cfg.composition(), *provider, cfg.enrichment);
  fs::create_directories(cfg.out);
  write_vector_cache(cfg.out / "vectors.jsonl", vectors);
}

CalibrationResult cmd_calibrate(const RunConfig& cfg) {
  cfg.validate();
  auto provider = make_provider(cfg);
  Catalog cat = load_enriched(cfg, *provider);
  const SplitSpec split = split_by_topic(cat, cfg.split_ratio, cfg.seed);
  const GroundTruth gt = ground_truth_for(cfg, cat);
  auto result = calibrate(cat, split, gt, cfg.composition(), cfg.enrichment, *provider,
                          PairScoringOptions{cfg.cross_topic_negatives});
  fs::create_directories(cfg.out);
  write_file(cfg.out / "split.json", to_json(split));
  write_file(cfg.out / "calibration.json", to_json(result));
  return result;
}

void cmd_rank(const RunConfig& cfg, std::optional<double> threshold) {
  cfg.validate();
  auto provider = make_provider(cfg);
  Catalog cat = load_enriched(cfg, *provider);
  auto vectors = compose_catalog(cat, cfg.composition(), *provider, cfg.enrichment);
  std::vector<RankedList> rankings;
  for (const auto* q : cat.with_role(Role::query)) {
    const auto& qv = vectors.at(q->id);
    if (qv.degenerate) continue;
    rankings.push_back(rank_candidates(qv, candidate_pool(*q, cat, vectors, cfg.scenario), cfg.k));
  }
  fs::create_directories(cfg.out);
  std::ofstream out(cfg.out / "rankings.csv", std::ios::binary | std::ios::trunc);
  write_rankings_csv(out, rankings, threshold);
}

EvalReport cmd_evaluate(const RunConfig& cfg, const fs::path& calibration_file,
                        const std::optional<fs::path>& split_file, bool csv, std::ostream& report_out) {
  cfg.validate();
  auto provider = make_provider(cfg);
  Catalog cat = load_enriched(cfg, *provider);
  const SplitSpec split = split_for(cfg, cat, split_file);
  const GroundTruth gt = ground_truth_for(cfg, cat);
  const CalibrationResult calib = calibration_from_json(read_file(calibration_file));
  auto evaluation = evaluate(cat, split, gt, calib, cfg.composition(), cfg.enrichment, *provider, cfg.k,
                             PairScoringOptions{cfg.cross_topic_negatives});
  fs::create_directories(cfg.out);
  write_file(cfg.out / "report.json", to_json(evaluation.report));
  report_out << (csv ? render_csv(evaluation.report) : render_table(evaluation.report));
  return evaluation.report;
}

EvalReport cmd_pipeline(const RunConfig& cfg, std::ostream& report_out, bool csv) {
  cfg.validate();
  auto provider = make_provider(cfg);
  const Catalog cat = load_enriched(cfg, *provider);
  const SplitSpec split = split_by_topic(cat, cfg.split_ratio, cfg.seed);
  const GroundTruth gt = ground_truth_for(cfg, cat);
  const PairScoringOptions options{cfg.cross_topic_negatives};

  const CalibrationResult calib =
      calibrate(cat, split, gt, cfg.composition(), cfg.enrichment, *provider, options);
  auto evaluation = evaluate(cat, split, gt, calib, cfg.composition(), cfg.enrichment, *provider, cfg.k, options);

  fs::create_directories(cfg.out);
  write_file(cfg.out / "split.json", to_json(split));
  write_file(cfg.out / "calibration.json", to_json(calib));
  {
    std::ofstream out(cfg.out / "rankings.csv", std::ios::binary | std::ios::trunc);
    write_rankings_csv(out, evaluation.rankings, calib.threshold);
  }
  write_file(cfg.out / "report.json", to_json(evaluation.report));
  report_out << (csv ? render_csv(evaluation.report) : render_table(evaluation.report));
  return evaluation.report;
}

}  // namespace mus
