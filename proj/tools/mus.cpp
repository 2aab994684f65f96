// mus: metadata-only table union search.
//
//   mus ingest   --input DIR [--manifest FILE] --out DIR
//   mus enrich   --catalog DIR --enrichment S [--vocab TSV] --out DIR
//   mus embed    --catalog DIR [--scenario td|tg] --out DIR
//   mus calibrate --catalog DIR --ground-truth CSV --out DIR
//   mus rank     --catalog DIR [--threshold T | --calibration FILE] --out DIR
//   mus evaluate --catalog DIR --ground-truth CSV --calibration FILE [--split FILE] --out DIR
//   mus pipeline --config FILE
//
// Exit codes: 0 ok, 2 input/config error, 3 external service error,
// 4 degenerate data.

#include "mus/commands.hpp"
#include "mus/diagnostics.hpp"
#include "mus/error.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

struct Flags {
  std::string config;
  std::uint64_t seed = 0;
  std::string scenario;
  std::string enrichment;
  std::string provider;
  std::string endpoint;
  std::string selector_endpoint;
  std::size_t k = 0;
  double topic_weight = 0.0;
  double split_ratio = 0.0;
  std::string out;
  std::string catalog;
  std::string manifest;
  std::string vocab;
  std::string ground_truth;
  std::string base_iri;
  std::size_t dim = 0;
  bool cross_topic_negatives = false;
  bool quiet = false;
};

void add_global_flags(CLI::App& cmd, Flags& f) {
  cmd.add_option("--config", f.config, "JSON run configuration; flags override it");
  cmd.add_option("--seed", f.seed, "Seed for the topic split");
  cmd.add_option("--scenario", f.scenario, "td or tg");
  cmd.add_option("--enrichment", f.enrichment, "base, dtypes, dbpedia or dtypes+dbpedia");
  cmd.add_option("--provider", f.provider, "local or http");
  cmd.add_option("--endpoint", f.endpoint, "Embedding service URL (provider http)");
  cmd.add_option("--selector-endpoint", f.selector_endpoint, "Optional property selector service URL");
  cmd.add_option("--k", f.k, "Cut-off for ranking metrics");
  cmd.add_option("--topic-weight", f.topic_weight, "Topic weight in the TG scenario");
  cmd.add_option("--split-ratio", f.split_ratio, "Share of topics used for calibration");
  cmd.add_option("--out", f.out, "Output directory");
  cmd.add_option("--catalog", f.catalog, "Catalog directory (.ttl and/or .csv + manifest.json)");
  cmd.add_option("--manifest", f.manifest, "manifest.json mapping file -> {topic, role}");
  cmd.add_option("--vocab", f.vocab, "Vocabulary TSV (iri<TAB>label)");
  cmd.add_option("--ground-truth", f.ground_truth, "CSV query_table,candidate_table,label");
  cmd.add_option("--base-iri", f.base_iri, "Base IRI for dataset and column nodes");
  cmd.add_option("--dim", f.dim, "Dimension of the local embedder");
  cmd.add_flag("--cross-topic-negatives", f.cross_topic_negatives,
               "TG: add unlabelled cross-topic pairs as negatives");
  cmd.add_flag("--quiet", f.quiet, "Suppress warnings");
}

mus::RunConfig build_config(const CLI::App& cmd, const Flags& f) {
  mus::RunConfig cfg;
  if (!f.config.empty()) cfg = mus::load_run_config(f.config);
  auto given = [&](const char* name) { return cmd.count(name) > 0; };
  if (given("--seed")) cfg.seed = f.seed;
  if (given("--scenario")) cfg.scenario = mus::parse_scenario(f.scenario);
  if (given("--enrichment")) cfg.enrichment = mus::parse_enrichment(f.enrichment);
  if (given("--provider")) {
    if (f.provider == "local") cfg.provider = mus::ProviderKind::local;
    else if (f.provider == "http") cfg.provider = mus::ProviderKind::http;
    else throw mus::input_error("unknown provider '" + f.provider + "' (expected local or http)");
  }
  if (given("--endpoint")) cfg.endpoint = f.endpoint;
  if (given("--selector-endpoint")) cfg.selector_endpoint = f.selector_endpoint;
  if (given("--k")) cfg.k = f.k;
  if (given("--topic-weight")) cfg.topic_weight = f.topic_weight;
  if (given("--split-ratio")) cfg.split_ratio = f.split_ratio;
  if (given("--out")) cfg.out = f.out;
  if (given("--catalog")) cfg.catalog = f.catalog;
  if (given("--manifest")) cfg.manifest = f.manifest;
  if (given("--vocab")) cfg.vocab = f.vocab;
  if (given("--ground-truth")) cfg.ground_truth = f.ground_truth;
  if (given("--base-iri")) cfg.base_iri = f.base_iri;
  if (given("--dim")) cfg.local_dim = f.dim;
  if (f.cross_topic_negatives) cfg.cross_topic_negatives = true;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Metadata-only table union search"};
  app.require_subcommand(1);

  Flags flags;
  std::string input_dir;
  std::string calibration_file;
  std::string split_file;
  double threshold = 0.0;
  bool csv = false;

  auto* ingest = app.add_subcommand("ingest", "Extract CSV header metadata into Turtle");
  add_global_flags(*ingest, flags);
  ingest->add_option("--input", input_dir, "Directory of CSV files")->required();

  auto* enrich = app.add_subcommand("enrich", "Add semantic types and/or vocabulary properties");
  add_global_flags(*enrich, flags);

  auto* embed = app.add_subcommand("embed", "Compose dataset vectors (JSON Lines)");
  add_global_flags(*embed, flags);

  auto* calibrate = app.add_subcommand("calibrate", "Pick the similarity threshold on the test split");
  add_global_flags(*calibrate, flags);

  auto* rank = app.add_subcommand("rank", "Rank candidates for every query");
  add_global_flags(*rank, flags);
  rank->add_option("--threshold", threshold, "Label pairs with score >= threshold");
  rank->add_option("--calibration", calibration_file, "Take the threshold from calibration.json");

  auto* evaluate = app.add_subcommand("evaluate", "Score the evaluation split");
  add_global_flags(*evaluate, flags);
  evaluate->add_option("--calibration", calibration_file, "calibration.json")->required();
  evaluate->add_option("--split", split_file, "split.json (default: derived from the seed)");
  evaluate->add_flag("--csv", csv, "Machine-readable output");

  auto* pipeline = app.add_subcommand("pipeline", "Run every stage end to end");
  add_global_flags(*pipeline, flags);
  pipeline->add_flag("--csv", csv, "Machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  std::optional<mus::WarningCapture> silence;
  if (flags.quiet) silence.emplace();

  try {
    if (ingest->parsed()) {
      std::optional<std::filesystem::path> manifest;
      if (!flags.manifest.empty()) manifest = flags.manifest;
      if (flags.out.empty()) throw mus::input_error("ingest requires --out");
      auto n = mus::cmd_ingest(input_dir, manifest, flags.out,
                               flags.base_iri.empty() ? std::string(mus::kDefaultBaseIri) : flags.base_iri);
      std::cout << "ingested " << n << " datasets into " << flags.out << '\n';
      return 0;
    }

    const CLI::App* active = app.get_subcommands().front();
    mus::RunConfig cfg = build_config(*active, flags);

    if (enrich->parsed()) {
      if (!enrich->count("--enrichment") && flags.config.empty()) {
        throw mus::input_error("enrich requires --enrichment");
      }
      mus::cmd_enrich(cfg, cfg.out);
    } else if (embed->parsed()) {
      mus::cmd_embed(cfg);
    } else if (calibrate->parsed()) {
      auto r = mus::cmd_calibrate(cfg);
      std::cout << "threshold " << r.threshold << " (J = " << r.j_statistic << ")\n";
    } else if (rank->parsed()) {
      std::optional<double> t;
      if (rank->count("--threshold")) t = threshold;
      if (!calibration_file.empty()) {
        std::ifstream in(calibration_file);
        if (!in) throw mus::input_error("cannot open " + calibration_file);
        std::stringstream buf;
        buf << in.rdbuf();
        t = mus::calibration_from_json(buf.str()).threshold;
      }
      mus::cmd_rank(cfg, t);
    } else if (evaluate->parsed()) {
      std::optional<std::filesystem::path> split;
      if (!split_file.empty()) split = split_file;
      mus::cmd_evaluate(cfg, calibration_file, split, csv, std::cout);
    } else if (pipeline->parsed()) {
      mus::cmd_pipeline(cfg, std::cout, csv);
    }
    return 0;
  } catch (const mus::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return mus::exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
