#include "mus/turtle.hpp"

#include "test_support.hpp"

#include <catch_amalgamated.hpp>

#include <json.hpp>

#include <cstdlib>
#include <sstream>
#include <sys/wait.h>

namespace fs = std::filesystem;
using test_support::read_text;
using test_support::TempDir;
using test_support::write_text;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string("\"") + MUS_BINARY + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

fs::path mini() { return test_support::data_dir() / "mini_benchmark"; }

std::map<std::string, std::string> files_in(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) out[e.path().filename().string()] = read_text(e.path());
  return out;
}

std::string ingest_args(const fs::path& out) {
  return "ingest --input " + q(mini() / "tables") + " --manifest " + q(mini() / "tables" / "manifest.json") +
         " --out " + q(out);
}

}  // namespace

TEST_CASE("ingest is deterministic and rejects empty input", "[cli]") {
  TempDir dir;
  fs::create_directories(dir / "empty");
  CHECK(run("ingest --input " + q(dir / "empty") + " --out " + q(dir / "o")) == 2);

  REQUIRE(run(ingest_args(dir / "a")) == 0);
  REQUIRE(run(ingest_args(dir / "b")) == 0);
  const auto a = files_in(dir / "a");
  CHECK(a.size() == 43);
  CHECK(a.count("catalog.json") == 1);
  CHECK(a == files_in(dir / "b"));
}

TEST_CASE("bad settings map to their exit codes", "[cli]") {
  TempDir dir;
  const std::string cfg = " --config " + q(mini() / "config.json") + " --out " + q(dir / "out");
  CHECK(run("pipeline" + cfg + " --enrichment everything") == 2);
  CHECK(run("pipeline" + cfg + " --scenario xx") == 2);
  CHECK(run("pipeline" + cfg + " --provider http --endpoint " + test_support::dead_endpoint()) == 3);
  CHECK(run("pipeline --no-such-flag") == 2);

  write_text(dir / "bad.json", R"({"scenario":"td","bogus":1})");
  CHECK(run("pipeline --config " + q(dir / "bad.json")) == 2);
}

TEST_CASE("base enrichment leaves an ingested catalog unchanged", "[cli]") {
  TempDir dir;
  REQUIRE(run(ingest_args(dir / "ingested")) == 0);
  REQUIRE(run("enrich --catalog " + q(dir / "ingested") + " --enrichment base --out " + q(dir / "enriched")) == 0);
  CHECK(files_in(dir / "ingested") == files_in(dir / "enriched"));
}

TEST_CASE("full enrichment of the psychology example", "[cli]") {
  TempDir dir;
  fs::create_directories(dir / "in");
  fs::copy_file(test_support::data_dir() / "fixtures" / "psychology_fig.ttl", dir / "in" / "psychology_fig.ttl");
  REQUIRE(run("enrich --catalog " + q(dir / "in") + " --enrichment dtypes+dbpedia --vocab " +
              q(test_support::data_dir() / "vocab" / "dbpedia_properties_sample.tsv") + " --out " + q(dir / "out")) ==
          0);
  fs::path ttl;
  for (const auto& e : fs::directory_iterator(dir / "out"))
    if (e.path().extension() == ".ttl") ttl = e.path();
  REQUIRE_FALSE(ttl.empty());
  const auto d = mus::parse_turtle(read_text(ttl));
  CHECK(d.topic == "psychology");
  REQUIRE(d.columns.size() == 6);
  for (const auto& c : d.columns) {
    CAPTURE(c.label);
    REQUIRE(c.semantic_type);
    REQUIRE(c.vocab_property);
    CHECK(c.vocab_property->rfind("http://dbpedia.org/ontology/", 0) == 0);
  }
  CHECK(*d.columns[0].semantic_type == "gender");
  CHECK(*d.columns[0].vocab_property == "http://dbpedia.org/ontology/gender");
  CHECK(*d.columns[1].vocab_property == "http://dbpedia.org/ontology/age");
}

TEST_CASE("pipeline runs are byte-identical", "[cli]") {
  TempDir dir;
  const std::string base = "pipeline --config " + q(mini() / "config.json") + " --out ";
  REQUIRE(run(base + q(dir / "one")) == 0);
  REQUIRE(run(base + q(dir / "two")) == 0);
  const auto one = files_in(dir / "one");
  for (const auto* name : {"split.json", "calibration.json", "rankings.csv", "report.json"}) CHECK(one.count(name) == 1);
  CHECK(one == files_in(dir / "two"));
}

TEST_CASE("flags override the config file", "[cli]") {
  TempDir dir;
  REQUIRE(run("pipeline --config " + q(mini() / "config.json") + " --k 3 --out " + q(dir / "out")) == 0);
  const auto report = nlohmann::json::parse(read_text(dir / "out" / "report.json"));
  CHECK(report["k"] == 3);
  CHECK(report["enrichment"] == "dtypes+dbpedia");
}

TEST_CASE("TG with zero topic weight reproduces TD on a single-topic lake", "[cli]") {
  TempDir dir;
  fs::create_directories(dir / "lake");
  nlohmann::json manifest = nlohmann::json::object();
  std::string gt = "query_table,candidate_table,label\n";
  const std::vector<std::pair<std::string, std::string>> tables = {
      {"Q", "Name,Age,Gender"}, {"P1", "FullName,Age,Sex"}, {"P2", "Name,Years"},
      {"N1", "Price,Volume"},   {"N2", "Team,Score"},       {"P3", "Gender,Occupation"}};
  for (int side = 0; side < 2; ++side) {
    const std::string topic = side == 0 ? "alpha" : "beta";
    for (const auto& [name, header] : tables) {
      const std::string file = topic + name + ".csv";
      write_text(dir / "lake" / file, header + "\n");
      manifest[file] = {{"topic", topic}, {"role", name == "Q" ? "query" : "candidate"}};
      if (name != "Q") gt += topic + "Q.csv," + file + "," + (name[0] == 'P' ? "1" : "0") + "\n";
    }
  }
  write_text(dir / "lake" / "manifest.json", manifest.dump());
  write_text(dir / "gt.csv", gt);
  const std::string common = "pipeline --catalog " + q(dir / "lake") + " --manifest " +
                             q(dir / "lake" / "manifest.json") + " --ground-truth " + q(dir / "gt.csv") +
                             " --split-ratio 0.5 --out ";
  REQUIRE(run(common + q(dir / "td") + " --scenario td") == 0);
  REQUIRE(run(common + q(dir / "tg") + " --scenario tg --topic-weight 0") == 0);

  const auto td = nlohmann::json::parse(read_text(dir / "td" / "report.json"));
  const auto tg = nlohmann::json::parse(read_text(dir / "tg" / "report.json"));
  // Each split side holds a single topic, so both scenarios share one pool.
  for (const auto* key : {"threshold", "counts", "accuracy_overall", "precision_overall", "map_at_k", "p_at_k",
                          "r_at_k", "queries"}) {
    CAPTURE(key);
    CHECK(td[key] == tg[key]);
  }
  CHECK(read_text(dir / "td" / "rankings.csv") == read_text(dir / "tg" / "rankings.csv"));
  CHECK(read_text(dir / "td" / "calibration.json") != read_text(dir / "tg" / "calibration.json"));
}

TEST_CASE("stage-by-stage runs agree with the pipeline", "[cli]") {
  TempDir dir;
  const auto vocab = q(test_support::data_dir() / "vocab" / "dbpedia_properties_sample.tsv");
  const auto gt = q(mini() / "groundtruth.csv");
  const std::string enriched = " --catalog " + q(dir / "enriched") + " --enrichment dtypes+dbpedia";
  const std::string out = " --out " + q(dir / "run");
  REQUIRE(run(ingest_args(dir / "catalog")) == 0);
  REQUIRE(run("enrich --catalog " + q(dir / "catalog") + " --enrichment dtypes+dbpedia --vocab " + vocab +
              " --out " + q(dir / "enriched")) == 0);
  CHECK(run("embed" + enriched + out) == 0);
  CHECK(fs::exists(dir / "run" / "vectors.jsonl"));
  REQUIRE(run("calibrate" + enriched + " --ground-truth " + gt + out) == 0);
  REQUIRE(run("rank" + enriched + " --calibration " + q(dir / "run" / "calibration.json") + out) == 0);
  REQUIRE(run("evaluate" + enriched + " --ground-truth " + gt + " --calibration " +
              q(dir / "run" / "calibration.json") + " --split " + q(dir / "run" / "split.json") + out) == 0);
  REQUIRE(run("pipeline --config " + q(mini() / "config.json") + " --out " + q(dir / "pipe")) == 0);

  for (const auto* name : {"split.json", "calibration.json", "report.json"}) {
    CAPTURE(name);
    CHECK(read_text(dir / "run" / name) == read_text(dir / "pipe" / name));
  }
  // `rank` covers every query; the pipeline keeps the evaluation side only.
  const auto all = read_text(dir / "run" / "rankings.csv");
  std::istringstream pipe(read_text(dir / "pipe" / "rankings.csv"));
  std::string line;
  std::size_t lines = 0;
  while (std::getline(pipe, line)) {
    CHECK(all.find(line + "\n") != std::string::npos);
    ++lines;
  }
  CHECK(lines > 1);

  CHECK(run("embed --catalog " + q(dir / "catalog") + " --enrichment dbpedia" + out) == 2);
}
