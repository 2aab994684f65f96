#include "mus/catalog.hpp"
#include "mus/csv.hpp"
#include "mus/diagnostics.hpp"
#include "mus/error.hpp"
#include "mus/turtle.hpp"

#include "oracles.hpp"
#include "test_support.hpp"

#include <catch_amalgamated.hpp>

#include <json.hpp>

using namespace mus;
using test_support::TempDir;
using test_support::write_text;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an exception");
  return ErrorKind::internal;
}

}  // namespace

TEST_CASE("csv record reader splits quoted fields like a reference parser", "[csv]") {
  const std::string row = "x,\"a,b\",y";
  const auto fields = csv::parse_record(row);
  CHECK(fields == oracle::rfc4180_fields(row));
  CHECK(fields == std::vector<std::string>{"x", "a,b", "y"});

  for (const std::string r : {std::string("a,,b"), std::string("\"he said \"\"hi\"\"\",2"), std::string(",,"),
                              std::string("\"multi\nline\",z\r\nnext,row"), std::string("plain")}) {
    CAPTURE(r);
    CHECK(csv::parse_record(r) == oracle::rfc4180_fields(r));
  }
}

TEST_CASE("csv reader stops after the first record", "[csv]") {
  std::string bytes = "\xEF\xBB\xBF" "A,B\r\n";
  bytes += std::string("\xff\xfe\"\x00\x01,,\"", 9);  // malformed second row, unterminated quote
  std::istringstream in(bytes);
  CHECK(csv::read_record(in) == std::vector<std::string>{"A", "B"});
  CHECK_THROWS(csv::read_record(in));
}

TEST_CASE("csv escape round-trips through the parser", "[csv]") {
  const std::vector<std::string> fields = {"plain", "with,comma", "quote\"inside", "line\nbreak", ""};
  std::string row;
  for (std::size_t i = 0; i < fields.size(); ++i) row += (i ? "," : "") + csv::escape_field(fields[i]);
  CHECK(csv::parse_record(row) == fields);
}

TEST_CASE("extract_metadata builds the dataset of the psychology example", "[extract]") {
  const auto d = extract_metadata({"Gender", "Age", "EducationLevel", "Occupation", "MaritalStatus", "HasChildren"},
                                  "Psychology_UEA3GE8N.csv", "psychology", Role::candidate);
  CHECK(d.id == "PsychologyUEA3GE8N");
  CHECK(d.title == "Psychology_UEA3GE8N.csv");
  CHECK(d.topic == "psychology");
  REQUIRE(d.columns.size() == 6);
  CHECK(d.columns[4].label == "MaritalStatus");
  for (const auto& c : d.columns) {
    CHECK_FALSE(c.semantic_type);
    CHECK_FALSE(c.vocab_property);
  }
}

TEST_CASE("extract_metadata minimal and quoted headers", "[extract]") {
  const auto a = extract_metadata({"A"}, "A.csv", "t", Role::query);
  REQUIRE(a.columns.size() == 1);
  CHECK(a.columns[0].label == "A");
  CHECK(a.id == "A");

  const auto q = extract_metadata(csv::parse_record("x,\"a,b\",y"), "q.csv", "t", Role::candidate);
  REQUIRE(q.columns.size() == 3);
  CHECK(q.columns[1].label == "a,b");
}

TEST_CASE("extract_metadata rejects empty headers and suffixes duplicate column ids", "[extract]") {
  CHECK(kind_of([] { extract_metadata({}, "e.csv", "t", Role::candidate); }) == ErrorKind::input);
  CHECK(kind_of([] { extract_metadata({"a", "  "}, "e.csv", "t", Role::candidate); }) == ErrorKind::input);

  const auto d = extract_metadata({"Age", "Name", "Age", "Age"}, "d.csv", "t", Role::candidate);
  CHECK(column_ids(d) == std::vector<std::string>{"Age_1", "Name", "Age_2", "Age_3"});
}

TEST_CASE("extract from file reads only the header row", "[extract]") {
  TempDir dir;
  std::string bytes = "Gender,Age\n";
  bytes += std::string("\"\xff\xfe\x00 unterminated", 16);
  write_text(dir / "Survey_1.csv", bytes);
  const auto d = extract_metadata_from_file(dir / "Survey_1.csv", "t", Role::candidate);
  CHECK(d.columns.size() == 2);
  CHECK(d.id == "Survey1");

  write_text(dir / "empty.csv", "");
  try {
    extract_metadata_from_file(dir / "empty.csv", "t", Role::candidate);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("empty.csv") != std::string::npos);
  }
}

TEST_CASE("dataset ids from titles", "[extract]") {
  CHECK(dataset_id_from_title("Psychology_UEA3GE8N.csv") == "PsychologyUEA3GE8N");
  CHECK(dataset_id_from_title("dir/sub/my-data set.v2.csv") == "MyDataSetV2");
  CHECK(dataset_id_from_title("A.csv") == "A");
}

TEST_CASE("serialize_turtle emits enrichment triples only when present", "[turtle]") {
  DatasetMeta d;
  d.id = "D1";
  d.title = "D1.csv";
  d.topic = "psychology";
  d.columns = {{"Gender", "gender", std::string(ns::dbpedia) + "gender"}, {"Age", std::nullopt, std::nullopt}};
  const auto ttl = serialize_turtle(d);
  CHECK(ttl.find("dcterms:type \"gender\" ;") != std::string::npos);
  CHECK(ttl.find("dsv:columnProperty dbpedia:gender") != std::string::npos);
  CHECK(ttl.find("<http://metaUnionSearch/datasets/D1/column/Age> a dsv:Column") != std::string::npos);

  const auto age_pos = ttl.find("/column/Age> a dsv:Column");
  const auto age_block = ttl.substr(age_pos);
  CHECK(age_block.find("rdfs:label \"Age\"") != std::string::npos);
  CHECK(age_block.find("dcterms:type") == std::string::npos);
  CHECK(age_block.find("dsv:columnProperty") == std::string::npos);

  for (const auto* prefix : {"@prefix dsv:", "@prefix dcterms:", "@prefix rdfs:", "@prefix dbpedia:"}) {
    CHECK(ttl.find(prefix) != std::string::npos);
  }
  CHECK(ttl.find("@prefix", ttl.find("@prefix dbpedia:") + 1) == std::string::npos);
}

TEST_CASE("turtle round trip on random datasets", "[turtle][property]") {
  std::mt19937_64 rng(20240611);
  for (int i = 0; i < 100; ++i) {
    const auto d = test_support::random_dataset(rng);
    const auto text = serialize_turtle(d);
    const auto back = parse_turtle(text);
    CAPTURE(text);
    REQUIRE(back == d);
    CHECK(serialize_turtle(back) == text);
  }
}

TEST_CASE("the figure listing parses with trimmed labels and enrichments", "[turtle]") {
  const auto text = test_support::read_text(test_support::data_dir() / "fixtures" / "psychology_fig.ttl");
  WarningCapture warnings;
  const auto d = parse_turtle(text);
  CHECK(d.id == "PsychologyUEA3GE8N");
  CHECK(d.topic == "psychology");
  CHECK(d.title == "Psychology_UEA3GE8N.csv");
  REQUIRE(d.columns.size() == 6);
  CHECK(d.columns[0].label == "Gender");
  CHECK(d.columns[3].semantic_type == "position");
  CHECK(d.columns[4].label == "MaritalStatus");
  CHECK(d.columns[4].semantic_type == "status");
  CHECK(d.columns[4].vocab_property == std::string(ns::dbpedia) + "spouse");
  CHECK(d.columns[5].vocab_property == std::string(ns::dbpedia) + "child");
  CHECK(warnings.messages().empty());
}

TEST_CASE("hand-written turtle with a padded label", "[turtle]") {
  const std::string doc = R"(@prefix dsv: <https://w3id.org/dsv-ontology#> .
@prefix dcterms: <http://purl.org/dc/terms/> .
@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .
<http://x/datasets/T> a dsv:Dataset ;
  dcterms:subject "t" ;
  dcterms:title "T.csv" ;
  dsv:datasetSchema [ dsv:column <http://x/datasets/T/column/Gender> ] .
<http://x/datasets/T/column/Gender> a dsv:Column ;
  rdfs:label " Gender" .
)";
  const auto d = parse_turtle(doc);
  REQUIRE(d.columns.size() == 1);
  CHECK(d.columns[0].label == "Gender");
}

TEST_CASE("turtle structural errors carry a line", "[turtle]") {
  const std::string no_subject = R"(@prefix dsv: <https://w3id.org/dsv-ontology#> .
@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .
<http://x/datasets/T> a dsv:Dataset ;
  dsv:datasetSchema [ dsv:column <http://x/datasets/T/column/A> ] .
<http://x/datasets/T/column/A> a dsv:Column ; rdfs:label "A" .
)";
  try {
    parse_turtle(no_subject);
    FAIL("expected a parse error");
  } catch (const TurtleParseError& e) {
    CHECK(e.line() >= 1);
    CHECK(std::string(e.what()).find("subject") != std::string::npos);
  }

  const std::string no_columns = R"(@prefix dsv: <https://w3id.org/dsv-ontology#> .
@prefix dcterms: <http://purl.org/dc/terms/> .
<http://x/datasets/T> a dsv:Dataset ;
  dcterms:subject "t" .
)";
  CHECK_THROWS_AS(parse_turtle(no_columns), TurtleParseError);

  CHECK_THROWS_AS(parse_turtle("@prefix dsv: <https://w3id.org/dsv-ontology#> .\n<a> a dsv:Dataset ;\n \"oops"),
                  TurtleParseError);
}

TEST_CASE("unknown triples are skipped with a warning", "[turtle]") {
  DatasetMeta d{"T", "T.csv", "t", {{"A", std::nullopt, std::nullopt}}, Role::candidate};
  auto text = serialize_turtle(d);
  text += "<http://metaUnionSearch/datasets/T> <http://example.org/extra> \"value\" .\n";
  WarningCapture warnings;
  CHECK(parse_turtle(text) == d);
  CHECK(warnings.contains("unrecognised"));
}

TEST_CASE("load_catalog combines csv and turtle sources", "[catalog]") {
  TempDir dir;
  write_text(dir / "Sports_Q.csv", "Player,Team\n1,2\n");
  write_text(dir / "Sports_C.csv", "Name,Club\n");
  write_text(dir / "manifest.json",
             R"({"Sports_Q.csv": {"topic": "sports", "role": "query"},
                 "Sports_C.csv": {"topic": "sports", "role": "candidate"}})");
  DatasetMeta fin{"FinanceA", "Finance_A.csv", "finance", {{"Amount", std::nullopt, std::nullopt}}, Role::candidate};
  write_text(dir / "FinanceA.ttl", serialize_turtle(fin));

  const auto cat = load_catalog(dir.path());
  REQUIRE(cat.datasets.size() == 3);
  CHECK(cat.at("SportsQ").role == Role::query);
  CHECK(cat.at("SportsC").topic == "sports");
  CHECK(cat.at("FinanceA") == fin);
  CHECK(cat.topics() == std::vector<std::string>{"finance", "sports"});
}

TEST_CASE("load_catalog rejects an id defined by a csv and a turtle file", "[catalog]") {
  TempDir dir;
  write_text(dir / "Psychology_X.csv", "A,B\n");
  write_text(dir / "manifest.json", R"({"Psychology_X.csv": {"topic": "p", "role": "candidate"}})");
  DatasetMeta d{"PsychologyX", "Psychology_X.csv", "p", {{"A", std::nullopt, std::nullopt}}, Role::candidate};
  write_text(dir / "PsychologyX.ttl", serialize_turtle(d));
  try {
    load_catalog(dir.path());
    FAIL("expected a duplicate-id error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::input);
    const std::string msg = e.what();
    CHECK(msg.find("Psychology_X.csv") != std::string::npos);
    CHECK(msg.find("PsychologyX.ttl") != std::string::npos);
  }
}

TEST_CASE("load_catalog on an empty directory warns", "[catalog]") {
  TempDir dir;
  WarningCapture warnings;
  const auto cat = load_catalog(dir.path());
  CHECK(cat.datasets.empty());
  CHECK_FALSE(warnings.messages().empty());
}

TEST_CASE("load_catalog requires a manifest entry for csv files", "[catalog]") {
  TempDir dir;
  write_text(dir / "A.csv", "x\n");
  CHECK(kind_of([&] { load_catalog(dir.path()); }) == ErrorKind::input);
}

TEST_CASE("load_catalog warns when a query topic has no candidates", "[catalog]") {
  TempDir dir;
  DatasetMeta q{"Q", "Q.csv", "lonely", {{"A", std::nullopt, std::nullopt}}, Role::query};
  write_text(dir / "Q.ttl", serialize_turtle(q));
  WarningCapture warnings;
  load_catalog(dir.path());
  CHECK(warnings.contains("lonely"));
}

TEST_CASE("write_catalog output reloads to the same catalog and is stable", "[catalog]") {
  TempDir dir;
  std::mt19937_64 rng(5);
  Catalog cat;
  for (int i = 0; i < 10; ++i) {
    auto d = test_support::random_dataset(rng);
    d.topic = i % 2 ? "a" : "b";
    d.role = Role::candidate;
    cat.datasets[d.id] = d;
  }
  write_catalog(cat, dir / "one");
  write_catalog(cat, dir / "two");
  CHECK(load_catalog(dir / "one") == cat);
  for (const auto& [id, d] : cat.datasets) {
    CHECK(test_support::read_text(dir / "one" / (id + ".ttl")) == test_support::read_text(dir / "two" / (id + ".ttl")));
  }
  const auto index = nlohmann::json::parse(test_support::read_text(dir / "one" / "catalog.json"));
  CHECK(index.is_object());
}
