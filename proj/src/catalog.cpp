#include "mus/catalog.hpp"
#include "mus/csv.hpp"
#include "mus/diagnostics.hpp"
#include "mus/error.hpp"
#include "mus/turtle.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace mus {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Role role) noexcept { return role == Role::query ? "query" : "candidate"; }

Role parse_role(std::string_view text) {
  if (text == "query") return Role::query;
  if (text == "candidate") return Role::candidate;
  throw input_error("unknown role '" + std::string(text) + "' (expected query or candidate)");
}

std::string trim(std::string_view text) {
  auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!text.empty() && is_space(text.front())) text.remove_prefix(1);
  while (!text.empty() && is_space(text.back())) text.remove_suffix(1);
  return std::string(text);
}

bool is_absolute_iri(std::string_view text) {
  auto colon = text.find(':');
  if (colon == std::string_view::npos || colon == 0 || colon + 1 == text.size()) return false;
  if (!std::isalpha(static_cast<unsigned char>(text[0]))) return false;
  for (std::size_t i = 1; i < colon; ++i) {
    char c = text[i];
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.')) return false;
  }
  return std::none_of(text.begin(), text.end(), [](char c) {
    return static_cast<unsigned char>(c) <= 0x20 || std::string_view("<>\"{}|\\^`").find(c) != std::string_view::npos;
  });
}

void validate(const ColumnMeta& column) {
  if (trim(column.label).empty()) throw input_error("column label is empty");
  if (column.vocab_property && !is_absolute_iri(*column.vocab_property)) {
    throw input_error("column '" + column.label + "': vocabulary property is not an absolute IRI: " +
                      *column.vocab_property);
  }
}

void validate(const DatasetMeta& dataset) {
  if (dataset.id.empty()) throw input_error("dataset id is empty");
  if (!std::all_of(dataset.id.begin(), dataset.id.end(),
                   [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'; })) {
    throw input_error("dataset id is not IRI-safe: " + dataset.id);
  }
  if (dataset.topic.empty()) throw input_error("dataset " + dataset.id + " has no topic");
  if (dataset.columns.empty()) throw input_error("dataset " + dataset.id + " has no columns");
  for (const auto& c : dataset.columns) validate(c);
}

const DatasetMeta& Catalog::at(const std::string& id) const {
  auto it = datasets.find(id);
  if (it == datasets.end()) throw input_error("unknown dataset id: " + id);
  return it->second;
}

std::vector<std::string> Catalog::topics() const {
  std::set<std::string> s;
  for (const auto& [id, d] : datasets) s.insert(d.topic);
  return {s.begin(), s.end()};
}

std::vector<const DatasetMeta*> Catalog::with_role(Role role) const {
  std::vector<const DatasetMeta*> out;
  for (const auto& [id, d] : datasets) {
    if (d.role == role) out.push_back(&d);
  }
  return out;
}

namespace {

std::string camel_join(std::string_view text) {
  std::string out;
  bool start_of_piece = true;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      out.push_back(start_of_piece ? static_cast<char>(std::toupper(static_cast<unsigned char>(c))) : c);
      start_of_piece = false;
    } else {
      start_of_piece = true;
    }
  }
  return out;
}

}  // namespace

std::string dataset_id_from_title(std::string_view title) {
  auto slash = title.find_last_of("/\\");
  if (slash != std::string_view::npos) title.remove_prefix(slash + 1);
  auto dot = title.rfind('.');
  if (dot != std::string_view::npos && dot > 0) title = title.substr(0, dot);
  return camel_join(title);
}

std::vector<std::string> column_ids(const DatasetMeta& dataset) {
  std::vector<std::string> ids;
  ids.reserve(dataset.columns.size());
  std::map<std::string, int> counts;
  for (std::size_t i = 0; i < dataset.columns.size(); ++i) {
    std::string id;
    for (char c : dataset.columns[i].label) {
      if (std::isalnum(static_cast<unsigned char>(c))) id.push_back(c);
    }
    if (id.empty()) id = "column" + std::to_string(i + 1);
    ++counts[id];
    ids.push_back(std::move(id));
  }
  std::map<std::string, int> seen;
  for (auto& id : ids) {
    if (counts[id] > 1) id += "_" + std::to_string(++seen[id]);
  }
  // Unsuffixed ids are purely alphanumeric, so "_n" never collides with them.
  return ids;
}

DatasetMeta extract_metadata(const std::vector<std::string>& header_row, std::string_view title,
                             std::string_view topic, Role role) {
  if (header_row.empty() || (header_row.size() == 1 && trim(header_row[0]).empty())) {
    throw input_error("empty header row in " + std::string(title));
  }
  DatasetMeta d;
  d.title = std::string(title);
  d.topic = trim(topic);
  d.role = role;
  d.id = dataset_id_from_title(title);
  if (d.id.empty()) throw input_error("cannot derive a dataset id from title '" + std::string(title) + "'");
  if (d.topic.empty()) throw input_error("no topic given for " + std::string(title));
  for (std::size_t i = 0; i < header_row.size(); ++i) {
    std::string label = trim(header_row[i]);
    if (label.empty()) {
      throw input_error("empty header cell at position " + std::to_string(i + 1) + " in " + std::string(title));
    }
    d.columns.push_back({std::move(label), std::nullopt, std::nullopt});
  }
  return d;
}

DatasetMeta extract_metadata_from_file(const fs::path& csv_path, std::string_view topic, Role role) {
  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw input_error("cannot open " + csv_path.string());
  std::vector<std::string> header;
  try {
    header = csv::read_record(in);
  } catch (const Error& e) {
    throw input_error(csv_path.string() + ": " + e.what());
  }
  if (header.empty()) throw input_error("empty header row in " + csv_path.string());
  try {
    return extract_metadata(header, csv_path.filename().string(), topic, role);
  } catch (const Error& e) {
    throw input_error(csv_path.string() + ": " + e.what());
  }
}

std::map<std::string, ManifestEntry> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open manifest " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw input_error("malformed manifest " + path.string() + ": " + e.what());
  }
  if (!doc.is_object()) throw input_error("manifest " + path.string() + " must be a JSON object");
  std::map<std::string, ManifestEntry> out;
  for (const auto& [file, entry] : doc.items()) {
    if (!entry.is_object() || !entry.contains("topic") || !entry["topic"].is_string()) {
      throw input_error("manifest entry for " + file + " needs a string \"topic\"");
    }
    ManifestEntry m;
    m.topic = entry["topic"].get<std::string>();
    m.role = parse_role(entry.value("role", std::string("candidate")));
    out.emplace(file, std::move(m));
  }
  return out;
}

Catalog load_catalog(const fs::path& dir, std::optional<fs::path> manifest_path) {
  if (!fs::is_directory(dir)) throw input_error("not a directory: " + dir.string());
  Catalog cat;
  cat.provenance = dir;

  if (!manifest_path && fs::exists(dir / "manifest.json")) manifest_path = dir / "manifest.json";
  std::map<std::string, ManifestEntry> manifest;
  if (manifest_path) manifest = read_manifest(*manifest_path);

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    if (ext == ".csv" || ext == ".ttl") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    warn("no .csv or .ttl files in " + dir.string() + "; catalog is empty");
    return cat;
  }

  std::map<std::string, fs::path> source_of;
  for (const auto& file : files) {
    const std::string name = file.filename().string();
    auto m = manifest.find(name);
    DatasetMeta d;
    if (file.extension() == ".csv") {
      if (m == manifest.end()) throw input_error("no manifest entry (topic, role) for " + file.string());
      d = extract_metadata_from_file(file, m->second.topic, m->second.role);
    } else {
      std::ifstream in(file, std::ios::binary);
      std::stringstream buf;
      buf << in.rdbuf();
      try {
        d = parse_turtle(buf.str());
      } catch (const TurtleParseError& e) {
        throw TurtleParseError(e.line(), file.string() + ": " + e.what());
      }
      if (m != manifest.end()) {
        d.topic = m->second.topic;
        d.role = m->second.role;
      }
    }
    auto [it, inserted] = source_of.emplace(d.id, file);
    if (!inserted) {
      throw input_error("duplicate dataset id '" + d.id + "' in " + it->second.string() + " and " + file.string());
    }
    cat.datasets.emplace(d.id, std::move(d));
  }

  std::set<std::string> candidate_topics;
  for (const auto* d : cat.with_role(Role::candidate)) candidate_topics.insert(d->topic);
  for (const auto* q : cat.with_role(Role::query)) {
    if (!candidate_topics.count(q->topic)) {
      warn("query " + q->id + " has topic '" + q->topic + "' with no candidates");
    }
  }
  return cat;
}

void write_catalog(const Catalog& catalog, const fs::path& out_dir, std::string_view base_iri) {
  fs::create_directories(out_dir);
  json index = json::object();
  for (const auto& [id, d] : catalog.datasets) {
    const std::string file = id + ".ttl";
    std::ofstream out(out_dir / file, std::ios::binary | std::ios::trunc);
    if (!out) throw input_error("cannot write " + (out_dir / file).string());
    out << serialize_turtle(d, base_iri);
    index[id] = {{"file", file},
                 {"title", d.title},
                 {"topic", d.topic},
                 {"role", std::string(to_string(d.role))},
                 {"columns", d.columns.size()}};
  }
  std::ofstream out(out_dir / "catalog.json", std::ios::binary | std::ios::trunc);
  out << index.dump(2) << '\n';
}

}  // namespace mus
