#include "mus/enrichment.hpp"
#include "mus/composition.hpp"
#include "mus/diagnostics.hpp"
#include "mus/error.hpp"
#include "mus/search.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <sstream>

namespace mus {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 78> kInventory = {
    "address",     "affiliate",  "affiliation", "age",          "album",     "area",        "artist",
    "birth Date",  "birth Place", "brand",      "capacity",     "category",  "city",        "class",
    "classification", "club",    "code",        "collection",   "command",   "company",     "component",
    "continent",   "country",    "county",      "creator",      "credit",    "currency",    "day",
    "depth",       "description", "director",   "duration",     "education", "elevation",   "family",
    "file Size",   "format",     "gender",      "genre",        "grades",    "industry",    "isbn",
    "jockey",      "language",   "location",    "manufacturer", "name",      "nationality", "notes",
    "operator",    "order",      "organisation", "origin",      "owner",     "person",      "plays",
    "position",    "product",    "publisher",   "range",        "rank",      "ranking",     "region",
    "religion",    "requirement", "result",     "sales",        "service",   "sex",         "species",
    "state",       "status",     "symbol",      "team",         "team Name", "type",        "weight",
    "year",
};

// Header vocabulary that differs from the inventory wording.
const std::map<std::string, std::string, std::less<>>& synonyms() {
  static const std::map<std::string, std::string, std::less<>> table = {
      {"occupation", "position"},   {"job", "position"},         {"profession", "position"},
      {"organization", "organisation"}, {"org", "organisation"}, {"employer", "company"},
      {"firm", "company"},          {"lang", "language"},        {"dob", "birth date"},
      {"birthdate", "birth date"},  {"birthday", "birth date"},  {"birthplace", "birth place"},
      {"kind", "type"},             {"nation", "country"},       {"grade", "grades"},
      {"gpa", "grades"},            {"yr", "year"},              {"note", "notes"},
      {"comment", "notes"},         {"comments", "notes"},       {"desc", "description"},
      {"addr", "address"},          {"qualification", "education"}, {"degree", "education"},
      {"sector", "industry"},       {"province", "region"},      {"outcome", "result"},
  };
  return table;
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::istringstream in(split_identifier_words(text));
  for (std::string w; in >> w;) words.push_back(std::move(w));
  return words;
}

const std::vector<std::vector<std::string>>& inventory_words() {
  static const auto words = [] {
    std::vector<std::vector<std::string>> out;
    for (auto t : kInventory) {
      std::vector<std::string> w;
      std::istringstream in{std::string(t)};
      for (std::string s; in >> s;) {
        std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        w.push_back(std::move(s));
      }
      out.push_back(std::move(w));
    }
    return out;
  }();
  return words;
}

bool is_type_word(std::string_view w) {
  for (const auto& tw : inventory_words()) {
    if (std::find(tw.begin(), tw.end(), w) != tw.end()) return true;
  }
  return false;
}

}  // namespace

std::span<const std::string_view> semantic_type_inventory() noexcept { return kInventory; }

bool in_type_inventory(std::string_view type) noexcept {
  return std::find(kInventory.begin(), kInventory.end(), type) != kInventory.end();
}

std::optional<std::string> DictionaryTypeAnnotator::annotate(const ColumnMeta& column) {
  std::vector<std::string> words;
  for (auto& w : split_words(column.label)) {
    if (auto it = synonyms().find(w); it != synonyms().end()) {
      for (auto& s : split_words(it->second)) words.push_back(std::move(s));
    } else if (!is_type_word(w) && w.size() > 3 && w.back() == 's' && is_type_word(w.substr(0, w.size() - 1))) {
      words.push_back(w.substr(0, w.size() - 1));
    } else {
      words.push_back(std::move(w));
    }
  }

  std::optional<std::size_t> best;
  std::size_t best_len = 0;
  std::size_t best_end = 0;
  const auto& types = inventory_words();
  for (std::size_t t = 0; t < types.size(); ++t) {
    const auto& tw = types[t];
    if (tw.size() > words.size()) continue;
    for (std::size_t start = 0; start + tw.size() <= words.size(); ++start) {
      if (!std::equal(tw.begin(), tw.end(), words.begin() + static_cast<std::ptrdiff_t>(start))) continue;
      const std::size_t end = start + tw.size();
      if (!best || tw.size() > best_len || (tw.size() == best_len && end > best_end)) {
        best = t;
        best_len = tw.size();
        best_end = end;
      }
    }
  }
  if (!best) return std::nullopt;
  return std::string(kInventory[*best]);
}

std::optional<std::string> FixedTypeAnnotator::annotate(const ColumnMeta& column) {
  auto it = table_.find(column.label);
  if (it == table_.end()) return std::nullopt;
  return it->second;
}

ColumnMeta annotate_semantic_type(const ColumnMeta& column, TypeAnnotator& annotator) {
  ColumnMeta out = column;
  std::optional<std::string> type;
  try {
    type = annotator.annotate(column);
  } catch (const std::exception& e) {
    warn("type annotation failed for column '" + column.label + "': " + e.what());
    return out;
  }
  if (!type) return out;
  if (!in_type_inventory(*type)) {
    warn("annotator returned '" + *type + "' for column '" + column.label + "', which is not in " +
         std::string(kTypeInventoryVersion) + "; ignored");
    return out;
  }
  out.semantic_type = std::move(type);
  return out;
}

// ---------------------------------------------------------------------------

std::vector<VocabularyEntry> parse_vocabulary(std::string_view tsv) {
  std::vector<VocabularyEntry> out;
  std::istringstream in{std::string(tsv)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw input_error("vocabulary line " + std::to_string(lineno) + ": expected iri<TAB>label");
    }
    VocabularyEntry e{trim(line.substr(0, tab)), trim(line.substr(tab + 1))};
    if (!is_absolute_iri(e.iri)) {
      throw input_error("vocabulary line " + std::to_string(lineno) + ": not an absolute IRI: " + e.iri);
    }
    if (e.label.empty()) throw input_error("vocabulary line " + std::to_string(lineno) + ": empty label");
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<VocabularyEntry> load_vocabulary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot open vocabulary " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_vocabulary(buf.str());
}

bool PropertyCandidateSet::contains(std::string_view iri) const {
  return std::any_of(candidates.begin(), candidates.end(), [&](const auto& c) { return c.entry.iri == iri; });
}

VocabularyIndex::VocabularyIndex(std::vector<VocabularyEntry> vocab, EmbeddingProvider& provider)
    : entries_(std::move(vocab)) {
  if (entries_.empty()) throw input_error("vocabulary is empty");
  std::vector<std::string> labels;
  labels.reserve(entries_.size());
  for (const auto& e : entries_) labels.push_back(e.label);
  vectors_ = embed_texts(labels, provider);
}

PropertyCandidateSet VocabularyIndex::rank(std::string_view column_label, const EmbeddingVector& label_vector,
                                           std::size_t limit) const {
  PropertyCandidateSet cs;
  cs.column_label = std::string(column_label);
  if (is_degenerate(label_vector)) return cs;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (is_degenerate(vectors_[i])) continue;
    cs.candidates.push_back({entries_[i], similarity(label_vector, vectors_[i])});
  }
  auto before = [](const PropertyCandidate& a, const PropertyCandidate& b) {
    if (a.cosine != b.cosine) return a.cosine > b.cosine;
    return a.entry.iri < b.entry.iri;
  };
  const std::size_t keep = std::min(limit, cs.candidates.size());
  std::partial_sort(cs.candidates.begin(), cs.candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                    cs.candidates.end(), before);
  cs.candidates.resize(keep);
  return cs;
}

PropertyCandidateSet rank_property_candidates(std::string_view column_label, const std::vector<VocabularyEntry>& vocab,
                                              EmbeddingProvider& embedder) {
  VocabularyIndex index(vocab, embedder);
  return index.rank(column_label, embed_text(column_label, embedder));
}

// ---------------------------------------------------------------------------

std::optional<std::string> TopCandidateSelector::select(std::string_view, const PropertyCandidateSet& cs) {
  if (cs.candidates.empty()) return std::nullopt;
  return cs.candidates.front().entry.iri;
}

std::optional<std::string> FixedPropertySelector::select(std::string_view column_label, const PropertyCandidateSet& cs) {
  auto it = table_.find(std::string(column_label));
  if (it != table_.end()) return it->second;
  return TopCandidateSelector{}.select(column_label, cs);
}

HttpPropertySelector::HttpPropertySelector(const std::string& url, HttpOptions options)
    : endpoint_(parse_endpoint(url)), options_(options) {}

std::optional<std::string> HttpPropertySelector::select(std::string_view column_label, const PropertyCandidateSet& cs) {
  json request = {{"column", std::string(column_label)}, {"candidates", json::array()}};
  for (const auto& c : cs.candidates) request["candidates"].push_back({{"iri", c.entry.iri}, {"label", c.entry.label}});
  const std::string body = post_json_with_retry(endpoint_, "/select", request.dump(), options_);
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::exception& e) {
    throw external_error("malformed /select response: " + std::string(e.what()), false);
  }
  if (!doc.contains("iri") || doc["iri"].is_null()) return std::nullopt;
  if (!doc["iri"].is_string()) throw external_error("/select response iri is not a string", false);
  return doc["iri"].get<std::string>();
}

SelectionOutcome select_property(const PropertyCandidateSet& cs, PropertySelector& selector) {
  SelectionOutcome out;
  if (cs.candidates.empty()) return out;
  std::optional<std::string> choice;
  try {
    choice = selector.select(cs.column_label, cs);
  } catch (const std::exception& e) {
    warn("property selector failed for column '" + cs.column_label + "': " + e.what() + "; using top candidate");
    out.entry = cs.candidates.front().entry;
    out.fell_back = true;
    return out;
  }
  if (!choice) return out;
  for (const auto& c : cs.candidates) {
    if (c.entry.iri == *choice) {
      out.entry = c.entry;
      return out;
    }
  }
  warn("selector chose " + *choice + " for column '" + cs.column_label +
       "', which is not among its candidates; using top candidate");
  out.entry = cs.candidates.front().entry;
  out.fell_back = true;
  return out;
}

// ---------------------------------------------------------------------------

Catalog enrich_catalog(const Catalog& catalog, const EnrichmentSettings& settings) {
  Catalog out = catalog;
  if (settings.setting == EnrichmentSetting::base) return out;

  if (uses_types(settings.setting)) {
    if (!settings.annotator) throw input_error("setting " + std::string(to_string(settings.setting)) + " needs a type annotator");
    for (auto& [id, d] : out.datasets) {
      for (auto& c : d.columns) c = annotate_semantic_type(c, *settings.annotator);
    }
  }

  if (uses_properties(settings.setting)) {
    if (!settings.selector || !settings.vocab || !settings.embedder) {
      throw input_error("setting " + std::string(to_string(settings.setting)) +
                        " needs a vocabulary, an embedder and a property selector");
    }
    // Candidate sets and selections depend only on the label: compute each once.
    std::map<std::string, std::optional<VocabularyEntry>> chosen;
    for (const auto& [id, d] : out.datasets) {
      for (const auto& c : d.columns) chosen.emplace(c.label, std::nullopt);
    }
    std::vector<std::string> labels;
    for (const auto& [label, _] : chosen) labels.push_back(label);

    std::optional<VocabularyIndex> index;
    std::vector<EmbeddingVector> label_vectors;
    try {
      index.emplace(*settings.vocab, *settings.embedder);
      label_vectors = embed_texts(labels, *settings.embedder);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::external) throw;
      warn(std::string("embedding failed during property enrichment; columns left without properties: ") + e.what());
      return out;
    }

    std::vector<PropertyCandidateSet> sets(labels.size());
    const auto n = static_cast<std::ptrdiff_t>(labels.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t i = 0; i < n; ++i) sets[i] = index->rank(labels[i], label_vectors[i]);

    for (std::size_t i = 0; i < labels.size(); ++i) {
      chosen[labels[i]] = select_property(sets[i], *settings.selector).entry;
    }
    for (auto& [id, d] : out.datasets) {
      for (auto& c : d.columns) {
        if (const auto& e = chosen.at(c.label)) c.vocab_property = e->iri;
      }
    }
  }
  return out;
}

}  // namespace mus
