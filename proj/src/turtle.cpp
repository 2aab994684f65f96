#include "mus/turtle.hpp"
#include "mus/diagnostics.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <sstream>
#include <variant>
#include <vector>

namespace mus {

namespace {

bool is_pn_local(std::string_view s) {
  if (s.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

std::string escape_literal(std::string_view text) {
  std::string out;
  out.reserve(text.size() + 2);
  out.push_back('"');
  for (char c : text) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out.push_back(c);
    }
  }
  out.push_back('"');
  return out;
}

std::string property_term(std::string_view iri) {
  if (iri.substr(0, ns::dbpedia.size()) == ns::dbpedia) {
    auto local = iri.substr(ns::dbpedia.size());
    if (is_pn_local(local)) return "dbpedia:" + std::string(local);
  }
  return "<" + std::string(iri) + ">";
}

// ---------------------------------------------------------------------------
// Tokenizer

enum class TokKind { iri, pname, literal, punct, prefix_kw, end };

struct Token {
  TokKind kind;
  std::string text;
  int line;
};

void append_utf8(std::string& out, unsigned long cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

class Lexer {
public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      if (pos_ >= src_.size()) break;
      out.push_back(next());
    }
    out.push_back({TokKind::end, "", line_});
    return out;
  }

private:
  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;

  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '\n') {
        ++line_;
        ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  Token next() {
    const int line = line_;
    const char c = peek();
    if (c == '<') {
      auto close = src_.find('>', pos_);
      if (close == std::string_view::npos) throw TurtleParseError(line, "unterminated IRI");
      std::string iri(src_.substr(pos_ + 1, close - pos_ - 1));
      if (iri.find('\n') != std::string::npos) throw TurtleParseError(line, "line break inside IRI");
      pos_ = close + 1;
      return {TokKind::iri, std::move(iri), line};
    }
    if (c == '"' || c == '\'') return literal(line);
    if (c == ';' || c == ',' || c == '.' || c == '[' || c == ']') {
      ++pos_;
      return {TokKind::punct, std::string(1, c), line};
    }
    if (c == '@') {
      std::size_t start = ++pos_;
      while (std::isalpha(static_cast<unsigned char>(peek()))) ++pos_;
      std::string word(src_.substr(start, pos_ - start));
      if (word == "prefix") return {TokKind::prefix_kw, word, line};
      throw TurtleParseError(line, "unsupported directive @" + word);
    }
    std::size_t start = pos_;
    while (pos_ < src_.size()) {
      char d = src_[pos_];
      bool name_char = std::isalnum(static_cast<unsigned char>(d)) || d == '_' || d == '-' || d == ':' ||
                       static_cast<unsigned char>(d) >= 0x80;
      // A '.' belongs to a prefixed name only when followed by more name characters.
      if (d == '.' && pos_ + 1 < src_.size()) {
        char e = src_[pos_ + 1];
        name_char = std::isalnum(static_cast<unsigned char>(e)) || e == '_' || e == '-';
      }
      if (!name_char) break;
      ++pos_;
    }
    if (pos_ == start) throw TurtleParseError(line, std::string("unexpected character '") + c + "'");
    std::string word(src_.substr(start, pos_ - start));
    if (word == "prefix" || word == "PREFIX") return {TokKind::prefix_kw, word, line};
    return {TokKind::pname, std::move(word), line};
  }

  Token literal(int line) {
    const char quote = peek();
    const bool long_form = peek(1) == quote && peek(2) == quote;
    pos_ += long_form ? 3 : 1;
    std::string value;
    for (;;) {
      if (pos_ >= src_.size()) throw TurtleParseError(line, "unterminated string literal");
      char c = src_[pos_];
      if (long_form) {
        if (c == quote && peek(1) == quote && peek(2) == quote) {
          pos_ += 3;
          break;
        }
      } else if (c == quote) {
        ++pos_;
        break;
      } else if (c == '\n') {
        throw TurtleParseError(line, "line break inside short string literal");
      }
      if (c == '\n') ++line_;
      if (c == '\\') {
        char e = peek(1);
        pos_ += 2;
        switch (e) {
          case 't': value.push_back('\t'); break;
          case 'n': value.push_back('\n'); break;
          case 'r': value.push_back('\r'); break;
          case 'b': value.push_back('\b'); break;
          case 'f': value.push_back('\f'); break;
          case '"': value.push_back('"'); break;
          case '\'': value.push_back('\''); break;
          case '\\': value.push_back('\\'); break;
          case 'u':
          case 'U': {
            std::size_t n = e == 'u' ? 4 : 8;
            if (pos_ + n > src_.size()) throw TurtleParseError(line_, "truncated unicode escape");
            unsigned long cp = std::stoul(std::string(src_.substr(pos_, n)), nullptr, 16);
            append_utf8(value, cp);
            pos_ += n;
            break;
          }
          default: throw TurtleParseError(line_, std::string("bad escape \\") + e);
        }
        continue;
      }
      value.push_back(c);
      ++pos_;
    }
    // Language tags and datatypes are accepted and dropped.
    if (peek() == '@') {
      ++pos_;
      while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '-') ++pos_;
    } else if (peek() == '^' && peek(1) == '^') {
      pos_ += 2;
      if (peek() == '<') {
        pos_ = src_.find('>', pos_) + 1;
      } else {
        while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == ':' || peek() == '_') ++pos_;
      }
    }
    return {TokKind::literal, std::move(value), line};
  }
};

// ---------------------------------------------------------------------------
// Triple graph

struct Term {
  enum Kind { iri, blank, literal } kind;
  std::string value;
  friend bool operator==(const Term&, const Term&) = default;
};

struct Triple {
  Term subject;
  std::string predicate;  // always an expanded IRI
  Term object;
  int line;
};

class Parser {
public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  std::vector<Triple> run() {
    while (cur().kind != TokKind::end) {
      if (cur().kind == TokKind::prefix_kw) {
        directive();
      } else {
        statement();
      }
    }
    return std::move(triples_);
  }

private:
  std::vector<Token> toks_;
  std::size_t i_ = 0;
  std::map<std::string, std::string> prefixes_;
  std::vector<Triple> triples_;
  int blank_counter_ = 0;

  const Token& cur() const { return toks_[i_]; }
  bool is_punct(char c) const { return cur().kind == TokKind::punct && cur().text[0] == c; }

  void expect_punct(char c) {
    if (!is_punct(c)) {
      throw TurtleParseError(cur().line, std::string("expected '") + c + "' but found '" + cur().text + "'");
    }
    ++i_;
  }

  void directive() {
    ++i_;
    if (cur().kind != TokKind::pname || cur().text.back() != ':' ||
        std::count(cur().text.begin(), cur().text.end(), ':') != 1) {
      throw TurtleParseError(cur().line, "expected prefix name in prefix directive");
    }
    std::string name = cur().text.substr(0, cur().text.size() - 1);
    ++i_;
    if (cur().kind != TokKind::iri) throw TurtleParseError(cur().line, "expected IRI in prefix directive");
    prefixes_[name] = cur().text;
    ++i_;
    if (is_punct('.')) ++i_;
  }

  std::string expand(const Token& tok) const {
    auto colon = tok.text.find(':');
    if (colon == std::string::npos) throw TurtleParseError(tok.line, "not a prefixed name: " + tok.text);
    auto it = prefixes_.find(tok.text.substr(0, colon));
    if (it == prefixes_.end()) throw TurtleParseError(tok.line, "undeclared prefix in " + tok.text);
    return it->second + tok.text.substr(colon + 1);
  }

  Term iri_term() {
    const Token& tok = cur();
    ++i_;
    if (tok.kind == TokKind::iri) return {Term::iri, tok.text};
    return {Term::iri, expand(tok)};
  }

  void statement() {
    const int line = cur().line;
    Term subject;
    if (is_punct('[')) {
      subject = blank_node();
      if (is_punct('.')) {
        ++i_;
        return;
      }
    } else if (cur().kind == TokKind::iri || cur().kind == TokKind::pname) {
      subject = iri_term();
    } else {
      throw TurtleParseError(line, "expected subject but found '" + cur().text + "'");
    }
    predicate_object_list(subject);
    expect_punct('.');
  }

  Term blank_node() {
    expect_punct('[');
    Term node{Term::blank, "_:b" + std::to_string(blank_counter_++)};
    if (!is_punct(']')) predicate_object_list(node);
    // Tolerate a stray '.' before the closing bracket.
    if (is_punct('.')) ++i_;
    expect_punct(']');
    return node;
  }

  void predicate_object_list(const Term& subject) {
    for (;;) {
      const Token& verb = cur();
      std::string predicate;
      if (verb.kind == TokKind::pname && verb.text == "a") {
        predicate = std::string(ns::rdf) + "type";
        ++i_;
      } else if (verb.kind == TokKind::iri || verb.kind == TokKind::pname) {
        predicate = iri_term().value;
      } else {
        throw TurtleParseError(verb.line, "expected predicate but found '" + verb.text + "'");
      }
      for (;;) {
        const int line = cur().line;
        triples_.push_back({subject, predicate, object(), line});
        if (!is_punct(',')) break;
        ++i_;
      }
      if (!is_punct(';')) break;
      while (is_punct(';')) ++i_;
      if (is_punct('.') || is_punct(']')) break;
    }
  }

  Term object() {
    const Token& tok = cur();
    if (tok.kind == TokKind::literal) {
      ++i_;
      return {Term::literal, tok.text};
    }
    if (tok.kind == TokKind::iri || tok.kind == TokKind::pname) return iri_term();
    if (is_punct('[')) return blank_node();
    throw TurtleParseError(tok.line, "expected object but found '" + tok.text + "'");
  }
};

std::string iri(std::string_view prefix, std::string_view local) {
  return std::string(prefix) + std::string(local);
}

}  // namespace

std::string serialize_turtle(const DatasetMeta& dataset, std::string_view base_iri) {
  validate(dataset);
  std::string base(base_iri);
  while (!base.empty() && base.back() == '/') base.pop_back();
  const std::string dataset_iri = base + "/datasets/" + dataset.id;
  const auto ids = column_ids(dataset);

  std::ostringstream out;
  out << "@prefix dsv: <" << ns::dsv << "> .\n"
      << "@prefix dcterms: <" << ns::dcterms << "> .\n"
      << "@prefix rdfs: <" << ns::rdfs << "> .\n"
      << "@prefix dbpedia: <" << ns::dbpedia << "> .\n\n";

  out << '<' << dataset_iri << "> a dsv:Dataset ;\n"
      << "    dcterms:subject " << escape_literal(dataset.topic) << " ;\n"
      << "    dcterms:title " << escape_literal(dataset.title) << " ;\n";
  if (dataset.role == Role::query) out << "    dcterms:type \"query\" ;\n";
  out << "    dsv:datasetSchema [ dsv:column\n";
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out << "        <" << dataset_iri << "/column/" << ids[i] << '>' << (i + 1 < ids.size() ? ",\n" : " ] .\n");
  }

  for (std::size_t i = 0; i < ids.size(); ++i) {
    const ColumnMeta& c = dataset.columns[i];
    out << "\n<" << dataset_iri << "/column/" << ids[i] << "> a dsv:Column ;\n"
        << "    rdfs:label " << escape_literal(c.label);
    if (c.semantic_type) out << " ;\n    dcterms:type " << escape_literal(*c.semantic_type);
    if (c.vocab_property) out << " ;\n    dsv:columnProperty " << property_term(*c.vocab_property);
    out << " .\n";
  }
  return out.str();
}

DatasetMeta parse_turtle(std::string_view document) {
  auto triples = Parser(Lexer(document).run()).run();

  const std::string rdf_type = iri(ns::rdf, "type");
  const std::string p_subject = iri(ns::dcterms, "subject");
  const std::string p_title = iri(ns::dcterms, "title");
  const std::string p_type = iri(ns::dcterms, "type");
  const std::string p_schema = iri(ns::dsv, "datasetSchema");
  const std::string p_column = iri(ns::dsv, "column");
  const std::string p_label = iri(ns::rdfs, "label");
  const std::string p_property = iri(ns::dsv, "columnProperty");
  const Term dataset_class{Term::iri, iri(ns::dsv, "Dataset")};
  const Term column_class{Term::iri, iri(ns::dsv, "Column")};

  std::vector<bool> used(triples.size(), false);
  auto find_all = [&](const Term& subject, const std::string& predicate) {
    std::vector<std::size_t> hits;
    for (std::size_t i = 0; i < triples.size(); ++i) {
      if (triples[i].subject == subject && triples[i].predicate == predicate) hits.push_back(i);
    }
    return hits;
  };
  auto single_literal = [&](const Term& subject, const std::string& predicate) -> std::optional<std::string> {
    auto hits = find_all(subject, predicate);
    if (hits.empty()) return std::nullopt;
    if (hits.size() > 1) throw TurtleParseError(triples[hits[1]].line, "repeated " + predicate);
    const Triple& t = triples[hits[0]];
    if (t.object.kind != Term::literal) throw TurtleParseError(t.line, predicate + " must be a literal");
    used[hits[0]] = true;
    return t.object.value;
  };

  std::optional<std::size_t> dataset_triple;
  for (std::size_t i = 0; i < triples.size(); ++i) {
    if (triples[i].predicate == rdf_type && triples[i].object == dataset_class) {
      if (dataset_triple) throw TurtleParseError(triples[i].line, "more than one dsv:Dataset in document");
      dataset_triple = i;
    }
  }
  if (!dataset_triple) throw TurtleParseError(1, "no dsv:Dataset node found");
  used[*dataset_triple] = true;
  const Term dataset_node = triples[*dataset_triple].subject;
  const int dataset_line = triples[*dataset_triple].line;
  if (dataset_node.kind != Term::iri) throw TurtleParseError(dataset_line, "dataset node must be an IRI");

  DatasetMeta out;
  auto marker = dataset_node.value.rfind("/datasets/");
  out.id = marker == std::string::npos ? dataset_node.value.substr(dataset_node.value.find_last_of("/#") + 1)
                                       : dataset_node.value.substr(marker + 10);
  if (out.id.empty()) throw TurtleParseError(dataset_line, "cannot derive dataset id from " + dataset_node.value);

  auto topic = single_literal(dataset_node, p_subject);
  if (!topic) throw TurtleParseError(dataset_line, "dataset " + out.id + " has no dcterms:subject (topic)");
  out.topic = *topic;
  out.title = single_literal(dataset_node, p_title).value_or("");
  auto role = single_literal(dataset_node, p_type);
  out.role = role && *role == "query" ? Role::query : Role::candidate;

  std::vector<std::pair<Term, int>> column_nodes;
  for (std::size_t s : find_all(dataset_node, p_schema)) {
    used[s] = true;
    for (std::size_t c : find_all(triples[s].object, p_column)) {
      used[c] = true;
      column_nodes.emplace_back(triples[c].object, triples[c].line);
    }
  }
  if (column_nodes.empty()) throw TurtleParseError(dataset_line, "dataset " + out.id + " lists no dsv:column");

  for (const auto& [node, line] : column_nodes) {
    for (std::size_t t : find_all(node, rdf_type)) {
      if (triples[t].object == column_class) used[t] = true;
    }
    auto label = single_literal(node, p_label);
    if (!label) throw TurtleParseError(line, "column " + node.value + " has no rdfs:label");
    ColumnMeta column;
    column.label = trim(*label);
    if (column.label.empty()) throw TurtleParseError(line, "column " + node.value + " has an empty label");
    column.semantic_type = single_literal(node, p_type);
    auto props = find_all(node, p_property);
    if (props.size() > 1) throw TurtleParseError(triples[props[1]].line, "repeated dsv:columnProperty");
    if (!props.empty()) {
      const Triple& t = triples[props[0]];
      if (t.object.kind != Term::iri) throw TurtleParseError(t.line, "dsv:columnProperty must be an IRI");
      used[props[0]] = true;
      column.vocab_property = t.object.value;
    }
    out.columns.push_back(std::move(column));
  }

  auto ignored = std::count(used.begin(), used.end(), false);
  if (ignored > 0) {
    warn("dataset " + out.id + ": ignored " + std::to_string(ignored) + " unrecognised triple(s)");
  }
  return out;
}

}  // namespace mus
