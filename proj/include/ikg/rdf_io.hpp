#pragma once

#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>

#include "ikg/error.hpp"
#include "ikg/rdf.hpp"

namespace ikg {

enum class RdfFormat { ntriples, turtle };

// The whole-term token used for unknown positions in intent templates.
inline constexpr std::string_view kPlaceholderToken = "???";

namespace detail {

inline bool is_pn_char(unsigned char c) {
  return std::isalnum(c) || c == '_' || c == '-' || c >= 0x80;
}

inline void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

class RdfReader {
 public:
  RdfReader(std::string_view text, RdfFormat format) : text_(text), format_(format) {}

  Graph read_document() {
    Graph graph;
    skip_ws();
    while (!at_end()) {
      if (format_ == RdfFormat::turtle && (peek() == '@' || starts_with_keyword("PREFIX"))) {
        read_prefix(graph);
      } else {
        read_statement(graph);
      }
      skip_ws();
    }
    graph.set_prefixes(prefixes_);
    return graph;
  }

  // A single term in N-Triples syntax, with nothing but whitespace around it.
  Term read_single_term() {
    skip_ws();
    Term t = read_term(Position::object);
    skip_ws();
    if (!at_end()) fail("trailing characters after term");
    return t;
  }

 private:
  enum class Position { subject, predicate, object };

  bool at_end() const { return pos_ >= text_.size(); }
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
  }

  char advance() {
    char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(line_, col_, msg); }
  [[noreturn]] void fail_at(std::size_t line, std::size_t col, const std::string& msg) const {
    throw ParseError(line, col, msg);
  }

  void skip_ws() {
    while (!at_end()) {
      char c = peek();
      if (c == '#') {
        while (!at_end() && peek() != '\n') advance();
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else {
        break;
      }
    }
  }

  bool starts_with_keyword(std::string_view kw) const {
    if (text_.substr(pos_, kw.size()) != kw) return false;
    char next = pos_ + kw.size() < text_.size() ? text_[pos_ + kw.size()] : '\0';
    return next == ' ' || next == '\t' || next == '\n' || next == '\r';
  }

  void expect(char c) {
    skip_ws();
    if (at_end() || peek() != c) fail(std::string("expected '") + c + "'");
    advance();
  }

  void read_prefix(Graph&) {
    bool sparql_style = peek() != '@';
    if (sparql_style) {
      for (int i = 0; i < 6; ++i) advance();
    } else {
      advance();
      if (text_.substr(pos_, 6) != "prefix") fail("unsupported directive (only @prefix)");
      for (int i = 0; i < 6; ++i) advance();
    }
    skip_ws();
    std::string name;
    while (!at_end() && peek() != ':') {
      unsigned char c = static_cast<unsigned char>(peek());
      if (!is_pn_char(c) && c != '.') fail("invalid prefix name");
      name += advance();
    }
    if (at_end()) fail("expected ':' in prefix declaration");
    advance();
    skip_ws();
    if (peek() != '<') fail("expected IRI in prefix declaration");
    std::string base = read_iriref();
    prefixes_[name] = base;
    if (!sparql_style) expect('.');
  }

  void read_statement(Graph& graph) {
    std::size_t sline = line_, scol = col_;
    Term subject = read_term(Position::subject);
    if (subject.is_literal()) fail_at(sline, scol, "literal in subject position");
    for (;;) {
      skip_ws();
      Term verb = read_term(Position::predicate);
      for (;;) {
        skip_ws();
        Term object = read_term(Position::object);
        graph.insert(Triple{subject, verb, std::move(object)});
        skip_ws();
        if (format_ == RdfFormat::turtle && peek() == ',') {
          advance();
          continue;
        }
        break;
      }
      skip_ws();
      if (format_ == RdfFormat::turtle && peek() == ';') {
        while (peek() == ';') {
          advance();
          skip_ws();
        }
        if (peek() == '.') break;
        continue;
      }
      break;
    }
    expect('.');
  }

  Term read_term(Position where) {
    if (at_end()) fail("unexpected end of input");
    std::size_t sline = line_, scol = col_;
    char c = peek();
    if (c == '<') return Term::iri(read_iriref());
    if (c == '"') {
      if (where == Position::subject) fail("literal in subject position");
      if (where == Position::predicate) fail("literal in predicate position");
      return read_literal();
    }
    if (text_.substr(pos_, kPlaceholderToken.size()) == kPlaceholderToken) {
      for (std::size_t i = 0; i < kPlaceholderToken.size(); ++i) advance();
      if (!at_end() && !is_term_boundary(peek())) fail_at(sline, scol, "malformed placeholder token");
      if (where == Position::predicate) fail_at(sline, scol, "placeholder in predicate position");
      return Term::placeholder(next_slot_++);
    }
    if (format_ == RdfFormat::ntriples) fail("expected '<', '\"' or ???");
    if (where == Position::predicate && c == 'a' && (pos_ + 1 >= text_.size() || is_term_boundary(peek(1)))) {
      advance();
      return Term::iri(std::string(kRdfNs) + "type");
    }
    return read_prefixed_name();
  }

  static bool is_term_boundary(char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '.' || c == ';' || c == ',' || c == '#';
  }

  std::string read_iriref() {
    advance();  // '<'
    std::string iri;
    for (;;) {
      if (at_end()) fail("unterminated IRI");
      char c = advance();
      if (c == '>') break;
      if (c == ' ' || c == '\n' || c == '\t' || c == '<' || c == '"') fail("invalid character in IRI");
      if (c == '\\') {
        iri += read_unicode_escape();
        continue;
      }
      iri += c;
    }
    return iri;
  }

  std::string read_unicode_escape() {
    if (at_end()) fail("truncated escape");
    char kind = advance();
    int digits = kind == 'u' ? 4 : kind == 'U' ? 8 : 0;
    if (digits == 0) fail("invalid escape in IRI");
    std::uint32_t cp = 0;
    for (int i = 0; i < digits; ++i) {
      if (at_end() || !std::isxdigit(static_cast<unsigned char>(peek()))) fail("invalid unicode escape");
      char h = advance();
      cp = cp * 16 + static_cast<std::uint32_t>(std::isdigit(static_cast<unsigned char>(h))
                                                    ? h - '0'
                                                    : std::tolower(static_cast<unsigned char>(h)) - 'a' + 10);
    }
    std::string out;
    append_utf8(out, cp);
    return out;
  }

  Term read_literal() {
    advance();  // opening quote
    std::string lexical;
    for (;;) {
      if (at_end()) fail("unterminated string literal");
      char c = peek();
      if (c == '"') {
        advance();
        break;
      }
      if (c == '\n' || c == '\r') fail("newline in string literal");
      advance();
      if (c != '\\') {
        lexical += c;
        continue;
      }
      if (at_end()) fail("truncated escape");
      char e = peek();
      switch (e) {
        case 't': advance(); lexical += '\t'; break;
        case 'b': advance(); lexical += '\b'; break;
        case 'n': advance(); lexical += '\n'; break;
        case 'r': advance(); lexical += '\r'; break;
        case 'f': advance(); lexical += '\f'; break;
        case '"': advance(); lexical += '"'; break;
        case '\'': advance(); lexical += '\''; break;
        case '\\': advance(); lexical += '\\'; break;
        case 'u':
        case 'U': lexical += read_unicode_escape(); break;
        default: fail("invalid escape in string literal");
      }
    }
    if (peek() == '@') fail("language-tagged literals are not supported");
    if (peek() == '^' && peek(1) == '^') {
      advance();
      advance();
      if (peek() == '<') return Term::literal(std::move(lexical), read_iriref());
      if (format_ == RdfFormat::ntriples) fail("expected datatype IRI");
      Term dt = read_prefixed_name();
      return Term::literal(std::move(lexical), std::move(dt.value));
    }
    return Term::literal(std::move(lexical));
  }

  Term read_prefixed_name() {
    std::size_t sline = line_, scol = col_;
    std::string prefix;
    while (!at_end() && peek() != ':') {
      unsigned char c = static_cast<unsigned char>(peek());
      if (!is_pn_char(c) && c != '.') break;
      prefix += advance();
    }
    if (at_end() || peek() != ':') fail_at(sline, scol, "expected a term");
    advance();
    std::string local;
    while (!at_end()) {
      unsigned char c = static_cast<unsigned char>(peek());
      if (is_pn_char(c) || c == ':' || c == '%') {
        local += advance();
      } else if (c == '.' && pos_ + 1 < text_.size() &&
                 (is_pn_char(static_cast<unsigned char>(peek(1))) || peek(1) == ':')) {
        local += advance();
      } else {
        break;
      }
    }
    auto it = prefixes_.find(prefix);
    if (it == prefixes_.end()) fail_at(sline, scol, "unresolved prefix '" + prefix + ":'");
    return Term::iri(it->second + local);
  }

  std::string_view text_;
  RdfFormat format_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
  std::uint32_t next_slot_ = 0;
  PrefixMap prefixes_;
};

inline bool is_valid_local(std::string_view local) {
  if (!local.empty() && local.back() == '.') return false;
  if (!local.empty() && local.front() == '.') return false;
  for (char c : local) {
    unsigned char u = static_cast<unsigned char>(c);
    if (!(std::isalnum(u) || u == '_' || u == '-' || u == '.')) return false;
  }
  return true;
}

inline void write_escaped(std::string& out, std::string_view s) {
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '"': out += "\\\""; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
}

}  // namespace detail

inline Graph parse(std::string_view text, RdfFormat format) {
  return detail::RdfReader(text, format).read_document();
}

// Parses one N-Triples term (e.g. "<http://x>" or "\"5\"^^<...>").
inline Term parse_term(std::string_view text) {
  return detail::RdfReader(text, RdfFormat::ntriples).read_single_term();
}

// Shortest prefixed form of an IRI, or "<iri>" when no prefix applies.
inline std::string compact_iri(std::string_view iri, const PrefixMap& prefixes) {
  const std::pair<const std::string, std::string>* best = nullptr;
  for (const auto& entry : prefixes) {
    const auto& base = entry.second;
    if (iri.size() >= base.size() && iri.substr(0, base.size()) == base &&
        detail::is_valid_local(iri.substr(base.size()))) {
      if (!best || base.size() > best->second.size()) best = &entry;
    }
  }
  if (!best) return "<" + std::string(iri) + ">";
  return best->first + ":" + std::string(iri.substr(best->second.size()));
}

inline std::string format_term(const Term& term, const PrefixMap& prefixes = {}) {
  switch (term.kind) {
    case TermKind::placeholder: return std::string(kPlaceholderToken);
    case TermKind::iri: return compact_iri(term.value, prefixes);
    case TermKind::literal: {
      std::string out = "\"";
      detail::write_escaped(out, term.value);
      out += '"';
      if (!term.datatype.empty()) out += "^^" + compact_iri(term.datatype, prefixes);
      return out;
    }
  }
  return {};
}

inline std::string format_triple(const Triple& t, const PrefixMap& prefixes = {}) {
  return format_term(t.head, prefixes) + " " + format_term(t.relation, prefixes) + " " +
         format_term(t.tail, prefixes) + " .";
}

// Prefix header (sorted by prefix) followed by one triple per line in
// insertion order. N-Triples output never uses prefixes.
inline std::string serialize(const Graph& graph, RdfFormat format) {
  std::string out;
  const PrefixMap empty;
  const PrefixMap& prefixes = format == RdfFormat::turtle ? graph.prefixes() : empty;
  for (const auto& [prefix, base] : prefixes) {
    out += "@prefix " + prefix + ": <" + base + "> .\n";
  }
  if (!prefixes.empty() && !graph.empty()) out += '\n';
  for (const auto& t : graph.triples()) {
    out += format_triple(t, prefixes);
    out += '\n';
  }
  return out;
}

}  // namespace ikg
