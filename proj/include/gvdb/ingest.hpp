#pragma once

#include "gvdb/error.hpp"
#include "gvdb/graph.hpp"

#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace gvdb {

struct IngestOptions {
  // Reject lines that are not valid UTF-8.
  bool validate_utf8 = true;
};

struct Ingested {
  Graph graph;
  IngestReport report;
};

enum class InputFormat { edgelist, ntriples };

namespace detail {

inline bool valid_utf8(std::string_view s) {
  std::size_t i = 0;
  const auto* p = reinterpret_cast<const unsigned char*>(s.data());
  const std::size_t n = s.size();
  while (i < n) {
    const unsigned char c = p[i];
    std::size_t len;
    std::uint32_t cp;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > n) return false;
    for (std::size_t k = 1; k < len; ++k) {
      if ((p[i + k] & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (p[i + k] & 0x3F);
    }
    // Overlong forms, surrogates, out of range.
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
        cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))
      return false;
    i += len;
  }
  return true;
}

inline bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

inline std::string_view skip_space(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size() && is_space(s[i])) ++i;
  return s.substr(i);
}

// Calls fn(line_number, line) for every line; strips a trailing '\r'.
template <class Fn>
void for_each_line(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    fn(number, std::string_view(line));
  }
}

inline void check_encoding(const IngestOptions& options, std::size_t line_no, std::string_view line) {
  if (options.validate_utf8 && !valid_utf8(line)) throw EncodingError(line_no, "invalid UTF-8");
}

// One N-Triples term. `kind` is '<' (IRI), '_' (blank node) or '"' (literal).
struct Term {
  char kind = 0;
  std::string text;
};

inline Term parse_term(std::string_view& rest, std::size_t line_no) {
  rest = skip_space(rest);
  if (rest.empty()) throw ParseError(line_no, "unexpected end of line, expected a term");
  Term t;
  if (rest[0] == '<') {
    const auto close = rest.find('>');
    if (close == std::string_view::npos) throw ParseError(line_no, "unterminated IRI");
    t.kind = '<';
    t.text = std::string(rest.substr(1, close - 1));
    if (t.text.empty()) throw ParseError(line_no, "empty IRI");
    rest.remove_prefix(close + 1);
    return t;
  }
  if (rest.size() >= 2 && rest[0] == '_' && rest[1] == ':') {
    std::size_t end = 2;
    while (end < rest.size() && !is_space(rest[end])) ++end;
    if (end == 2) throw ParseError(line_no, "empty blank node label");
    t.kind = '_';
    t.text = std::string(rest.substr(0, end));
    rest.remove_prefix(end);
    return t;
  }
  if (rest[0] == '"') {
    t.kind = '"';
    std::size_t i = 1;
    bool closed = false;
    while (i < rest.size()) {
      const char c = rest[i];
      if (c == '\\') {
        if (i + 1 >= rest.size()) break;
        const char e = rest[i + 1];
        switch (e) {
          case 't': t.text += '\t'; break;
          case 'n': t.text += '\n'; break;
          case 'r': t.text += '\r'; break;
          case '"': t.text += '"'; break;
          case '\\': t.text += '\\'; break;
          default:
            // \uXXXX and friends are kept verbatim.
            t.text += '\\';
            t.text += e;
        }
        i += 2;
        continue;
      }
      if (c == '"') {
        closed = true;
        ++i;
        break;
      }
      t.text += c;
      ++i;
    }
    if (!closed) throw ParseError(line_no, "unterminated literal");
    rest.remove_prefix(i);
    // Language tags and datatypes stay part of the lexical form.
    if (!rest.empty() && rest[0] == '@') {
      std::size_t end = 1;
      while (end < rest.size() && !is_space(rest[end]) && rest[end] != '.') ++end;
      t.text += rest.substr(0, end);
      rest.remove_prefix(end);
    } else if (rest.size() >= 2 && rest[0] == '^' && rest[1] == '^') {
      const auto close = rest.find('>');
      if (rest.size() < 3 || rest[2] != '<' || close == std::string_view::npos)
        throw ParseError(line_no, "malformed datatype");
      t.text += rest.substr(0, close + 1);
      rest.remove_prefix(close + 1);
    }
    if (t.text.empty()) throw ParseError(line_no, "empty literal cannot be a node label");
    return t;
  }
  throw ParseError(line_no, "unexpected character '" + std::string(1, rest[0]) + "'");
}

}  // namespace detail

// Whitespace-separated token pairs; '#' starts a comment line.
inline Ingested ingest_edgelist(std::istream& in, const IngestOptions& options = {}) {
  GraphBuilder builder;
  detail::for_each_line(in, [&](std::size_t line_no, std::string_view line) {
    ++builder.report().lines;
    detail::check_encoding(options, line_no, line);
    std::string_view rest = detail::skip_space(line);
    if (rest.empty() || rest[0] == '#') return;
    std::vector<std::string_view> tokens;
    while (!rest.empty()) {
      std::size_t end = 0;
      while (end < rest.size() && !detail::is_space(rest[end])) ++end;
      tokens.push_back(rest.substr(0, end));
      rest = detail::skip_space(rest.substr(end));
    }
    if (tokens.size() != 2)
      throw ParseError(line_no, "expected 2 tokens, found " + std::to_string(tokens.size()));
    const NodeId a = builder.intern(tokens[0]);
    const NodeId b = builder.intern(tokens[1]);
    builder.add_edge(a, b);
  });
  IngestReport report = builder.report();
  return {std::move(builder).build(), report};
}

inline Ingested ingest_edgelist(std::string_view text, const IngestOptions& options = {}) {
  std::istringstream in{std::string(text)};
  return ingest_edgelist(in, options);
}

// Subset: `<s> <p> (<o> | "literal") .` with optional blank nodes, language
// tags and datatypes (kept inside the literal's label).
inline Ingested ingest_ntriples(std::istream& in, const IngestOptions& options = {}) {
  GraphBuilder builder;
  detail::for_each_line(in, [&](std::size_t line_no, std::string_view line) {
    ++builder.report().lines;
    detail::check_encoding(options, line_no, line);
    std::string_view rest = detail::skip_space(line);
    if (rest.empty() || rest[0] == '#') return;
    const detail::Term subject = detail::parse_term(rest, line_no);
    if (subject.kind == '"') throw ParseError(line_no, "literal is not allowed as subject");
    const detail::Term predicate = detail::parse_term(rest, line_no);
    if (predicate.kind != '<') throw ParseError(line_no, "predicate must be an IRI");
    const detail::Term object = detail::parse_term(rest, line_no);
    rest = detail::skip_space(rest);
    if (rest.empty() || rest[0] != '.') throw ParseError(line_no, "expected '.' after object");
    rest = detail::skip_space(rest.substr(1));
    if (!rest.empty() && rest[0] != '#') throw ParseError(line_no, "trailing content after '.'");
    const NodeId s = builder.intern(subject.text);
    const NodeId o = builder.intern(object.text);
    builder.add_edge(s, o, predicate.text);
  });
  IngestReport report = builder.report();
  return {std::move(builder).build(), report};
}

inline Ingested ingest_ntriples(std::string_view text, const IngestOptions& options = {}) {
  std::istringstream in{std::string(text)};
  return ingest_ntriples(in, options);
}

inline Ingested ingest(std::istream& in, InputFormat format, const IngestOptions& options = {}) {
  return format == InputFormat::ntriples ? ingest_ntriples(in, options)
                                         : ingest_edgelist(in, options);
}

}  // namespace gvdb
