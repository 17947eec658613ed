#include "kgq/ntriples.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "kgq/error.hpp"
#include "lex.hpp"

namespace kgq {

namespace {

using detail::skip_space;

class LineParser {
 public:
  LineParser(std::string_view line, std::size_t lineno) : text_(line), line_(lineno) {}

  // Returns false for blank/comment lines.
  bool parse(Triple& out) {
    skip_space(text_, pos_);
    if (pos_ >= text_.size() || text_[pos_] == '#') return false;
    out.s = subject();
    out.p = predicate();
    out.o = object();
    skip_space(text_, pos_);
    if (pos_ >= text_.size() || text_[pos_] != '.') fail("expected '.' at end of triple");
    ++pos_;
    skip_space(text_, pos_);
    if (pos_ < text_.size() && text_[pos_] != '#') fail("trailing content after '.'");
    return true;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(line_, what); }

  Term iri() {
    std::optional<std::string> v;
    try {
      v = detail::read_iri_ref(text_, pos_);
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
    if (!v) fail("unterminated IRI");
    if (!is_absolute_iri(*v)) fail("malformed IRI <" + *v + ">");
    return Term::iri(std::move(*v));
  }

  Term blank() {
    if (pos_ + 2 > text_.size() || text_[pos_ + 1] != ':') fail("malformed blank node");
    std::size_t start = pos_ + 2;
    std::size_t end = start;
    while (end < text_.size() && !detail::is_space(text_[end])) ++end;
    // Labels may not end with '.', so a trailing dot is the triple terminator.
    while (end > start && text_[end - 1] == '.') --end;
    if (end == start) fail("empty blank node label");
    pos_ = end;
    return Term::blank(std::string(text_.substr(start, end - start)));
  }

  Term literal() {
    std::optional<std::string> lex;
    try {
      lex = detail::read_quoted(text_, pos_);
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
    if (!lex) fail("unterminated literal");
    if (pos_ < text_.size() && text_[pos_] == '@') {
      std::size_t start = ++pos_;
      while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '-'))
        ++pos_;
      if (pos_ == start) fail("empty language tag");
      return Term::literal(std::move(*lex), {}, std::string(text_.substr(start, pos_ - start)));
    }
    if (text_.substr(pos_, 2) == "^^") {
      pos_ += 2;
      if (pos_ >= text_.size() || text_[pos_] != '<') fail("expected datatype IRI");
      Term dt = iri();
      return Term::literal(std::move(*lex), dt.value());
    }
    return Term::literal(std::move(*lex));
  }

  Term subject() {
    skip_space(text_, pos_);
    if (pos_ >= text_.size()) fail("missing subject");
    if (text_[pos_] == '<') return iri();
    if (text_[pos_] == '_') return blank();
    fail("subject must be an IRI or blank node");
  }

  Term predicate() {
    skip_space(text_, pos_);
    if (pos_ >= text_.size() || text_[pos_] != '<') fail("predicate must be an IRI");
    return iri();
  }

  Term object() {
    skip_space(text_, pos_);
    if (pos_ >= text_.size()) fail("missing object");
    switch (text_[pos_]) {
      case '<': return iri();
      case '_': return blank();
      case '"': return literal();
      default: fail("malformed object");
    }
  }

  std::string_view text_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

}  // namespace

KnowledgeGraph parse_ntriples(std::istream& in) {
  KnowledgeGraph g;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    Triple t;
    if (LineParser(line, lineno).parse(t)) g.insert(std::move(t));
  }
  return g;
}

KnowledgeGraph parse_ntriples(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_ntriples(in);
}

void write_ntriples(std::ostream& out, const KnowledgeGraph& g) {
  for (const auto& t : g.triples())
    out << t.s.to_ntriples() << ' ' << t.p.to_ntriples() << ' ' << t.o.to_ntriples() << " .\n";
}

std::string to_ntriples(const KnowledgeGraph& g) {
  std::ostringstream out;
  write_ntriples(out, g);
  return out.str();
}

KnowledgeGraph read_ntriples_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open " + path);
  return parse_ntriples(in);
}

void write_ntriples_file(const std::string& path, const KnowledgeGraph& g) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write " + path);
  write_ntriples(out, g);
}

}  // namespace kgq
