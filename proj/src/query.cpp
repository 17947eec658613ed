#include "kgq/query.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <stdexcept>

#include "kgq/error.hpp"
#include "lex.hpp"

namespace kgq {

std::string PatternTerm::to_string() const {
  if (is_variable()) return "?" + var();
  return term().to_ntriples();
}

std::string TriplePattern::to_string() const {
  return s.to_string() + " " + p.to_string() + " " + o.to_string();
}

BGP::BGP(std::vector<TriplePattern> patterns) {
  for (auto& tp : patterns) add(std::move(tp));
}

void BGP::add(TriplePattern tp) {
  if (std::find(patterns_.begin(), patterns_.end(), tp) == patterns_.end()) patterns_.push_back(std::move(tp));
}

namespace {

void collect_vars(const TriplePattern& tp, std::set<std::string>& out) {
  for (const auto* pt : {&tp.s, &tp.p, &tp.o})
    if (pt->is_variable()) out.insert(pt->var());
}

}  // namespace

std::set<std::string> BGP::vars() const {
  std::set<std::string> out;
  for (const auto& tp : patterns_) collect_vars(tp, out);
  return out;
}

StarPattern::StarPattern(PatternTerm subject, std::vector<TriplePattern> patterns)
    : subject_(std::move(subject)), patterns_(std::move(patterns)) {
  for (const auto& tp : patterns_)
    if (tp.s != subject_) throw std::invalid_argument("star pattern with mixed subjects");
}

std::set<std::string> StarPattern::vars() const {
  std::set<std::string> out;
  for (const auto& tp : patterns_) collect_vars(tp, out);
  return out;
}

std::vector<Term> StarPattern::constant_predicates() const {
  std::vector<Term> out;
  for (const auto& tp : patterns_)
    if (tp.p.is_constant()) out.push_back(tp.p.term());
  return out;
}

bool StarPattern::has_variable_predicate() const {
  return std::any_of(patterns_.begin(), patterns_.end(), [](const auto& tp) { return tp.p.is_variable(); });
}

std::string StarPattern::to_string() const {
  std::string out = "{ ";
  for (const auto& tp : patterns_) out += tp.to_string() + " . ";
  return out + "}";
}

std::vector<std::string> shared_vars(const StarPattern& a, const StarPattern& b) {
  auto va = a.vars();
  auto vb = b.vars();
  std::vector<std::string> out;
  std::set_intersection(va.begin(), va.end(), vb.begin(), vb.end(), std::back_inserter(out));
  return out;
}

std::vector<StarPattern> star_decompose(const BGP& bgp) {
  std::vector<PatternTerm> order;
  std::vector<std::vector<TriplePattern>> groups;
  for (const auto& tp : bgp.patterns()) {
    auto it = std::find(order.begin(), order.end(), tp.s);
    if (it == order.end()) {
      order.push_back(tp.s);
      groups.emplace_back();
      groups.back().push_back(tp);
    } else {
      groups[static_cast<std::size_t>(it - order.begin())].push_back(tp);
    }
  }
  std::vector<StarPattern> stars;
  stars.reserve(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) stars.emplace_back(order[i], std::move(groups[i]));
  return stars;
}

std::vector<std::string> Query::projected_vars() const {
  if (!projection.empty()) return projection;
  std::vector<std::string> out;
  for (const auto& v : bgp.vars())
    if (!v.starts_with("_bn_")) out.push_back(v);
  return out;
}

// ---------------------------------------------------------------------------
// Query parser

namespace {

constexpr std::array kUnsupported = {"OPTIONAL", "FILTER", "UNION", "MINUS",  "BIND",      "VALUES",
                                     "SERVICE",  "GRAPH",  "ORDER", "GROUP",  "LIMIT",     "OFFSET",
                                     "HAVING",   "CONSTRUCT", "ASK", "DESCRIBE", "FROM"};

constexpr std::string_view kRdfType = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' ||
         static_cast<unsigned char>(c) >= 0x80;
}

class QueryParser {
 public:
  explicit QueryParser(std::string_view text) : text_(text) {}

  Query parse() {
    scan_unsupported();
    Query q;
    while (peek_keyword("PREFIX")) prefix_decl();
    if (peek_keyword("BASE")) throw UnsupportedFeature("BASE");
    expect_keyword("SELECT");
    if (peek_keyword("DISTINCT")) {
      take_word();
      q.distinct = true;
    } else if (peek_keyword("REDUCED")) {
      throw UnsupportedFeature("REDUCED");
    }
    skip();
    if (pos_ < text_.size() && text_[pos_] == '*') {
      ++pos_;
    } else {
      while (true) {
        skip();
        if (pos_ < text_.size() && (text_[pos_] == '?' || text_[pos_] == '$'))
          q.projection.push_back(variable().name);
        else
          break;
      }
      if (q.projection.empty()) fail("expected '*' or projection variables");
    }
    skip();
    if (peek_keyword("WHERE")) take_word();
    expect('{');
    group(q.bgp);
    expect('}');
    skip();
    if (pos_ != text_.size()) fail("unexpected trailing content");
    if (q.bgp.empty()) fail("empty graph pattern");

    auto vars = q.bgp.vars();
    for (const auto& v : q.projection)
      if (!vars.contains(v)) fail("projected variable ?" + v + " does not occur in the pattern");
    return q;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    std::size_t line = 1 + static_cast<std::size_t>(std::count(text_.begin(), text_.begin() + pos_, '\n'));
    throw ParseError(line, what);
  }

  // Keywords outside the subset are rejected up front, ignoring IRIs,
  // strings and comments so that e.g. <http://ex/filter> is fine.
  void scan_unsupported() const {
    std::size_t i = 0;
    while (i < text_.size()) {
      char c = text_[i];
      if (c == '<') {
        auto close = text_.find('>', i);
        i = close == std::string_view::npos ? text_.size() : close + 1;
      } else if (c == '"') {
        ++i;
        while (i < text_.size() && text_[i] != '"') i += text_[i] == '\\' ? 2 : 1;
        ++i;
      } else if (c == '#') {
        while (i < text_.size() && text_[i] != '\n') ++i;
      } else if (std::isalpha(static_cast<unsigned char>(c))) {
        std::size_t start = i;
        while (i < text_.size() && (is_name_char(text_[i]) || text_[i] == ':')) ++i;
        bool preceded = start > 0 && (text_[start - 1] == '?' || text_[start - 1] == '$' || text_[start - 1] == ':');
        auto word = upper(text_.substr(start, i - start));
        if (!preceded && word.find(':') == std::string::npos)
          for (auto kw : kUnsupported)
            if (word == kw) throw UnsupportedFeature(kw);
      } else {
        ++i;
      }
    }
  }

  void skip() {
    while (pos_ < text_.size()) {
      if (detail::is_space(text_[pos_])) {
        ++pos_;
      } else if (text_[pos_] == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  bool peek_keyword(std::string_view kw) {
    skip();
    if (pos_ + kw.size() > text_.size()) return false;
    if (upper(text_.substr(pos_, kw.size())) != kw) return false;
    return pos_ + kw.size() == text_.size() || !is_name_char(text_[pos_ + kw.size()]);
  }

  std::string_view take_word() {
    skip();
    std::size_t start = pos_;
    while (pos_ < text_.size() && is_name_char(text_[pos_])) ++pos_;
    return text_.substr(start, pos_ - start);
  }

  void expect_keyword(std::string_view kw) {
    if (!peek_keyword(kw)) fail("expected " + std::string(kw));
    take_word();
  }

  void expect(char c) {
    skip();
    if (pos_ >= text_.size() || text_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  void prefix_decl() {
    take_word();
    skip();
    std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != ':' && is_name_char(text_[pos_])) ++pos_;
    if (pos_ >= text_.size() || text_[pos_] != ':') fail("malformed PREFIX declaration");
    std::string name(text_.substr(start, pos_ - start));
    ++pos_;
    skip();
    if (pos_ >= text_.size() || text_[pos_] != '<') fail("expected IRI in PREFIX declaration");
    prefixes_[name] = iri_ref();
  }

  std::string iri_ref() {
    std::optional<std::string> v;
    try {
      v = detail::read_iri_ref(text_, pos_);
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
    if (!v) fail("unterminated IRI");
    return *v;
  }

  Variable variable() {
    ++pos_;
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    if (pos_ == start) fail("empty variable name");
    return Variable{std::string(text_.substr(start, pos_ - start))};
  }

  std::string prefixed_name() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != ':' && is_name_char(text_[pos_])) ++pos_;
    if (pos_ >= text_.size() || text_[pos_] != ':') fail("expected a term");
    std::string pfx(text_.substr(start, pos_ - start));
    ++pos_;
    std::size_t lstart = pos_;
    while (pos_ < text_.size() && is_name_char(text_[pos_])) ++pos_;
    // A trailing '.' ends the triple, not the local name.
    while (pos_ > lstart && text_[pos_ - 1] == '.') --pos_;
    auto it = prefixes_.find(pfx);
    if (it == prefixes_.end()) fail("undeclared prefix '" + pfx + ":'");
    return it->second + std::string(text_.substr(lstart, pos_ - lstart));
  }

  PatternTerm term(bool predicate_position) {
    skip();
    if (pos_ >= text_.size()) fail("unexpected end of query");
    char c = text_[pos_];
    if (c == '?' || c == '$') return variable();
    if (c == '<') {
      auto v = iri_ref();
      if (!is_absolute_iri(v)) fail("malformed IRI <" + v + ">");
      return Term::iri(std::move(v));
    }
    if (c == '"') {
      if (predicate_position) fail("literal in predicate position");
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
        return Term::literal(std::move(*lex), {}, std::string(text_.substr(start, pos_ - start)));
      }
      if (text_.substr(pos_, 2) == "^^") {
        pos_ += 2;
        std::string dt = text_[pos_] == '<' ? iri_ref() : prefixed_name();
        return Term::literal(std::move(*lex), std::move(dt));
      }
      return Term::literal(std::move(*lex));
    }
    if (c == '_' && pos_ + 1 < text_.size() && text_[pos_ + 1] == ':') {
      // Blank nodes in patterns act as non-projectable variables.
      pos_ += 2;
      std::size_t start = pos_;
      while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        ++pos_;
      return Variable{"_bn_" + std::string(text_.substr(start, pos_ - start))};
    }
    if (predicate_position && c == 'a' &&
        (pos_ + 1 >= text_.size() || detail::is_space(text_[pos_ + 1]))) {
      ++pos_;
      return Term::iri(std::string(kRdfType));
    }
    return Term::iri(prefixed_name());
  }

  void group(BGP& bgp) {
    while (true) {
      skip();
      if (pos_ < text_.size() && text_[pos_] == '}') return;
      PatternTerm s = term(false);
      if (s.is_constant() && s.term().is_literal()) fail("literal in subject position");
      while (true) {
        PatternTerm p = term(true);
        while (true) {
          PatternTerm o = term(false);
          bgp.add(TriplePattern{s, p, o});
          skip();
          if (pos_ < text_.size() && text_[pos_] == ',') {
            ++pos_;
            continue;
          }
          break;
        }
        if (pos_ < text_.size() && text_[pos_] == ';') {
          ++pos_;
          skip();
          if (pos_ < text_.size() && (text_[pos_] == '.' || text_[pos_] == '}')) break;
          continue;
        }
        break;
      }
      skip();
      if (pos_ < text_.size() && text_[pos_] == '.') {
        ++pos_;
        continue;
      }
      skip();
      if (pos_ < text_.size() && text_[pos_] == '}') return;
      fail("expected '.' or '}'");
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::map<std::string, std::string> prefixes_;
};

}  // namespace

Query parse_query(std::string_view text) { return QueryParser(text).parse(); }

// ---------------------------------------------------------------------------
// Solution mappings

std::optional<SolutionMapping> merge_compatible(const SolutionMapping& a, const SolutionMapping& b) {
  SolutionMapping out = a;
  for (const auto& [var, val] : b) {
    auto [it, fresh] = out.emplace(var, val);
    if (!fresh && it->second != val) return std::nullopt;
  }
  return out;
}

Solutions project(const Solutions& rows, const std::vector<std::string>& vars) {
  Solutions out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    SolutionMapping m;
    for (const auto& v : vars)
      if (auto it = row.find(v); it != row.end()) m.emplace(v, it->second);
    out.push_back(std::move(m));
  }
  return out;
}

void canonicalize(Solutions& rows, bool distinct) {
  std::sort(rows.begin(), rows.end());
  if (distinct) rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
}

}  // namespace kgq
