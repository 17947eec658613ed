#include "kgq/rdf.hpp"

#include <algorithm>
#include <cctype>

namespace kgq {

namespace {

void escape_into(std::string& out, std::string_view s) {
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

std::size_t mix(std::size_t seed, std::size_t h) {
  return seed ^ (h + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

}  // namespace

Term Term::iri(std::string value) { return Term(TermKind::Iri, std::move(value), {}, {}); }

Term Term::blank(std::string label) { return Term(TermKind::BlankNode, std::move(label), {}, {}); }

Term Term::literal(std::string lexical, std::string datatype, std::string lang) {
  return Term(TermKind::Literal, std::move(lexical), std::move(datatype), std::move(lang));
}

std::string iri_prefix(std::string_view iri) {
  auto cut = iri.find_last_of("/#");
  if (cut != std::string_view::npos) return std::string(iri.substr(0, cut + 1));
  // No path or fragment separator: fall back to the scheme.
  auto colon = iri.find(':');
  if (colon != std::string_view::npos) return std::string(iri.substr(0, colon + 1));
  return std::string(iri);
}

bool is_absolute_iri(std::string_view iri) {
  auto colon = iri.find(':');
  if (colon == std::string_view::npos || colon == 0) return false;
  if (!std::isalpha(static_cast<unsigned char>(iri[0]))) return false;
  for (std::size_t i = 1; i < colon; ++i) {
    auto c = static_cast<unsigned char>(iri[i]);
    if (!std::isalnum(c) && c != '+' && c != '-' && c != '.') return false;
  }
  for (char ch : iri) {
    auto c = static_cast<unsigned char>(ch);
    if (c <= 0x20 || ch == '<' || ch == '>' || ch == '"' || ch == '{' || ch == '}' || ch == '|' ||
        ch == '^' || ch == '`' || ch == '\\')
      return false;
  }
  return true;
}

std::string Term::prefix() const {
  switch (kind_) {
    case TermKind::Iri: return iri_prefix(value_);
    case TermKind::BlankNode: return std::string(kBlankPrefix);
    case TermKind::Literal: return std::string(kLiteralPrefix);
  }
  return {};
}

std::string Term::localname() const {
  if (kind_ != TermKind::Iri) return to_ntriples();
  return value_.substr(iri_prefix(value_).size());
}

std::string Term::to_ntriples() const {
  std::string out;
  switch (kind_) {
    case TermKind::Iri:
      out.reserve(value_.size() + 2);
      out += '<';
      out += value_;
      out += '>';
      break;
    case TermKind::BlankNode:
      out = "_:" + value_;
      break;
    case TermKind::Literal:
      out += '"';
      escape_into(out, value_);
      out += '"';
      if (!lang_.empty()) {
        out += '@';
        out += lang_;
      } else if (!datatype_.empty()) {
        out += "^^<";
        out += datatype_;
        out += '>';
      }
      break;
  }
  return out;
}

KnowledgeGraph::KnowledgeGraph(std::vector<Triple> triples) {
  for (auto& t : triples) insert(std::move(t));
}

bool KnowledgeGraph::insert(Triple t) {
  if (!set_.insert(t).second) return false;
  auto [it, fresh] = by_subject_.try_emplace(t.s);
  if (fresh) subject_order_.push_back(t.s);
  it->second.push_back(triples_.size());
  triples_.push_back(std::move(t));
  return true;
}

std::vector<Triple> KnowledgeGraph::with_subject(const Term& s) const {
  std::vector<Triple> out;
  auto it = by_subject_.find(s);
  if (it == by_subject_.end()) return out;
  out.reserve(it->second.size());
  for (auto i : it->second) out.push_back(triples_[i]);
  return out;
}

}  // namespace kgq

std::size_t std::hash<kgq::Term>::operator()(const kgq::Term& t) const noexcept {
  std::size_t h = std::hash<std::string>{}(t.value());
  h = kgq::mix(h, static_cast<std::size_t>(t.kind()));
  if (!t.datatype().empty()) h = kgq::mix(h, std::hash<std::string>{}(t.datatype()));
  if (!t.lang().empty()) h = kgq::mix(h, std::hash<std::string>{}(t.lang()));
  return h;
}

std::size_t std::hash<kgq::Triple>::operator()(const kgq::Triple& t) const noexcept {
  std::hash<kgq::Term> th;
  return kgq::mix(kgq::mix(th(t.s), th(t.p)), th(t.o));
}
