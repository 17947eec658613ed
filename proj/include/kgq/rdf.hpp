#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace kgq {

enum class TermKind : unsigned char { Iri, BlankNode, Literal };

// An RDF term. For literals `value` is the unescaped lexical form; the
// datatype IRI and language tag are kept separately.
class Term {
 public:
  Term() = default;

  static Term iri(std::string value);
  static Term blank(std::string label);
  static Term literal(std::string lexical, std::string datatype = {}, std::string lang = {});

  TermKind kind() const noexcept { return kind_; }
  bool is_iri() const noexcept { return kind_ == TermKind::Iri; }
  bool is_blank() const noexcept { return kind_ == TermKind::BlankNode; }
  bool is_literal() const noexcept { return kind_ == TermKind::Literal; }

  const std::string& value() const noexcept { return value_; }
  const std::string& datatype() const noexcept { return datatype_; }
  const std::string& lang() const noexcept { return lang_; }

  // Namespace used to pick a filter partition. IRIs split at the last '/' or
  // '#'; literals and blank nodes map to the pseudo-prefixes "_lit:" / "_bn:".
  std::string prefix() const;
  std::string localname() const;

  // N-Triples surface syntax; also the lexical form fed to the filter hash.
  std::string to_ntriples() const;

  friend auto operator<=>(const Term&, const Term&) = default;
  friend bool operator==(const Term&, const Term&) = default;
  friend std::ostream& operator<<(std::ostream& os, const Term& t) { return os << t.to_ntriples(); }

 private:
  Term(TermKind kind, std::string value, std::string datatype, std::string lang)
      : kind_(kind), value_(std::move(value)), datatype_(std::move(datatype)), lang_(std::move(lang)) {}

  TermKind kind_ = TermKind::Iri;
  std::string value_;
  std::string datatype_;
  std::string lang_;
};

inline constexpr std::string_view kLiteralPrefix = "_lit:";
inline constexpr std::string_view kBlankPrefix = "_bn:";

// Split an IRI into namespace and local name.
std::string iri_prefix(std::string_view iri);
bool is_absolute_iri(std::string_view iri);

struct Triple {
  Term s;
  Term p;
  Term o;

  friend auto operator<=>(const Triple&, const Triple&) = default;
  friend bool operator==(const Triple&, const Triple&) = default;
};

}  // namespace kgq

template <>
struct std::hash<kgq::Term> {
  std::size_t operator()(const kgq::Term& t) const noexcept;
};

template <>
struct std::hash<kgq::Triple> {
  std::size_t operator()(const kgq::Triple& t) const noexcept;
};

namespace kgq {

// A set of triples with a subject index. Insertion order is kept so that
// iteration is deterministic.
class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;
  explicit KnowledgeGraph(std::vector<Triple> triples);

  // Returns false when the triple is already present.
  bool insert(Triple t);
  bool contains(const Triple& t) const { return set_.contains(t); }

  const std::vector<Triple>& triples() const noexcept { return triples_; }
  std::size_t size() const noexcept { return triples_.size(); }
  bool empty() const noexcept { return triples_.empty(); }

  // Triples with the given subject, in insertion order. Empty if unknown.
  std::vector<Triple> with_subject(const Term& s) const;
  bool has_subject(const Term& s) const { return by_subject_.contains(s); }
  // Distinct subjects in first-seen order.
  const std::vector<Term>& subjects() const noexcept { return subject_order_; }

  friend bool operator==(const KnowledgeGraph& a, const KnowledgeGraph& b) { return a.set_ == b.set_; }

 private:
  std::vector<Triple> triples_;
  std::unordered_set<Triple> set_;
  std::unordered_map<Term, std::vector<std::size_t>> by_subject_;
  std::vector<Term> subject_order_;
};

}  // namespace kgq
