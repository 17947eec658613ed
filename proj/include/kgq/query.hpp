#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "kgq/rdf.hpp"

namespace kgq {

struct Variable {
  std::string name;  // without the leading '?'

  friend auto operator<=>(const Variable&, const Variable&) = default;
  friend bool operator==(const Variable&, const Variable&) = default;
};

// A position in a triple pattern: either a constant term or a variable.
class PatternTerm {
 public:
  PatternTerm() = default;
  PatternTerm(Term t) : v_(std::move(t)) {}
  PatternTerm(Variable v) : v_(std::move(v)) {}

  bool is_variable() const noexcept { return std::holds_alternative<Variable>(v_); }
  bool is_constant() const noexcept { return !is_variable(); }
  const Term& term() const { return std::get<Term>(v_); }
  const std::string& var() const { return std::get<Variable>(v_).name; }

  std::string to_string() const;

  friend auto operator<=>(const PatternTerm&, const PatternTerm&) = default;
  friend bool operator==(const PatternTerm&, const PatternTerm&) = default;

 private:
  std::variant<Term, Variable> v_;
};

struct TriplePattern {
  PatternTerm s;
  PatternTerm p;
  PatternTerm o;

  std::string to_string() const;
  friend auto operator<=>(const TriplePattern&, const TriplePattern&) = default;
  friend bool operator==(const TriplePattern&, const TriplePattern&) = default;
};

// A conjunctive set of triple patterns. Duplicates are dropped, document
// order of first occurrence is kept.
class BGP {
 public:
  BGP() = default;
  explicit BGP(std::vector<TriplePattern> patterns);

  void add(TriplePattern tp);
  const std::vector<TriplePattern>& patterns() const noexcept { return patterns_; }
  std::size_t size() const noexcept { return patterns_.size(); }
  bool empty() const noexcept { return patterns_.empty(); }

  std::set<std::string> vars() const;

  friend bool operator==(const BGP&, const BGP&) = default;

 private:
  std::vector<TriplePattern> patterns_;
};

// Triple patterns sharing one subject.
class StarPattern {
 public:
  StarPattern() = default;
  StarPattern(PatternTerm subject, std::vector<TriplePattern> patterns);

  const PatternTerm& subject() const noexcept { return subject_; }
  const std::vector<TriplePattern>& patterns() const noexcept { return patterns_; }
  std::size_t size() const noexcept { return patterns_.size(); }

  std::set<std::string> vars() const;
  // Constant predicates in pattern order.
  std::vector<Term> constant_predicates() const;
  bool has_variable_predicate() const;

  std::string to_string() const;

  friend bool operator==(const StarPattern&, const StarPattern&) = default;

 private:
  PatternTerm subject_;
  std::vector<TriplePattern> patterns_;
};

// Variables shared by two stars, sorted.
std::vector<std::string> shared_vars(const StarPattern& a, const StarPattern& b);

// One star per distinct subject, ordered by the subject's first occurrence.
std::vector<StarPattern> star_decompose(const BGP& bgp);

struct Query {
  BGP bgp;
  bool distinct = false;
  // Empty means SELECT *.
  std::vector<std::string> projection;

  std::vector<std::string> projected_vars() const;
};

// PREFIX declarations, then SELECT [DISTINCT] (*|?vars) WHERE { patterns }.
Query parse_query(std::string_view text);

using SolutionMapping = std::map<std::string, Term>;
using Solutions = std::vector<SolutionMapping>;

// Merge two mappings; nullopt when they disagree on a shared variable.
std::optional<SolutionMapping> merge_compatible(const SolutionMapping& a, const SolutionMapping& b);

// Restrict each mapping to `vars`; keeps duplicates.
Solutions project(const Solutions& rows, const std::vector<std::string>& vars);

// Sort, and drop duplicates when `distinct`.
void canonicalize(Solutions& rows, bool distinct);

}  // namespace kgq
