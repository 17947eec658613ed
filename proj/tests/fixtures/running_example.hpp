#pragma once

// Five-node network with five fragments used across planner, cardinality
// and simulator tests. Counts are seeded, so estimates are exact.

#include <string>
#include <vector>

#include "kgq/cardinality.hpp"
#include "kgq/index.hpp"
#include "kgq/netsim.hpp"
#include "kgq/query.hpp"

namespace fixture {

using namespace kgq;

inline const std::string kDbo = "http://dbpedia.org/ontology/";
inline const std::string kDbp = "http://dbpedia.org/property/";
inline const std::string kDbr = "http://dbpedia.org/resource/";

inline Term dbo(const std::string& local) { return Term::iri(kDbo + local); }
inline Term dbp(const std::string& local) { return Term::iri(kDbp + local); }
inline Term dbr(const std::string& local) { return Term::iri(kDbr + local); }

inline NodeId n(std::uint32_t i) { return NodeId{i}; }
inline FragmentId f(int i) { return FragmentId{"f" + std::to_string(i)}; }

inline const char* kQueryText = R"(
PREFIX dbo: <http://dbpedia.org/ontology/>
PREFIX dbp: <http://dbpedia.org/property/>
SELECT * WHERE {
  ?person dbo:nationality ?country .
  ?person dbo:author ?publication .
  ?country dbo:capital ?capital .
  ?country dbo:currency ?currency .
  ?publication dbo:publisher ?publisher .
  ?publication dbp:language ?language .
}
)";

inline Query query_q() { return parse_query(kQueryText); }
inline std::vector<StarPattern> stars_q() { return star_decompose(query_q().bgp); }

inline CharacteristicSet cs_of(int frag) {
  switch (frag) {
    case 1: return CharacteristicSet({dbo("nationality"), dbo("author"), dbo("deathDate")});
    case 2: return CharacteristicSet({dbo("nationality"), dbo("author")});
    case 3: return CharacteristicSet({dbo("capital"), dbo("currency"), dbo("population")});
    case 4: return CharacteristicSet({dbo("capital"), dbo("currency")});
    default: return CharacteristicSet({dbo("publisher"), dbp("language")});
  }
}

inline std::set<NodeId> holders_of(int frag) {
  switch (frag) {
    case 1: return {n(2), n(4)};
    case 2: return {n(3), n(5)};
    case 3: return {n(3), n(4)};
    case 4: return {n(2), n(5)};
    default: return {n(1), n(5)};
  }
}

// Index with predicate-only summaries; enough for relevance checks.
inline SPBFIndex seeded_index() {
  SPBFIndex idx;
  for (int i = 1; i <= 5; ++i) {
    SPBF spbf;
    auto cs = cs_of(i);
    for (const auto& p : cs.predicates()) spbf.add_predicate(p);
    idx.add(SPBFSlice{f(i), spbf, holders_of(i)});
  }
  return idx;
}

inline SeededCardinality seeded_source() {
  SeededCardinality src;
  for (int i = 1; i <= 5; ++i) src.set_predicates(f(i), cs_of(i));
  auto bs = [](int i) { return FilterRef::subjects(f(i)); };
  auto phi = [](int i, Term p) { return FilterRef::objects(f(i), std::move(p)); };

  src.set_count(bs(1), 1000);
  src.set_count(phi(1, dbo("author")), 5000);
  src.set_count(phi(1, dbo("nationality")), 1000);
  src.set_count(phi(1, dbo("deathDate")), 1000);
  src.set_count(bs(2), 2000);
  src.set_count(phi(2, dbo("author")), 3000);
  src.set_count(phi(2, dbo("nationality")), 2000);
  src.set_count(bs(3), 100);
  src.set_count(phi(3, dbo("capital")), 100);
  src.set_count(phi(3, dbo("currency")), 150);
  src.set_count(phi(3, dbo("population")), 100);
  src.set_count(bs(4), 200);
  src.set_count(phi(4, dbo("capital")), 200);
  src.set_count(phi(4, dbo("currency")), 500);
  src.set_count(bs(5), 8000);
  src.set_count(phi(5, dbo("publisher")), 8000);
  src.set_count(phi(5, dbp("language")), 9000);

  src.set_intersection(phi(1, dbo("nationality")), bs(3), 0);
  src.set_intersection(phi(1, dbo("nationality")), bs(4), 50);
  src.set_intersection(phi(2, dbo("nationality")), bs(3), 100);
  src.set_intersection(phi(2, dbo("nationality")), bs(4), 0);
  src.set_intersection(phi(1, dbo("author")), bs(5), 500);
  src.set_intersection(phi(2, dbo("author")), bs(5), 1000);
  return src;
}

// Small concrete data with the same fragment layout: persons in f1 only
// have nationalities in f4, persons in f2 only in f3.
inline std::vector<Fragment> concrete_fragments() {
  std::vector<Fragment> out(5);
  for (int i = 1; i <= 5; ++i) {
    out[i - 1].id = f(i);
    out[i - 1].cs = cs_of(i);
  }
  auto add = [&](int frag, const Term& s, const Term& p, const Term& o) {
    out[frag - 1].triples.insert({s, p, o});
  };
  auto lit = [](const std::string& v) { return Term::literal(v); };

  for (int c = 1; c <= 3; ++c) {
    auto country = dbr("CountryA" + std::to_string(c));
    add(3, country, dbo("capital"), dbr("CapitalA" + std::to_string(c)));
    add(3, country, dbo("currency"), dbr("CurrencyA" + std::to_string(c)));
    add(3, country, dbo("population"), lit(std::to_string(1000 * c)));
  }
  for (int c = 1; c <= 2; ++c) {
    auto country = dbr("CountryB" + std::to_string(c));
    add(4, country, dbo("capital"), dbr("CapitalB" + std::to_string(c)));
    add(4, country, dbo("currency"), dbr("CurrencyB" + std::to_string(c)));
    add(4, country, dbo("currency"), dbr("CurrencyB" + std::to_string(c) + "x"));
  }
  for (int b = 1; b <= 12; ++b) {
    auto book = dbr("Book" + std::to_string(b));
    add(5, book, dbo("publisher"), dbr("Publisher" + std::to_string(b % 3)));
    add(5, book, dbp("language"), lit(b % 2 ? "en" : "da"));
    if (b % 4 == 0) add(5, book, dbp("language"), lit("de"));
  }
  for (int p = 1; p <= 4; ++p) {
    auto person = dbr("WriterB" + std::to_string(p));
    add(1, person, dbo("nationality"), dbr("CountryB" + std::to_string(1 + p % 2)));
    add(1, person, dbo("author"), dbr("Book" + std::to_string(p)));
    add(1, person, dbo("author"), dbr("Book" + std::to_string(p + 4)));
    add(1, person, dbo("deathDate"), lit("19" + std::to_string(50 + p)));
  }
  for (int p = 1; p <= 3; ++p) {
    auto person = dbr("WriterA" + std::to_string(p));
    add(2, person, dbo("nationality"), dbr("CountryA" + std::to_string(p)));
    add(2, person, dbo("author"), dbr("Book" + std::to_string(8 + p)));
  }
  // Unrelated book without a publisher: never joins.
  add(2, dbr("WriterA3"), dbo("author"), dbr("Book99"));
  for (auto& frag : out) frag.recount();
  return out;
}

// Concrete running network: ring topology with n5 linked to n2 and n4.
inline Network concrete_network(std::size_t omega = 30, std::size_t page_size = 100) {
  NetworkConfig cfg;
  cfg.node_count = 5;
  cfg.neighbor_count = 2;
  cfg.omega = omega;
  cfg.page_size = page_size;
  Network net(cfg);
  net.set_neighbors(n(1), {n(2), n(3)});
  net.set_neighbors(n(2), {n(1), n(5)});
  net.set_neighbors(n(3), {n(1), n(4)});
  net.set_neighbors(n(4), {n(3), n(5)});
  net.set_neighbors(n(5), {n(2), n(4)});
  auto frags = concrete_fragments();
  for (int i = 1; i <= 5; ++i) net.place(frags[i - 1], holders_of(i));
  net.disseminate();
  return net;
}

// The best plan for Q at n1: two delegated joins in parallel, final join at
// the origin.
inline PlanPtr best_plan_q() {
  auto b1 = make_join(make_selection(1, f(4), n(2)), make_selection(0, f(1), n(2)), n(2));
  auto b2 = make_join(make_selection(1, f(3), n(3)), make_selection(0, f(2), n(3)), n(3));
  return make_join(make_union({b1, b2}), make_selection(2, f(5), n(1)), n(1));
}

// Subjects <tag>0 .. <tag>(count-1), each with every predicate in `preds`.
inline void add_subjects(KnowledgeGraph& g, const std::string& tag, int count, const std::vector<Term>& preds) {
  for (int i = 0; i < count; ++i) {
    auto s = dbr(tag + std::to_string(i));
    for (const auto& p : preds) g.insert({s, p, dbr("o_" + tag + std::to_string(i % 7))});
  }
}

inline KnowledgeGraph merge_example() {
  KnowledgeGraph g;
  add_subjects(g, "a", 500, {dbo("nationality"), dbo("author"), dbo("deathDate")});
  add_subjects(g, "b", 500, {dbo("nationality"), dbo("author")});
  add_subjects(g, "c", 1000, {dbo("publisher"), dbo("language")});
  add_subjects(g, "d", 2, {dbo("nationality"), dbo("author"), dbo("language")});
  add_subjects(g, "e", 1, {dbo("nationality")});
  return g;
}

}  // namespace fixture
