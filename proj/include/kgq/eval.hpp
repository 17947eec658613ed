#pragma once

#include <span>
#include <string>
#include <vector>

#include "kgq/query.hpp"
#include "kgq/rdf.hpp"

namespace kgq {

// Reference evaluation by backtracking over triple patterns. Returns full
// mappings over vars(P); with `distinct` duplicates are removed.
Solutions evaluate_bgp(const BGP& bgp, const KnowledgeGraph& g, bool distinct);

// Same, over a star pattern only.
Solutions evaluate_star(const StarPattern& star, const KnowledgeGraph& g);

// Evaluate with projection and the query's DISTINCT flag, canonically sorted.
Solutions evaluate_query(const Query& q, const KnowledgeGraph& g);

// Union of several graphs, set semantics.
KnowledgeGraph merge_graphs(std::span<const KnowledgeGraph* const> graphs);

// Tab-separated text: a header of the sorted variable names, then one line
// per row in N-Triples syntax (empty cell when unbound), lines sorted.
std::string format_solutions(const Solutions& rows, std::vector<std::string> vars);

}  // namespace kgq
