#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "kgq/cardinality.hpp"
#include "kgq/index.hpp"
#include "kgq/plan.hpp"
#include "kgq/query.hpp"

namespace kgq {

// A fragment as the answer source of one star. The same fragment may be a
// vertex for several stars.
struct CompatVertex {
  std::size_t star = 0;
  FragmentId fragment;

  friend auto operator<=>(const CompatVertex&, const CompatVertex&) = default;
  friend bool operator==(const CompatVertex&, const CompatVertex&) = default;
};

struct CompatibilityGraph {
  std::set<CompatVertex> vertices;
  std::set<std::pair<CompatVertex, CompatVertex>> edges;  // first < second

  bool empty() const noexcept { return vertices.empty(); }
  std::vector<FragmentId> fragments_of(std::size_t star) const;
  std::set<FragmentId> fragments() const;
  // Edges projected to fragment ids, each pair ordered.
  std::set<std::pair<FragmentId, FragmentId>> fragment_edges() const;
};

// Source pruning over star joins. Starts at the star with the lowest
// estimated cardinality and keeps a fragment only if it extends to a
// complete chain of compatible fragments. Disconnected parts are combined
// with all-pairs edges; an empty graph means the query has no answers.
CompatibilityGraph compatibility_graph(std::span<const StarPattern> stars, const SPBFIndex& idx,
                                       const CardinalitySource& src, bool distinct);

struct PlanCost {
  double transfer = 0.0;
  double cardinality = 0.0;
  double total = 0.0;
};

// Intermediate results shipped between nodes when `plan` is consumed at `at`.
double transfer_cost(const Plan& plan, NodeId at, const PlanContext& ctx, bool distinct);

// transfer + cardinality. A plan made only of selections ships exactly its
// own answers, so its total is the cardinality alone.
PlanCost plan_cost(const Plan& plan, NodeId at, const PlanContext& ctx, bool distinct);

struct PlannerOptions {
  // Only append a star whose estimated cardinality is at least that of the
  // plan built so far (falling back to any order when none qualifies).
  bool smaller_left = true;
  // Upper bound on partial plans kept per star subset.
  std::size_t frontier_limit = 64;
};

struct DpRow {
  std::vector<std::size_t> stars;  // sorted
  PlanPtr plan;
  PlanCost cost;
};

struct OptimizeResult {
  PlanPtr plan;
  PlanCost cost;
  CompatibilityGraph graph;
  std::vector<DpRow> table;  // by subset size, then subset
};

// Dynamic programming over star subsets with delegated joins and per-branch
// unions; the returned plan minimises plan_cost at `origin`.
OptimizeResult optimize(const BGP& bgp, const SPBFIndex& idx, const CardinalitySource& src, NodeId origin,
                        bool distinct, const PlannerOptions& options = {});
OptimizeResult optimize(std::span<const StarPattern> stars, const SPBFIndex& idx, const CardinalitySource& src,
                        NodeId origin, bool distinct, const PlannerOptions& options = {});

// Node chosen to evaluate a selection of `f` for a consumer at `preferred`:
// `preferred` itself if it holds f, else the lowest-numbered holder.
NodeId place_selection(const SPBFIndex& idx, const FragmentId& f, NodeId preferred);

// Indented plan tree with delegate, cardinality, transfer and total per
// operator. Numbers are rounded half-to-even.
std::string explain(const Plan& plan, NodeId origin, const PlanContext& ctx, bool distinct);
std::string explain_table(const std::vector<DpRow>& table);

}  // namespace kgq
