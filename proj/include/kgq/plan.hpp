#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "kgq/ids.hpp"

namespace kgq {

struct Plan;
using PlanPtr = std::shared_ptr<const Plan>;

// [[P]]_f evaluated at `node`. `star` indexes the query's star decomposition.
struct Selection {
  std::size_t star = 0;
  FragmentId fragment;
  NodeId node;
};

// Left-deep join delegated to `node`. `right` is a Selection or a Union of
// Selections.
struct Join {
  PlanPtr left;
  PlanPtr right;
  NodeId node;
};

struct Cartesian {
  PlanPtr left;
  PlanPtr right;
  NodeId node;
};

// Branches are evaluated independently and concatenated. No branches means
// a provably empty result.
struct Union {
  std::vector<PlanPtr> branches;
};

struct Plan {
  std::variant<Selection, Join, Cartesian, Union> op;
};

PlanPtr make_selection(std::size_t star, FragmentId fragment, NodeId node);
PlanPtr make_join(PlanPtr left, PlanPtr right, NodeId node);
PlanPtr make_cartesian(PlanPtr left, PlanPtr right, NodeId node);
// A single branch is returned unchanged.
PlanPtr make_union(std::vector<PlanPtr> branches);
PlanPtr make_empty_plan();

bool is_empty_plan(const Plan& p);
// A Selection, or a Union whose branches are all Selections.
bool is_selection_set(const Plan& p);
// Top-level union branches, or the plan itself.
std::vector<PlanPtr> branches_of(const PlanPtr& p);
// Selections in left-to-right order.
std::vector<const Selection*> leaves(const Plan& p);
std::size_t plan_size(const Plan& p);

// Compact one-line rendering, e.g. "(([[P2]]f4@n2 J@n2 [[P1]]f1@n2) U ...)".
// Stars print 1-based.
std::string fingerprint(const Plan& p);

}  // namespace kgq
