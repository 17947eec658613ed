#include "kgq/planner.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "kgq/error.hpp"

namespace kgq {

// ---------------------------------------------------------------------------
// Costs

double transfer_cost(const Plan& plan, NodeId at, const PlanContext& ctx, bool distinct) {
  if (const auto* s = std::get_if<Selection>(&plan.op))
    return s->node == at ? 0.0 : card_plan(plan, ctx, distinct);
  if (const auto* u = std::get_if<Union>(&plan.op)) {
    double total = 0.0;
    for (const auto& b : u->branches) total += transfer_cost(*b, at, ctx, distinct);
    return total;
  }
  if (const auto* c = std::get_if<Cartesian>(&plan.op)) {
    double cost = transfer_cost(*c->left, c->node, ctx, distinct) + transfer_cost(*c->right, c->node, ctx, distinct);
    if (at != c->node) cost += card_plan(plan, ctx, distinct);
    return cost;
  }
  const auto& j = std::get<Join>(plan.op);
  if (const auto* u = std::get_if<Union>(&j.right->op)) {
    // Each right branch is its own delegated join, so the left input is
    // counted once per branch.
    double total = 0.0;
    for (const auto& b : u->branches) total += transfer_cost(*make_join(j.left, b, j.node), at, ctx, distinct);
    return total;
  }
  const auto& sel = std::get<Selection>(j.right->op);
  double cost = transfer_cost(*j.left, j.node, ctx, distinct);
  if (sel.node != j.node) cost += card_plan(plan, ctx, false);
  if (at != j.node) cost += card_plan(plan, ctx, distinct);
  return cost;
}

PlanCost plan_cost(const Plan& plan, NodeId at, const PlanContext& ctx, bool distinct) {
  PlanCost out;
  if (is_empty_plan(plan)) return out;
  out.cardinality = card_plan(plan, ctx, distinct);
  if (is_selection_set(plan)) {
    out.total = out.cardinality;
    return out;
  }
  out.transfer = transfer_cost(plan, at, ctx, distinct);
  out.total = out.transfer + out.cardinality;
  return out;
}

NodeId place_selection(const SPBFIndex& idx, const FragmentId& f, NodeId preferred) {
  const auto& holders = idx.holders(f);
  if (holders.empty()) throw data_error("fragment " + f.value + " has no holder");
  if (holders.contains(preferred)) return preferred;
  return *holders.begin();
}

// ---------------------------------------------------------------------------
// Optimizer

namespace {

constexpr double kEps = 1e-9;

bool approx_less(double a, double b) { return a < b - kEps * std::max({1.0, std::abs(a), std::abs(b)}); }
bool approx_le(double a, double b) { return !approx_less(b, a); }

using Mask = std::uint32_t;

struct Branch {
  PlanPtr plan;
  std::vector<std::pair<std::size_t, FragmentId>> leaves;  // sorted
  double card = 0.0;
  double card_s = 0.0;
  std::vector<double> transfer;  // per candidate node
};

struct Partial {
  PlanPtr plan;
  std::vector<Branch> branches;
  PlanCost at_origin;
  std::size_t size = 0;
  std::string fp;

  double card() const {
    double c = 0.0;
    for (const auto& b : branches) c += b.card;
    return c;
  }
};

bool better(const Partial& a, const Partial& b) {
  if (approx_less(a.at_origin.total, b.at_origin.total)) return true;
  if (approx_less(b.at_origin.total, a.at_origin.total)) return false;
  if (approx_less(a.at_origin.transfer, b.at_origin.transfer)) return true;
  if (approx_less(b.at_origin.transfer, a.at_origin.transfer)) return false;
  if (a.size != b.size) return a.size < b.size;
  return a.fp < b.fp;
}

bool same_shape(const Partial& a, const Partial& b) {
  if (a.branches.size() != b.branches.size()) return false;
  for (std::size_t i = 0; i < a.branches.size(); ++i)
    if (a.branches[i].leaves != b.branches[i].leaves) return false;
  return true;
}

// Everything a future extension can observe is no worse in `a`.
bool dominates(const Partial& a, const Partial& b) {
  if (!same_shape(a, b)) return false;
  for (std::size_t i = 0; i < a.branches.size(); ++i) {
    const auto& x = a.branches[i];
    const auto& y = b.branches[i];
    if (!approx_le(x.card, y.card) || !approx_le(x.card_s, y.card_s)) return false;
    for (std::size_t n = 0; n < x.transfer.size(); ++n)
      if (!approx_le(x.transfer[n], y.transfer[n])) return false;
  }
  return true;
}

class Optimizer {
 public:
  Optimizer(std::span<const StarPattern> stars, const SPBFIndex& idx, const CardinalitySource& src, NodeId origin,
            bool distinct, const PlannerOptions& options, const CompatibilityGraph& graph)
      : stars_(stars),
        idx_(idx),
        ctx_{stars, src},
        origin_(origin),
        distinct_(distinct),
        options_(options) {
    std::set<NodeId> nodes{origin};
    for (std::size_t i = 0; i < stars.size(); ++i) {
      frags_.push_back(graph.fragments_of(i));
      for (const auto& f : frags_.back()) {
        const auto& h = idx.holders(f);
        nodes.insert(h.begin(), h.end());
      }
      star_card_.push_back(card_star_indexed(stars[i], frags_.back(), src, distinct));
    }
    nodes_.assign(nodes.begin(), nodes.end());
    adjacency_.assign(stars.size(), 0);
    for (std::size_t i = 0; i < stars.size(); ++i)
      for (std::size_t j = 0; j < stars.size(); ++j)
        if (i != j && !shared_vars(stars[i], stars[j]).empty()) adjacency_[i] |= Mask{1} << j;
  }

  OptimizeResult run() {
    const std::size_t n = stars_.size();
    const Mask full = (Mask{1} << n) - 1;
    std::vector<std::vector<Partial>> table(std::size_t{full} + 1);

    for (std::size_t i = 0; i < n; ++i) {
      std::vector<PlanPtr> sels;
      for (const auto& f : frags_[i]) sels.push_back(make_selection(i, f, place_selection(idx_, f, origin_)));
      table[Mask{1} << i].push_back(finish(make_union(std::move(sels))));
    }

    std::vector<Mask> order;
    for (Mask m = 1; m <= full; ++m) order.push_back(m);
    std::stable_sort(order.begin(), order.end(),
                     [](Mask a, Mask b) { return std::popcount(a) < std::popcount(b); });

    for (Mask target : order) {
      if (std::popcount(target) < 2) continue;
      // Best tier available for this subset; lower is preferred.
      int best_tier = 5;
      for (std::size_t p = 0; p < n; ++p) {
        Mask rest = target & ~(Mask{1} << p);
        if (!(target >> p & 1) || table[rest].empty()) continue;
        best_tier = std::min(best_tier, tier(rest, p));
      }
      if (best_tier == 5) continue;

      std::vector<std::pair<const Partial*, std::size_t>> moves;
      for (std::size_t p = 0; p < n; ++p) {
        Mask rest = target & ~(Mask{1} << p);
        if (!(target >> p & 1) || table[rest].empty() || tier(rest, p) != best_tier) continue;
        for (const auto& left : table[rest]) moves.emplace_back(&left, p);
      }
      if (options_.smaller_left) {
        std::vector<std::pair<const Partial*, std::size_t>> admissible;
        for (const auto& mv : moves)
          if (approx_le(mv.first->card(), star_card_[mv.second])) admissible.push_back(mv);
        if (!admissible.empty()) moves = std::move(admissible);
      }

      auto& frontier = table[target];
      for (const auto& [left, p] : moves)
        for (auto& cand : extend(*left, p)) insert(frontier, std::move(cand));
    }

    OptimizeResult out;
    for (Mask m : order) {
      if (table[m].empty()) continue;
      const Partial& best = *std::min_element(table[m].begin(), table[m].end(), better);
      DpRow row;
      for (std::size_t i = 0; i < n; ++i)
        if (m >> i & 1) row.stars.push_back(i);
      row.plan = best.plan;
      row.cost = best.at_origin;
      out.table.push_back(std::move(row));
    }
    if (table[full].empty()) throw internal_error("planner produced no plan for the full query");
    const Partial& best = *std::min_element(table[full].begin(), table[full].end(), better);
    out.plan = best.plan;
    out.cost = best.at_origin;
    return out;
  }

 private:
  bool joins(Mask set, std::size_t p) const { return (adjacency_[p] & set) != 0; }

  bool connected(Mask set) const {
    if (set == 0) return true;
    Mask seen = set & -set;
    for (Mask frontier = seen; frontier;) {
      Mask next = 0;
      for (std::size_t i = 0; i < stars_.size(); ++i)
        if (frontier >> i & 1) next |= adjacency_[i] & set;
      frontier = next & ~seen;
      seen |= next;
    }
    return seen == set;
  }

  int tier(Mask rest, std::size_t p) const {
    bool j = joins(rest, p);
    bool c = connected(rest);
    if (c) return j ? 1 : 2;
    return j ? 3 : 4;
  }

  std::vector<NodeId> candidates(const std::vector<FragmentId>& right) const {
    std::set<NodeId> out{origin_};
    for (const auto& f : right) {
      const auto& h = idx_.holders(f);
      out.insert(h.begin(), h.end());
    }
    return {out.begin(), out.end()};
  }

  PlanPtr right_side(std::size_t p, const std::vector<FragmentId>& frags, NodeId d) const {
    std::vector<PlanPtr> sels;
    for (const auto& f : frags) sels.push_back(make_selection(p, f, place_selection(idx_, f, d)));
    return make_union(std::move(sels));
  }

  // Fragments of star p that may join every joining star present in `left`.
  std::vector<FragmentId> compatible(const PlanPtr& left, std::size_t p) const {
    std::set<std::size_t> present;
    for (const auto* leaf : leaves(*left))
      if (!shared_vars(stars_[leaf->star], stars_[p]).empty()) present.insert(leaf->star);
    std::vector<FragmentId> out;
    for (const auto& f : frags_[p]) {
      bool ok = std::all_of(present.begin(), present.end(), [&](std::size_t q) {
        return !joining_fragments(*left, q, stars_[p], f, ctx_).empty();
      });
      if (ok) out.push_back(f);
    }
    return out;
  }

  Branch make_branch(PlanPtr plan) const {
    Branch b;
    for (const auto* leaf : leaves(*plan)) b.leaves.emplace_back(leaf->star, leaf->fragment);
    std::sort(b.leaves.begin(), b.leaves.end());
    b.card = card_plan(*plan, ctx_, distinct_);
    b.card_s = distinct_ ? card_plan(*plan, ctx_, false) : b.card;
    for (auto n : nodes_) b.transfer.push_back(transfer_cost(*plan, n, ctx_, distinct_));
    b.plan = std::move(plan);
    return b;
  }

  Partial finish(PlanPtr plan) const {
    Partial out;
    if (!is_empty_plan(*plan))
      for (const auto& b : branches_of(plan)) out.branches.push_back(make_branch(b));
    std::sort(out.branches.begin(), out.branches.end(),
              [](const Branch& a, const Branch& b) { return a.leaves < b.leaves; });
    out.at_origin = plan_cost(*plan, origin_, ctx_, distinct_);
    out.size = plan_size(*plan);
    out.fp = fingerprint(*plan);
    out.plan = std::move(plan);
    return out;
  }

  std::vector<Partial> extend(const Partial& left, std::size_t p) const {
    if (is_empty_plan(*left.plan) || frags_[p].empty()) return {finish(make_empty_plan())};
    std::vector<Partial> out;

    if (!joins(mask_of(left), p)) {
      for (auto d : candidates(frags_[p]))
        out.push_back(finish(make_cartesian(left.plan, right_side(p, frags_[p], d), d)));
      return out;
    }

    auto branches = branches_of(left.plan);
    std::vector<std::vector<FragmentId>> per_branch;
    std::set<FragmentId> any;
    for (const auto& b : branches) {
      per_branch.push_back(compatible(b, p));
      any.insert(per_branch.back().begin(), per_branch.back().end());
    }
    std::vector<FragmentId> all_right;
    for (const auto& f : frags_[p])
      if (any.contains(f)) all_right.push_back(f);
    if (all_right.empty()) return {finish(make_empty_plan())};

    for (auto d : candidates(all_right))
      out.push_back(finish(make_join(left.plan, right_side(p, all_right, d), d)));

    if (branches.size() >= 2 && pairwise_disjoint(per_branch)) {
      // Per-branch delegation: every surviving branch joins only its own
      // right fragments, each at its own delegate.
      std::vector<std::vector<PlanPtr>> options;
      for (std::size_t i = 0; i < branches.size(); ++i) {
        if (per_branch[i].empty()) continue;
        std::vector<Partial> alts;
        for (auto d : candidates(per_branch[i]))
          insert(alts, finish(make_join(branches[i], right_side(p, per_branch[i], d), d)));
        std::vector<PlanPtr> plans;
        for (const auto& a : alts) plans.push_back(a.plan);
        options.push_back(std::move(plans));
      }
      for (auto& combo : combinations(options)) out.push_back(finish(make_union(std::move(combo))));
    }
    return out;
  }

  std::vector<std::vector<PlanPtr>> combinations(const std::vector<std::vector<PlanPtr>>& options) const {
    constexpr std::size_t kMaxCombos = 256;
    std::size_t count = 1;
    for (const auto& o : options) count = std::min(kMaxCombos + 1, count * o.size());
    std::vector<std::vector<PlanPtr>> out;
    if (count > kMaxCombos) {
      // Too many: keep only the choice that is cheapest at the origin.
      std::vector<PlanPtr> greedy;
      for (const auto& o : options)
        greedy.push_back(*std::min_element(o.begin(), o.end(), [&](const PlanPtr& a, const PlanPtr& b) {
          return better(finish(a), finish(b));
        }));
      out.push_back(std::move(greedy));
      return out;
    }
    out.emplace_back();
    for (const auto& o : options) {
      std::vector<std::vector<PlanPtr>> next;
      for (const auto& prefix : out)
        for (const auto& choice : o) {
          next.push_back(prefix);
          next.back().push_back(choice);
        }
      out = std::move(next);
    }
    return out;
  }

  static bool pairwise_disjoint(const std::vector<std::vector<FragmentId>>& sets) {
    std::set<FragmentId> seen;
    for (const auto& s : sets)
      for (const auto& f : s)
        if (!seen.insert(f).second) return false;
    return true;
  }

  Mask mask_of(const Partial& p) const {
    Mask m = 0;
    for (const auto* leaf : leaves(*p.plan)) m |= Mask{1} << leaf->star;
    return m;
  }

  void insert(std::vector<Partial>& frontier, Partial cand) const {
    for (const auto& existing : frontier)
      if (dominates(existing, cand) && (!dominates(cand, existing) || !better(cand, existing))) return;
    std::erase_if(frontier, [&](const Partial& e) { return dominates(cand, e); });
    frontier.push_back(std::move(cand));
    if (frontier.size() > options_.frontier_limit) {
      std::sort(frontier.begin(), frontier.end(), better);
      frontier.resize(options_.frontier_limit);
    }
  }

  std::span<const StarPattern> stars_;
  const SPBFIndex& idx_;
  PlanContext ctx_;
  NodeId origin_;
  bool distinct_;
  PlannerOptions options_;
  std::vector<std::vector<FragmentId>> frags_;
  std::vector<double> star_card_;
  std::vector<NodeId> nodes_;
  std::vector<Mask> adjacency_;
};

}  // namespace

OptimizeResult optimize(std::span<const StarPattern> stars, const SPBFIndex& idx, const CardinalitySource& src,
                        NodeId origin, bool distinct, const PlannerOptions& options) {
  if (stars.size() > 20) throw usage_error("too many star patterns to plan (at most 20)");
  if (options.frontier_limit == 0) throw usage_error("frontier limit must be positive");
  OptimizeResult out;
  out.graph = compatibility_graph(stars, idx, src, distinct);
  if (out.graph.empty()) {
    out.plan = make_empty_plan();
    return out;
  }
  auto graph = out.graph;
  out = Optimizer(stars, idx, src, origin, distinct, options, graph).run();
  out.graph = std::move(graph);
  return out;
}

OptimizeResult optimize(const BGP& bgp, const SPBFIndex& idx, const CardinalitySource& src, NodeId origin,
                        bool distinct, const PlannerOptions& options) {
  auto stars = star_decompose(bgp);
  return optimize(std::span<const StarPattern>(stars), idx, src, origin, distinct, options);
}

// ---------------------------------------------------------------------------
// Explain

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(0);
  os << std::nearbyint(v);
  return os.str();
}

void explain_into(std::ostringstream& os, const PlanPtr& plan, NodeId consumer, const PlanContext& ctx, bool distinct,
                  int depth) {
  std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
  auto cost = plan_cost(*plan, consumer, ctx, distinct);
  auto figures = " card=" + num(cost.cardinality) + " transfer=" + num(cost.transfer) + " total=" + num(cost.total);
  if (const auto* s = std::get_if<Selection>(&plan->op)) {
    os << pad << "select P" << s->star + 1 << " " << ctx.stars[s->star].to_string() << " on " << s->fragment.value
       << " @" << s->node.to_string() << figures << '\n';
    return;
  }
  if (const auto* u = std::get_if<Union>(&plan->op)) {
    if (u->branches.empty()) {
      os << pad << "empty" << figures << '\n';
      return;
    }
    os << pad << "union" << figures << '\n';
    for (const auto& b : u->branches) explain_into(os, b, consumer, ctx, distinct, depth + 1);
    return;
  }
  if (const auto* c = std::get_if<Cartesian>(&plan->op)) {
    os << pad << "cartesian @" << c->node.to_string() << figures << '\n';
    explain_into(os, c->left, c->node, ctx, distinct, depth + 1);
    explain_into(os, c->right, c->node, ctx, distinct, depth + 1);
    return;
  }
  const auto& j = std::get<Join>(plan->op);
  os << pad << "join @" << j.node.to_string() << figures << '\n';
  explain_into(os, j.left, j.node, ctx, distinct, depth + 1);
  explain_into(os, j.right, j.node, ctx, distinct, depth + 1);
}

}  // namespace

std::string explain(const Plan& plan, NodeId origin, const PlanContext& ctx, bool distinct) {
  std::ostringstream os;
  explain_into(os, std::make_shared<const Plan>(plan), origin, ctx, distinct, 0);
  return os.str();
}

std::string explain_table(const std::vector<DpRow>& table) {
  std::ostringstream os;
  for (const auto& row : table) {
    os << '{';
    for (std::size_t i = 0; i < row.stars.size(); ++i) os << (i ? "," : "") << 'P' << row.stars[i] + 1;
    os << "} cost=" << num(row.cost.total) << " card=" << num(row.cost.cardinality) << ' ' << fingerprint(*row.plan)
       << '\n';
  }
  return os.str();
}

}  // namespace kgq
