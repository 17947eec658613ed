#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <limits>
#include <random>

#include "fixtures/exact_source.hpp"
#include "fixtures/random_data.hpp"
#include "fixtures/reference_data.hpp"
#include "fixtures/running_example.hpp"
#include "kgq/planner.hpp"

using namespace kgq;
using fixture::f;
using fixture::n;

namespace {

struct RunningPlan : ::testing::Test {
  std::vector<StarPattern> stars = fixture::stars_q();
  SeededCardinality src = fixture::seeded_source();
  SPBFIndex idx = fixture::seeded_index();
  PlanContext ctx{stars, src};
};

std::set<std::string> branch_prints(const PlanPtr& p) {
  std::set<std::string> out;
  for (const auto& b : branches_of(p)) out.insert(fingerprint(*b));
  return out;
}

const DpRow& row(const OptimizeResult& r, std::vector<std::size_t> stars) {
  for (const auto& x : r.table)
    if (x.stars == stars) return x;
  throw std::runtime_error("missing DP row");
}

}  // namespace

TEST_F(RunningPlan, CompatibilityGraph) {
  auto g = compatibility_graph(stars, idx, src, false);
  EXPECT_EQ(g.fragments(), (std::set<FragmentId>{f(1), f(2), f(3), f(4), f(5)}));
  std::set<std::pair<FragmentId, FragmentId>> want{{f(1), f(4)}, {f(1), f(5)}, {f(2), f(3)}, {f(2), f(5)}};
  EXPECT_EQ(g.fragment_edges(), want);
  EXPECT_EQ(compatibility_graph(stars, idx, src, false).edges, g.edges);
}

TEST_F(RunningPlan, CompatibilityGraphSingleStar) {
  std::vector<StarPattern> one{stars[0]};
  auto g = compatibility_graph(one, idx, src, false);
  EXPECT_EQ(g.fragments(), (std::set<FragmentId>{f(1), f(2)}));
  EXPECT_TRUE(g.edges.empty());
}

TEST_F(RunningPlan, TransferCostExamples) {
  EXPECT_DOUBLE_EQ(transfer_cost(*make_selection(2, f(5), n(1)), n(1), ctx, false), 0.0);
  auto p1 = make_union({make_selection(0, f(1), n(2)), make_selection(0, f(2), n(3))});
  EXPECT_DOUBLE_EQ(transfer_cost(*p1, n(1), ctx, false), 5000.0 + 3000.0);
  auto best = fixture::best_plan_q();
  EXPECT_DOUBLE_EQ(transfer_cost(*best, n(1), ctx, false), 625.0 + 225.0);
  auto cost = plan_cost(*best, n(1), ctx, false);
  EXPECT_NEAR(cost.total, 850.0 + 154.6875, 1e-9);
  EXPECT_GE(cost.total, 1003.0);
  EXPECT_LE(cost.total, 1030.0);
}

TEST_F(RunningPlan, CostRows) {
  auto p2 = make_union({make_selection(1, f(3), n(3)), make_selection(1, f(4), n(2))});
  EXPECT_DOUBLE_EQ(plan_cost(*p2, n(1), ctx, false).total, 650.0);
  auto p3 = make_selection(2, f(5), n(1));
  EXPECT_DOUBLE_EQ(plan_cost(*p3, n(1), ctx, false).total, 9000.0);
  EXPECT_DOUBLE_EQ(plan_cost(*make_cartesian(p2, p3, n(1)), n(1), ctx, false).total, 5850650.0);
  auto p1 = make_union({make_selection(0, f(1), n(2)), make_selection(0, f(2), n(3))});
  EXPECT_DOUBLE_EQ(plan_cost(*make_join(p1, p3, n(1)), n(1), ctx, false).total, 8000.0 + 1687.5);
}

TEST_F(RunningPlan, AllLocalPlanHasNoTransfer) {
  auto local = make_join(make_selection(1, f(4), n(2)), make_selection(0, f(1), n(2)), n(2));
  EXPECT_DOUBLE_EQ(transfer_cost(*local, n(2), ctx, false), 0.0);
}

TEST_F(RunningPlan, OptimizeReproducesTable) {
  auto r = optimize(std::span<const StarPattern>(stars), idx, src, n(1), false);
  EXPECT_EQ(fingerprint(*r.plan), fingerprint(*make_join(std::get<Join>(r.plan->op).left,
                                                        make_selection(2, f(5), n(1)), n(1))));
  const auto& top = std::get<Join>(r.plan->op);
  EXPECT_EQ(top.node, n(1));
  EXPECT_EQ(branch_prints(top.left), branch_prints(std::get<Join>(fixture::best_plan_q()->op).left));
  EXPECT_GE(r.cost.total, 1003.0);
  EXPECT_LE(r.cost.total, 1030.0);

  EXPECT_NEAR(row(r, {0}).cost.total, 8000.0, 1.0);
  EXPECT_NEAR(row(r, {1}).cost.total, 650.0, 1.0);
  EXPECT_NEAR(row(r, {2}).cost.total, 9000.0, 1.0);
  EXPECT_NEAR(row(r, {0, 1}).cost.total, 1700.0, 1.0);
  EXPECT_NEAR(row(r, {1, 2}).cost.total, 5850650.0, 1.0);
  EXPECT_NEAR(row(r, {0, 2}).cost.total, 9688.0, 1.0);
  EXPECT_NEAR(row(r, {0, 1}).cost.cardinality, 850.0, 1e-9);
  EXPECT_NEAR(row(r, {0, 2}).cost.cardinality, 1687.5, 1e-9);
}

TEST_F(RunningPlan, ExplainIsStable) {
  auto text = explain(*fixture::best_plan_q(), n(1), ctx, false);
  EXPECT_EQ(text, explain(*fixture::best_plan_q(), n(1), ctx, false));
  EXPECT_EQ(text.substr(0, text.find('\n')), "join @n1 card=155 transfer=850 total=1005");
  EXPECT_NE(text.find("  union card=850 transfer=850 total=1700"), std::string::npos);
}

TEST(Planner, SingleLocalFragment) {
  auto stars = fixture::stars_q();
  auto src = fixture::seeded_source();
  SPBFIndex idx;
  SPBF spbf;
  auto cs = fixture::cs_of(5);
  for (const auto& p : cs.predicates()) spbf.add_predicate(p);
  idx.add({f(5), spbf, {n(1)}});
  std::vector<StarPattern> one{stars[2]};
  auto r = optimize(std::span<const StarPattern>(one), idx, src, n(1), false);
  ASSERT_TRUE(std::holds_alternative<Selection>(r.plan->op));
  EXPECT_EQ(std::get<Selection>(r.plan->op).node, n(1));
  EXPECT_DOUBLE_EQ(r.cost.total, 9000.0);
}

TEST(Planner, NoRelevantFragmentGivesEmptyPlan) {
  auto stars = fixture::stars_q();
  auto src = fixture::seeded_source();
  SPBFIndex idx;
  auto r = optimize(std::span<const StarPattern>(stars), idx, src, n(1), false);
  EXPECT_TRUE(is_empty_plan(*r.plan));
  EXPECT_EQ(r.cost.total, 0.0);
}

namespace {

// Every left-deep plan the planner may build for a connected query:
// orders with connected prefixes, every delegate for the centralized join
// and every per-branch assignment when branches have disjoint partners.
class Exhaustive {
 public:
  Exhaustive(std::span<const StarPattern> stars, const SPBFIndex& idx, const CardinalitySource& src,
             const CompatibilityGraph& g, NodeId origin, bool distinct)
      : stars_(stars), idx_(idx), ctx_{stars, src}, origin_(origin), distinct_(distinct) {
    for (std::size_t i = 0; i < stars.size(); ++i) frags_.push_back(g.fragments_of(i));
  }

  double best() {
    std::vector<std::size_t> order(stars_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    double out = std::numeric_limits<double>::infinity();
    do {
      if (!connected_prefixes(order)) continue;
      std::vector<PlanPtr> sels;
      for (const auto& fr : frags_[order[0]])
        sels.push_back(make_selection(order[0], fr, place_selection(idx_, fr, origin_)));
      walk(make_union(sels), order, 1, out);
    } while (std::next_permutation(order.begin(), order.end()));
    return out;
  }

 private:
  bool joins(const std::vector<std::size_t>& order, std::size_t upto, std::size_t p) const {
    for (std::size_t i = 0; i < upto; ++i)
      if (!shared_vars(stars_[order[i]], stars_[p]).empty()) return true;
    return false;
  }

  bool connected_prefixes(const std::vector<std::size_t>& order) const {
    for (std::size_t i = 1; i < order.size(); ++i)
      if (!joins(order, i, order[i])) return false;
    return true;
  }

  std::vector<NodeId> candidates(const std::vector<FragmentId>& right) const {
    std::set<NodeId> out{origin_};
    for (const auto& fr : right) {
      const auto& h = idx_.holders(fr);
      out.insert(h.begin(), h.end());
    }
    return {out.begin(), out.end()};
  }

  PlanPtr right(std::size_t p, const std::vector<FragmentId>& frs, NodeId d) const {
    std::vector<PlanPtr> sels;
    for (const auto& fr : frs) sels.push_back(make_selection(p, fr, place_selection(idx_, fr, d)));
    return make_union(sels);
  }

  std::vector<FragmentId> compatible(const PlanPtr& left, std::size_t p) const {
    std::set<std::size_t> present;
    for (const auto* leaf : leaves(*left))
      if (!shared_vars(stars_[leaf->star], stars_[p]).empty()) present.insert(leaf->star);
    std::vector<FragmentId> out;
    for (const auto& fr : frags_[p]) {
      bool ok = true;
      for (auto q : present) ok = ok && !joining_fragments(*left, q, stars_[p], fr, ctx_).empty();
      if (ok) out.push_back(fr);
    }
    return out;
  }

  void walk(const PlanPtr& plan, const std::vector<std::size_t>& order, std::size_t i, double& best) {
    if (i == order.size()) {
      best = std::min(best, plan_cost(*plan, origin_, ctx_, distinct_).total);
      return;
    }
    auto p = order[i];
    auto branches = branches_of(plan);
    std::vector<std::vector<FragmentId>> per;
    std::set<FragmentId> any;
    for (const auto& b : branches) {
      per.push_back(compatible(b, p));
      any.insert(per.back().begin(), per.back().end());
    }
    std::vector<FragmentId> all;
    for (const auto& fr : frags_[p])
      if (any.contains(fr)) all.push_back(fr);
    if (all.empty()) {
      best = std::min(best, 0.0);
      return;
    }
    for (auto d : candidates(all)) walk(make_join(plan, right(p, all, d), d), order, i + 1, best);

    std::set<FragmentId> seen;
    bool disjoint = true;
    for (const auto& s : per)
      for (const auto& fr : s) disjoint = disjoint && seen.insert(fr).second;
    if (branches.size() < 2 || !disjoint) return;
    std::vector<std::vector<PlanPtr>> options;
    for (std::size_t b = 0; b < branches.size(); ++b) {
      if (per[b].empty()) continue;
      std::vector<PlanPtr> alts;
      for (auto d : candidates(per[b])) alts.push_back(make_join(branches[b], right(p, per[b], d), d));
      options.push_back(alts);
    }
    std::vector<PlanPtr> chosen;
    std::function<void(std::size_t)> pick = [&](std::size_t k) {
      if (k == options.size()) {
        walk(make_union(chosen), order, i + 1, best);
        return;
      }
      for (const auto& alt : options[k]) {
        chosen.push_back(alt);
        pick(k + 1);
        chosen.pop_back();
      }
    };
    pick(0);
  }

  std::span<const StarPattern> stars_;
  const SPBFIndex& idx_;
  PlanContext ctx_;
  NodeId origin_;
  bool distinct_;
  std::vector<std::vector<FragmentId>> frags_;
};

}  // namespace

TEST(Planner, DpMatchesExhaustiveEnumeration) {
  std::mt19937_64 rng(71);
  int compared = 0;
  for (int round = 0; round < 150; ++round) {
    auto inst = testdata::random_instance(rng, 5, 250);
    auto frags = fragment_by_cs(inst.graph, "g");
    std::vector<SPBFSlice> slices;
    std::uniform_int_distribution<std::uint32_t> node(1, 4);
    for (const auto& fr : frags) {
      std::set<NodeId> holders{n(node(rng)), n(node(rng))};
      slices.push_back({fr.id, SPBF::build(fr, BloomParams{}), holders});
    }
    auto idx = combine(slices);
    testdata::ExactSource src(frags);
    auto q = testdata::random_query(rng, inst, 3);
    auto stars = star_decompose(q.bgp);
    bool small = true;
    for (const auto& s : stars) small = small && relevant_fragments(idx, s).size() <= 3;
    if (!small) continue;

    PlannerOptions opts;
    opts.smaller_left = false;
    auto r = optimize(std::span<const StarPattern>(stars), idx, src, n(1), q.distinct, opts);
    if (r.graph.empty()) continue;
    Exhaustive ex(stars, idx, src, r.graph, n(1), q.distinct);
    double want = ex.best();
    EXPECT_NEAR(r.cost.total, want, 1e-6 * std::max(1.0, want)) << q.bgp.patterns().size();
    ++compared;
  }
  EXPECT_GT(compared, 50);
}

TEST(Planner, BloomSizeDoesNotChangeBestPlan) {
  std::string prints[2];
  std::uint32_t sizes[2] = {20000, 40000};
  for (int i = 0; i < 2; ++i) {
    std::vector<SPBFSlice> slices;
    for (int k = 1; k <= 5; ++k) {
      auto fr = fixture::concrete_fragments()[k - 1];
      slices.push_back({fr.id, SPBF::build(fr, BloomParams{sizes[i], 5, 0}), fixture::holders_of(k)});
    }
    auto idx = combine(slices);
    BloomCardinality src(idx);
    auto stars = fixture::stars_q();
    prints[i] = fingerprint(*optimize(std::span<const StarPattern>(stars), idx, src, n(1), false).plan);
  }
  EXPECT_EQ(prints[0], prints[1]);
}

namespace {

SPBFIndex reference_index(const std::vector<Fragment>& frags, BloomParams params) {
  std::vector<SPBFSlice> slices;
  for (int i = 1; i <= 5; ++i) slices.push_back({frags[i - 1].id, SPBF::build(frags[i - 1], params), fixture::holders_of(i)});
  return combine(slices);
}

}  // namespace

TEST(ReferenceData, ExactCountsEqualSeededCounts) {
  auto frags = fixture::reference_fragments();
  testdata::ExactSource exact(frags);
  auto seeded = fixture::seeded_source();
  for (int i = 1; i <= 5; ++i) {
    EXPECT_EQ(exact.count(FilterRef::subjects(f(i))), seeded.count(FilterRef::subjects(f(i)))) << i;
    auto cs = fixture::cs_of(i);
    for (const auto& p : cs.predicates())
      EXPECT_EQ(exact.count(FilterRef::objects(f(i), p)), seeded.count(FilterRef::objects(f(i), p))) << i;
  }
  auto nat = fixture::dbo("nationality");
  auto author = fixture::dbo("author");
  std::pair<FilterRef, FilterRef> pairs[] = {
      {FilterRef::objects(f(1), nat), FilterRef::subjects(f(3))},
      {FilterRef::objects(f(1), nat), FilterRef::subjects(f(4))},
      {FilterRef::objects(f(2), nat), FilterRef::subjects(f(3))},
      {FilterRef::objects(f(2), nat), FilterRef::subjects(f(4))},
      {FilterRef::objects(f(1), author), FilterRef::subjects(f(5))},
      {FilterRef::objects(f(2), author), FilterRef::subjects(f(5))},
  };
  for (const auto& [a, b] : pairs) EXPECT_EQ(exact.count_intersection(a, b), seeded.count_intersection(a, b));
}

TEST(ReferenceData, OptimizerFindsReferencePlan) {
  auto frags = fixture::reference_fragments();
  auto stars = fixture::stars_q();
  auto want = branch_prints(std::get<Join>(fixture::best_plan_q()->op).left);

  testdata::ExactSource exact(frags);
  auto idx = reference_index(frags, BloomParams{});
  auto r = optimize(std::span<const StarPattern>(stars), idx, exact, n(1), false);
  ASSERT_TRUE(std::holds_alternative<Join>(r.plan->op));
  EXPECT_EQ(branch_prints(std::get<Join>(r.plan->op).left), want);
  EXPECT_NEAR(r.cost.total, 850.0 + 154.6875, 1e-6);

  for (std::uint32_t m : {20000u, 1u << 18}) {
    auto bidx = reference_index(frags, BloomParams{m, 5, 0});
    BloomCardinality bloom(bidx);
    auto b = optimize(std::span<const StarPattern>(stars), bidx, bloom, n(1), false);
    ASSERT_TRUE(std::holds_alternative<Join>(b.plan->op)) << m;
    EXPECT_EQ(branch_prints(std::get<Join>(b.plan->op).left), want) << m;
    EXPECT_EQ(b.graph.fragment_edges(), r.graph.fragment_edges()) << m;
    EXPECT_NEAR(b.cost.total, r.cost.total, 0.15 * r.cost.total) << m << " " << fingerprint(*b.plan);
  }
}
