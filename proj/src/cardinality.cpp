#include "kgq/cardinality.hpp"

#include <algorithm>
#include <limits>
#include <set>

#include "kgq/error.hpp"

namespace kgq {

std::string FilterRef::to_string() const {
  switch (role) {
    case Role::Subjects: return fragment.value + ".Bs";
    case Role::Objects: return fragment.value + ".Phi(" + predicate.value() + ")";
    case Role::AnyObject: return fragment.value + ".Phi(*)";
    case Role::Predicates: return fragment.value + ".Bp";
  }
  return fragment.value;
}

// ---------------------------------------------------------------------------
// Backends

PartitionedBitvector BloomCardinality::bitvector(const FilterRef& f) const {
  const SPBF& spbf = idx_.filter(f.fragment);
  switch (f.role) {
    case FilterRef::Role::Subjects: return spbf.subjects();
    case FilterRef::Role::Objects: return spbf.objects(f.predicate);
    case FilterRef::Role::Predicates: return spbf.predicate_bitvector();
    case FilterRef::Role::AnyObject: {
      PartitionedBitvector out(spbf.params());
      for (const auto& [_, objs] : spbf.objects()) {
        for (const auto& [prefix, bv] : objs.partitions()) {
          auto dst = out.partition(prefix).words();
          auto src = bv.words();
          for (std::size_t i = 0; i < dst.size(); ++i) dst[i] |= src[i];
        }
      }
      return out;
    }
  }
  throw internal_error("unknown filter role");
}

double BloomCardinality::count(const FilterRef& f) const {
  {
    std::lock_guard lock(mu_);
    if (auto it = counts_.find(f); it != counts_.end()) return it->second;
  }
  double v = estimate_cardinality(bitvector(f));
  std::lock_guard lock(mu_);
  counts_.emplace(f, v);
  return v;
}

namespace {

std::pair<FilterRef, FilterRef> ordered(const FilterRef& a, const FilterRef& b) {
  return a < b ? std::pair{a, b} : std::pair{b, a};
}

}  // namespace

double BloomCardinality::count_intersection(const FilterRef& a, const FilterRef& b) const {
  auto key = ordered(a, b);
  {
    std::lock_guard lock(mu_);
    if (auto it = pairs_.find(key); it != pairs_.end()) return it->second.first;
  }
  auto both = intersect(bitvector(a), bitvector(b));
  std::pair<double, bool> v{estimate_cardinality(both), may_be_nonempty(both)};
  std::lock_guard lock(mu_);
  pairs_.emplace(key, v);
  return v.first;
}

bool BloomCardinality::may_intersect(const FilterRef& a, const FilterRef& b) const {
  count_intersection(a, b);
  std::lock_guard lock(mu_);
  return pairs_.at(ordered(a, b)).second;
}

void SeededCardinality::set_intersection(const FilterRef& a, const FilterRef& b, double n) {
  pairs_[ordered(a, b)] = n;
}

double SeededCardinality::count(const FilterRef& f) const {
  auto it = counts_.find(f);
  if (it == counts_.end()) throw data_error("no seeded count for " + f.to_string());
  return it->second;
}

double SeededCardinality::count_intersection(const FilterRef& a, const FilterRef& b) const {
  auto it = pairs_.find(ordered(a, b));
  if (it == pairs_.end()) throw data_error("no seeded count for " + a.to_string() + " & " + b.to_string());
  return it->second;
}

const CharacteristicSet& SeededCardinality::predicates(const FragmentId& f) const {
  auto it = preds_.find(f);
  if (it == preds_.end()) throw data_error("unknown fragment " + f.value);
  return it->second;
}

// ---------------------------------------------------------------------------
// Star and star-pair estimates

FilterRef filter_for(const StarPattern& star, const std::string& var, const FragmentId& f) {
  if (star.subject().is_variable() && star.subject().var() == var) return FilterRef::subjects(f);
  for (const auto& tp : star.patterns())
    if (tp.o.is_variable() && tp.o.var() == var && tp.p.is_constant()) return FilterRef::objects(f, tp.p.term());
  for (const auto& tp : star.patterns())
    if (tp.p.is_variable() && tp.p.var() == var) return FilterRef::predicates(f);
  for (const auto& tp : star.patterns())
    if (tp.o.is_variable() && tp.o.var() == var) return FilterRef::any_object(f);
  throw usage_error("variable ?" + var + " does not occur in star " + star.to_string());
}

double predicate_ratio(const TriplePattern& tp, const FragmentId& f, const CardinalitySource& src) {
  double subjects = src.count(FilterRef::subjects(f));
  if (subjects <= 0.0) return 0.0;
  if (tp.p.is_constant()) return src.count(FilterRef::objects(f, tp.p.term())) / subjects;
  const auto& preds = src.predicates(f).predicates();
  if (preds.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& p : preds) sum += src.count(FilterRef::objects(f, p));
  return sum / static_cast<double>(preds.size()) / subjects;
}

namespace {

void require_relevant(const StarPattern& star, const FragmentId& f, const CardinalitySource& src) {
  const auto& cs = src.predicates(f);
  for (const auto& p : star.constant_predicates())
    if (!cs.contains(p)) throw data_error("fragment " + f.value + " is not relevant to " + star.to_string());
}

}  // namespace

double card_star(const StarPattern& star, const FragmentId& f, const CardinalitySource& src, bool distinct) {
  require_relevant(star, f, src);
  double est = src.count(FilterRef::subjects(f));
  if (distinct) return est;
  for (const auto& tp : star.patterns()) est *= predicate_ratio(tp, f, src);
  return est;
}

double card_star_indexed(const StarPattern& star, std::span<const FragmentId> frags, const CardinalitySource& src,
                         bool distinct) {
  double total = 0.0;
  for (const auto& f : frags) total += card_star(star, f, src, distinct);
  return total;
}

double card_star_indexed(const StarPattern& star, const SPBFIndex& idx, const CardinalitySource& src, bool distinct) {
  auto frags = relevant_fragments(idx, star);
  return card_star_indexed(star, frags, src, distinct);
}

double card_join_pair(const StarPattern& left, const StarPattern& right, const Term& pred, const FragmentId& fl,
                      const FragmentId& fr, const CardinalitySource& src, bool distinct) {
  if (!right.subject().is_variable()) throw usage_error("star-pair join needs a variable subject on the right");
  const auto& join_var = right.subject().var();
  bool found = std::any_of(left.patterns().begin(), left.patterns().end(), [&](const TriplePattern& tp) {
    return tp.p.is_constant() && tp.p.term() == pred && tp.o.is_variable() && tp.o.var() == join_var;
  });
  if (!found) throw usage_error("left star has no " + pred.to_ntriples() + " edge to ?" + join_var);
  require_relevant(left, fl, src);
  require_relevant(right, fr, src);

  auto phi = FilterRef::objects(fl, pred);
  double objects = src.count(phi);
  double selectivity = objects > 0.0 ? src.count_intersection(phi, FilterRef::subjects(fr)) / objects : 0.0;
  double est = src.count(FilterRef::subjects(fl)) * selectivity;
  if (distinct) return est;
  for (const auto& tp : left.patterns()) {
    if (tp.p.is_constant() && tp.p.term() == pred && tp.o.is_variable() && tp.o.var() == join_var) continue;
    est *= predicate_ratio(tp, fl, src);
  }
  for (const auto& tp : right.patterns()) est *= predicate_ratio(tp, fr, src);
  return est;
}

double card_join_indexed(const StarPattern& left, const StarPattern& right, const Term& pred, const SPBFIndex& idx,
                         const CardinalitySource& src, bool distinct) {
  double total = 0.0;
  for (const auto& fl : relevant_fragments(idx, left))
    for (const auto& fr : relevant_fragments(idx, right))
      total += card_join_pair(left, right, pred, fl, fr, src, distinct);
  return total;
}

// ---------------------------------------------------------------------------
// Plans

std::vector<FragmentId> joining_fragments(const Plan& left, std::size_t star_idx, const StarPattern& star,
                                          const FragmentId& f, const PlanContext& ctx) {
  const auto& other = ctx.stars[star_idx];
  auto vars = shared_vars(other, star);
  std::vector<FragmentId> out;
  for (const auto* leaf : leaves(left)) {
    if (leaf->star != star_idx) continue;
    if (std::find(out.begin(), out.end(), leaf->fragment) != out.end()) continue;
    bool joins = std::all_of(vars.begin(), vars.end(), [&](const std::string& v) {
      return ctx.source.may_intersect(filter_for(star, v, f), filter_for(other, v, leaf->fragment));
    });
    if (joins) out.push_back(leaf->fragment);
  }
  return out;
}

namespace {

double join_with_selection(const Plan& left, const Selection& sel, const PlanContext& ctx, bool distinct) {
  const auto& star = ctx.stars[sel.star];
  double base = card_plan(left, ctx, distinct);

  std::set<std::size_t> joined;
  for (const auto* leaf : leaves(left))
    if (!shared_vars(ctx.stars[leaf->star], star).empty()) joined.insert(leaf->star);
  if (joined.empty()) return base * card_star(star, sel.fragment, ctx.source, distinct);

  double selectivity = std::numeric_limits<double>::infinity();
  std::set<std::string> join_vars;
  for (auto other_idx : joined) {
    const auto& other = ctx.stars[other_idx];
    auto partners = joining_fragments(left, other_idx, star, sel.fragment, ctx);
    for (const auto& v : shared_vars(other, star)) {
      join_vars.insert(v);
      double num = 0.0;
      double den = 0.0;
      auto mine = filter_for(star, v, sel.fragment);
      for (const auto& fp : partners) {
        auto theirs = filter_for(other, v, fp);
        num += ctx.source.count_intersection(mine, theirs);
        den += ctx.source.count(theirs);
      }
      selectivity = std::min(selectivity, den > 0.0 ? num / den : 0.0);
    }
  }
  double est = base * selectivity;
  if (distinct) return est;
  for (const auto& tp : star.patterns()) {
    if (tp.o.is_variable() && join_vars.contains(tp.o.var())) continue;
    est *= predicate_ratio(tp, sel.fragment, ctx.source);
  }
  return est;
}

double join_card(const PlanPtr& left, const PlanPtr& right, const PlanContext& ctx, bool distinct) {
  if (const auto* u = std::get_if<Union>(&left->op)) {
    double total = 0.0;
    for (const auto& b : u->branches) total += join_card(b, right, ctx, distinct);
    return total;
  }
  if (const auto* u = std::get_if<Union>(&right->op)) {
    double total = 0.0;
    for (const auto& b : u->branches) total += join_card(left, b, ctx, distinct);
    return total;
  }
  if (const auto* sel = std::get_if<Selection>(&right->op)) return join_with_selection(*left, *sel, ctx, distinct);
  throw usage_error("malformed plan: right side of a join must be a selection or a union of selections");
}

}  // namespace

double card_plan(const Plan& plan, const PlanContext& ctx, bool distinct) {
  if (const auto* s = std::get_if<Selection>(&plan.op))
    return card_star(ctx.stars[s->star], s->fragment, ctx.source, distinct);
  if (const auto* u = std::get_if<Union>(&plan.op)) {
    double total = 0.0;
    for (const auto& b : u->branches) total += card_plan(*b, ctx, distinct);
    return total;
  }
  if (const auto* c = std::get_if<Cartesian>(&plan.op))
    return card_plan(*c->left, ctx, distinct) * card_plan(*c->right, ctx, distinct);
  const auto& j = std::get<Join>(plan.op);
  return join_card(j.left, j.right, ctx, distinct);
}

}  // namespace kgq
