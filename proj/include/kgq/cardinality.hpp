#pragma once

#include <map>
#include <mutex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kgq/bloom.hpp"
#include "kgq/index.hpp"
#include "kgq/plan.hpp"
#include "kgq/query.hpp"

namespace kgq {

// Names one filter of one fragment's summary.
struct FilterRef {
  enum class Role : unsigned char { Subjects, Objects, AnyObject, Predicates };

  FragmentId fragment;
  Role role = Role::Subjects;
  Term predicate;  // Objects only

  static FilterRef subjects(FragmentId f) { return {std::move(f), Role::Subjects, {}}; }
  static FilterRef objects(FragmentId f, Term p) { return {std::move(f), Role::Objects, std::move(p)}; }
  static FilterRef any_object(FragmentId f) { return {std::move(f), Role::AnyObject, {}}; }
  static FilterRef predicates(FragmentId f) { return {std::move(f), Role::Predicates, {}}; }

  std::string to_string() const;

  friend auto operator<=>(const FilterRef&, const FilterRef&) = default;
  friend bool operator==(const FilterRef&, const FilterRef&) = default;
};

// Answers "how many distinct values does this filter (or the intersection of
// two filters) hold". Estimators only ever see counts through this
// interface, so exact or seeded backends can stand in for Bloom filters.
class CardinalitySource {
 public:
  virtual ~CardinalitySource() = default;

  virtual double count(const FilterRef& f) const = 0;
  virtual double count_intersection(const FilterRef& a, const FilterRef& b) const = 0;
  // False only if the two value sets are provably disjoint.
  virtual bool may_intersect(const FilterRef& a, const FilterRef& b) const {
    return count_intersection(a, b) > 0.0;
  }
  virtual const CharacteristicSet& predicates(const FragmentId& f) const = 0;
};

// Estimates from the Bloom filters of an index. Results are memoised.
class BloomCardinality final : public CardinalitySource {
 public:
  explicit BloomCardinality(const SPBFIndex& idx) : idx_(idx) {}

  double count(const FilterRef& f) const override;
  double count_intersection(const FilterRef& a, const FilterRef& b) const override;
  bool may_intersect(const FilterRef& a, const FilterRef& b) const override;
  const CharacteristicSet& predicates(const FragmentId& f) const override { return idx_.filter(f).predicates(); }

  PartitionedBitvector bitvector(const FilterRef& f) const;

 private:
  const SPBFIndex& idx_;
  mutable std::mutex mu_;
  mutable std::map<FilterRef, double> counts_;
  mutable std::map<std::pair<FilterRef, FilterRef>, std::pair<double, bool>> pairs_;
};

// Fixed counts supplied up front; intersections are symmetric. Asking for
// a value that was never supplied is a data error.
class SeededCardinality final : public CardinalitySource {
 public:
  void set_predicates(const FragmentId& f, CharacteristicSet cs) { preds_[f] = std::move(cs); }
  void set_count(const FilterRef& f, double n) { counts_[f] = n; }
  void set_intersection(const FilterRef& a, const FilterRef& b, double n);

  double count(const FilterRef& f) const override;
  double count_intersection(const FilterRef& a, const FilterRef& b) const override;
  const CharacteristicSet& predicates(const FragmentId& f) const override;

 private:
  std::map<FragmentId, CharacteristicSet> preds_;
  std::map<FilterRef, double> counts_;
  std::map<std::pair<FilterRef, FilterRef>, double> pairs_;
};

// The filter that summarises variable `var` of `star` inside fragment `f`:
// subjects if it is the star's subject, the object filter of the predicate
// it is the object of, or the predicate filter for a predicate variable.
FilterRef filter_for(const StarPattern& star, const std::string& var, const FragmentId& f);

// card^P(Phi(p)) / card^P(B_s) for one triple pattern; a variable predicate
// uses the mean object count over the fragment's predicates. Zero subjects
// give 0.
double predicate_ratio(const TriplePattern& tp, const FragmentId& f, const CardinalitySource& src);

double card_star(const StarPattern& star, const FragmentId& f, const CardinalitySource& src, bool distinct);

// Sum of card_star over the given fragments.
double card_star_indexed(const StarPattern& star, std::span<const FragmentId> frags, const CardinalitySource& src,
                         bool distinct);
// Sum over the index's relevant fragments.
double card_star_indexed(const StarPattern& star, const SPBFIndex& idx, const CardinalitySource& src, bool distinct);

// Join of `left` (object of `pred` is `right`'s subject) on fragments fl/fr.
double card_join_pair(const StarPattern& left, const StarPattern& right, const Term& pred, const FragmentId& fl,
                      const FragmentId& fr, const CardinalitySource& src, bool distinct);

double card_join_indexed(const StarPattern& left, const StarPattern& right, const Term& pred, const SPBFIndex& idx,
                         const CardinalitySource& src, bool distinct);

// Everything plan-level estimation needs to know.
struct PlanContext {
  std::span<const StarPattern> stars;
  const CardinalitySource& source;
};

// Cardinality of a query execution plan. Joins distribute over unions on
// either side; a join with a selection applies the most selective
// join-variable ratio against the compatible fragments on the left.
double card_plan(const Plan& plan, const PlanContext& ctx, bool distinct);

// Fragments of `star_idx` leaves in `left` that may join fragment `f` of
// `star` on every shared variable.
std::vector<FragmentId> joining_fragments(const Plan& left, std::size_t star_idx, const StarPattern& star,
                                          const FragmentId& f, const PlanContext& ctx);

}  // namespace kgq
