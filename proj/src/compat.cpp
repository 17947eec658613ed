#include <algorithm>

#include "kgq/planner.hpp"

namespace kgq {

std::vector<FragmentId> CompatibilityGraph::fragments_of(std::size_t star) const {
  std::vector<FragmentId> out;
  for (const auto& v : vertices)
    if (v.star == star) out.push_back(v.fragment);
  return out;
}

std::set<FragmentId> CompatibilityGraph::fragments() const {
  std::set<FragmentId> out;
  for (const auto& v : vertices) out.insert(v.fragment);
  return out;
}

std::set<std::pair<FragmentId, FragmentId>> CompatibilityGraph::fragment_edges() const {
  std::set<std::pair<FragmentId, FragmentId>> out;
  for (const auto& [a, b] : edges) out.insert(std::minmax(a.fragment, b.fragment));
  return out;
}

namespace {

using StarSet = std::set<std::size_t>;

struct Part {
  std::set<CompatVertex> vertices;
  std::set<std::pair<CompatVertex, CompatVertex>> edges;

  void merge(Part&& other) {
    vertices.merge(other.vertices);
    edges.merge(other.edges);
  }
};

std::pair<CompatVertex, CompatVertex> edge(CompatVertex a, CompatVertex b) {
  if (b < a) std::swap(a, b);
  return {std::move(a), std::move(b)};
}

class GraphBuilder {
 public:
  GraphBuilder(std::span<const StarPattern> stars, const SPBFIndex& idx, const CardinalitySource& src, bool distinct)
      : stars_(stars), src_(src), distinct_(distinct) {
    for (const auto& s : stars) relevant_.push_back(relevant_fragments(idx, s));
  }

  Part graph(const StarSet& stars) {
    std::size_t seed = *stars.begin();
    double seed_card = estimate(seed);
    for (auto i : stars) {
      double c = estimate(i);
      if (c < seed_card) {
        seed = i;
        seed_card = c;
      }
    }

    StarSet reached{seed};
    StarSet rest = stars;
    rest.erase(seed);
    Part out;
    for (const auto& f : relevant_[seed]) out.merge(branch(rest, f, seed, reached));

    StarSet remaining;
    std::set_difference(stars.begin(), stars.end(), reached.begin(), reached.end(),
                        std::inserter(remaining, remaining.end()));
    if (!remaining.empty()) {
      Part other = graph(remaining);
      if (other.vertices.empty() || out.vertices.empty()) return {};
      // No join links the two parts: every pair is compatible.
      for (const auto& a : out.vertices)
        for (const auto& b : other.vertices) out.edges.insert(edge(a, b));
      out.merge(std::move(other));
    }
    return out;
  }

 private:
  double estimate(std::size_t star) {
    return card_star_indexed(stars_[star], relevant_[star], src_, distinct_);
  }

  bool compatible(std::size_t sa, const FragmentId& fa, std::size_t sb, const FragmentId& fb) const {
    for (const auto& v : shared_vars(stars_[sa], stars_[sb]))
      if (!src_.may_intersect(filter_for(stars_[sa], v, fa), filter_for(stars_[sb], v, fb))) return false;
    return true;
  }

  // Extend fragment f of star `from` through every star joining it. Returns
  // nothing when all extensions dead-end.
  Part branch(const StarSet& stars, const FragmentId& f, std::size_t from, StarSet& reached) {
    StarSet joining;
    for (auto s : stars)
      if (!shared_vars(stars_[from], stars_[s]).empty()) joining.insert(s);
    CompatVertex self{from, f};
    if (joining.empty()) return Part{{self}, {}};

    Part out;
    for (auto next : joining) {
      StarSet reached_here = reached;
      reached_here.insert(next);
      StarSet rest = stars;
      rest.erase(next);
      for (const auto& g : relevant_[next]) {
        if (!compatible(from, f, next, g)) continue;
        Part sub = branch(rest, g, next, reached_here);
        if (sub.vertices.empty()) continue;
        out.vertices.insert(self);
        out.edges.insert(edge(self, CompatVertex{next, g}));
        out.merge(std::move(sub));
      }
      reached.insert(reached_here.begin(), reached_here.end());
    }
    return out;
  }

  std::span<const StarPattern> stars_;
  const CardinalitySource& src_;
  bool distinct_;
  std::vector<std::vector<FragmentId>> relevant_;
};

}  // namespace

CompatibilityGraph compatibility_graph(std::span<const StarPattern> stars, const SPBFIndex& idx,
                                       const CardinalitySource& src, bool distinct) {
  CompatibilityGraph out;
  if (stars.empty()) return out;
  StarSet all;
  for (std::size_t i = 0; i < stars.size(); ++i) all.insert(i);
  Part p = GraphBuilder(stars, idx, src, distinct).graph(all);
  out.vertices = std::move(p.vertices);
  out.edges = std::move(p.edges);
  return out;
}

}  // namespace kgq
