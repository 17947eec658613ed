#include "kgq/eval.hpp"

#include <algorithm>
#include <unordered_map>

namespace kgq {

namespace {

class Matcher {
 public:
  Matcher(const std::vector<TriplePattern>& patterns, const KnowledgeGraph& g) : patterns_(patterns), g_(g) {
    for (std::size_t i = 0; i < g.triples().size(); ++i) by_pred_[g.triples()[i].p].push_back(i);
    done_.assign(patterns.size(), false);
  }

  Solutions run() {
    SolutionMapping mu;
    recurse(mu, 0);
    return std::move(out_);
  }

 private:
  static const Term* bound(const PatternTerm& pt, const SolutionMapping& mu) {
    if (pt.is_constant()) return &pt.term();
    auto it = mu.find(pt.var());
    return it == mu.end() ? nullptr : &it->second;
  }

  static bool bind(const PatternTerm& pt, const Term& value, SolutionMapping& mu, std::vector<std::string>& added) {
    if (pt.is_constant()) return pt.term() == value;
    auto [it, fresh] = mu.emplace(pt.var(), value);
    if (fresh) {
      added.push_back(pt.var());
      return true;
    }
    return it->second == value;
  }

  // Pick the pending pattern with the most bound positions.
  std::size_t next_pattern(const SolutionMapping& mu) const {
    std::size_t best = patterns_.size();
    int best_score = -1;
    for (std::size_t i = 0; i < patterns_.size(); ++i) {
      if (done_[i]) continue;
      const auto& tp = patterns_[i];
      int score = (bound(tp.s, mu) ? 4 : 0) + (bound(tp.o, mu) ? 2 : 0) + (bound(tp.p, mu) ? 1 : 0);
      if (score > best_score) {
        best_score = score;
        best = i;
      }
    }
    return best;
  }

  void try_triple(const TriplePattern& tp, const Triple& t, SolutionMapping& mu, std::size_t depth) {
    std::vector<std::string> added;
    if (bind(tp.s, t.s, mu, added) && bind(tp.p, t.p, mu, added) && bind(tp.o, t.o, mu, added))
      recurse(mu, depth + 1);
    for (const auto& v : added) mu.erase(v);
  }

  void recurse(SolutionMapping& mu, std::size_t depth) {
    if (depth == patterns_.size()) {
      out_.push_back(mu);
      return;
    }
    std::size_t i = next_pattern(mu);
    const auto& tp = patterns_[i];
    done_[i] = true;
    if (const Term* s = bound(tp.s, mu)) {
      for (const auto& t : g_.with_subject(*s)) try_triple(tp, t, mu, depth);
    } else if (const Term* p = bound(tp.p, mu)) {
      if (auto it = by_pred_.find(*p); it != by_pred_.end())
        for (auto idx : it->second) try_triple(tp, g_.triples()[idx], mu, depth);
    } else {
      for (const auto& t : g_.triples()) try_triple(tp, t, mu, depth);
    }
    done_[i] = false;
  }

  const std::vector<TriplePattern>& patterns_;
  const KnowledgeGraph& g_;
  std::unordered_map<Term, std::vector<std::size_t>> by_pred_;
  std::vector<bool> done_;
  Solutions out_;
};

}  // namespace

Solutions evaluate_bgp(const BGP& bgp, const KnowledgeGraph& g, bool distinct) {
  if (bgp.empty()) return {SolutionMapping{}};
  Solutions rows = Matcher(bgp.patterns(), g).run();
  canonicalize(rows, distinct);
  return rows;
}

Solutions evaluate_star(const StarPattern& star, const KnowledgeGraph& g) {
  return Matcher(star.patterns(), g).run();
}

Solutions evaluate_query(const Query& q, const KnowledgeGraph& g) {
  Solutions rows = project(evaluate_bgp(q.bgp, g, false), q.projected_vars());
  canonicalize(rows, q.distinct);
  return rows;
}

KnowledgeGraph merge_graphs(std::span<const KnowledgeGraph* const> graphs) {
  KnowledgeGraph out;
  for (const auto* g : graphs)
    for (const auto& t : g->triples()) out.insert(t);
  return out;
}

std::string format_solutions(const Solutions& rows, std::vector<std::string> vars) {
  std::sort(vars.begin(), vars.end());
  std::string out;
  for (std::size_t i = 0; i < vars.size(); ++i) out += (i ? "\t?" : "?") + vars[i];
  out += '\n';
  std::vector<std::string> lines;
  lines.reserve(rows.size());
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t i = 0; i < vars.size(); ++i) {
      if (i) line += '\t';
      if (auto it = row.find(vars[i]); it != row.end()) line += it->second.to_ntriples();
    }
    lines.push_back(std::move(line));
  }
  std::sort(lines.begin(), lines.end());
  for (const auto& l : lines) out += l + '\n';
  return out;
}

}  // namespace kgq
