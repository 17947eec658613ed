#include "kgq/plan.hpp"

namespace kgq {

namespace {

template <class... Fs>
struct overloaded : Fs... {
  using Fs::operator()...;
};

}  // namespace

PlanPtr make_selection(std::size_t star, FragmentId fragment, NodeId node) {
  return std::make_shared<const Plan>(Plan{Selection{star, std::move(fragment), node}});
}

PlanPtr make_join(PlanPtr left, PlanPtr right, NodeId node) {
  return std::make_shared<const Plan>(Plan{Join{std::move(left), std::move(right), node}});
}

PlanPtr make_cartesian(PlanPtr left, PlanPtr right, NodeId node) {
  return std::make_shared<const Plan>(Plan{Cartesian{std::move(left), std::move(right), node}});
}

PlanPtr make_union(std::vector<PlanPtr> branches) {
  if (branches.size() == 1) return branches.front();
  return std::make_shared<const Plan>(Plan{Union{std::move(branches)}});
}

PlanPtr make_empty_plan() { return std::make_shared<const Plan>(Plan{Union{}}); }

bool is_empty_plan(const Plan& p) {
  const auto* u = std::get_if<Union>(&p.op);
  return u && u->branches.empty();
}

bool is_selection_set(const Plan& p) {
  if (std::holds_alternative<Selection>(p.op)) return true;
  const auto* u = std::get_if<Union>(&p.op);
  if (!u || u->branches.empty()) return false;
  for (const auto& b : u->branches)
    if (!std::holds_alternative<Selection>(b->op)) return false;
  return true;
}

std::vector<PlanPtr> branches_of(const PlanPtr& p) {
  if (const auto* u = std::get_if<Union>(&p->op)) return u->branches;
  return {p};
}

namespace {

void collect_leaves(const Plan& p, std::vector<const Selection*>& out) {
  std::visit(overloaded{
                 [&](const Selection& s) { out.push_back(&s); },
                 [&](const Join& j) {
                   collect_leaves(*j.left, out);
                   collect_leaves(*j.right, out);
                 },
                 [&](const Cartesian& c) {
                   collect_leaves(*c.left, out);
                   collect_leaves(*c.right, out);
                 },
                 [&](const Union& u) {
                   for (const auto& b : u.branches) collect_leaves(*b, out);
                 },
             },
             p.op);
}

}  // namespace

std::vector<const Selection*> leaves(const Plan& p) {
  std::vector<const Selection*> out;
  collect_leaves(p, out);
  return out;
}

std::size_t plan_size(const Plan& p) {
  return std::visit(overloaded{
                        [](const Selection&) -> std::size_t { return 1; },
                        [](const Join& j) { return 1 + plan_size(*j.left) + plan_size(*j.right); },
                        [](const Cartesian& c) { return 1 + plan_size(*c.left) + plan_size(*c.right); },
                        [](const Union& u) {
                          std::size_t n = 1;
                          for (const auto& b : u.branches) n += plan_size(*b);
                          return n;
                        },
                    },
                    p.op);
}

std::string fingerprint(const Plan& p) {
  return std::visit(overloaded{
                        [](const Selection& s) {
                          return "[[P" + std::to_string(s.star + 1) + "]]" + s.fragment.value + "@" +
                                 s.node.to_string();
                        },
                        [](const Join& j) {
                          return "(" + fingerprint(*j.left) + " J@" + j.node.to_string() + " " +
                                 fingerprint(*j.right) + ")";
                        },
                        [](const Cartesian& c) {
                          return "(" + fingerprint(*c.left) + " X@" + c.node.to_string() + " " +
                                 fingerprint(*c.right) + ")";
                        },
                        [](const Union& u) {
                          if (u.branches.empty()) return std::string("EMPTY");
                          std::string out = "(";
                          for (std::size_t i = 0; i < u.branches.size(); ++i) {
                            if (i) out += " U ";
                            out += fingerprint(*u.branches[i]);
                          }
                          return out + ")";
                        },
                    },
                    p.op);
}

}  // namespace kgq
