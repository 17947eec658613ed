#include "kgq/netsim.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "kgq/error.hpp"
#include "kgq/eval.hpp"

namespace kgq {

void NetworkConfig::validate() const {
  if (node_count < 1) throw usage_error("node_count must be at least 1");
  if (neighbor_count >= node_count && !(node_count == 1 && neighbor_count == 0))
    throw usage_error("neighbor_count must be below node_count");
  if (replication_factor < 1 || replication_factor > node_count)
    throw usage_error("replication_factor must be in [1, node_count]");
  if (omega < 1) throw usage_error("omega must be at least 1");
  if (page_size < 1) throw usage_error("page_size must be at least 1");
  if (min_subjects < 1) throw usage_error("min_subjects must be at least 1");
  bloom.validate();
}

std::string Metrics::to_json() const {
  nlohmann::ordered_json j;
  j["requests"] = requests;
  j["transferred_bytes"] = transferred_bytes;
  j["relevant_fragments"] = relevant_fragments;
  j["relevant_nodes"] = relevant_nodes;
  j["optimization_ns"] = optimization_ns;
  j["execution_ns"] = execution_ns;
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// Network

Network::Network(NetworkConfig cfg) : cfg_(std::move(cfg)), rng_(cfg_.seed) {
  cfg_.validate();
  nodes_.resize(cfg_.node_count);
  for (std::size_t i = 0; i < nodes_.size(); ++i) nodes_[i].id = NodeId{static_cast<std::uint32_t>(i + 1)};
}

const NodeSim& Network::node(NodeId id) const {
  if (!has_node(id)) throw usage_error("unknown node " + id.to_string());
  return nodes_[id.value - 1];
}

NodeSim& Network::mutable_node(NodeId id) { return const_cast<NodeSim&>(std::as_const(*this).node(id)); }

void Network::set_neighbors(NodeId id, std::set<NodeId> neighbors) {
  for (const auto& n : neighbors)
    if (!has_node(n) || n == id) throw usage_error("invalid neighbor " + n.to_string() + " for " + id.to_string());
  mutable_node(id).neighbors = std::move(neighbors);
}

void Network::place(const Fragment& f, const std::set<NodeId>& holders) {
  auto shared = std::make_shared<const Fragment>(f);
  for (const auto& h : holders) mutable_node(h).store[f.id] = shared;
  catalog_[f.id] = shared;
  filters_.insert_or_assign(f.id, SPBF::build(f, cfg_.bloom));
}

Allocation Network::allocation() const {
  Allocation out;
  for (const auto& n : nodes_)
    for (const auto& [id, _] : n.store) out[id].insert(n.id);
  return out;
}

namespace {

// Undirected hop distances from `from`; -1 when unreachable.
std::vector<int> hops(const std::vector<NodeSim>& nodes, NodeId from) {
  std::vector<std::vector<std::size_t>> adj(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i)
    for (const auto& n : nodes[i].neighbors) {
      adj[i].push_back(n.value - 1);
      adj[n.value - 1].push_back(i);
    }
  std::vector<int> dist(nodes.size(), -1);
  std::deque<std::size_t> queue{from.value - 1};
  dist[from.value - 1] = 0;
  while (!queue.empty()) {
    auto u = queue.front();
    queue.pop_front();
    for (auto v : adj[u])
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
  }
  return dist;
}

}  // namespace

std::set<NodeId> Network::within_horizon(NodeId from) const {
  node(from);
  auto dist = hops(nodes_, from);
  std::set<NodeId> out;
  for (std::size_t i = 0; i < dist.size(); ++i)
    if (dist[i] >= 0 && static_cast<std::size_t>(dist[i]) <= cfg_.horizon) out.insert(nodes_[i].id);
  return out;
}

std::vector<NodeId> Network::expansion(NodeId from) {
  node(from);
  auto dist = hops(nodes_, from);
  int deepest = *std::max_element(dist.begin(), dist.end());
  std::vector<NodeId> out;
  for (int d = 0; d <= deepest; ++d) {
    std::vector<NodeId> layer;
    for (std::size_t i = 0; i < dist.size(); ++i)
      if (dist[i] == d) layer.push_back(nodes_[i].id);
    std::shuffle(layer.begin(), layer.end(), rng_);
    out.insert(out.end(), layer.begin(), layer.end());
  }
  for (std::size_t i = 0; i < dist.size(); ++i)
    if (dist[i] < 0) out.push_back(nodes_[i].id);
  return out;
}

void Network::disseminate() {
  auto alloc = allocation();
  for (auto& n : nodes_) {
    auto visible = within_horizon(n.id);
    std::vector<SPBFSlice> slices;
    for (const auto& [id, holders] : alloc) {
      SPBFSlice slice{id, filters_.at(id), {}};
      for (const auto& h : holders)
        if (visible.contains(h)) slice.holders.insert(h);
      if (!slice.holders.empty()) slices.push_back(std::move(slice));
    }
    n.index = combine(slices);
  }
}

Network create_network(const NetworkConfig& cfg) {
  Network net(cfg);
  std::vector<NodeId> ids;
  for (const auto& n : net.nodes()) ids.push_back(n.id);
  for (const auto& self : ids) {
    std::vector<NodeId> others;
    for (const auto& n : ids)
      if (n != self) others.push_back(n);
    std::shuffle(others.begin(), others.end(), net.rng());
    others.resize(cfg.neighbor_count);
    net.set_neighbors(self, {others.begin(), others.end()});
  }
  return net;
}

Allocation upload_fragments(Network& net, const std::vector<Fragment>& frags, NodeId origin) {
  const auto factor = net.config().replication_factor;
  if (factor > net.nodes().size()) throw usage_error("replication factor exceeds node count");
  for (const auto& f : frags) {
    auto order = net.expansion(origin);
    net.place(f, {order.begin(), order.begin() + static_cast<std::ptrdiff_t>(factor)});
  }
  net.disseminate();
  return net.allocation();
}

Allocation upload(Network& net, const KnowledgeGraph& g, NodeId origin, const std::string& graph_id) {
  auto frags = merge_infrequent(fragment_by_cs(g, graph_id), net.config().min_subjects, graph_id).fragments;
  return upload_fragments(net, frags, origin);
}

// ---------------------------------------------------------------------------
// Execution

namespace {

constexpr std::uint64_t kHeaderBytes = 64;

std::uint64_t payload_bytes(const Solutions& rows) {
  std::uint64_t n = 0;
  for (const auto& row : rows)
    for (const auto& [var, term] : row) n += 1 + var.size() + 1 + term.to_ntriples().size() + 1;
  return n;
}

std::vector<std::string> star_vars(const StarPattern& s) {
  auto v = s.vars();
  return {v.begin(), v.end()};
}

class Executor {
 public:
  Executor(const Network& net, std::span<const StarPattern> stars) : net_(net), stars_(stars) {}

  Solutions run(const PlanPtr& plan, NodeId consumer) {
    if (const auto* s = std::get_if<Selection>(&plan->op)) {
      auto rows = local_star(*s);
      ship_result(consumer, s->node, *plan, rows);
      return rows;
    }
    if (const auto* u = std::get_if<Union>(&plan->op)) {
      Solutions out;
      for (const auto& b : u->branches) {
        auto rows = run(b, consumer);
        out.insert(out.end(), std::make_move_iterator(rows.begin()), std::make_move_iterator(rows.end()));
      }
      return out;
    }
    if (const auto* c = std::get_if<Cartesian>(&plan->op)) {
      auto left = run(c->left, c->node);
      auto right = run(c->right, c->node);
      Solutions out;
      for (const auto& l : left)
        for (const auto& r : right)
          if (auto m = merge_compatible(l, r)) out.push_back(std::move(*m));
      ship_result(consumer, c->node, *plan, out);
      return out;
    }
    const auto& j = std::get<Join>(plan->op);
    auto left = run(j.left, j.node);
    Solutions out;
    for (const auto& r : branches_of(j.right)) {
      const auto* sel = std::get_if<Selection>(&r->op);
      if (!sel) throw internal_error("join right side must be a selection");
      auto rows = bind_join(left, *sel, j.node, left_vars(*j.left));
      out.insert(out.end(), std::make_move_iterator(rows.begin()), std::make_move_iterator(rows.end()));
    }
    ship_result(consumer, j.node, *plan, out);
    return out;
  }

  Metrics metrics;
  std::vector<std::string> trace;

 private:
  void message(NodeId from, NodeId to, const std::string& kind, std::uint64_t bytes) {
    ++metrics.requests;
    metrics.transferred_bytes += bytes;
    trace.push_back(from.to_string() + " -> " + to.to_string() + " " + kind + " " + std::to_string(bytes));
  }

  // Result rows travel from `at` to `consumer` in pages.
  void send_pages(NodeId at, NodeId consumer, const Solutions& rows) {
    const auto page = net_.config().page_size;
    for (std::size_t i = 0; i < rows.size(); i += page) {
      Solutions chunk(rows.begin() + static_cast<std::ptrdiff_t>(i),
                      rows.begin() + static_cast<std::ptrdiff_t>(std::min(rows.size(), i + page)));
      message(at, consumer, "page", kHeaderBytes + payload_bytes(chunk));
    }
  }

  void ship_result(NodeId consumer, NodeId at, const Plan& plan, const Solutions& rows) {
    if (consumer == at) return;
    message(consumer, at, "delegate", kHeaderBytes + fingerprint(plan).size());
    send_pages(at, consumer, rows);
  }

  const Fragment& stored(NodeId at, const FragmentId& f) const {
    const auto& store = net_.node(at).store;
    auto it = store.find(f);
    if (it == store.end()) throw internal_error("node " + at.to_string() + " does not store " + f.value);
    return *it->second;
  }

  Solutions local_star(const Selection& s) const {
    return evaluate_star(stars_[s.star], stored(s.node, s.fragment).triples);
  }

  std::set<std::string> left_vars(const Plan& left) const {
    std::set<std::string> out;
    for (const auto* leaf : leaves(left)) {
      auto v = stars_[leaf->star].vars();
      out.insert(v.begin(), v.end());
    }
    return out;
  }

  static Solutions join_rows(const Solutions& left, const Solutions& right, const std::vector<std::string>& on) {
    std::map<std::vector<Term>, std::vector<const SolutionMapping*>> by_key;
    for (const auto& r : right) {
      std::vector<Term> key;
      for (const auto& v : on) key.push_back(r.at(v));
      by_key[std::move(key)].push_back(&r);
    }
    Solutions out;
    for (const auto& l : left) {
      std::vector<Term> key;
      for (const auto& v : on) key.push_back(l.at(v));
      auto it = by_key.find(key);
      if (it == by_key.end()) continue;
      for (const auto* r : it->second)
        if (auto m = merge_compatible(l, *r)) out.push_back(std::move(*m));
    }
    return out;
  }

  Solutions bind_join(const Solutions& left, const Selection& sel, NodeId at, const std::set<std::string>& lvars) {
    std::vector<std::string> on;
    for (const auto& v : star_vars(stars_[sel.star]))
      if (lvars.contains(v)) on.push_back(v);

    auto candidates = local_star(sel);
    if (sel.node == at) return join_rows(left, candidates, on);

    // Distinct join bindings travel in batches; the holder answers with the
    // star rows matching each batch.
    auto bindings = project(left, on);
    canonicalize(bindings, true);
    const auto omega = net_.config().omega;
    Solutions matched;
    for (std::size_t i = 0; i < bindings.size(); i += omega) {
      Solutions batch(bindings.begin() + static_cast<std::ptrdiff_t>(i),
                      bindings.begin() + static_cast<std::ptrdiff_t>(std::min(bindings.size(), i + omega)));
      message(at, sel.node, "bind", kHeaderBytes + payload_bytes(batch));
      std::set<SolutionMapping> wanted(batch.begin(), batch.end());
      for (const auto& row : candidates) {
        SolutionMapping key;
        for (const auto& v : on) key.emplace(v, row.at(v));
        if (wanted.contains(key)) matched.push_back(row);
      }
    }
    send_pages(sel.node, at, matched);
    return join_rows(left, matched, on);
  }

  const Network& net_;
  std::span<const StarPattern> stars_;
};

}  // namespace

Execution execute_plan(const Network& net, const Plan& plan, std::span<const StarPattern> stars, NodeId origin) {
  net.node(origin);
  auto start = std::chrono::steady_clock::now();
  Executor ex(net, stars);
  Execution out;
  out.rows = ex.run(std::make_shared<const Plan>(plan), origin);
  out.metrics = ex.metrics;
  out.metrics.execution_ns = static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - start).count());
  out.trace = std::move(ex.trace);
  return out;
}

namespace {

Relevance relevance_of(const CompatibilityGraph& graph, const SPBFIndex& idx) {
  Relevance out;
  std::set<NodeId> holders;
  for (const auto& f : graph.fragments()) {
    ++out.fragments;
    const auto& h = idx.holders(f);
    holders.insert(h.begin(), h.end());
  }
  out.nodes = holders.size();
  return out;
}

}  // namespace

Relevance measure_relevance(const Network& net, const BGP& bgp, NodeId origin) {
  const auto& idx = net.node(origin).index;
  BloomCardinality src(idx);
  auto stars = star_decompose(bgp);
  return relevance_of(compatibility_graph(stars, idx, src, false), idx);
}

QueryRun run_query(const Network& net, const Query& q, NodeId origin, const PlannerOptions& options) {
  const auto& idx = net.node(origin).index;
  BloomCardinality src(idx);
  auto stars = star_decompose(q.bgp);

  auto start = std::chrono::steady_clock::now();
  QueryRun out;
  out.optimized = optimize(std::span<const StarPattern>(stars), idx, src, origin, q.distinct, options);
  auto opt_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - start).count();

  auto exec = execute_plan(net, *out.optimized.plan, stars, origin);
  out.rows = project(exec.rows, q.projected_vars());
  canonicalize(out.rows, q.distinct);
  out.metrics = exec.metrics;
  out.metrics.optimization_ns = static_cast<std::uint64_t>(opt_ns);
  auto rel = relevance_of(out.optimized.graph, idx);
  out.metrics.relevant_fragments = rel.fragments;
  out.metrics.relevant_nodes = rel.nodes;
  out.trace = std::move(exec.trace);
  return out;
}

PlanPtr unpruned_plan(std::span<const StarPattern> stars, const SPBFIndex& idx, NodeId origin) {
  PlanPtr plan;
  std::set<std::string> bound;
  for (std::size_t i = 0; i < stars.size(); ++i) {
    std::vector<PlanPtr> sels;
    for (const auto& f : relevant_fragments(idx, stars[i]))
      sels.push_back(make_selection(i, f, place_selection(idx, f, origin)));
    if (sels.empty()) return make_empty_plan();
    auto right = make_union(std::move(sels));
    auto vars = stars[i].vars();
    bool joins = std::any_of(vars.begin(), vars.end(), [&](const std::string& v) { return bound.contains(v); });
    if (!plan) plan = right;
    else plan = joins ? make_join(plan, right, origin) : make_cartesian(plan, right, origin);
    bound.insert(vars.begin(), vars.end());
  }
  return plan ? plan : make_empty_plan();
}

// ---------------------------------------------------------------------------
// Persistence

void save_network(const Network& net, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const auto& cfg = net.config();
  nlohmann::ordered_json j;
  j["config"] = {{"node_count", cfg.node_count},
                 {"neighbor_count", cfg.neighbor_count},
                 {"replication_factor", cfg.replication_factor},
                 {"horizon", cfg.horizon},
                 {"seed", cfg.seed},
                 {"bloom_m", cfg.bloom.m},
                 {"bloom_k", cfg.bloom.k},
                 {"bloom_seed", cfg.bloom.seed},
                 {"omega", cfg.omega},
                 {"page_size", cfg.page_size},
                 {"min_subjects", cfg.min_subjects}};
  auto nodes = nlohmann::ordered_json::array();
  for (const auto& n : net.nodes()) {
    nlohmann::ordered_json entry;
    entry["id"] = n.id.to_string();
    auto neighbors = nlohmann::ordered_json::array();
    for (const auto& m : n.neighbors) neighbors.push_back(m.to_string());
    entry["neighbors"] = neighbors;
    auto frags = nlohmann::ordered_json::array();
    for (const auto& [id, _] : n.store) frags.push_back(id.value);
    entry["fragments"] = frags;
    nodes.push_back(entry);
  }
  j["nodes"] = nodes;
  std::ofstream out(fs::path(dir) / "network.json");
  if (!out) throw usage_error("cannot write " + (fs::path(dir) / "network.json").string());
  out << j.dump(2) << '\n';

  std::vector<Fragment> frags;
  for (const auto& [_, f] : net.catalog()) frags.push_back(*f);
  write_fragments((fs::path(dir) / "fragments").string(), frags);
}

Network load_network(const std::string& dir) {
  namespace fs = std::filesystem;
  auto path = fs::path(dir) / "network.json";
  std::ifstream in(path);
  if (!in) throw usage_error("cannot read " + path.string());
  nlohmann::json j;
  try {
    in >> j;
    const auto& c = j.at("config");
    NetworkConfig cfg;
    cfg.node_count = c.at("node_count").get<std::size_t>();
    cfg.neighbor_count = c.at("neighbor_count").get<std::size_t>();
    cfg.replication_factor = c.at("replication_factor").get<std::size_t>();
    cfg.horizon = c.at("horizon").get<std::size_t>();
    cfg.seed = c.at("seed").get<std::uint64_t>();
    cfg.bloom.m = c.at("bloom_m").get<decltype(cfg.bloom.m)>();
    cfg.bloom.k = c.at("bloom_k").get<decltype(cfg.bloom.k)>();
    cfg.bloom.seed = c.at("bloom_seed").get<decltype(cfg.bloom.seed)>();
    cfg.omega = c.at("omega").get<std::size_t>();
    cfg.page_size = c.at("page_size").get<std::size_t>();
    cfg.min_subjects = c.at("min_subjects").get<std::size_t>();

    Network net(cfg);
    std::map<FragmentId, Fragment> frags;
    for (auto& f : read_fragments((fs::path(dir) / "fragments").string())) frags.emplace(f.id, std::move(f));
    std::map<FragmentId, std::set<NodeId>> holders;
    for (const auto& entry : j.at("nodes")) {
      auto id = parse_node_id(entry.at("id").get<std::string>());
      std::set<NodeId> neighbors;
      for (const auto& m : entry.at("neighbors")) neighbors.insert(parse_node_id(m.get<std::string>()));
      net.set_neighbors(id, std::move(neighbors));
      for (const auto& f : entry.at("fragments")) holders[FragmentId{f.get<std::string>()}].insert(id);
    }
    for (const auto& [id, nodes] : holders) {
      auto it = frags.find(id);
      if (it == frags.end()) throw data_error("network state references missing fragment " + id.value);
      net.place(it->second, nodes);
    }
    net.disseminate();
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw data_error("malformed network state: " + std::string(e.what()));
  }
}

}  // namespace kgq
