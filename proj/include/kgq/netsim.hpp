#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "kgq/bloom.hpp"
#include "kgq/fragment.hpp"
#include "kgq/index.hpp"
#include "kgq/planner.hpp"

namespace kgq {

struct NetworkConfig {
  std::size_t node_count = 5;
  std::size_t neighbor_count = 2;
  std::size_t replication_factor = 2;
  std::size_t horizon = 5;  // hops
  std::uint64_t seed = 0;
  BloomParams bloom;
  std::size_t omega = 30;       // bindings per bind-join request
  std::size_t page_size = 100;  // result rows per response page
  std::size_t min_subjects = kDefaultMinSubjects;

  void validate() const;
};

struct NodeSim {
  NodeId id;
  std::map<FragmentId, std::shared_ptr<const Fragment>> store;
  SPBFIndex index;
  std::set<NodeId> neighbors;
};

struct Metrics {
  std::uint64_t requests = 0;
  std::uint64_t transferred_bytes = 0;
  std::uint64_t relevant_fragments = 0;
  std::uint64_t relevant_nodes = 0;
  std::uint64_t optimization_ns = 0;
  std::uint64_t execution_ns = 0;

  std::string to_json() const;  // stable key order
};

using Allocation = std::map<FragmentId, std::set<NodeId>>;

class Network {
 public:
  // Nodes n1..nN without neighbors or data.
  explicit Network(NetworkConfig cfg);

  const NetworkConfig& config() const noexcept { return cfg_; }
  const std::vector<NodeSim>& nodes() const noexcept { return nodes_; }
  const NodeSim& node(NodeId id) const;
  bool has_node(NodeId id) const noexcept { return id.value >= 1 && id.value <= nodes_.size(); }

  void set_neighbors(NodeId id, std::set<NodeId> neighbors);

  // Stores f at every listed node; index slices are not refreshed until
  // disseminate().
  void place(const Fragment& f, const std::set<NodeId>& holders);
  // Rebuilds each node's index from the slices of fragments held within the
  // horizon. Links are treated as bidirectional for hop counting.
  void disseminate();

  Allocation allocation() const;
  const std::map<FragmentId, std::shared_ptr<const Fragment>>& catalog() const noexcept { return catalog_; }
  std::set<NodeId> within_horizon(NodeId from) const;
  // Nodes in breadth-first order from `from`, shuffled within each hop
  // layer; unreachable nodes follow in id order.
  std::vector<NodeId> expansion(NodeId from);

  std::mt19937_64& rng() noexcept { return rng_; }

 private:
  NodeSim& mutable_node(NodeId id);

  NetworkConfig cfg_;
  std::vector<NodeSim> nodes_;
  std::map<FragmentId, std::shared_ptr<const Fragment>> catalog_;
  std::map<FragmentId, SPBF> filters_;
  std::mt19937_64 rng_;
};

// Seeded random topology: every node gets neighbor_count distinct
// neighbors other than itself.
Network create_network(const NetworkConfig& cfg);

// Fragments g (CS fragmentation, then merging below cfg.min_subjects),
// replicates each fragment over replication_factor nodes drawn from the
// origin's neighbourhood expansion and disseminates the index slices.
Allocation upload(Network& net, const KnowledgeGraph& g, NodeId origin, const std::string& graph_id = "g");
// Same for pre-built fragments.
Allocation upload_fragments(Network& net, const std::vector<Fragment>& frags, NodeId origin);

struct Execution {
  Solutions rows;  // full mappings, bag semantics, unordered
  Metrics metrics;
  std::vector<std::string> trace;  // one line per message
};

// Runs `plan` with its final consumer at `origin`. Only requests, bytes and
// execution time are filled in.
Execution execute_plan(const Network& net, const Plan& plan, std::span<const StarPattern> stars, NodeId origin);

struct Relevance {
  std::size_t fragments = 0;
  std::size_t nodes = 0;
};

// Fragment and holder counts of the compatibility graph built at `origin`.
Relevance measure_relevance(const Network& net, const BGP& bgp, NodeId origin);

struct QueryRun {
  OptimizeResult optimized;
  Solutions rows;  // projected and canonicalized
  Metrics metrics;
  std::vector<std::string> trace;
};

// Optimize at `origin` against its own index using Bloom estimates, then
// execute.
QueryRun run_query(const Network& net, const Query& q, NodeId origin, const PlannerOptions& options = {});

// Left-deep plan over every relevant fragment in star order, joined and
// consumed at `origin`, without compatibility pruning.
PlanPtr unpruned_plan(std::span<const StarPattern> stars, const SPBFIndex& idx, NodeId origin);

// Network state: config, topology and allocation in network.json plus the
// fragment files.
void save_network(const Network& net, const std::string& dir);
Network load_network(const std::string& dir);

}  // namespace kgq
