// Command-line front end: fragmenting, indexing, network state and queries.

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <fstream>
#include <iostream>
#include <sstream>

#include "kgq/cardinality.hpp"
#include "kgq/error.hpp"
#include "kgq/eval.hpp"
#include "kgq/fragment.hpp"
#include "kgq/index.hpp"
#include "kgq/netsim.hpp"
#include "kgq/ntriples.hpp"
#include "kgq/planner.hpp"
#include "kgq/query.hpp"

namespace {

using namespace kgq;

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("cannot write " + path);
  out << text;
}

struct FragmentArgs {
  std::string input;
  std::string out;
  std::size_t min_subjects = kDefaultMinSubjects;
  std::size_t target_count = 0;
  std::string graph_id = "g";
};

void print_fragments(const std::vector<Fragment>& frags) {
  std::map<std::size_t, std::size_t> buckets;  // lower bound of a decade
  for (const auto& f : frags) {
    std::size_t low = 1;
    while (low * 10 <= f.subject_count) low *= 10;
    ++buckets[low];
  }
  std::cout << "fragments: " << frags.size() << '\n';
  for (const auto& [low, count] : buckets)
    std::cout << "  subjects " << low << '-' << low * 10 - 1 << ": " << count << '\n';
}

void cmd_fragment(const FragmentArgs& a) {
  auto g = read_ntriples_file(a.input);
  auto frags = fragment_by_cs(g, a.graph_id);
  MergeReport report = a.target_count > 0 ? merge_to_count(std::move(frags), a.target_count, a.graph_id)
                                          : merge_infrequent(std::move(frags), a.min_subjects, a.graph_id);
  if (!report.reached_target) spdlog::warn("target fragment count not reached");
  if (!report.unmerged.empty()) spdlog::warn("{} infrequent fragments left unmerged", report.unmerged.size());
  write_fragments(a.out, report.fragments);
  print_fragments(report.fragments);
}

struct IndexArgs {
  std::string fragments;
  std::string out;
  std::string node = "n1";
  BloomParams bloom;
};

void cmd_index(const IndexArgs& a) {
  a.bloom.validate();
  auto holder = parse_node_id(a.node);
  std::vector<SPBFSlice> slices;
  for (const auto& f : read_fragments(a.fragments)) slices.push_back({f.id, SPBF::build(f, a.bloom), {holder}});
  auto idx = combine(slices);
  write_index(a.out, idx);
  std::cout << "indexed fragments: " << idx.size() << '\n';
}

struct NetworkArgs {
  NetworkConfig cfg;
  std::string data;
  std::string fragments;
  std::string origin = "n1";
  std::string state;
};

void print_network(const Network& net) {
  std::cout << "nodes: " << net.nodes().size() << "\nfragments: " << net.catalog().size() << '\n';
  for (const auto& node : net.nodes()) {
    std::cout << node.id.to_string() << " neighbors=";
    bool first = true;
    for (auto m : node.neighbors) {
      std::cout << (first ? "" : ",") << m.to_string();
      first = false;
    }
    std::cout << " stored=" << node.store.size() << " indexed=" << node.index.size() << '\n';
  }
}

void cmd_network_create(NetworkArgs a) {
  a.cfg.validate();
  if (a.data.empty() == a.fragments.empty()) throw usage_error("give exactly one of --data or --fragments");
  auto origin = parse_node_id(a.origin);
  auto net = create_network(a.cfg);
  if (!net.has_node(origin)) throw usage_error("unknown node " + a.origin);
  if (!a.data.empty())
    upload(net, read_ntriples_file(a.data), origin);
  else
    upload_fragments(net, read_fragments(a.fragments), origin);
  save_network(net, a.state);
  print_network(net);
}

struct QueryArgs {
  std::string query;
  std::string state;
  std::string node = "n1";
  bool explain = false;
  bool table = false;
  bool no_smaller_left = false;
  std::string metrics;
  std::string out;
};

struct Prepared {
  Network net;
  Query query;
  NodeId origin;
  PlannerOptions options;
};

Prepared prepare(const QueryArgs& a) {
  auto query = parse_query(read_text(a.query));
  auto net = load_network(a.state);
  auto origin = parse_node_id(a.node);
  if (!net.has_node(origin)) throw usage_error("unknown node " + a.node);
  PlannerOptions options;
  options.smaller_left = !a.no_smaller_left;
  return {std::move(net), std::move(query), origin, options};
}

std::string explain_at(const Prepared& p, const OptimizeResult& r) {
  auto stars = star_decompose(p.query.bgp);
  BloomCardinality src(p.net.node(p.origin).index);
  PlanContext ctx{stars, src};
  return explain(*r.plan, p.origin, ctx, p.query.distinct);
}

void cmd_plan(const QueryArgs& a) {
  auto p = prepare(a);
  auto stars = star_decompose(p.query.bgp);
  const auto& idx = p.net.node(p.origin).index;
  BloomCardinality src(idx);
  auto r = optimize(std::span<const StarPattern>(stars), idx, src, p.origin, p.query.distinct, p.options);
  std::cout << explain_at(p, r);
  if (a.table) std::cout << explain_table(r.table);
}

void cmd_query(const QueryArgs& a) {
  auto p = prepare(a);
  auto run = run_query(p.net, p.query, p.origin, p.options);
  if (a.explain) std::cout << explain_at(p, run.optimized);
  auto text = format_solutions(run.rows, p.query.projected_vars());
  if (a.out.empty())
    std::cout << text;
  else
    write_text(a.out, text);
  if (!a.metrics.empty()) write_text(a.metrics, run.metrics.to_json() + "\n");
}

void add_network_options(CLI::App& cmd, NetworkConfig& cfg) {
  cmd.add_option("--nodes", cfg.node_count, "number of nodes")->capture_default_str();
  cmd.add_option("--neighbors", cfg.neighbor_count, "neighbors per node")->capture_default_str();
  cmd.add_option("--replication", cfg.replication_factor, "replicas per fragment")->capture_default_str();
  cmd.add_option("--horizon", cfg.horizon, "index horizon in hops")->capture_default_str();
  cmd.add_option("--seed", cfg.seed, "random seed")->capture_default_str();
  cmd.add_option("--omega", cfg.omega, "bindings per bind-join request")->capture_default_str();
  cmd.add_option("--page-size", cfg.page_size, "rows per response page")->capture_default_str();
  cmd.add_option("--min-subjects", cfg.min_subjects, "merge fragments below this size")->capture_default_str();
  cmd.add_option("--bloom-m", cfg.bloom.m, "bits per filter partition")->capture_default_str();
  cmd.add_option("--bloom-k", cfg.bloom.k, "hash functions")->capture_default_str();
}

void add_query_options(CLI::App& cmd, QueryArgs& a) {
  cmd.add_option("query", a.query, "SPARQL query file")->required();
  cmd.add_option("--network", a.state, "network state directory")->required();
  cmd.add_option("--node", a.node, "node issuing the query")->capture_default_str();
  cmd.add_flag("--no-smaller-left", a.no_smaller_left, "consider every join order");
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_level(spdlog::level::warn);
  CLI::App app{"Decentralized knowledge graph query planner and simulator"};
  app.require_subcommand(1);

  FragmentArgs fa;
  auto* fragment = app.add_subcommand("fragment", "split an N-Triples file into characteristic-set fragments");
  fragment->add_option("input", fa.input, "N-Triples file")->required();
  fragment->add_option("outdir", fa.out, "output directory")->required();
  auto* min_opt = fragment->add_option("--min-subjects", fa.min_subjects, "merge fragments below this size")
                      ->capture_default_str();
  fragment->add_option("--target-count", fa.target_count, "merge down to this many fragments")->excludes(min_opt);
  fragment->add_option("--graph-id", fa.graph_id, "graph identifier for fragment ids")->capture_default_str();

  IndexArgs ia;
  auto* index = app.add_subcommand("index", "build filter slices for a fragment directory");
  index->add_option("fragments", ia.fragments, "fragment directory")->required();
  index->add_option("outdir", ia.out, "output directory")->required();
  index->add_option("--bloom-m", ia.bloom.m, "bits per filter partition")->capture_default_str();
  index->add_option("--bloom-k", ia.bloom.k, "hash functions")->capture_default_str();
  index->add_option("--seed", ia.bloom.seed, "hash seed")->capture_default_str();
  index->add_option("--node", ia.node, "node holding the fragments")->capture_default_str();

  NetworkArgs na;
  std::string load_dir;
  auto* network = app.add_subcommand("network", "create or inspect a simulated network");
  network->require_subcommand(1);
  auto* create = network->add_subcommand("create", "build, populate and save a network");
  add_network_options(*create, na.cfg);
  create->add_option("--data", na.data, "N-Triples file to fragment and upload");
  create->add_option("--fragments", na.fragments, "fragment directory to upload");
  create->add_option("--origin", na.origin, "uploading node")->capture_default_str();
  create->add_option("--out", na.state, "state directory")->required();
  auto* load = network->add_subcommand("load", "print a saved network");
  load->add_option("state", load_dir, "state directory")->required();

  QueryArgs qa;
  auto* query = app.add_subcommand("query", "optimize and execute a query");
  add_query_options(*query, qa);
  query->add_flag("--explain", qa.explain, "print the chosen plan");
  query->add_option("--metrics", qa.metrics, "write metrics to this file");
  query->add_option("--out", qa.out, "write results to this file instead of stdout");

  QueryArgs pa;
  auto* plan = app.add_subcommand("plan", "print the optimized plan without executing it");
  add_query_options(*plan, pa);
  plan->add_flag("--table", pa.table, "also print the best plan per star subset");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ErrorKind::Usage);
  }

  try {
    if (*fragment) cmd_fragment(fa);
    if (*index) cmd_index(ia);
    if (*create) cmd_network_create(na);
    if (*load) print_network(load_network(load_dir));
    if (*query) cmd_query(qa);
    if (*plan) cmd_plan(pa);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ErrorKind::Internal);
  }
  return 0;
}
