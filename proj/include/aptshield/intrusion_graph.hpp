#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "aptshield/gae.hpp"
#include "aptshield/ingest.hpp"

namespace aptshield::igraph {

enum class Zone { Dmz, Intranet, External };

struct Host {
    std::string name;
    Zone zone;
    std::vector<std::string> services;
};

struct Topology {
    std::vector<Host> hosts;
    std::vector<std::pair<std::string, std::string>> reachability;

    bool has_host(const std::string& name) const;
    void validate() const;
};

// Text format: "host <name> <zone> <svc,svc|->" and "reach <src> <dst>" lines.
Topology load_topology(const std::string& path);
void save_topology(const Topology& topo, const std::string& path);

enum class NodeKind { Host, Vulnerability, Stage, Permission };

const char* node_kind_name(NodeKind kind);

struct GraphNode {
    std::string id;
    NodeKind kind;
    std::string label;
    std::optional<std::int64_t> timestamp;
};

struct GraphEdge {
    std::string from;
    std::string to;
    std::string relation;
    std::int64_t timestamp;

    bool operator==(const GraphEdge&) const = default;
};

// Cluster of alerts behind one stage node.
struct StageInfo {
    std::string category;
    std::string src_host;
    std::string dst_host;
    std::int64_t first_ts;
    std::int64_t last_ts;
    int severity;  // most severe (lowest grade) alert in the cluster
    std::optional<std::string> stage_hint;
    std::vector<ingest::Alert> alerts;
};

struct IntrusionGraph {
    std::vector<GraphNode> nodes;
    std::vector<GraphEdge> edges;
    std::map<std::string, StageInfo> stages;  // by stage node id

    const GraphNode* find_node(const std::string& id) const;
    std::size_t node_index(const std::string& id) const;
};

// Correlates alerts into a typed graph: host nodes for referenced hosts,
// one vulnerability node per (category, dst_host), one stage node per alert
// cluster (same category/src/dst within the merge window), edges
// host->stage (source), stage->host (target), vulnerability->host (on), and
// stage->stage (precedes) between temporally separated clusters where the
// later stage's source host equals the earlier stage's target host.
IntrusionGraph build_attribute_graph(const std::vector<ingest::Alert>& alerts,
                                     const Topology& topo,
                                     double window_seconds = 60.0);

struct ChainStage {
    std::string stage_id;
    std::string label;
    StageInfo info;
};

// Time-ordered stage path of one campaign with its supporting alerts.
struct EvidenceChain {
    std::string target_host;
    std::vector<ChainStage> stages;
    std::vector<GraphEdge> edges;  // the traversed stage->stage edges
};

// Longest time-respecting stage path ending at a stage that targets
// target_host; ties broken by summed inverse severity, then earliest
// timestamp, then node id.
EvidenceChain extract_evidence_chain(const IntrusionGraph& g,
                                     const std::string& target_host);

// Subgraph induced by the chain's stages plus their supporting alerts'
// hosts and vulnerabilities.
IntrusionGraph chain_subgraph(const IntrusionGraph& g,
                              const EvidenceChain& chain);

struct ReductionReport {
    std::size_t nodes_before = 0;
    std::size_t nodes_after = 0;
    std::size_t edges_before = 0;
    std::size_t edges_after = 0;

    double node_reduction_pct() const;
    double edge_reduction_pct() const;
};

// Requires after's node and edge sets to be subsets of before's.
ReductionReport reduction_report(const IntrusionGraph& before,
                                 const IntrusionGraph& after);

// Undirected binary adjacency over the graph nodes plus identity/kind
// features for the GAE.
gae::GraphData graph_to_gae_input(const IntrusionGraph& g);

nlohmann::json graph_to_json(const IntrusionGraph& g);
nlohmann::json chain_to_json(const EvidenceChain& chain);
nlohmann::json reduction_to_json(const ReductionReport& report);

// One "from relation to timestamp" line per edge.
void save_edge_list(const IntrusionGraph& g, const std::string& path);

}  // namespace aptshield::igraph
