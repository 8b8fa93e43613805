#include "aptshield/intrusion_graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "aptshield/errors.hpp"

namespace aptshield::igraph {

namespace {

const char* zone_name(Zone z) {
    switch (z) {
        case Zone::Dmz: return "dmz";
        case Zone::Intranet: return "intranet";
        case Zone::External: return "external";
    }
    return "?";
}

Zone zone_from_name(const std::string& s) {
    if (s == "dmz") return Zone::Dmz;
    if (s == "intranet") return Zone::Intranet;
    if (s == "external") return Zone::External;
    throw DataError("unknown zone '" + s + "'");
}

std::string host_id(const std::string& name) { return "host:" + name; }

std::string vuln_id(const std::string& category, const std::string& dst) {
    return "vuln:" + category + "@" + dst;
}

}  // namespace

bool Topology::has_host(const std::string& name) const {
    return std::any_of(hosts.begin(), hosts.end(),
                       [&](const Host& h) { return h.name == name; });
}

void Topology::validate() const {
    std::set<std::string> names;
    for (const auto& h : hosts) {
        if (!names.insert(h.name).second) {
            throw DataError("topology: duplicate host '" + h.name + "'");
        }
    }
    for (const auto& [src, dst] : reachability) {
        if (!names.count(src) || !names.count(dst)) {
            throw DataError("topology: reachability references unknown host '" +
                            (names.count(src) ? dst : src) + "'");
        }
    }
}

Topology load_topology(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open topology file: " + path);
    Topology topo;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string kind;
        if (!(ls >> kind) || kind[0] == '#') continue;
        if (kind == "host") {
            std::string name, zone, services;
            if (!(ls >> name >> zone >> services)) {
                throw DataError(path + ":" + std::to_string(lineno) +
                                ": expected 'host <name> <zone> <services>'");
            }
            Host h{name, zone_from_name(zone), {}};
            if (services != "-") {
                std::istringstream ss(services);
                std::string svc;
                while (std::getline(ss, svc, ',')) h.services.push_back(svc);
            }
            topo.hosts.push_back(std::move(h));
        } else if (kind == "reach") {
            std::string src, dst;
            if (!(ls >> src >> dst)) {
                throw DataError(path + ":" + std::to_string(lineno) +
                                ": expected 'reach <src> <dst>'");
            }
            topo.reachability.emplace_back(src, dst);
        } else {
            throw DataError(path + ":" + std::to_string(lineno) +
                            ": unknown directive '" + kind + "'");
        }
    }
    topo.validate();
    return topo;
}

void save_topology(const Topology& topo, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write topology file: " + path);
    for (const auto& h : topo.hosts) {
        out << "host " << h.name << " " << zone_name(h.zone) << " ";
        if (h.services.empty()) {
            out << "-";
        } else {
            for (std::size_t i = 0; i < h.services.size(); ++i) {
                out << (i ? "," : "") << h.services[i];
            }
        }
        out << "\n";
    }
    for (const auto& [src, dst] : topo.reachability) {
        out << "reach " << src << " " << dst << "\n";
    }
}

const char* node_kind_name(NodeKind kind) {
    switch (kind) {
        case NodeKind::Host: return "host";
        case NodeKind::Vulnerability: return "vulnerability";
        case NodeKind::Stage: return "stage";
        case NodeKind::Permission: return "permission";
    }
    return "?";
}

const GraphNode* IntrusionGraph::find_node(const std::string& id) const {
    for (const auto& n : nodes) {
        if (n.id == id) return &n;
    }
    return nullptr;
}

std::size_t IntrusionGraph::node_index(const std::string& id) const {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].id == id) return i;
    }
    throw DomainError("graph has no node '" + id + "'");
}

IntrusionGraph build_attribute_graph(const std::vector<ingest::Alert>& alerts,
                                     const Topology& topo,
                                     double window_seconds) {
    topo.validate();
    if (window_seconds < 0.0) {
        throw DomainError("build_attribute_graph: window must be >= 0");
    }
    for (const auto& a : alerts) {
        if (!topo.has_host(a.src_host)) {
            throw DataError("alert references unknown host '" + a.src_host + "'");
        }
        if (!topo.has_host(a.dst_host)) {
            throw DataError("alert references unknown host '" + a.dst_host + "'");
        }
    }

    // Canonical order makes the build invariant to input permutation.
    std::vector<ingest::Alert> sorted = alerts;
    std::sort(sorted.begin(), sorted.end(),
              [](const ingest::Alert& a, const ingest::Alert& b) {
                  return std::tie(a.epoch_s, a.category, a.src_host, a.dst_host,
                                  a.severity) < std::tie(b.epoch_s, b.category,
                                                         b.src_host, b.dst_host,
                                                         b.severity);
              });

    // Cluster same-key alerts whose gaps stay within the window.
    std::vector<StageInfo> clusters;
    std::map<std::tuple<std::string, std::string, std::string>, std::size_t>
        open_cluster;
    const auto window = static_cast<std::int64_t>(window_seconds);
    for (const auto& a : sorted) {
        const auto key = std::make_tuple(a.category, a.src_host, a.dst_host);
        const auto it = open_cluster.find(key);
        if (it != open_cluster.end() &&
            a.epoch_s <= clusters[it->second].last_ts + window) {
            StageInfo& c = clusters[it->second];
            c.last_ts = a.epoch_s;
            c.severity = std::min(c.severity, a.severity);
            if (!c.stage_hint && a.stage_hint) c.stage_hint = a.stage_hint;
            c.alerts.push_back(a);
        } else {
            StageInfo c;
            c.category = a.category;
            c.src_host = a.src_host;
            c.dst_host = a.dst_host;
            c.first_ts = a.epoch_s;
            c.last_ts = a.epoch_s;
            c.severity = a.severity;
            c.stage_hint = a.stage_hint;
            c.alerts.push_back(a);
            open_cluster[key] = clusters.size();
            clusters.push_back(std::move(c));
        }
    }
    std::sort(clusters.begin(), clusters.end(),
              [](const StageInfo& a, const StageInfo& b) {
                  return std::tie(a.first_ts, a.category, a.src_host,
                                  a.dst_host) < std::tie(b.first_ts, b.category,
                                                         b.src_host, b.dst_host);
              });

    IntrusionGraph g;

    std::set<std::string> host_names;
    std::set<std::pair<std::string, std::string>> vulns;  // (category, dst)
    std::map<std::pair<std::string, std::string>, std::int64_t> vuln_first_ts;
    for (const auto& c : clusters) {
        host_names.insert(c.src_host);
        host_names.insert(c.dst_host);
        const auto key = std::make_pair(c.category, c.dst_host);
        vulns.insert(key);
        const auto it = vuln_first_ts.find(key);
        if (it == vuln_first_ts.end() || c.first_ts < it->second) {
            vuln_first_ts[key] = c.first_ts;
        }
    }

    for (const auto& name : host_names) {
        g.nodes.push_back({host_id(name), NodeKind::Host, name, std::nullopt});
    }
    for (const auto& [category, dst] : vulns) {
        g.nodes.push_back({vuln_id(category, dst), NodeKind::Vulnerability,
                           category + "@" + dst, std::nullopt});
    }
    std::vector<std::string> stage_ids;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "stage:%03zu", i + 1);
        const std::string id = buf;
        const std::string label = clusters[i].stage_hint
                                      ? *clusters[i].stage_hint
                                      : clusters[i].category;
        g.nodes.push_back({id, NodeKind::Stage, label, clusters[i].first_ts});
        g.stages[id] = clusters[i];
        stage_ids.push_back(id);
    }

    for (std::size_t i = 0; i < clusters.size(); ++i) {
        const auto& c = clusters[i];
        g.edges.push_back(
            {host_id(c.src_host), stage_ids[i], "source", c.first_ts});
        g.edges.push_back(
            {stage_ids[i], host_id(c.dst_host), "target", c.first_ts});
    }
    // Later stage launched from an earlier stage's target, after that
    // cluster fully closed; keeps chains strictly time-ordered.
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        for (std::size_t j = i + 1; j < clusters.size(); ++j) {
            if (clusters[j].src_host == clusters[i].dst_host &&
                clusters[j].first_ts > clusters[i].last_ts) {
                g.edges.push_back({stage_ids[i], stage_ids[j], "precedes",
                                   clusters[j].first_ts});
            }
        }
    }
    for (const auto& [category, dst] : vulns) {
        g.edges.push_back({vuln_id(category, dst), host_id(dst), "on",
                           vuln_first_ts.at({category, dst})});
    }
    return g;
}

EvidenceChain extract_evidence_chain(const IntrusionGraph& g,
                                     const std::string& target_host) {
    if (g.find_node(host_id(target_host)) == nullptr) {
        throw NotFoundError("target host '" + target_host +
                            "' is not in the graph");
    }

    // Stage ids ordered by (timestamp, id); the precedes-DAG respects it.
    std::vector<std::string> order;
    for (const auto& [id, info] : g.stages) order.push_back(id);
    std::sort(order.begin(), order.end(),
              [&](const std::string& a, const std::string& b) {
                  return std::tie(g.stages.at(a).first_ts, a) <
                         std::tie(g.stages.at(b).first_ts, b);
              });

    std::map<std::string, std::vector<std::string>> preds;
    for (const auto& e : g.edges) {
        if (e.relation == "precedes") preds[e.to].push_back(e.from);
    }
    for (auto& [id, list] : preds) std::sort(list.begin(), list.end());

    struct Best {
        std::size_t count = 0;
        double weight = 0.0;
        std::string parent;
    };
    auto better = [&](const Best& a, std::size_t count, double weight,
                      const std::string& parent) {
        if (count != a.count) return count > a.count;
        if (weight != a.weight) return weight > a.weight;
        if (a.parent.empty()) return false;
        // Prefer the predecessor starting earlier, then the smaller id.
        const auto key = [&](const std::string& id) {
            return std::make_pair(g.stages.at(id).first_ts, id);
        };
        return key(parent) < key(a.parent);
    };

    std::map<std::string, Best> best;
    for (const auto& id : order) {
        const double self = 1.0 / static_cast<double>(g.stages.at(id).severity);
        Best b{1, self, ""};
        for (const auto& p : preds[id]) {
            const Best& bp = best.at(p);
            if (better(b, bp.count + 1, bp.weight + self, p)) {
                b = {bp.count + 1, bp.weight + self, p};
            }
        }
        best[id] = b;
    }

    // order is (timestamp, id) ascending, so keeping the first candidate on
    // ties realizes the earliest-timestamp / smallest-id tie-break.
    std::string end_id;
    for (const auto& id : order) {
        if (g.stages.at(id).dst_host != target_host) continue;
        if (end_id.empty()) {
            end_id = id;
            continue;
        }
        const Best& cur = best.at(end_id);
        const Best& cand = best.at(id);
        if (cand.count > cur.count ||
            (cand.count == cur.count && cand.weight > cur.weight)) {
            end_id = id;
        }
    }
    if (end_id.empty()) {
        throw NotFoundError("no stage targets host '" + target_host + "'");
    }

    std::vector<std::string> path;
    for (std::string id = end_id; !id.empty(); id = best.at(id).parent) {
        path.push_back(id);
    }
    std::reverse(path.begin(), path.end());

    EvidenceChain chain;
    chain.target_host = target_host;
    for (std::size_t i = 0; i < path.size(); ++i) {
        const auto& info = g.stages.at(path[i]);
        const std::string label = info.stage_hint ? *info.stage_hint
                                               : info.category;
        chain.stages.push_back({path[i], label, info});
        if (i > 0) {
            chain.edges.push_back({path[i - 1], path[i], "precedes",
                                   info.first_ts});
        }
    }
    return chain;
}

IntrusionGraph chain_subgraph(const IntrusionGraph& g,
                               const EvidenceChain& chain) {
    if (chain.stages.empty()) {
        throw DomainError("chain_subgraph: empty evidence chain");
    }
    std::set<std::string> keep;
    for (const auto& cs : chain.stages) {
        if (g.stages.find(cs.stage_id) == g.stages.end()) {
            throw DomainError("chain references stage '" + cs.stage_id +
                              "' absent from the graph");
        }
        const auto& info = g.stages.at(cs.stage_id);
        keep.insert(cs.stage_id);
        keep.insert(host_id(info.src_host));
        keep.insert(host_id(info.dst_host));
        keep.insert(vuln_id(info.category, info.dst_host));
        for (const auto& a : info.alerts) {
            keep.insert(host_id(a.src_host));
            keep.insert(host_id(a.dst_host));
            keep.insert(vuln_id(a.category, a.dst_host));
        }
    }

    IntrusionGraph sub;
    for (const auto& n : g.nodes) {
        if (keep.count(n.id)) sub.nodes.push_back(n);
    }
    for (const auto& e : g.edges) {
        if (keep.count(e.from) && keep.count(e.to)) sub.edges.push_back(e);
    }
    for (const auto& [id, info] : g.stages) {
        if (keep.count(id)) sub.stages[id] = info;
    }
    return sub;
}

double ReductionReport::node_reduction_pct() const {
    if (nodes_before == 0) return 0.0;
    return (1.0 - static_cast<double>(nodes_after) /
                      static_cast<double>(nodes_before)) *
           100.0;
}

double ReductionReport::edge_reduction_pct() const {
    if (edges_before == 0) return 0.0;
    return (1.0 - static_cast<double>(edges_after) /
                      static_cast<double>(edges_before)) *
           100.0;
}

ReductionReport reduction_report(const IntrusionGraph& before,
                                 const IntrusionGraph& after) {
    std::set<std::string> before_nodes;
    for (const auto& n : before.nodes) before_nodes.insert(n.id);
    for (const auto& n : after.nodes) {
        if (!before_nodes.count(n.id)) {
            throw DomainError("reduction_report: node '" + n.id +
                              "' is not in the before graph");
        }
    }
    for (const auto& e : after.edges) {
        if (std::find(before.edges.begin(), before.edges.end(), e) ==
            before.edges.end()) {
            throw DomainError("reduction_report: edge " + e.from + " -> " +
                              e.to + " is not in the before graph");
        }
    }
    ReductionReport r;
    r.nodes_before = before.nodes.size();
    r.nodes_after = after.nodes.size();
    r.edges_before = before.edges.size();
    r.edges_after = after.edges.size();
    return r;
}

gae::GraphData graph_to_gae_input(const IntrusionGraph& g) {
    const std::size_t n = g.nodes.size();
    if (n == 0) throw DomainError("graph_to_gae_input: empty graph");
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < n; ++i) index[g.nodes[i].id] = i;

    gae::GraphData data;
    data.adjacency = num::Matrix(n, n);
    for (const auto& e : g.edges) {
        const std::size_t i = index.at(e.from);
        const std::size_t j = index.at(e.to);
        if (i == j) continue;
        data.adjacency(i, j) = 1.0;
        data.adjacency(j, i) = 1.0;
    }
    // Node-identity one-hot plus a kind indicator block.
    data.features = num::Matrix(n, n + 4);
    for (std::size_t i = 0; i < n; ++i) {
        data.features(i, i) = 1.0;
        data.features(i, n + static_cast<std::size_t>(g.nodes[i].kind)) = 1.0;
    }
    data.validate();
    return data;
}

nlohmann::json graph_to_json(const IntrusionGraph& g) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : g.nodes) {
        nlohmann::json jn;
        jn["id"] = n.id;
        jn["kind"] = node_kind_name(n.kind);
        jn["label"] = n.label;
        if (n.timestamp) jn["timestamp"] = ingest::format_timestamp(*n.timestamp);
        nodes.push_back(jn);
    }
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : g.edges) {
        edges.push_back({{"from", e.from},
                         {"to", e.to},
                         {"relation", e.relation},
                         {"timestamp", ingest::format_timestamp(e.timestamp)}});
    }
    return {{"nodes", nodes}, {"edges", edges}};
}

nlohmann::json chain_to_json(const EvidenceChain& chain) {
    nlohmann::json stages = nlohmann::json::array();
    for (const auto& cs : chain.stages) {
        nlohmann::json js;
        js["id"] = cs.stage_id;
        js["label"] = cs.label;
        js["category"] = cs.info.category;
        js["src_host"] = cs.info.src_host;
        js["dst_host"] = cs.info.dst_host;
        js["severity"] = cs.info.severity;
        js["first_ts"] = ingest::format_timestamp(cs.info.first_ts);
        js["last_ts"] = ingest::format_timestamp(cs.info.last_ts);
        nlohmann::json alerts = nlohmann::json::array();
        for (const auto& a : cs.info.alerts) {
            nlohmann::json ja;
            ja["timestamp"] = a.timestamp;
            ja["category"] = a.category;
            ja["severity"] = a.severity;
            ja["src_host"] = a.src_host;
            ja["dst_host"] = a.dst_host;
            if (a.stage_hint) ja["stage_hint"] = *a.stage_hint;
            alerts.push_back(ja);
        }
        js["alerts"] = alerts;
        stages.push_back(js);
    }
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : chain.edges) {
        edges.push_back({{"from", e.from},
                         {"to", e.to},
                         {"relation", e.relation},
                         {"timestamp", ingest::format_timestamp(e.timestamp)}});
    }
    return {{"target_host", chain.target_host},
            {"stages", stages},
            {"edges", edges}};
}

nlohmann::json reduction_to_json(const ReductionReport& report) {
    auto round2 = [](double v) { return std::round(v * 100.0) / 100.0; };
    return {{"nodes_before", report.nodes_before},
            {"nodes_after", report.nodes_after},
            {"edges_before", report.edges_before},
            {"edges_after", report.edges_after},
            {"node_reduction_pct", round2(report.node_reduction_pct())},
            {"edge_reduction_pct", round2(report.edge_reduction_pct())}};
}

void save_edge_list(const IntrusionGraph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write edge list: " + path);
    for (const auto& e : g.edges) {
        out << e.from << " " << e.relation << " " << e.to << " "
            << ingest::format_timestamp(e.timestamp) << "\n";
    }
}

}  // namespace aptshield::igraph
