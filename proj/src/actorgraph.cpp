#include "btcactor/actorgraph.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

namespace btcactor {

const char* to_string(GraphKind k) {
    switch (k) {
        case GraphKind::whole: return "whole";
        case GraphKind::ego1: return "ego1";
        case GraphKind::ego2: return "ego2";
        case GraphKind::ego3: return "ego3";
        case GraphKind::whole_simple: return "whole_simple";
        case GraphKind::ego1_simple: return "ego1_simple";
        case GraphKind::ego2_simple: return "ego2_simple";
        case GraphKind::ego3_simple: return "ego3_simple";
    }
    return "whole";
}

std::optional<GraphKind> graph_kind_from_string(std::string_view s) {
    for (GraphKind k : {GraphKind::whole, GraphKind::ego1, GraphKind::ego2, GraphKind::ego3,
                        GraphKind::whole_simple, GraphKind::ego1_simple, GraphKind::ego2_simple,
                        GraphKind::ego3_simple})
        if (s == to_string(k)) return k;
    return std::nullopt;
}

bool is_simple_kind(GraphKind k) {
    return k == GraphKind::whole_simple || k == GraphKind::ego1_simple ||
           k == GraphKind::ego2_simple || k == GraphKind::ego3_simple;
}

GraphKind simple_counterpart(GraphKind k) {
    switch (k) {
        case GraphKind::whole: return GraphKind::whole_simple;
        case GraphKind::ego1: return GraphKind::ego1_simple;
        case GraphKind::ego2: return GraphKind::ego2_simple;
        case GraphKind::ego3: return GraphKind::ego3_simple;
        default: return k;
    }
}

const std::vector<GraphKind>& learn_kinds() {
    static const std::vector<GraphKind> kinds = {
        GraphKind::ego1,        GraphKind::ego1_simple, GraphKind::ego2,
        GraphKind::ego2_simple, GraphKind::ego3,        GraphKind::ego3_simple,
    };
    return kinds;
}

double ActorGraph::total_weight_btc() const {
    double s = 0.0;
    for (const auto& e : edges) s += e.weight_btc;
    return s;
}

std::vector<AllocatedEdge> allocate_weights(const Transaction& tx) {
    if (tx.is_coinbase) fail_data("allocate_weights: coinbase transaction");
    const int64_t total_in = tx.input_total_sat();
    if (total_in <= 0)
        fail_data("allocate_weights: zero total input in '" + tx.txid + "'");

    std::vector<AllocatedEdge> edges;
    edges.reserve(tx.inputs.size() * tx.outputs.size());
    for (const auto& in : tx.inputs) {
        const double share = static_cast<double>(in.value_sat) / static_cast<double>(total_in);
        for (const auto& out : tx.outputs)
            edges.push_back({in.address, out.address,
                             share * static_cast<double>(out.value_sat) / kSatPerBtc});
    }
    return edges;
}

ActorGraph build_actor_graph(const TxSubgraph& sub, const ClusterMap& cm, const ChainIndex& index) {
    ActorGraph g;
    g.kind = GraphKind::whole;
    g.center = actor_of(cm, sub.seed);

    bool any_coinbase = false;
    for (TxIdx t : sub.nodes)
        if (index.tx(t).is_coinbase) { any_coinbase = true; break; }
    if (any_coinbase) g.coinbase_actor = static_cast<ActorId>(cm.actor_count());

    std::unordered_set<ActorId> verts;
    verts.insert(g.center);
    for (TxIdx t : sub.nodes) {
        const Transaction& tx = index.tx(t);
        if (tx.is_coinbase) {
            for (const auto& out : tx.outputs) {
                ActorId dst = actor_of(cm, out.address);
                g.edges.push_back({*g.coinbase_actor, dst,
                                   static_cast<double>(out.value_sat) / kSatPerBtc, tx.txid});
                verts.insert(dst);
            }
            verts.insert(*g.coinbase_actor);
            continue;
        }
        for (const auto& a : allocate_weights(tx)) {
            ActorId src = actor_of(cm, a.input_address);
            ActorId dst = actor_of(cm, a.output_address);
            g.edges.push_back({src, dst, a.weight_btc, tx.txid});
            verts.insert(src);
            verts.insert(dst);
        }
    }
    g.vertices.assign(verts.begin(), verts.end());
    std::sort(g.vertices.begin(), g.vertices.end());
    return g;
}

ActorGraph ego_graph(const ActorGraph& g, int k) {
    if (k < 1 || k > 3) fail_usage("ego order must be in 1..3");
    if (!std::binary_search(g.vertices.begin(), g.vertices.end(), g.center))
        fail_data("ego_graph: center vertex missing");

    std::unordered_map<ActorId, std::vector<ActorId>> adj;
    for (const auto& e : g.edges) {
        if (e.src == e.dst) continue;
        adj[e.src].push_back(e.dst);
        adj[e.dst].push_back(e.src);
    }

    std::unordered_map<ActorId, int> dist;
    dist[g.center] = 0;
    std::deque<ActorId> queue{g.center};
    while (!queue.empty()) {
        ActorId v = queue.front();
        queue.pop_front();
        int d = dist[v];
        if (d == k) continue;
        auto it = adj.find(v);
        if (it == adj.end()) continue;
        for (ActorId u : it->second)
            if (dist.emplace(u, d + 1).second) queue.push_back(u);
    }

    ActorGraph out;
    out.kind = g.kind == GraphKind::whole
                   ? (k == 1 ? GraphKind::ego1 : k == 2 ? GraphKind::ego2 : GraphKind::ego3)
                   : g.kind;
    out.center = g.center;
    for (ActorId v : g.vertices)
        if (dist.count(v)) out.vertices.push_back(v);
    for (const auto& e : g.edges)
        if (dist.count(e.src) && dist.count(e.dst)) out.edges.push_back(e);
    if (g.coinbase_actor && dist.count(*g.coinbase_actor)) out.coinbase_actor = g.coinbase_actor;
    return out;
}

ActorGraph simplify(const ActorGraph& g) {
    ActorGraph out;
    out.kind = simple_counterpart(g.kind);
    out.center = g.center;
    out.coinbase_actor = g.coinbase_actor;
    out.vertices = g.vertices;

    std::map<std::pair<ActorId, ActorId>, double> collapsed;
    for (const auto& e : g.edges) {
        if (e.src == e.dst) continue;
        collapsed[{e.src, e.dst}] += e.weight_btc;
    }
    out.edges.reserve(collapsed.size());
    for (const auto& [key, w] : collapsed) out.edges.push_back({key.first, key.second, w, ""});
    return out;
}

void write_actor_graph(const ActorGraph& g, std::ostream& out) {
    out << "# kind=" << to_string(g.kind) << " center=" << g.center;
    if (g.coinbase_actor) out << " coinbase_actor=" << *g.coinbase_actor;
    out << '\n';
    out << "src_actor,dst_actor,weight_btc,txid\n";
    char buf[64];
    for (const auto& e : g.edges) {
        snprintf(buf, sizeof(buf), "%.17g", e.weight_btc);
        out << e.src << ',' << e.dst << ',' << buf << ',' << e.txid << '\n';
    }
}

} // namespace btcactor
