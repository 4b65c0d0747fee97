#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "btcactor/clustering.hpp"

namespace btcactor {

enum class GraphKind {
    whole,
    ego1,
    ego2,
    ego3,
    whole_simple,
    ego1_simple,
    ego2_simple,
    ego3_simple,
};

const char* to_string(GraphKind k);
std::optional<GraphKind> graph_kind_from_string(std::string_view s);
bool is_simple_kind(GraphKind k);
GraphKind simple_counterpart(GraphKind k);

// The six kinds used for learning, in the fixed order shared by schemas,
// model bundles and reports.
const std::vector<GraphKind>& learn_kinds();

struct ActorEdge {
    ActorId src = 0;
    ActorId dst = 0;
    double weight_btc = 0.0;
    std::string txid;  // empty on collapsed edges

    auto operator<=>(const ActorEdge&) const = default;
};

// Directed weighted multigraph of actors; parallel edges and self-loops are
// kept until simplify().
struct ActorGraph {
    GraphKind kind = GraphKind::whole;
    ActorId center = 0;
    std::optional<ActorId> coinbase_actor;  // reserved source for coinbase flows
    std::vector<ActorId> vertices;          // sorted unique
    std::vector<ActorEdge> edges;

    double total_weight_btc() const;
};

struct AllocatedEdge {
    Address input_address;
    Address output_address;
    double weight_btc = 0.0;
};

// Proportional allocation: weight(i, j) = (IA_i / sum IA) * OA_j in BTC.
// The fee never appears: only output amounts are distributed, so the
// allocated total equals the output total exactly.
std::vector<AllocatedEdge> allocate_weights(const Transaction& tx);

ActorGraph build_actor_graph(const TxSubgraph& sub, const ClusterMap& cm, const ChainIndex& index);

// Induced subgraph on all actors within undirected hop distance <= k of the
// center, 1 <= k <= 3.
ActorGraph ego_graph(const ActorGraph& g, int k);

// Drops self-loops and collapses parallel edges into one edge carrying the
// summed weight. Vertex set unchanged; idempotent.
ActorGraph simplify(const ActorGraph& g);

// CSV "src_actor,dst_actor,weight_btc,txid" behind a metadata header.
void write_actor_graph(const ActorGraph& g, std::ostream& out);

} // namespace btcactor
