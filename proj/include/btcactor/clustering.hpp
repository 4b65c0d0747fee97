#pragma once

#include <iosfwd>
#include <unordered_map>
#include <vector>

#include "btcactor/txgraph.hpp"

namespace btcactor {

using ActorId = int32_t;

// Address -> actor partition of one TxSubgraph. Ids are dense, assigned in
// order of each actor's lexicographically smallest member address, so reruns
// on identical input produce identical ids.
struct ClusterMap {
    std::unordered_map<Address, ActorId> actor_by_address;
    std::vector<Address> representatives;  // indexed by ActorId

    size_t actor_count() const { return representatives.size(); }
    bool contains(const Address& a) const { return actor_by_address.count(a) != 0; }
};

ActorId actor_of(const ClusterMap& cm, const Address& a);

// Which outputs join the input cluster when a transaction has exactly one
// fresh output address: only that address (the prose reading of the change
// rule) or all output addresses (the pseudocode reading).
enum class ChangeRule { change_output_only, all_outputs };

// Local behavioral clustering over the transactions of `sub`, processed in
// chain order: common-input merging, single-fresh-change merging, and no
// merges at all for CoinJoin transactions. Freshness of an address is judged
// against the whole chain, not just the subgraph. "burn" and dummy addresses
// stay singleton actors.
ClusterMap local_cluster(const TxSubgraph& sub, const ChainIndex& index,
                         ChangeRule rule = ChangeRule::change_output_only);

// CSV "address,actor_id", sorted by address.
void write_cluster_map(const ClusterMap& cm, std::ostream& out);

} // namespace btcactor
