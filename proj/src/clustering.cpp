#include "btcactor/clustering.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <ostream>

namespace btcactor {

namespace {

struct UnionFind {
    std::vector<int> parent;
    std::vector<int> size;

    explicit UnionFind(size_t n) : parent(n), size(n, 1) {
        std::iota(parent.begin(), parent.end(), 0);
    }

    int find(int x) {
        int root = x;
        while (parent[root] != root) root = parent[root];
        while (parent[x] != root) {
            int next = parent[x];
            parent[x] = root;
            x = next;
        }
        return root;
    }

    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (size[a] < size[b]) std::swap(a, b);
        parent[b] = a;
        size[a] += size[b];
    }
};

} // namespace

ActorId actor_of(const ClusterMap& cm, const Address& a) {
    auto it = cm.actor_by_address.find(a);
    if (it == cm.actor_by_address.end()) fail_data("address '" + a + "' not in cluster map");
    return it->second;
}

ClusterMap local_cluster(const TxSubgraph& sub, const ChainIndex& index, ChangeRule rule) {
    // Collect every address occurring in the subgraph's transactions, sorted
    // for deterministic slot assignment.
    std::vector<Address> addrs;
    for (TxIdx t : sub.nodes) {
        if (t >= index.tx_count()) fail_data("dangling txid index in subgraph");
        const Transaction& tx = index.tx(t);
        for (const auto& i : tx.inputs) addrs.push_back(i.address);
        for (const auto& o : tx.outputs) addrs.push_back(o.address);
    }
    std::sort(addrs.begin(), addrs.end());
    addrs.erase(std::unique(addrs.begin(), addrs.end()), addrs.end());

    std::unordered_map<Address, int> slot;
    slot.reserve(addrs.size() * 2);
    for (size_t i = 0; i < addrs.size(); ++i) slot[addrs[i]] = static_cast<int>(i);

    UnionFind uf(addrs.size());

    // An address is fresh at a transaction when it has no occurrence strictly
    // earlier in the whole chain; reserved addresses are never merge
    // candidates.
    auto fresh_at = [&](const Address& a, ChainPos at) {
        auto first = index.first_occurrence(a);
        return first && !(*first < at);
    };

    for (TxIdx t : sub.nodes) {
        const Transaction& tx = index.tx(t);
        if (tx.is_coinbase) continue;  // no inputs, nothing to merge
        if (is_coinjoin(tx)) continue;

        int anchor = -1;
        for (const auto& in : tx.inputs) {
            if (is_reserved_address(in.address)) continue;
            int s = slot.at(in.address);
            if (anchor < 0) anchor = s;
            else uf.unite(anchor, s);
        }
        if (anchor < 0) continue;

        ChainPos at = index.pos(t);
        std::vector<const Address*> distinct_outputs;
        for (const auto& o : tx.outputs) {
            if (is_reserved_address(o.address)) continue;
            bool seen = false;
            for (const Address* p : distinct_outputs)
                if (*p == o.address) { seen = true; break; }
            if (!seen) distinct_outputs.push_back(&o.address);
        }
        const Address* fresh_addr = nullptr;
        int fresh_count = 0;
        for (const Address* p : distinct_outputs)
            if (fresh_at(*p, at)) {
                ++fresh_count;
                fresh_addr = p;
            }
        if (fresh_count == 1) {
            if (rule == ChangeRule::change_output_only) {
                uf.unite(anchor, slot.at(*fresh_addr));
            } else {
                for (const Address* p : distinct_outputs) uf.unite(anchor, slot.at(*p));
            }
        }
    }

    // Group by root; representative = smallest member address; ids follow
    // representative order.
    std::map<int, Address> rep_of_root;
    for (size_t i = 0; i < addrs.size(); ++i) {
        int r = uf.find(static_cast<int>(i));
        auto it = rep_of_root.find(r);
        if (it == rep_of_root.end() || addrs[i] < it->second) rep_of_root[r] = addrs[i];
    }
    std::vector<std::pair<Address, int>> reps;
    reps.reserve(rep_of_root.size());
    for (const auto& [root, rep] : rep_of_root) reps.emplace_back(rep, root);
    std::sort(reps.begin(), reps.end());

    ClusterMap cm;
    cm.representatives.reserve(reps.size());
    std::unordered_map<int, ActorId> id_of_root;
    for (const auto& [rep, root] : reps) {
        id_of_root[root] = static_cast<ActorId>(cm.representatives.size());
        cm.representatives.push_back(rep);
    }
    cm.actor_by_address.reserve(addrs.size() * 2);
    for (size_t i = 0; i < addrs.size(); ++i)
        cm.actor_by_address[addrs[i]] = id_of_root[uf.find(static_cast<int>(i))];
    return cm;
}

void write_cluster_map(const ClusterMap& cm, std::ostream& out) {
    std::vector<std::pair<Address, ActorId>> rows(cm.actor_by_address.begin(),
                                                  cm.actor_by_address.end());
    std::sort(rows.begin(), rows.end());
    out << "address,actor_id\n";
    for (const auto& [a, id] : rows) out << a << ',' << id << '\n';
}

} // namespace btcactor
