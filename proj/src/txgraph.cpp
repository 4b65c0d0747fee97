#include "btcactor/txgraph.hpp"

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

namespace btcactor {

bool TxSubgraph::contains(TxIdx t) const {
    return std::binary_search(nodes.begin(), nodes.end(), t);
}

bool is_coinjoin(const Transaction& tx) {
    const size_t n_in = tx.inputs.size();
    const size_t n_out = tx.outputs.size();
    if (n_in < 2 || n_out < 3) return false;
    if (2 * n_in < n_out) return false;

    std::unordered_map<int64_t, size_t> amount_count;
    size_t max_equal = 0;
    for (const auto& o : tx.outputs)
        max_equal = std::max(max_equal, ++amount_count[o.value_sat]);

    if (n_out < 6) return max_equal == n_out;  // all equal
    return max_equal >= 5;
}

TxSubgraph build_tx_subgraph(const ChainIndex& index, const Address& seed, int n,
                             const ServiceTagRegistry& tags, const SubgraphLimits& limits) {
    if (n < 1) fail_usage("subgraph window n must be >= 1");
    TxSubgraph sub;
    sub.seed = seed;
    sub.window_n = n;
    sub.seed_tx = index.first_tx_of(seed);  // throws on unknown seed
    const int64_t h0 = index.tx(sub.seed_tx).height;

    auto in_window = [&](TxIdx t) { return std::llabs(index.tx(t).height - h0) <= n; };

    std::unordered_set<TxIdx> visited;
    std::unordered_set<Address> addresses;
    std::deque<TxIdx> queue;
    std::vector<TxEdge> edges;

    auto admit = [&](TxIdx t) {
        if (!visited.insert(t).second) return;
        queue.push_back(t);
        const Transaction& tx = index.tx(t);
        for (const auto& i : tx.inputs) addresses.insert(i.address);
        for (const auto& o : tx.outputs) addresses.insert(o.address);
        if (static_cast<int64_t>(visited.size()) > limits.max_transactions)
            throw SizeLimitExceeded("graph skipped: transaction count exceeds " +
                                    std::to_string(limits.max_transactions));
        if (static_cast<int64_t>(addresses.size()) > limits.max_addresses)
            throw SizeLimitExceeded("graph skipped: address count exceeds " +
                                    std::to_string(limits.max_addresses));
    };

    admit(sub.seed_tx);
    while (!queue.empty()) {
        TxIdx t = queue.front();
        queue.pop_front();
        const Transaction& tx = index.tx(t);

        // Backward: every funded input, tagged or not. A coinbase has no
        // inputs, so traversal stops behind it on its own.
        const auto& funding = index.funding_of(t);
        for (size_t s = 0; s < funding.size(); ++s) {
            if (funding[s].from_tx == kNoTx) continue;
            TxIdx p = funding[s].from_tx;
            if (!in_window(p)) continue;
            const TxOutput& out = index.tx(p).outputs[funding[s].output_pos];
            edges.push_back({p, t, out.address, out.value_sat});
            admit(p);
        }

        // Forward: skip outputs paying a tagged exchange/gambling address so
        // the service's unrelated fan-out never enters the graph.
        const auto& spenders = index.spenders_of(t);
        for (uint32_t o = 0; o < spenders.size(); ++o) {
            if (spenders[o] == kNoTx) continue;
            const TxOutput& out = tx.outputs[o];
            if (tags.is_tagged(out.address)) continue;
            TxIdx child = spenders[o];
            if (!in_window(child)) continue;
            edges.push_back({t, child, out.address, out.value_sat});
            admit(child);
        }
    }

    sub.nodes.assign(visited.begin(), visited.end());
    std::sort(sub.nodes.begin(), sub.nodes.end());
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    sub.edges = std::move(edges);
    return sub;
}

void write_tx_subgraph(const TxSubgraph& sub, const ChainIndex& index, std::ostream& out) {
    out << "# seed=" << sub.seed << " seed_tx=" << index.tx(sub.seed_tx).txid
        << " n=" << sub.window_n << '\n';
    for (const auto& e : sub.edges)
        out << index.tx(e.from).txid << '\t' << index.tx(e.to).txid << '\t' << e.via << '\t'
            << e.amount_sat << '\n';
}

} // namespace btcactor
