#pragma once

#include <iosfwd>
#include <vector>

#include "btcactor/chainstore.hpp"

namespace btcactor {

struct SubgraphLimits {
    int64_t max_addresses = 1'000'000;
    int64_t max_transactions = 500'000;
};

// Output of `from` spent as an input of `to`, through `via`; amount is the
// consumed output's value.
struct TxEdge {
    TxIdx from = 0;
    TxIdx to = 0;
    Address via;
    int64_t amount_sat = 0;

    auto operator<=>(const TxEdge&) const = default;
};

// Temporally bounded connected transaction DAG around a seed address.
struct TxSubgraph {
    Address seed;
    TxIdx seed_tx = kNoTx;
    int window_n = 0;
    std::vector<TxIdx> nodes;   // ascending chain order
    std::vector<TxEdge> edges;  // sorted, deduplicated

    bool contains(TxIdx t) const;
};

// Mixing-transaction test, rules applied in order:
//   1. fewer than 2 inputs or fewer than 3 outputs -> not a CoinJoin
//   2. |inputs| < |outputs| / 2 (exact: 2|inputs| < |outputs|) -> not a CoinJoin
//   3. |outputs| < 6 and all output amounts equal -> CoinJoin
//   4. |outputs| >= 6 and at least 5 output amounts equal -> CoinJoin
// Counts are input/output slots, amounts compare exactly in satoshis.
bool is_coinjoin(const Transaction& tx);

// Bidirectional closure from the seed's first transaction. Nodes stay within
// +-n blocks of that transaction's height; forward traversal does not follow
// outputs whose address is tagged exchange/gambling; backward traversal stops
// at coinbase transactions (which are included). Throws SizeLimitExceeded when
// the closure outgrows `limits`.
TxSubgraph build_tx_subgraph(const ChainIndex& index, const Address& seed, int n,
                             const ServiceTagRegistry& tags, const SubgraphLimits& limits = {});

// Header line with seed/seed_tx/n, then "from<TAB>to<TAB>address<TAB>amount_sat".
void write_tx_subgraph(const TxSubgraph& sub, const ChainIndex& index, std::ostream& out);

} // namespace btcactor
