#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "btcactor/error.hpp"

namespace btcactor {

using Address = std::string;

constexpr int64_t kSatPerBtc = 100'000'000;

// "burn" collects all OpReturn outputs; "dummy:<txid>:<pos>" stands in for
// each unparseable script, one singleton address per output.
inline bool is_burn_address(std::string_view a) { return a == "burn"; }
inline bool is_dummy_address(std::string_view a) { return a.rfind("dummy:", 0) == 0; }
inline bool is_reserved_address(std::string_view a) {
    return is_burn_address(a) || is_dummy_address(a);
}

enum class TxOutputKind { standard, opreturn, nonstandard };

const char* to_string(TxOutputKind k);
std::optional<TxOutputKind> output_kind_from_string(std::string_view s);

struct TxInput {
    Address address;
    int64_t value_sat = 0;
};

struct TxOutput {
    Address address;
    int64_t value_sat = 0;
    TxOutputKind kind = TxOutputKind::standard;
};

struct Transaction {
    std::string txid;
    int64_t height = 0;
    int32_t index_in_block = 0;
    bool is_coinbase = false;
    std::vector<TxInput> inputs;
    std::vector<TxOutput> outputs;

    int64_t input_total_sat() const;
    int64_t output_total_sat() const;
    // inputs - outputs, exact in satoshis; 0 for coinbase
    int64_t fee_sat() const;
};

// Chain-wide ordering of transactions.
struct ChainPos {
    int64_t height = 0;
    int32_t index = 0;
    auto operator<=>(const ChainPos&) const = default;
};

enum class ServiceTag { exchange, gambling };

const char* to_string(ServiceTag t);

class ServiceTagRegistry {
public:
    void insert(const Address& a, ServiceTag tag);
    std::optional<ServiceTag> lookup(const Address& a) const;
    bool is_tagged(const Address& a) const { return map_.count(a) != 0; }
    size_t size() const { return map_.size(); }
    const std::unordered_map<Address, ServiceTag>& all() const { return map_; }

private:
    std::unordered_map<Address, ServiceTag> map_;
};

using TxIdx = uint32_t;
constexpr TxIdx kNoTx = std::numeric_limits<TxIdx>::max();

struct AddressOccurrences {
    std::vector<TxIdx> as_input;   // ordered by chain position
    std::vector<TxIdx> as_output;
};

// One resolved spend: output `output_pos` of `from_tx` consumed by some input.
struct FundingLink {
    TxIdx from_tx = kNoTx;
    uint32_t output_pos = 0;
};

// Immutable once built; readers need no locking.
//
// The line format carries no outpoint references, so spend linkage is derived
// per address: transactions are scanned in chain order and each input consumes
// the earliest unspent output of its address with an equal amount, falling
// back to the earliest unspent output of that address; inputs with no prior
// unspent output stay unlinked.
class ChainIndex {
public:
    size_t tx_count() const { return txs_.size(); }
    const Transaction& tx(TxIdx i) const { return txs_[i]; }
    ChainPos pos(TxIdx i) const { return {txs_[i].height, txs_[i].index_in_block}; }

    std::optional<TxIdx> find_tx(std::string_view txid) const;
    const AddressOccurrences* occurrences(const Address& a) const;
    bool has_address(const Address& a) const { return by_address_.count(a) != 0; }
    size_t address_count() const { return by_address_.size(); }

    // First transaction (by chain position) in which the address occurs.
    TxIdx first_tx_of(const Address& a) const;
    std::optional<ChainPos> first_occurrence(const Address& a) const;

    // kNoTx entries mean the input's funding transaction is not in the chain.
    const std::vector<FundingLink>& funding_of(TxIdx t) const { return funding_[t]; }
    // Spender of each output slot of t, kNoTx if unspent.
    const std::vector<TxIdx>& spenders_of(TxIdx t) const { return spenders_[t]; }

    friend ChainIndex parse_chain(std::istream& in);

private:
    std::vector<Transaction> txs_;  // sorted by (height, index_in_block)
    std::unordered_map<std::string, TxIdx> by_txid_;
    std::unordered_map<Address, AddressOccurrences> by_address_;
    std::vector<std::vector<FundingLink>> funding_;   // per tx, per input slot
    std::vector<std::vector<TxIdx>> spenders_;        // per tx, per output slot
};

Transaction parse_chain_record(const std::string& line, size_t lineno);

// Parses the line-delimited chain format, normalizes OpReturn/non-standard
// outputs, validates the satoshi equilibrium per record and builds all
// indices. Throws Error(data) with the offending line number.
ChainIndex parse_chain(std::istream& in);

// Emits the normalized external format, one record per line, in chain order.
// Re-parsing the output reproduces an identical index.
void write_chain(const ChainIndex& index, std::ostream& out);
void write_transaction(const Transaction& tx, std::ostream& out);

const Transaction& first_transaction_of(const ChainIndex& index, const Address& a);

// CSV "<address>,<tag>" with tag in {exchange, gambling}; no header.
ServiceTagRegistry load_service_tags(std::istream& in);
void write_service_tags(const ServiceTagRegistry& tags, std::ostream& out);

} // namespace btcactor
