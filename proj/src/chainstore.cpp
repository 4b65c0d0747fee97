#include "btcactor/chainstore.hpp"

#include <algorithm>
#include <deque>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace btcactor {

using json = nlohmann::json;

const char* to_string(TxOutputKind k) {
    switch (k) {
        case TxOutputKind::standard: return "standard";
        case TxOutputKind::opreturn: return "opreturn";
        case TxOutputKind::nonstandard: return "nonstandard";
    }
    return "standard";
}

std::optional<TxOutputKind> output_kind_from_string(std::string_view s) {
    if (s == "standard") return TxOutputKind::standard;
    if (s == "opreturn") return TxOutputKind::opreturn;
    if (s == "nonstandard") return TxOutputKind::nonstandard;
    return std::nullopt;
}

const char* to_string(ServiceTag t) {
    return t == ServiceTag::exchange ? "exchange" : "gambling";
}

int64_t Transaction::input_total_sat() const {
    int64_t s = 0;
    for (const auto& i : inputs) s += i.value_sat;
    return s;
}

int64_t Transaction::output_total_sat() const {
    int64_t s = 0;
    for (const auto& o : outputs) s += o.value_sat;
    return s;
}

int64_t Transaction::fee_sat() const {
    if (is_coinbase) return 0;
    return input_total_sat() - output_total_sat();
}

void ServiceTagRegistry::insert(const Address& a, ServiceTag tag) {
    if (a.empty()) fail_data("service tag: empty address");
    if (is_reserved_address(a))
        fail_data("service tag: reserved address '" + a + "' cannot carry a tag");
    if (!map_.emplace(a, tag).second)
        fail_data("service tag: duplicate address '" + a + "'");
}

std::optional<ServiceTag> ServiceTagRegistry::lookup(const Address& a) const {
    auto it = map_.find(a);
    if (it == map_.end()) return std::nullopt;
    return it->second;
}

std::optional<TxIdx> ChainIndex::find_tx(std::string_view txid) const {
    auto it = by_txid_.find(std::string(txid));
    if (it == by_txid_.end()) return std::nullopt;
    return it->second;
}

const AddressOccurrences* ChainIndex::occurrences(const Address& a) const {
    auto it = by_address_.find(a);
    return it == by_address_.end() ? nullptr : &it->second;
}

TxIdx ChainIndex::first_tx_of(const Address& a) const {
    const AddressOccurrences* occ = occurrences(a);
    if (!occ) fail_data("unknown address '" + a + "'");
    TxIdx best = kNoTx;
    if (!occ->as_input.empty()) best = occ->as_input.front();
    if (!occ->as_output.empty() && (best == kNoTx || occ->as_output.front() < best))
        best = occ->as_output.front();
    return best;
}

std::optional<ChainPos> ChainIndex::first_occurrence(const Address& a) const {
    if (!has_address(a)) return std::nullopt;
    return pos(first_tx_of(a));
}

namespace {

[[noreturn]] void line_error(size_t lineno, const std::string& what) {
    fail_data("chain line " + std::to_string(lineno) + ": " + what);
}

int64_t require_nonneg_int(const json& v, const char* field, size_t lineno) {
    if (!v.is_number_integer())
        line_error(lineno, std::string(field) + " must be an integer");
    int64_t x = v.get<int64_t>();
    if (x < 0) line_error(lineno, std::string(field) + " is negative");
    return x;
}

void reject_unknown_fields(const json& obj, std::initializer_list<const char*> allowed,
                           size_t lineno, const char* where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) { ok = true; break; }
        if (!ok)
            line_error(lineno, std::string("unknown field '") + it.key() + "' in " + where);
    }
}

} // namespace

Transaction parse_chain_record(const std::string& line, size_t lineno) {
    json rec;
    try {
        rec = json::parse(line);
    } catch (const json::parse_error& e) {
        line_error(lineno, std::string("malformed record: ") + e.what());
    }
    if (!rec.is_object()) line_error(lineno, "record is not an object");
    reject_unknown_fields(rec, {"txid", "height", "index_in_block", "coinbase", "inputs", "outputs"},
                          lineno, "record");
    for (const char* k : {"txid", "height", "index_in_block", "coinbase", "inputs", "outputs"})
        if (!rec.contains(k)) line_error(lineno, std::string("missing field '") + k + "'");

    Transaction tx;
    if (!rec["txid"].is_string()) line_error(lineno, "txid must be a string");
    tx.txid = rec["txid"].get<std::string>();
    if (tx.txid.empty()) line_error(lineno, "txid is empty");
    if (tx.txid.find_first_not_of("0123456789abcdefABCDEF") != std::string::npos)
        line_error(lineno, "txid is not a hex string");
    tx.height = require_nonneg_int(rec["height"], "height", lineno);
    tx.index_in_block = static_cast<int32_t>(require_nonneg_int(rec["index_in_block"], "index_in_block", lineno));
    if (!rec["coinbase"].is_boolean()) line_error(lineno, "coinbase must be a boolean");
    tx.is_coinbase = rec["coinbase"].get<bool>();

    if (!rec["inputs"].is_array()) line_error(lineno, "inputs must be a list");
    for (const auto& in : rec["inputs"]) {
        if (!in.is_object()) line_error(lineno, "input is not an object");
        reject_unknown_fields(in, {"address", "value_sat"}, lineno, "input");
        if (!in.contains("address") || !in.contains("value_sat"))
            line_error(lineno, "input missing address or value_sat");
        if (!in["address"].is_string()) line_error(lineno, "input address must be a string");
        TxInput txin;
        txin.address = in["address"].get<std::string>();
        if (txin.address.empty()) line_error(lineno, "input address is empty");
        txin.value_sat = require_nonneg_int(in["value_sat"], "input value_sat", lineno);
        tx.inputs.push_back(std::move(txin));
    }

    if (!rec["outputs"].is_array()) line_error(lineno, "outputs must be a list");
    uint32_t pos = 0;
    for (const auto& out : rec["outputs"]) {
        if (!out.is_object()) line_error(lineno, "output is not an object");
        reject_unknown_fields(out, {"address", "value_sat", "kind"}, lineno, "output");
        for (const char* k : {"address", "value_sat", "kind"})
            if (!out.contains(k)) line_error(lineno, std::string("output missing '") + k + "'");
        TxOutput txout;
        txout.value_sat = require_nonneg_int(out["value_sat"], "output value_sat", lineno);
        if (!out["kind"].is_string()) line_error(lineno, "output kind must be a string");
        auto kind = output_kind_from_string(out["kind"].get<std::string>());
        if (!kind) line_error(lineno, "unknown output kind '" + out["kind"].get<std::string>() + "'");
        txout.kind = *kind;

        bool null_addr = out["address"].is_null();
        if (!null_addr && !out["address"].is_string())
            line_error(lineno, "output address must be a string or null");
        std::string addr = null_addr ? std::string() : out["address"].get<std::string>();
        if (!null_addr && addr.empty()) line_error(lineno, "output address is empty");

        // Normalization rules: OpReturn outputs all land on the "burn" sink;
        // non-standard scripts and null addresses each get a singleton dummy.
        if (txout.kind == TxOutputKind::opreturn) {
            txout.address = "burn";
        } else if (txout.kind == TxOutputKind::nonstandard || null_addr) {
            txout.address = "dummy:" + tx.txid + ":" + std::to_string(pos);
        } else {
            txout.address = std::move(addr);
        }
        tx.outputs.push_back(std::move(txout));
        ++pos;
    }

    if (tx.is_coinbase) {
        if (!tx.inputs.empty()) line_error(lineno, "coinbase transaction has inputs");
    } else {
        if (tx.output_total_sat() > tx.input_total_sat())
            line_error(lineno, "equilibrium violation: outputs (" +
                       std::to_string(tx.output_total_sat()) + " sat) exceed inputs (" +
                       std::to_string(tx.input_total_sat()) + " sat)");
    }
    return tx;
}

ChainIndex parse_chain(std::istream& in) {
    ChainIndex index;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        index.txs_.push_back(parse_chain_record(line, lineno));
    }

    std::stable_sort(index.txs_.begin(), index.txs_.end(),
                     [](const Transaction& a, const Transaction& b) {
                         return ChainPos{a.height, a.index_in_block} < ChainPos{b.height, b.index_in_block};
                     });

    index.by_txid_.reserve(index.txs_.size() * 2);
    for (TxIdx i = 0; i < index.txs_.size(); ++i) {
        const Transaction& tx = index.txs_[i];
        if (!index.by_txid_.emplace(tx.txid, i).second)
            fail_data("duplicate txid '" + tx.txid + "'");
        if (i > 0 && index.pos(i - 1) == index.pos(i))
            fail_data("duplicate chain position (height " + std::to_string(tx.height) +
                      ", index " + std::to_string(tx.index_in_block) + ") for txid '" + tx.txid + "'");
    }

    for (TxIdx i = 0; i < index.txs_.size(); ++i) {
        for (const auto& in_slot : index.txs_[i].inputs)
            index.by_address_[in_slot.address].as_input.push_back(i);
        for (const auto& out_slot : index.txs_[i].outputs)
            index.by_address_[out_slot.address].as_output.push_back(i);
    }

    // Spend linkage: earliest unspent output of the same address, preferring an
    // exact amount match.
    struct PoolEntry {
        TxIdx tx;
        uint32_t pos;
        int64_t amount;
        bool spent = false;
    };
    std::unordered_map<Address, std::deque<PoolEntry>> pools;
    index.funding_.resize(index.txs_.size());
    index.spenders_.resize(index.txs_.size());
    for (TxIdx i = 0; i < index.txs_.size(); ++i)
        index.spenders_[i].assign(index.txs_[i].outputs.size(), kNoTx);

    for (TxIdx i = 0; i < index.txs_.size(); ++i) {
        const Transaction& tx = index.txs_[i];
        auto& links = index.funding_[i];
        links.resize(tx.inputs.size());
        for (size_t s = 0; s < tx.inputs.size(); ++s) {
            const TxInput& in_slot = tx.inputs[s];
            auto pit = pools.find(in_slot.address);
            if (pit == pools.end()) continue;
            auto& pool = pit->second;
            PoolEntry* chosen = nullptr;
            for (auto& e : pool)
                if (!e.spent && e.amount == in_slot.value_sat) { chosen = &e; break; }
            if (!chosen)
                for (auto& e : pool)
                    if (!e.spent) { chosen = &e; break; }
            if (!chosen) continue;
            chosen->spent = true;
            links[s] = {chosen->tx, chosen->pos};
            index.spenders_[chosen->tx][chosen->pos] = i;
        }
        for (uint32_t o = 0; o < tx.outputs.size(); ++o)
            pools[tx.outputs[o].address].push_back({i, o, tx.outputs[o].value_sat, false});
    }
    return index;
}

void write_transaction(const Transaction& tx, std::ostream& out) {
    nlohmann::ordered_json rec;
    rec["txid"] = tx.txid;
    rec["height"] = tx.height;
    rec["index_in_block"] = tx.index_in_block;
    rec["coinbase"] = tx.is_coinbase;
    rec["inputs"] = nlohmann::ordered_json::array();
    for (const auto& in : tx.inputs)
        rec["inputs"].push_back({{"address", in.address}, {"value_sat", in.value_sat}});
    rec["outputs"] = nlohmann::ordered_json::array();
    for (const auto& o : tx.outputs)
        rec["outputs"].push_back(
            {{"address", o.address}, {"value_sat", o.value_sat}, {"kind", to_string(o.kind)}});
    out << rec.dump() << '\n';
}

void write_chain(const ChainIndex& index, std::ostream& out) {
    for (TxIdx i = 0; i < index.tx_count(); ++i)
        write_transaction(index.tx(i), out);
}

const Transaction& first_transaction_of(const ChainIndex& index, const Address& a) {
    return index.tx(index.first_tx_of(a));
}

ServiceTagRegistry load_service_tags(std::istream& in) {
    ServiceTagRegistry reg;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto comma = line.find(',');
        if (comma == std::string::npos)
            fail_data("service tags line " + std::to_string(lineno) + ": expected '<address>,<tag>'");
        std::string addr = line.substr(0, comma);
        std::string tag = line.substr(comma + 1);
        if (tag == "exchange") reg.insert(addr, ServiceTag::exchange);
        else if (tag == "gambling") reg.insert(addr, ServiceTag::gambling);
        else fail_data("service tags line " + std::to_string(lineno) + ": unknown tag '" + tag + "'");
    }
    return reg;
}

void write_service_tags(const ServiceTagRegistry& tags, std::ostream& out) {
    std::vector<std::pair<Address, ServiceTag>> rows(tags.all().begin(), tags.all().end());
    std::sort(rows.begin(), rows.end());
    for (const auto& [a, t] : rows) out << a << ',' << to_string(t) << '\n';
}

} // namespace btcactor
