#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mevlens/amm.hpp"
#include "mevlens/bytecode.hpp"
#include "mevlens/chain_model.hpp"
#include "mevlens/event_encoding.hpp"
#include "mevlens/opportunity.hpp"

// Synthetic chains with planted MEV and their ground truth.
namespace mevlens::synth {

using Json = nlohmann::ordered_json;

Address make_address(std::uint8_t tag, std::uint64_t n);
Hash32 make_hash(std::uint8_t tag, std::uint64_t n);

// Topic of a builtin registry entry; throws when absent.
Hash32 topic_of(std::string_view protocol, std::string_view event);

class Random {
public:
    explicit Random(std::uint64_t seed) : gen_(seed) {}
    std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi);  // inclusive
    bool chance(double p);

private:
    std::mt19937_64 gen_;
};

// Appends blocks, transactions and logs in canonical order.
class ChainWriter {
public:
    ChainWriter(ChainName chain, std::uint8_t hash_tag);

    void block(std::uint64_t number, std::int64_t timestamp);
    TxRecord& tx(const Address& from, std::optional<Hash32> hash = std::nullopt);
    const EventLog& log(const Hash32& topic, const FieldValues& fields, const Address& emitter);
    const EventLog& log_data(const Hash32& topic, const FieldValues& fields, Bytes data, const Address& emitter);

    const ChainId& chain() const { return chain_; }
    std::uint64_t current_block() const { return blocks_.back().number; }
    std::int64_t current_timestamp() const { return blocks_.back().timestamp; }
    const TxRecord& current_tx() const { return txs_.back(); }
    std::size_t log_count() const { return logs_.size(); }
    ChainDataset build() const;

private:
    ChainId chain_;
    std::uint8_t tag_;
    std::uint64_t counter_ = 1;
    std::vector<BlockRecord> blocks_;
    std::vector<TxRecord> txs_;
    std::vector<EventLog> logs_;
    std::uint32_t next_log_ = 0;

    LogPosition next_position() const;
};

// Which event a pool emits for its swaps.
enum class Venue { uniswap_v2, uniswap_v3, balancer_v1, balancer_v2, curve, stableswap };

// Pools with live reserves. Swaps are priced with the library AMM math, logged
// in the venue's event layout, and snapshotted at the end of each block.
class Market {
public:
    Address add_pool(Venue venue, std::vector<Address> tokens, std::vector<BigInt> reserves,
                     std::uint64_t genesis_block);
    const PoolState& state(const Address& pool) const { return pools_.at(pool).state; }
    BigInt quote(const Address& pool, const Address& token_in, const Address& token_out, const BigInt& amount) const;
    // Executes and logs the swap in the writer's current tx; returns amount out.
    BigInt swap(ChainWriter& w, const Address& pool, const Address& token_in, const Address& token_out,
                const BigInt& amount, const Address& trader);
    // Records the end-of-block state of every pool touched since the last call.
    void end_block(std::uint64_t block);

    const PoolDirectory& directory() const { return directory_; }
    SnapshotStore& snapshots() { return snapshots_; }
    const SnapshotStore& snapshots() const { return snapshots_; }

private:
    struct Live {
        Venue venue;
        PoolState state;
    };
    std::map<Address, Live> pools_;
    std::vector<Address> touched_;
    PoolDirectory directory_;
    SnapshotStore snapshots_;
    std::uint64_t next_pool_ = 1;
};

// Everything a fixture directory holds.
struct Fixture {
    std::map<ChainName, ChainDataset> chains;
    PoolDirectory pools;
    std::string prices_csv;
    std::string snapshots_jsonl;
    std::string bytecode_jsonl;
    Json config;
    Json ground_truth;
};

// Ethereum MEV (25 planted arbitrage cycles, liquidations, sandwiches, flash
// loans), the 30-link cross-layer set over three rollups, and a bytecode corpus.
Fixture make_demo_fixture(std::uint64_t seed = 7);

// 50 Arbitrum bridge victims with pools, snapshots and prices for the attack sweep.
Fixture make_attack_fixture(std::uint64_t seed = 11);

// About `target_logs` logs of random swaps, cycles and transfers on Ethereum.
Fixture make_bulk_fixture(std::uint64_t seed, std::size_t target_logs);

std::vector<BytecodeRecord> make_bytecode_corpus(std::uint64_t seed);
std::string bytecode_jsonl(const std::vector<BytecodeRecord>& records);

// Writes <chain>.jsonl, pools.json, prices.csv, snapshots.jsonl, bytecode.jsonl,
// config.json and ground_truth.json for the parts that are present.
void write_fixture(const Fixture& fixture, const std::filesystem::path& dir);

}  // namespace mevlens::synth
