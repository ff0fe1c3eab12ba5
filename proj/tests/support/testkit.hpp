#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string_view>
#include <vector>

#include "mevlens/chain_model.hpp"
#include "mevlens/cross_layer.hpp"
#include "mevlens/detectors.hpp"
#include "mevlens/event_encoding.hpp"
#include "mevlens/opportunity.hpp"

namespace testkit {

using namespace mevlens;

// Deterministic identities: a tag byte plus n, big-endian.
Address addr(std::uint64_t n, std::uint8_t tag = 0xa0);
Hash32 txh(std::uint64_t n, std::uint8_t tag = 0x70);

// Textbook Keccak-f[1600] (rho offsets and round constants derived, not tabled).
Hash32 reference_keccak(std::span<const std::uint8_t> data);
Hash32 reference_keccak(std::string_view text);

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}
    std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi);  // inclusive
    BigInt big(const BigInt& lo, const BigInt& hi);             // inclusive
    bool chance(double p);
    std::mt19937_64& engine() { return gen_; }

private:
    std::mt19937_64 gen_;
};

// Appends blocks, txs and logs in canonical order and assigns tx indexes and
// log indexes.
class DatasetBuilder {
public:
    explicit DatasetBuilder(ChainName chain, std::uint64_t tx_seed = 1);

    DatasetBuilder& block(std::uint64_t number, std::int64_t timestamp);
    // Adds a tx to the current block.
    TxRecord& tx(const Address& from, std::optional<Hash32> hash = std::nullopt);
    // Adds a log to the current tx.
    EventLog& log(const Hash32& topic, const FieldValues& fields, const Address& emitter);
    EventLog& log_data(const Hash32& topic, const FieldValues& fields, Bytes data, const Address& emitter);

    const ChainId& chain() const { return chain_; }
    LogPosition next_position() const;
    const TxRecord& current_tx() const { return txs_.back(); }
    ChainDataset build() const;

private:
    ChainId chain_;
    std::uint64_t tx_counter_;
    std::vector<BlockRecord> blocks_;
    std::vector<TxRecord> txs_;
    std::vector<EventLog> logs_;
    std::uint32_t next_log_ = 0;
};

// Topic hashes computed here from event signatures with the reference keccak.
namespace topics {
Hash32 uniswap_v2_swap();
Hash32 uniswap_v3_swap();
Hash32 balancer_v1_swap();
Hash32 balancer_v2_swap();
Hash32 curve_exchange();
Hash32 curve_exchange_underlying();
Hash32 aave_v1_liquidation();
Hash32 aave_v2_liquidation();
Hash32 compound_liquidate_borrow();
Hash32 compound_redeem();
Hash32 transfer();
Hash32 answer_updated();
Hash32 aave_v1_flashloan();
Hash32 aave_v2_flashloan();
Hash32 aave_v3_flashloan();
Hash32 balancer_flashloan();
Hash32 inbox_message_delivered();
Hash32 transaction_enqueued();
Hash32 transaction_deposited();
Hash32 redeem_scheduled();
Hash32 relayed_message();
Hash32 token_swap();
}  // namespace topics

// --- oracles ---------------------------------------------------------------

// Cycle decomposition by exhaustive enumeration: for the earliest unused swap,
// every increasing index sequence over unused swaps is tested and the
// lexicographically smallest valid one wins. Valid: consecutive swaps link,
// only the last swap returns to the seed's input token, length >= 2.
std::vector<std::vector<std::size_t>> brute_force_cycles(const std::vector<SwapAction>& swaps);

// Sandwiches by sliding every window of `window` blocks over the transfers and
// applying the pair predicate inside it.
struct SandwichKey {
    Hash32 front;
    Hash32 back;
    std::vector<Hash32> victims;
    auto operator<=>(const SandwichKey&) const = default;
};
std::vector<SandwichKey> sliding_window_sandwiches(const std::vector<TransferAction>& transfers,
                                                   std::uint64_t window);
std::vector<SandwichKey> keys_of(const std::vector<SandwichFinding>& findings);

// floor(R_out * a / (R_in + a)), a = floor(in * (den - num) / den), in rationals.
BigInt rational_cp_out(const BigInt& r_in, const BigInt& r_out, const BigInt& in, const BigInt& fee_num,
                       const BigInt& fee_den);

// Sign of Ann*S + D - Ann*D - D^(n+1)/(n^n prod x) evaluated exactly.
int stable_residual_sign(std::span<const BigInt> x, const BigInt& amp, const BigInt& D);

// Constant-product sandwich replayed with rational_cp_out.
struct GridPoint {
    BigInt x;
    BigInt profit;
    BigInt victim_out;
};
// Profit at every x in [0, limit] while the victim bound holds.
std::vector<GridPoint> brute_force_frontrun_grid(const BigInt& r_in, const BigInt& r_out, const BigInt& fee_num,
                                                 const BigInt& fee_den, const BigInt& victim_in,
                                                 const BigInt& min_out, const BigInt& limit);

// An arbitrage at `block` whose opportunity was created `distance` blocks
// earlier by a large swap on the cycle's first pool. Small swaps on the second
// pool sit between the two and leave the cycle profitable.
struct PlantedArbitrage {
    PoolDirectory pools;
    SnapshotStore state{&pools};
    ArbitrageFinding finding;
    std::vector<SwapAction> swaps;
    Hash32 opportunity_tx;
};
std::unique_ptr<PlantedArbitrage> plant_arbitrage(std::uint64_t distance, std::uint64_t block = 1000);

// Straight-line skeleton: drop the trailer when its declared length fits and
// it opens with a CBOR map header, then drop every PUSHn and its n operand bytes.
Bytes oracle_skeleton(const Bytes& code);

struct PlainStats {
    std::size_t count = 0;
    Rational min, max, mean, median, p90, total;
};
PlainStats sorted_stats(std::vector<Rational> values);

}  // namespace testkit
