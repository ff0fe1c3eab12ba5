#pragma once

#include <map>
#include <span>
#include <vector>

#include "mevlens/event_decoding.hpp"
#include "mevlens/prices.hpp"

namespace mevlens {

// Typed actions of a log range, each list in log order.
struct DecodedActions {
    std::vector<SwapAction> swaps;
    std::vector<TransferAction> transfers;
    std::vector<LiquidationAction> liquidations;
    std::vector<RedeemAction> redeems;
    std::vector<FlashLoanAction> flash_loans;
    std::vector<OracleUpdateAction> oracle_updates;
    std::size_t skipped = 0;  // logs with a known topic that failed to decode
};

DecodedActions decode_actions(std::span<const EventLog> logs, const PoolDirectory* pools,
                              const TopicRegistry& registry = TopicRegistry::builtin());

struct ProfitAccount {
    Rational gain_eth = 0;
    Rational cost_eth = 0;
    Rational profit_eth = 0;
    bool unpriced = false;
};

struct ArbitrageFinding {
    Hash32 tx_hash;
    TxPosition position;
    Address extractor;
    std::vector<SwapAction> cycle;
    std::map<Address, BigInt> token_balances;  // extractor's view
    ProfitAccount profit;
    std::vector<FlashLoanAction> flash_loans;
};

struct LiquidationFinding {
    Hash32 tx_hash;
    TxPosition position;
    Address extractor;
    std::vector<LiquidationAction> actions;
    bool unredeemed = false;  // some Compound liquidation found no Redeem
    ProfitAccount profit;
    std::vector<FlashLoanAction> flash_loans;
};

struct SandwichFinding {
    Hash32 front_tx;
    Hash32 back_tx;
    std::vector<Hash32> victim_txs;
    TxPosition front_position;
    TxPosition back_position;
    Address token;
    Address attacker;
    Address extractor;  // sender of the front transaction
    ProfitAccount profit;
    std::vector<FlashLoanAction> flash_loans;

    std::uint64_t first_block() const { return front_position.block; }
    std::uint64_t last_block() const { return back_position.block; }
};

// token_out(a) = token_in(b), amount_out(a) >= amount_in(b), venue(a) != venue(b).
bool swaps_link(const SwapAction& a, const SwapAction& b);

// Cycles of one transaction's swaps (log order), as index sequences.
// The earliest unconsumed swap seeds a depth-first search over later swaps,
// earliest candidate first; the first chain whose last token_out returns to
// the seed's token_in is emitted and its swaps consumed. A seed without any
// cycle is dropped. `budget` caps search expansions per seed.
std::vector<std::vector<std::size_t>> find_cycles(std::span<const SwapAction> swaps,
                                                  std::size_t budget = 1'000'000);

// Swaps of many transactions in log order; one finding per cycle.
std::vector<ArbitrageFinding> detect_arbitrages(std::span<const SwapAction> swaps);

// Net token balances of a cycle: amounts entering a pool are deducted, amounts
// leaving it are added.
std::map<Address, BigInt> cycle_balances(std::span<const SwapAction> cycle);

// `charge_tx_costs` deducts the tx fee and builder payment; set it for one
// finding per transaction only.
ProfitAccount arbitrage_profit(const ArbitrageFinding& finding, const PriceProvider& prices, const TxRecord& tx,
                               std::int64_t day, bool charge_tx_costs = true);

// One finding per transaction holding liquidation events. A Compound
// liquidation takes its collateral amount from the first unmatched Redeem
// that follows it in the same transaction.
std::vector<LiquidationFinding> detect_liquidations(std::span<const LiquidationAction> liquidations,
                                                    std::span<const RedeemAction> redeems);

// Sum of (collateral value - debt value); an unredeemed Compound action
// contributes only its negative debt value.
ProfitAccount liquidation_profit(const LiquidationFinding& finding, const PriceProvider& prices, const TxRecord& tx,
                                 std::int64_t day, bool charge_tx_costs = true);

// L1 chains search each block on its own; rollups search pairs whose blocks
// lie within `window` consecutive blocks. Findings are sorted by front then
// back position and unique per (front_tx, back_tx).
std::vector<SandwichFinding> detect_sandwiches(std::span<const TransferAction> transfers, const ChainId& chain,
                                               std::uint64_t window = 100);
std::vector<SandwichFinding> detect_sandwiches_per_block(std::span<const TransferAction> transfers);
// Only front transfers with block in [a1_from, a1_to] seed pairs.
std::vector<SandwichFinding> detect_sandwiches_windowed(std::span<const TransferAction> transfers,
                                                        std::uint64_t window,
                                                        std::uint64_t a1_from = 0,
                                                        std::uint64_t a1_to = UINT64_MAX);

// The attacker's net token flow over the front and back transactions, minus
// both transactions' fees and builder payments.
ProfitAccount sandwich_profit(const SandwichFinding& finding, std::span<const TransferAction> transfers,
                              const PriceProvider& prices, const TxRecord& front, const TxRecord& back,
                              std::int64_t day);

std::vector<FlashLoanAction> flash_loans_of(const Hash32& tx, std::span<const FlashLoanAction> loans);

template <typename Finding>
void attribute_flash_loans(Finding& finding, std::span<const FlashLoanAction> loans)
{
    finding.flash_loans = flash_loans_of(finding.tx_hash, loans);
}

inline void attribute_flash_loans(SandwichFinding& finding, std::span<const FlashLoanAction> loans)
{
    finding.flash_loans = flash_loans_of(finding.front_tx, loans);
    for (auto& l : flash_loans_of(finding.back_tx, loans))
        finding.flash_loans.push_back(std::move(l));
}

}  // namespace mevlens
