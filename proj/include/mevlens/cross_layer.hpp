#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mevlens/amm.hpp"
#include "mevlens/event_decoding.hpp"
#include "mevlens/opportunity.hpp"
#include "mevlens/prices.hpp"
#include "mevlens/stats.hpp"

namespace mevlens {

struct CrossLayerLink {
    ChainId rollup;
    Hash32 l1_tx;
    Hash32 l2_tx;
    Bytes link_key;
    std::uint64_t l1_block = 0;
    std::uint64_t l2_block = 0;
    std::int64_t l1_timestamp = 0;
    std::int64_t l2_timestamp = 0;
    std::int64_t delay_s = 0;  // l2 - l1; negative values are anomalies

    bool anomalous() const { return delay_s < 0; }
};

struct VictimSwap {
    Address user;
    Address token_in;
    Address token_out;
    BigInt amount_in = 0;
    BigInt amount_out = 0;  // realized on L2
    // Taken from the victim's transaction record when present.
    std::optional<BigInt> min_amount_out;
};

struct VictimCandidate {
    CrossLayerLink link;
    Address pool;
    VictimSwap swap;
};

struct LinkDiagnostic {
    enum class Kind { unlinked_l1, unlinked_l2, duplicate_key, negative_delay };
    Kind kind = Kind::unlinked_l1;
    ChainId rollup;
    Bytes link_key;
    Hash32 tx;
};

std::string_view to_string(LinkDiagnostic::Kind k);

struct InferenceResult {
    std::vector<CrossLayerLink> links;
    std::vector<VictimCandidate> victims;
    std::vector<LinkDiagnostic> diagnostics;
};

// Joins the rollup's L1 bridge emissions with its L2 executions on link key,
// then looks for a swap inside each linked L2 transaction: two transfers of
// different token contracts with sender and receiver swapped. A StableSwap
// TokenSwap or Uniswap V3 Swap in the same transaction fixes the pool.
// zkSync executions are the L2 transactions whose hash equals the L1 one.
InferenceResult infer_victims(const ChainDataset& l1, const ChainDataset& l2,
                              const TopicRegistry& registry = TopicRegistry::builtin());

struct DelayStats {
    std::size_t count = 0;
    std::int64_t min = 0;
    std::int64_t max = 0;
    Rational mean = 0;
    Rational median = 0;
};

class EmptyInput : public Error {
public:
    using Error::Error;
};

// Over links with non-negative delay; throws EmptyInput when none remain.
DelayStats delay_stats(std::span<const CrossLayerLink> links);
// Keyed by the UTC month of the L1 timestamp.
std::map<std::string, DelayStats> delay_stats_by_month(std::span<const CrossLayerLink> links);

enum class Strategy { s1, s2, s3 };
std::string_view to_string(Strategy s);
inline constexpr Strategy all_strategies[] = {Strategy::s1, Strategy::s2, Strategy::s3};

struct CostModel {
    Rational l1_tx_cost_eth{BigInt(2), BigInt(1000)};
    Rational l2_tx_cost_eth{BigInt(1), BigInt(10000)};
    Rational bribe_eth{BigInt(1), BigInt(1000)};
};

struct AttackConfig {
    CostModel costs;
    std::int64_t reaction_time_s = 30;
    // nullopt is the unbounded tier.
    std::vector<std::optional<Rational>> capital_tiers_usd{Rational(1000), Rational(10000), Rational(100000),
                                                           Rational(1000000), std::nullopt};
    // Victim tolerance assumed when its transaction carries no bound.
    Rational slippage_fallback{BigInt(2), BigInt(100)};
};

class Infeasible : public Error {
public:
    using Error::Error;
};

struct AttackScenario {
    Strategy strategy = Strategy::s1;
    VictimCandidate victim;
    PoolState pool;  // state the victim's swap executes against
    CostModel costs;
    std::optional<Rational> capital_eth;  // nullopt = unbounded
    Rational token_in_price_eth = 0;      // ETH per smallest unit of the victim's input token
    std::int64_t reaction_time_s = 30;
    Rational slippage_fallback{BigInt(2), BigInt(100)};
};

// Token-unit outcome of a frontrun of size x.
struct SandwichOutcome {
    BigInt frontrun_out = 0;  // token_out bought
    BigInt victim_out = 0;
    BigInt backrun_out = 0;  // token_in recovered
    BigInt profit = 0;       // backrun_out - x
};

SandwichOutcome sandwich_outcome(const PoolState& pool, const VictimSwap& victim, const BigInt& x);

// The bound the victim enforces, falling back to the assumed tolerance on the
// untouched quote.
BigInt effective_min_out(const AttackScenario& scenario);

struct FrontrunSearch {
    BigInt optimal_input = 0;
    BigInt x_max = 0;
    SandwichOutcome outcome;
};

// Ternary search on the rounding-free profit curve, then an exact scan of the
// integer sizes whose profit could still reach the best one seen, plus both
// endpoints. Ties go to the smaller size. The scan is exact whenever that band
// holds at most 65536 sizes. Throws Infeasible when the victim's bound fails
// even without a frontrun.
FrontrunSearch optimal_frontrun(const AttackScenario& scenario);

struct AttackResult {
    Strategy strategy = Strategy::s1;
    BigInt optimal_input = 0;
    Rational gross_gain_eth = 0;
    Rational total_cost_eth = 0;
    Rational profit_eth = 0;
    bool profitable = false;
};

Rational strategy_cost(Strategy s, const CostModel& costs);
AttackResult simulate_strategy(const AttackScenario& scenario);

// One victim prepared for the sweep.
struct SweepVictim {
    VictimCandidate victim;
    PoolState pool;
    Rational token_in_price_eth = 0;
    Rational eth_usd = 0;
};

struct TierResult {
    Strategy strategy = Strategy::s1;
    std::optional<Rational> capital_usd;
    std::size_t evaluated = 0;
    std::size_t infeasible = 0;
    std::size_t profitable = 0;
    std::vector<Rational> profits_usd;  // profitable victims only
    // Net profit per victim in input order; nullopt where infeasible.
    std::vector<std::optional<Rational>> victim_profit_eth;
    std::optional<Summary> summary;
};

std::vector<TierResult> capital_sweep(std::span<const SweepVictim> victims, const AttackConfig& config);

// Builds sweep inputs: pool state just before the L2 block, prices on the L1
// emission day. Victims lacking any input are returned in `skipped` with a reason.
struct SweepPreparation {
    std::vector<SweepVictim> ready;
    std::vector<std::pair<VictimCandidate, std::string>> skipped;
};
SweepPreparation prepare_sweep(std::span<const VictimCandidate> victims, const StateProvider& state,
                               const PriceProvider& prices);

}  // namespace mevlens
