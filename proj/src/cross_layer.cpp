#include "mevlens/cross_layer.hpp"

#include <algorithm>
#include <unordered_map>

namespace mevlens {

namespace {

struct KeyHash {
    std::size_t operator()(const Bytes& b) const noexcept
    {
        std::size_t h = 1469598103934665603ull;
        for (auto c : b)
            h = (h ^ c) * 1099511628211ull;
        return h;
    }
};

struct Execution {
    Hash32 tx;
    std::uint64_t block = 0;
    std::int64_t timestamp = 0;
    bool matched = false;
};

// First pair of transfers in log order that moves two different tokens
// between the same two parties in opposite directions.
std::optional<std::pair<const TransferAction*, const TransferAction*>> swapped_pair(
    const std::vector<TransferAction>& transfers)
{
    for (std::size_t i = 0; i < transfers.size(); ++i) {
        const auto& a = transfers[i];
        if (a.sender == a.receiver)
            continue;
        for (std::size_t j = i + 1; j < transfers.size(); ++j) {
            const auto& b = transfers[j];
            if (a.token != b.token && a.sender == b.receiver && a.receiver == b.sender)
                return std::make_pair(&a, &b);
        }
    }
    return std::nullopt;
}

std::optional<VictimCandidate> victim_in(const CrossLayerLink& link, const std::vector<const EventLog*>& logs,
                                         const TxRecord* l2_tx, const TxRecord* l1_tx,
                                         const TopicRegistry& registry)
{
    std::vector<TransferAction> transfers;
    std::optional<Address> swap_pool;
    for (const EventLog* log : logs) {
        if (log->topics.empty())
            continue;
        const RegistryEntry* e = registry.lookup(log->topics[0]);
        if (!e || !e->has(Category::victim_inference))
            continue;
        try {
            if (auto t = decode_transfer(*log, registry)) {
                transfers.push_back(std::move(*t));
            } else if (!swap_pool && (e->schema.find("amount_in") || e->schema.find("amount0"))) {
                swap_pool = log->address;
            }
        } catch (const SchemaMismatch&) {
        }
    }
    auto pair = swapped_pair(transfers);
    if (!pair)
        return std::nullopt;
    const TransferAction* in = pair->first;
    const TransferAction* out = pair->second;
    if (swap_pool && out->receiver == *swap_pool && in->receiver != *swap_pool)
        std::swap(in, out);

    VictimCandidate c;
    c.link = link;
    c.pool = swap_pool.value_or(in->receiver);
    c.swap.user = in->sender;
    c.swap.token_in = in->token;
    c.swap.token_out = out->token;
    c.swap.amount_in = in->amount;
    c.swap.amount_out = out->amount;
    if (l2_tx && l2_tx->min_amount_out)
        c.swap.min_amount_out = l2_tx->min_amount_out;
    else if (l1_tx && l1_tx->min_amount_out)
        c.swap.min_amount_out = l1_tx->min_amount_out;
    return c;
}

}  // namespace

std::string_view to_string(LinkDiagnostic::Kind k)
{
    switch (k) {
    case LinkDiagnostic::Kind::unlinked_l1: return "unlinked_l1";
    case LinkDiagnostic::Kind::unlinked_l2: return "unlinked_l2";
    case LinkDiagnostic::Kind::duplicate_key: return "duplicate_key";
    case LinkDiagnostic::Kind::negative_delay: return "negative_delay";
    }
    return "unknown";
}

InferenceResult infer_victims(const ChainDataset& l1, const ChainDataset& l2, const TopicRegistry& registry)
{
    InferenceResult result;
    if (!l2.chain() || l2.chain()->layer != Layer::l2)
        return result;
    const ChainId rollup = *l2.chain();

    std::unordered_map<Bytes, Execution, KeyHash> executions;
    std::vector<Bytes> execution_order;
    auto add_execution = [&](Bytes key, Execution e) {
        if (executions.count(key)) {
            result.diagnostics.push_back({LinkDiagnostic::Kind::duplicate_key, rollup, key, e.tx});
            return;
        }
        execution_order.push_back(key);
        executions.emplace(std::move(key), e);
    };
    if (rollup.name == ChainName::zksync) {
        for (const auto& tx : l2.txs())
            add_execution(Bytes(tx.hash.bytes.begin(), tx.hash.bytes.end()),
                          {tx.hash, tx.block_number, l2.block_timestamp(tx.block_number).value_or(0)});
    } else {
        for (const auto& log : l2.logs()) {
            std::optional<BridgeMessageAction> a;
            try {
                a = decode_bridge_message(log, 0, registry);
            } catch (const SchemaMismatch&) {
                continue;
            }
            if (!a || a->direction != BridgeDirection::l2_execute || a->rollup.name != rollup.name)
                continue;
            add_execution(std::move(a->link_key),
                          {log.tx_hash, log.block_number, l2.block_timestamp(log.block_number).value_or(0)});
        }
    }

    std::unordered_map<Hash32, std::vector<const EventLog*>> l2_logs_by_tx;
    for (const auto& log : l2.logs())
        l2_logs_by_tx[log.tx_hash].push_back(&log);

    std::unordered_map<Bytes, bool, KeyHash> seen_l1;
    for (const auto& log : l1.logs()) {
        std::optional<BridgeMessageAction> a;
        try {
            a = decode_bridge_message(log, l1.block_timestamp(log.block_number).value_or(0), registry);
        } catch (const SchemaMismatch&) {
            continue;
        }
        if (!a || a->direction != BridgeDirection::l1_emit || a->rollup.name != rollup.name)
            continue;
        if (seen_l1.count(a->link_key)) {
            result.diagnostics.push_back({LinkDiagnostic::Kind::duplicate_key, rollup, a->link_key, log.tx_hash});
            continue;
        }
        seen_l1.emplace(a->link_key, true);
        auto it = executions.find(a->link_key);
        if (it == executions.end()) {
            result.diagnostics.push_back({LinkDiagnostic::Kind::unlinked_l1, rollup, a->link_key, log.tx_hash});
            continue;
        }
        it->second.matched = true;
        CrossLayerLink link;
        link.rollup = rollup;
        link.l1_tx = log.tx_hash;
        link.l2_tx = it->second.tx;
        link.link_key = a->link_key;
        link.l1_block = log.block_number;
        link.l2_block = it->second.block;
        link.l1_timestamp = a->timestamp;
        link.l2_timestamp = it->second.timestamp;
        link.delay_s = link.l2_timestamp - link.l1_timestamp;
        if (link.anomalous())
            result.diagnostics.push_back({LinkDiagnostic::Kind::negative_delay, rollup, link.link_key, link.l2_tx});
        result.links.push_back(link);

        auto logs_it = l2_logs_by_tx.find(link.l2_tx);
        if (logs_it != l2_logs_by_tx.end()) {
            if (auto v = victim_in(link, logs_it->second, l2.find_tx(link.l2_tx), l1.find_tx(link.l1_tx), registry))
                result.victims.push_back(std::move(*v));
        }
    }
    for (const auto& key : execution_order) {
        const auto& e = executions.at(key);
        if (!e.matched && rollup.name != ChainName::zksync)
            result.diagnostics.push_back({LinkDiagnostic::Kind::unlinked_l2, rollup, key, e.tx});
    }
    return result;
}

DelayStats delay_stats(std::span<const CrossLayerLink> links)
{
    std::vector<std::int64_t> d;
    for (const auto& l : links)
        if (!l.anomalous())
            d.push_back(l.delay_s);
    if (d.empty())
        throw EmptyInput("delay_stats needs at least one link with non-negative delay");
    std::sort(d.begin(), d.end());
    DelayStats s;
    s.count = d.size();
    s.min = d.front();
    s.max = d.back();
    BigInt total = 0;
    for (auto x : d)
        total += x;
    s.mean = Rational(total, BigInt(d.size()));
    const std::size_t mid = d.size() / 2;
    s.median = d.size() % 2 ? Rational(d[mid]) : Rational(BigInt(d[mid - 1]) + d[mid], BigInt(2));
    return s;
}

std::map<std::string, DelayStats> delay_stats_by_month(std::span<const CrossLayerLink> links)
{
    std::map<std::string, std::vector<CrossLayerLink>> by_month;
    for (const auto& l : links)
        if (!l.anomalous())
            by_month[utc_month(l.l1_timestamp)].push_back(l);
    std::map<std::string, DelayStats> out;
    for (const auto& [month, list] : by_month)
        out.emplace(month, delay_stats(list));
    return out;
}

std::string_view to_string(Strategy s)
{
    switch (s) {
    case Strategy::s1: return "S1";
    case Strategy::s2: return "S2";
    case Strategy::s3: return "S3";
    }
    return "unknown";
}

namespace {

struct Trade {
    BigInt out = 0;
    PoolState state;
};

// A swap that yields nothing still leaves its input in the pool.
Trade trade(const PoolState& pool, const Address& in, const Address& out, const BigInt& amount)
{
    if (amount <= 0)
        return {0, pool};
    try {
        SwapQuote q = swap_out(pool, in, out, amount);
        return {q.amount_out, std::move(q.post_state)};
    } catch (const DrainedPool&) {
        PoolState next = pool;
        next.reserves[next.index_of(in)] += amount;
        return {0, std::move(next)};
    }
}

BigInt floor_div(const Rational& r)
{
    BigInt num = boost::multiprecision::numerator(r);
    BigInt den = boost::multiprecision::denominator(r);
    BigInt q = num / den;
    if (num < 0 && q * den != num)
        --q;
    return q;
}

}  // namespace

SandwichOutcome sandwich_outcome(const PoolState& pool, const VictimSwap& victim, const BigInt& x)
{
    SandwichOutcome o;
    Trade front = trade(pool, victim.token_in, victim.token_out, x);
    Trade mid = trade(front.state, victim.token_in, victim.token_out, victim.amount_in);
    Trade back = trade(mid.state, victim.token_out, victim.token_in, front.out);
    o.frontrun_out = front.out;
    o.victim_out = mid.out;
    o.backrun_out = back.out;
    o.profit = back.out - x;
    return o;
}

BigInt effective_min_out(const AttackScenario& scenario)
{
    const VictimSwap& v = scenario.victim.swap;
    if (v.min_amount_out)
        return *v.min_amount_out;
    const BigInt quote = trade(scenario.pool, v.token_in, v.token_out, v.amount_in).out;
    return floor_div(Rational(quote) * (Rational(1) - scenario.slippage_fallback));
}

FrontrunSearch optimal_frontrun(const AttackScenario& scenario)
{
    const VictimSwap& v = scenario.victim.swap;
    const BigInt min_out = effective_min_out(scenario);
    auto victim_out = [&](const BigInt& x) { return sandwich_outcome(scenario.pool, v, x).victim_out; };
    if (victim_out(0) < min_out)
        throw Infeasible("victim bound already violated without a frontrun");

    static const BigInt limit = BigInt(1) << 256;
    BigInt cap = limit;
    if (scenario.capital_eth && scenario.token_in_price_eth > 0)
        cap = std::min(cap, floor_div(*scenario.capital_eth / scenario.token_in_price_eth));
    if (cap < 0)
        cap = 0;
    auto feasible = [&](const BigInt& x) { return x <= cap && victim_out(x) >= min_out; };

    // Largest feasible x: feasibility is monotone since a larger frontrun
    // never improves the victim's price.
    BigInt lo = 0;
    BigInt hi = 1;
    while (hi <= limit && feasible(hi)) {
        lo = hi;
        hi *= 2;
    }
    while (hi - lo > 1) {
        BigInt mid = (lo + hi) / 2;
        if (feasible(mid))
            lo = mid;
        else
            hi = mid;
    }
    const BigInt x_max = lo;

    // Integer profit is the smooth profit plus rounding noise, so it is not
    // unimodal. The smooth curve is the same replay on a pool scaled by K, which
    // pushes every floor below 1/K of a unit. Ternary search runs on that curve,
    // then every x whose smooth profit is within the rounding bound of the best
    // integer profit seen is scanned exactly.
    static const BigInt K = BigInt(1) << 64;
    PoolState scaled_pool = scenario.pool;
    for (BigInt& r : scaled_pool.reserves)
        r *= K;
    VictimSwap scaled_victim = v;
    scaled_victim.amount_in *= K;
    auto smooth = [&](const BigInt& x) { return sandwich_outcome(scaled_pool, scaled_victim, x * K).profit; };

    BigInt a = 0;
    BigInt b = x_max;
    while (b - a > 2) {
        const BigInt third = (b - a) / 3;
        const BigInt m1 = a + third;
        const BigInt m2 = b - third;
        if (smooth(m1) < smooth(m2))
            a = m1 + 1;
        else
            b = m2;
    }
    BigInt peak = a;
    for (BigInt x = a + 1; x <= b; ++x)
        if (smooth(x) > smooth(peak))
            peak = x;

    // One unit of token_out is worth at most `ratio` units of token_in over
    // the whole replay; each of the few floors moves profit by about that much.
    const auto at_max = sandwich_outcome(scenario.pool, v, x_max);
    const std::size_t in = scenario.pool.index_of(v.token_in);
    const std::size_t out = scenario.pool.index_of(v.token_out);
    const BigInt out_left = scenario.pool.reserves[out] - at_max.frontrun_out - at_max.victim_out;
    const BigInt ratio = (scenario.pool.reserves[in] + x_max + v.amount_in) / (out_left > 0 ? out_left : BigInt(1)) + 1;
    const BigInt noise = 4 * (ratio + 2);

    const BigInt floor_profit = std::max(BigInt(0), sandwich_outcome(scenario.pool, v, peak).profit);
    const BigInt threshold = (floor_profit - noise) * K;
    // Smooth profit rises up to the peak and falls after it.
    BigInt lo_edge = 0;
    for (BigInt l = 0, h = peak; l < h;) {
        const BigInt mid = (l + h) / 2;
        if (smooth(mid) >= threshold)
            h = mid;
        else
            l = mid + 1;
        lo_edge = l;
    }
    BigInt hi_edge = peak;
    for (BigInt l = peak, h = x_max; l < h;) {
        const BigInt mid = (l + h + 1) / 2;
        if (smooth(mid) >= threshold)
            l = mid;
        else
            h = mid - 1;
        hi_edge = l;
    }
    lo_edge = lo_edge > 0 ? lo_edge - 1 : lo_edge;
    hi_edge = hi_edge < x_max ? hi_edge + 1 : hi_edge;
    // Very deep pools make the band astronomically wide while the noise stays a
    // few units; past the budget the scan keeps to a window around the peak.
    static const BigInt budget = BigInt(1) << 16;
    if (hi_edge - lo_edge + 1 > budget) {
        lo_edge = std::max(lo_edge, BigInt(peak - budget / 2));
        hi_edge = std::min(hi_edge, BigInt(lo_edge + budget - 1));
    }

    FrontrunSearch best;
    best.x_max = x_max;
    bool have = false;
    auto consider = [&](const BigInt& x) {
        SandwichOutcome o = sandwich_outcome(scenario.pool, v, x);
        if (!have || o.profit > best.outcome.profit || (o.profit == best.outcome.profit && x < best.optimal_input)) {
            best.optimal_input = x;
            best.outcome = o;
            have = true;
        }
    };
    for (BigInt x = lo_edge; x <= hi_edge; ++x)
        consider(x);
    consider(0);
    consider(x_max);
    if (best.outcome.victim_out < min_out)
        throw InvariantViolation("frontrun search returned a size that breaks the victim's bound");
    return best;
}

Rational strategy_cost(Strategy s, const CostModel& c)
{
    switch (s) {
    case Strategy::s1: return 2 * c.l1_tx_cost_eth + c.bribe_eth;
    case Strategy::s2: return c.l1_tx_cost_eth + c.l2_tx_cost_eth;
    case Strategy::s3: return 2 * c.l2_tx_cost_eth;
    }
    return 0;
}

namespace {

AttackResult settle_strategy(Strategy s, const AttackScenario& scenario, const FrontrunSearch& search)
{
    if (s == Strategy::s3 && scenario.victim.link.delay_s < scenario.reaction_time_s)
        throw Infeasible("inclusion delay shorter than the reaction time");
    AttackResult r;
    r.strategy = s;
    r.optimal_input = search.optimal_input;
    r.gross_gain_eth = Rational(search.outcome.profit) * scenario.token_in_price_eth;
    r.total_cost_eth = strategy_cost(s, scenario.costs);
    r.profit_eth = r.gross_gain_eth - r.total_cost_eth;
    r.profitable = r.profit_eth > 0;
    return r;
}

}  // namespace

AttackResult simulate_strategy(const AttackScenario& scenario)
{
    return settle_strategy(scenario.strategy, scenario, optimal_frontrun(scenario));
}

std::vector<TierResult> capital_sweep(std::span<const SweepVictim> victims, const AttackConfig& config)
{
    std::vector<TierResult> table;
    for (auto s : all_strategies)
        for (const auto& tier : config.capital_tiers_usd) {
            TierResult t;
            t.strategy = s;
            t.capital_usd = tier;
            table.push_back(std::move(t));
        }

    for (const auto& sv : victims) {
        // A tier whose cap admits the uncapped x_max has the uncapped answer.
        std::optional<std::optional<FrontrunSearch>> uncapped;
        for (std::size_t k = 0; k < config.capital_tiers_usd.size(); ++k) {
            const auto& tier = config.capital_tiers_usd[k];
            AttackScenario sc;
            sc.victim = sv.victim;
            sc.pool = sv.pool;
            sc.costs = config.costs;
            sc.token_in_price_eth = sv.token_in_price_eth;
            sc.reaction_time_s = config.reaction_time_s;
            sc.slippage_fallback = config.slippage_fallback;
            if (tier) {
                if (sv.eth_usd <= 0)
                    throw Error("capital tiers need a positive ETH/USD price");
                sc.capital_eth = *tier / sv.eth_usd;
            }
            auto run = [](const AttackScenario& scenario) -> std::optional<FrontrunSearch> {
                try {
                    return optimal_frontrun(scenario);
                } catch (const Infeasible&) {
                    return std::nullopt;
                }
            };
            if (!uncapped) {
                AttackScenario free = sc;
                free.capital_eth.reset();
                uncapped = run(free);
            }
            std::optional<FrontrunSearch> search;
            if (!*uncapped)
                search = std::nullopt;  // infeasibility does not depend on capital
            else if (!sc.capital_eth || sc.token_in_price_eth <= 0 ||
                     floor_div(*sc.capital_eth / sc.token_in_price_eth) >= (*uncapped)->x_max)
                search = *uncapped;
            else
                search = run(sc);
            for (std::size_t si = 0; si < std::size(all_strategies); ++si) {
                TierResult& t = table[si * config.capital_tiers_usd.size() + k];
                ++t.evaluated;
                if (!search) {
                    ++t.infeasible;
                    t.victim_profit_eth.emplace_back();
                    continue;
                }
                try {
                    AttackResult r = settle_strategy(all_strategies[si], sc, *search);
                    t.victim_profit_eth.emplace_back(r.profit_eth);
                    if (r.profitable) {
                        ++t.profitable;
                        t.profits_usd.push_back(r.profit_eth * sv.eth_usd);
                    }
                } catch (const Infeasible&) {
                    ++t.infeasible;
                    t.victim_profit_eth.emplace_back();
                }
            }
        }
    }
    for (auto& t : table)
        t.summary = summarize(t.profits_usd);
    return table;
}

SweepPreparation prepare_sweep(std::span<const VictimCandidate> victims, const StateProvider& state,
                               const PriceProvider& prices)
{
    SweepPreparation prep;
    for (const auto& v : victims) {
        if (v.link.l2_block == 0) {
            prep.skipped.emplace_back(v, "victim in the first L2 block has no prior pool state");
            continue;
        }
        auto pool = state.pool_state(v.pool, v.link.l2_block - 1);
        if (!pool) {
            prep.skipped.emplace_back(v, "no pool state for " + to_hex(v.pool));
            continue;
        }
        const std::int64_t day = unix_day(v.link.l1_timestamp);
        auto price = prices.price_eth(v.swap.token_in, day);
        auto usd = prices.eth_usd(day);
        if (!price || !usd) {
            prep.skipped.emplace_back(v, !price ? "no price for the victim's input token" : "no ETH/USD price");
            continue;
        }
        try {
            pool->index_of(v.swap.token_in);
            pool->index_of(v.swap.token_out);
        } catch (const UnknownToken& e) {
            prep.skipped.emplace_back(v, e.what());
            continue;
        }
        prep.ready.push_back({v, std::move(*pool), *price, *usd});
    }
    return prep;
}

}  // namespace mevlens
