#include "mevlens/detectors.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

namespace mevlens {

DecodedActions decode_actions(std::span<const EventLog> logs, const PoolDirectory* pools,
                              const TopicRegistry& registry)
{
    DecodedActions out;
    for (const auto& log : logs) {
        if (log.topics.empty())
            continue;
        const RegistryEntry* e = registry.lookup(log.topics[0]);
        if (!e)
            continue;
        try {
            if (e->has(Category::arbitrage)) {
                if (auto s = decode_swap(log, pools, registry))
                    out.swaps.push_back(std::move(*s));
            }
            if (e->has(Category::sandwich)) {
                if (auto t = decode_transfer(log, registry))
                    out.transfers.push_back(std::move(*t));
            }
            if (e->has(Category::liquidation)) {
                if (auto l = decode_liquidation(log, registry))
                    out.liquidations.push_back(std::move(*l));
                else if (auto r = decode_redeem(log, registry))
                    out.redeems.push_back(std::move(*r));
            }
            if (e->has(Category::flash_loan)) {
                if (auto f = decode_flashloan(log, registry))
                    out.flash_loans.push_back(std::move(*f));
            }
            if (e->has(Category::oracle_update)) {
                if (auto o = decode_oracle_update(log, registry))
                    out.oracle_updates.push_back(std::move(*o));
            }
        } catch (const SchemaMismatch&) {
            ++out.skipped;
        } catch (const UnresolvedTokens&) {
            ++out.skipped;
        }
    }
    return out;
}

bool swaps_link(const SwapAction& a, const SwapAction& b)
{
    return a.token_out == b.token_in && a.amount_out >= b.amount_in && a.venue != b.venue;
}

namespace {

class CycleSearch {
public:
    CycleSearch(std::span<const SwapAction> swaps, const std::vector<bool>& used, std::size_t budget)
        : swaps_(swaps), used_(used), budget_(budget)
    {
    }

    std::vector<std::size_t> from(std::size_t seed)
    {
        chain_ = {seed};
        if (extend())
            return chain_;
        return {};
    }

private:
    std::span<const SwapAction> swaps_;
    const std::vector<bool>& used_;
    std::size_t budget_;
    std::vector<std::size_t> chain_;

    bool extend()
    {
        const SwapAction& seed = swaps_[chain_.front()];
        const std::size_t cur = chain_.back();
        for (std::size_t c = cur + 1; c < swaps_.size(); ++c) {
            if (used_[c] || !swaps_link(swaps_[cur], swaps_[c]))
                continue;
            if (budget_ == 0)
                return false;
            --budget_;
            chain_.push_back(c);
            if (swaps_[c].token_out == seed.token_in || extend())
                return true;
            chain_.pop_back();
        }
        return false;
    }
};

}  // namespace

std::vector<std::vector<std::size_t>> find_cycles(std::span<const SwapAction> swaps, std::size_t budget)
{
    std::vector<std::vector<std::size_t>> cycles;
    std::vector<bool> used(swaps.size(), false);
    for (std::size_t seed = 0; seed < swaps.size(); ++seed) {
        if (used[seed])
            continue;
        CycleSearch search(swaps, used, budget);
        auto cycle = search.from(seed);
        if (cycle.empty())
            continue;
        for (auto i : cycle)
            used[i] = true;
        cycles.push_back(std::move(cycle));
    }
    return cycles;
}

std::map<Address, BigInt> cycle_balances(std::span<const SwapAction> cycle)
{
    std::map<Address, BigInt> balances;
    for (const auto& s : cycle) {
        balances[s.token_in] -= s.amount_in;
        balances[s.token_out] += s.amount_out;
    }
    return balances;
}

std::vector<ArbitrageFinding> detect_arbitrages(std::span<const SwapAction> swaps)
{
    std::vector<ArbitrageFinding> findings;
    std::size_t begin = 0;
    while (begin < swaps.size()) {
        std::size_t end = begin + 1;
        while (end < swaps.size() && swaps[end].tx_hash == swaps[begin].tx_hash)
            ++end;
        auto group = swaps.subspan(begin, end - begin);
        for (const auto& cycle : find_cycles(group)) {
            ArbitrageFinding f;
            f.tx_hash = group.front().tx_hash;
            f.position = group.front().position.tx();
            for (auto i : cycle)
                f.cycle.push_back(group[i]);
            f.token_balances = cycle_balances(f.cycle);
            findings.push_back(std::move(f));
        }
        begin = end;
    }
    return findings;
}

namespace {

void add_value(ProfitAccount& acc, const PriceProvider& prices, const Address& token, const BigInt& amount,
               std::int64_t day)
{
    if (amount == 0)
        return;
    auto price = prices.price_eth(token, day);
    if (!price) {
        acc.unpriced = true;
        return;
    }
    const Rational value = Rational(amount) * *price;
    if (value > 0)
        acc.gain_eth += value;
    else
        acc.cost_eth -= value;
}

void charge(ProfitAccount& acc, const TxRecord& tx)
{
    acc.cost_eth += wei_to_eth(tx.fee_paid) + wei_to_eth(tx.builder_payment);
}

void settle(ProfitAccount& acc)
{
    acc.profit_eth = acc.gain_eth - acc.cost_eth;
}

}  // namespace

ProfitAccount arbitrage_profit(const ArbitrageFinding& finding, const PriceProvider& prices, const TxRecord& tx,
                               std::int64_t day, bool charge_tx_costs)
{
    ProfitAccount acc;
    for (const auto& [token, amount] : finding.token_balances)
        add_value(acc, prices, token, amount, day);
    if (charge_tx_costs)
        charge(acc, tx);
    settle(acc);
    return acc;
}

std::vector<LiquidationFinding> detect_liquidations(std::span<const LiquidationAction> liquidations,
                                                    std::span<const RedeemAction> redeems)
{
    std::vector<LiquidationFinding> findings;
    std::unordered_map<Hash32, std::vector<const RedeemAction*>> redeems_by_tx;
    for (const auto& r : redeems)
        redeems_by_tx[r.tx_hash].push_back(&r);

    std::size_t begin = 0;
    while (begin < liquidations.size()) {
        std::size_t end = begin + 1;
        while (end < liquidations.size() && liquidations[end].tx_hash == liquidations[begin].tx_hash)
            ++end;
        LiquidationFinding f;
        f.tx_hash = liquidations[begin].tx_hash;
        f.position = liquidations[begin].position.tx();
        const auto it = redeems_by_tx.find(f.tx_hash);
        std::vector<bool> taken(it == redeems_by_tx.end() ? 0 : it->second.size(), false);
        for (std::size_t k = begin; k < end; ++k) {
            LiquidationAction a = liquidations[k];
            if (a.protocol == LiquidationProtocol::compound_v2) {
                if (it != redeems_by_tx.end()) {
                    for (std::size_t r = 0; r < taken.size(); ++r) {
                        if (!taken[r] && it->second[r]->position > a.position) {
                            taken[r] = true;
                            a.collateral_amount = it->second[r]->amount;
                            break;
                        }
                    }
                }
                if (!a.collateral_amount)
                    f.unredeemed = true;
            }
            f.actions.push_back(std::move(a));
        }
        findings.push_back(std::move(f));
        begin = end;
    }
    return findings;
}

ProfitAccount liquidation_profit(const LiquidationFinding& finding, const PriceProvider& prices, const TxRecord& tx,
                                 std::int64_t day, bool charge_tx_costs)
{
    ProfitAccount acc;
    for (const auto& a : finding.actions) {
        if (a.collateral_amount)
            add_value(acc, prices, a.collateral_token, *a.collateral_amount, day);
        add_value(acc, prices, a.debt_token, -a.debt_amount, day);
    }
    if (charge_tx_costs)
        charge(acc, tx);
    settle(acc);
    return acc;
}

namespace {

// Transfers of one token, in order.
using TokenLane = std::vector<const TransferAction*>;

std::map<Address, TokenLane> lanes_by_token(std::span<const TransferAction> transfers)
{
    std::map<Address, TokenLane> lanes;
    for (const auto& t : transfers)
        lanes[t.token].push_back(&t);
    return lanes;
}

// Scans lane[p+1..] for the first back transfer of lane[p] whose block does
// not exceed `last_block` and that brackets at least one victim.
std::optional<SandwichFinding> match_front(const TokenLane& lane, std::size_t p, std::uint64_t last_block)
{
    const TransferAction& a1 = *lane[p];
    if (a1.sender == a1.receiver)
        return std::nullopt;
    const TxPosition front = a1.position.tx();
    for (std::size_t q = p + 1; q < lane.size() && lane[q]->position.block <= last_block; ++q) {
        const TransferAction& a2 = *lane[q];
        if (a2.position.tx() <= front || a2.tx_hash == a1.tx_hash)
            continue;
        if (a2.sender != a1.receiver || a2.receiver != a1.sender || a2.amount > a1.amount)
            continue;
        const TxPosition back = a2.position.tx();
        std::vector<Hash32> victims;
        for (std::size_t r = p + 1; r < q; ++r) {
            const TransferAction& v = *lane[r];
            const TxPosition at = v.position.tx();
            if (at <= front || at >= back)
                continue;
            if (v.sender != a1.sender || v.receiver == a1.receiver)
                continue;
            if (std::find(victims.begin(), victims.end(), v.tx_hash) == victims.end())
                victims.push_back(v.tx_hash);
        }
        if (victims.empty())
            continue;
        SandwichFinding f;
        f.front_tx = a1.tx_hash;
        f.back_tx = a2.tx_hash;
        f.victim_txs = std::move(victims);
        f.front_position = front;
        f.back_position = back;
        f.token = a1.token;
        f.attacker = a1.receiver;
        return f;
    }
    return std::nullopt;
}

std::vector<SandwichFinding> finalize(std::vector<SandwichFinding> found)
{
    std::stable_sort(found.begin(), found.end(), [](const SandwichFinding& a, const SandwichFinding& b) {
        if (a.front_position != b.front_position)
            return a.front_position < b.front_position;
        return a.back_position < b.back_position;
    });
    std::set<std::pair<Hash32, Hash32>> seen;
    std::vector<SandwichFinding> out;
    for (auto& f : found)
        if (seen.emplace(f.front_tx, f.back_tx).second)
            out.push_back(std::move(f));
    return out;
}

}  // namespace

std::vector<SandwichFinding> detect_sandwiches_per_block(std::span<const TransferAction> transfers)
{
    std::vector<SandwichFinding> found;
    std::size_t begin = 0;
    while (begin < transfers.size()) {
        std::size_t end = begin + 1;
        while (end < transfers.size() && transfers[end].position.block == transfers[begin].position.block)
            ++end;
        for (const auto& [token, lane] : lanes_by_token(transfers.subspan(begin, end - begin))) {
            for (std::size_t p = 0; p < lane.size(); ++p)
                if (auto f = match_front(lane, p, lane[p]->position.block))
                    found.push_back(std::move(*f));
        }
        begin = end;
    }
    return finalize(std::move(found));
}

std::vector<SandwichFinding> detect_sandwiches_windowed(std::span<const TransferAction> transfers,
                                                        std::uint64_t window, std::uint64_t a1_from,
                                                        std::uint64_t a1_to)
{
    if (window == 0)
        throw Error("sandwich window must be at least one block");
    std::vector<SandwichFinding> found;
    for (const auto& [token, lane] : lanes_by_token(transfers)) {
        for (std::size_t p = 0; p < lane.size(); ++p) {
            const std::uint64_t b = lane[p]->position.block;
            if (b < a1_from || b > a1_to)
                continue;
            if (auto f = match_front(lane, p, b + (window - 1)))
                found.push_back(std::move(*f));
        }
    }
    return finalize(std::move(found));
}

std::vector<SandwichFinding> detect_sandwiches(std::span<const TransferAction> transfers, const ChainId& chain,
                                               std::uint64_t window)
{
    if (chain.layer == Layer::l1)
        return detect_sandwiches_per_block(transfers);
    return detect_sandwiches_windowed(transfers, window);
}

ProfitAccount sandwich_profit(const SandwichFinding& finding, std::span<const TransferAction> transfers,
                              const PriceProvider& prices, const TxRecord& front, const TxRecord& back,
                              std::int64_t day)
{
    std::map<Address, BigInt> net;
    for (const auto& t : transfers) {
        if (t.tx_hash != finding.front_tx && t.tx_hash != finding.back_tx)
            continue;
        if (t.receiver == finding.attacker)
            net[t.token] += t.amount;
        if (t.sender == finding.attacker)
            net[t.token] -= t.amount;
    }
    ProfitAccount acc;
    for (const auto& [token, amount] : net)
        add_value(acc, prices, token, amount, day);
    charge(acc, front);
    charge(acc, back);
    settle(acc);
    return acc;
}

std::vector<FlashLoanAction> flash_loans_of(const Hash32& tx, std::span<const FlashLoanAction> loans)
{
    std::vector<FlashLoanAction> out;
    for (const auto& l : loans)
        if (l.tx_hash == tx)
            out.push_back(l);
    return out;
}

}  // namespace mevlens
