#include "synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>

#include "mevlens/keccak.hpp"
#include "mevlens/topic_registry.hpp"

namespace mevlens::synth {

Address make_address(std::uint8_t tag, std::uint64_t n)
{
    Address a;
    a.bytes[0] = tag;
    for (int i = 0; i < 8; ++i)
        a.bytes[19 - i] = static_cast<std::uint8_t>(n >> (8 * i));
    return a;
}

Hash32 make_hash(std::uint8_t tag, std::uint64_t n)
{
    Hash32 h;
    h.bytes[0] = tag;
    for (int i = 0; i < 8; ++i)
        h.bytes[31 - i] = static_cast<std::uint8_t>(n >> (8 * i));
    // Spread the counter so hashes do not look sequential.
    const Hash32 mix = keccak256(h.span());
    for (std::size_t i = 1; i < 24; ++i)
        h.bytes[i] = mix.bytes[i];
    return h;
}

Hash32 topic_of(std::string_view protocol, std::string_view event)
{
    for (const auto& e : TopicRegistry::builtin().entries())
        if (e.protocol == protocol && e.event == event)
            return e.topic;
    throw Error("no builtin event " + std::string(protocol) + " " + std::string(event));
}

std::uint64_t Random::uniform(std::uint64_t lo, std::uint64_t hi)
{
    return std::uniform_int_distribution<std::uint64_t>(lo, hi)(gen_);
}

bool Random::chance(double p)
{
    return std::bernoulli_distribution(p)(gen_);
}

// --- ChainWriter -------------------------------------------------------------

ChainWriter::ChainWriter(ChainName chain, std::uint8_t hash_tag) : chain_(ChainId::of(chain)), tag_(hash_tag) {}

void ChainWriter::block(std::uint64_t number, std::int64_t timestamp)
{
    if (!blocks_.empty() && blocks_.back().number >= number)
        throw Error("ChainWriter: blocks must increase");
    BlockRecord b;
    b.chain = chain_;
    b.number = number;
    b.timestamp = timestamp;
    blocks_.push_back(std::move(b));
    next_log_ = 0;
}

TxRecord& ChainWriter::tx(const Address& from, std::optional<Hash32> hash)
{
    if (blocks_.empty())
        throw Error("ChainWriter: tx before any block");
    TxRecord t;
    t.chain = chain_;
    t.hash = hash.value_or(make_hash(tag_, counter_++));
    t.block_number = blocks_.back().number;
    t.tx_index = static_cast<std::uint32_t>(blocks_.back().tx_hashes.size());
    t.from = from;
    t.to = make_address(0xc0, 1);
    blocks_.back().tx_hashes.push_back(t.hash);
    txs_.push_back(std::move(t));
    return txs_.back();
}

LogPosition ChainWriter::next_position() const
{
    return {blocks_.back().number, txs_.back().tx_index, next_log_};
}

const EventLog& ChainWriter::log(const Hash32& topic, const FieldValues& fields, const Address& emitter)
{
    if (txs_.empty() || txs_.back().block_number != blocks_.back().number)
        throw Error("ChainWriter: log outside a tx");
    logs_.push_back(encode_event(topic, fields, emitter, chain_, next_position(), txs_.back().hash));
    ++next_log_;
    return logs_.back();
}

const EventLog& ChainWriter::log_data(const Hash32& topic, const FieldValues& fields, Bytes data,
                                      const Address& emitter)
{
    if (txs_.empty() || txs_.back().block_number != blocks_.back().number)
        throw Error("ChainWriter: log outside a tx");
    logs_.push_back(
        encode_event_with_data(topic, fields, std::move(data), emitter, chain_, next_position(), txs_.back().hash));
    ++next_log_;
    return logs_.back();
}

ChainDataset ChainWriter::build() const
{
    return ChainDataset(blocks_, txs_, logs_);
}

// --- Market ------------------------------------------------------------------

namespace {

const Address balancer_vault = make_address(0xba, 2);

PoolMetadata metadata_for(Venue venue, const Address& address, std::vector<Address> tokens)
{
    PoolMetadata m;
    m.address = address;
    m.tokens = std::move(tokens);
    switch (venue) {
    case Venue::uniswap_v2:
    case Venue::uniswap_v3: break;
    case Venue::balancer_v1:
    case Venue::balancer_v2:
        m.fee_num = 2;
        m.fee_den = 1000;
        break;
    case Venue::curve:
    case Venue::stableswap:
        m.kind = PoolKind::stableswap;
        m.fee_num = 4;
        m.fee_den = 10000;
        m.amp = 200;
        break;
    }
    return m;
}

Hash32 balancer_pool_id(const Address& pool)
{
    Hash32 id;
    std::copy(pool.bytes.begin(), pool.bytes.end(), id.bytes.begin());
    id.bytes[21] = 2;  // two-token pool specialization
    return id;
}

}  // namespace

Address Market::add_pool(Venue venue, std::vector<Address> tokens, std::vector<BigInt> reserves,
                         std::uint64_t genesis_block)
{
    const Address address = make_address(0xb0, next_pool_++);
    PoolMetadata meta = metadata_for(venue, address, std::move(tokens));
    pools_.emplace(address, Live{venue, PoolState::from_metadata(meta, reserves)});
    snapshots_.add_pool(address, genesis_block, std::move(reserves));
    directory_.add(std::move(meta));
    return address;
}

BigInt Market::quote(const Address& pool, const Address& token_in, const Address& token_out,
                     const BigInt& amount) const
{
    return swap_out(pools_.at(pool).state, token_in, token_out, amount).amount_out;
}

BigInt Market::swap(ChainWriter& w, const Address& pool, const Address& token_in, const Address& token_out,
                    const BigInt& amount, const Address& trader)
{
    Live& live = pools_.at(pool);
    SwapQuote q = swap_out(live.state, token_in, token_out, amount);
    live.state = q.post_state;
    if (std::find(touched_.begin(), touched_.end(), pool) == touched_.end())
        touched_.push_back(pool);

    const std::size_t i = live.state.index_of(token_in);
    const std::size_t o = live.state.index_of(token_out);
    switch (live.venue) {
    case Venue::uniswap_v2: {
        FieldValues f{{"sender", trader}, {"recipient", trader}};
        f[i == 0 ? "amount0_in" : "amount1_in"] = amount;
        f[o == 0 ? "amount0_out" : "amount1_out"] = q.amount_out;
        w.log(topic_of("Uniswap V2", "Swap"), f, pool);
        break;
    }
    case Venue::uniswap_v3: {
        FieldValues f{{"sender", trader}, {"recipient", trader}, {"liquidity", BigInt(1) << 80}};
        f[i == 0 ? "amount0" : "amount1"] = amount;
        f[o == 0 ? "amount0" : "amount1"] = BigInt(-q.amount_out);
        w.log(topic_of("Uniswap V3", "Swap"), f, pool);
        break;
    }
    case Venue::balancer_v1:
        w.log(topic_of("Balancer V1", "LOG_SWAP"),
              {{"sender", trader},
               {"token_in", token_in},
               {"token_out", token_out},
               {"amount_in", amount},
               {"amount_out", q.amount_out}},
              pool);
        break;
    case Venue::balancer_v2:
        w.log(topic_of("Balancer V2", "Swap"),
              {{"pool_id", balancer_pool_id(pool)},
               {"token_in", token_in},
               {"token_out", token_out},
               {"amount_in", amount},
               {"amount_out", q.amount_out}},
              balancer_vault);
        break;
    case Venue::curve:
        w.log(topic_of("Curve", "TokenExchange"),
              {{"sender", trader},
               {"token_in_index", BigInt(i)},
               {"amount_in", amount},
               {"token_out_index", BigInt(o)},
               {"amount_out", q.amount_out}},
              pool);
        break;
    case Venue::stableswap:
        w.log(topic_of("StableSwap", "TokenSwap"),
              {{"sender", trader},
               {"amount_in", amount},
               {"amount_out", q.amount_out},
               {"token_in_index", BigInt(i)},
               {"token_out_index", BigInt(o)}},
              pool);
        break;
    }
    return q.amount_out;
}

void Market::end_block(std::uint64_t block)
{
    for (const Address& p : touched_)
        snapshots_.add_pool(p, block, pools_.at(p).state.reserves);
    touched_.clear();
}

// --- shared data ---------------------------------------------------------------

namespace {

struct Token {
    const char* symbol;
    Address address;
    const char* price_eth;  // per smallest unit
    BigInt fair_reserve;    // 1000 ETH worth
};

BigInt pow10(unsigned n)
{
    BigInt r = 1;
    for (unsigned i = 0; i < n; ++i)
        r *= 10;
    return r;
}

std::vector<Token> l1_tokens()
{
    return {
        {"WETH", make_address(0xe0, 1), "0.000000000000000001", pow10(21)},
        {"USDC", make_address(0xe0, 2), "0.0000000005", 2 * pow10(12)},
        {"DAI", make_address(0xe0, 3), "0.0000000000000000000005", 2 * pow10(24)},
        {"WBTC", make_address(0xe0, 4), "0.00000016", 625 * pow10(7)},
        {"LINK", make_address(0xe0, 5), "0.000000000000000000008", 125 * pow10(21)},
        {"UNI", make_address(0xe0, 6), "0.000000000000000000004", 25 * pow10(22)},
        {"SUSD", make_address(0xe0, 7), "0.0000000000000000000005", 2 * pow10(24)},
    };
}

enum TokenIx { WETH, USDC, DAI, WBTC, LINK, UNI, SUSD };

constexpr std::int64_t demo_base_ts = 1640995200;  // 2022-01-01T00:00:00Z
constexpr std::uint64_t demo_start_block = 14000000;
constexpr std::int64_t demo_spacing_s = 9000;

std::int64_t demo_ts(std::uint64_t block)
{
    return demo_base_ts + static_cast<std::int64_t>(block - demo_start_block) * demo_spacing_s;
}

std::string hex(const Hash32& h) { return to_hex(h); }
std::string hex(const Address& a) { return to_hex(a); }

Json default_config()
{
    Json c;
    c["window"] = 100;
    c["horizon"] = 100;
    c["detectors"] = {{"arbitrage", true}, {"liquidation", true}, {"sandwich", true}};
    c["cost_model"] = {{"l1_tx_cost_eth", "0.002"}, {"l2_tx_cost_eth", "0.0001"}, {"bribe_eth", "0.001"}};
    c["capital_tiers_usd"] = Json::array({"1000", "10000", "100000", "1000000", nullptr});
    c["reaction_time_s"] = 30;
    c["slippage_fallback"] = "0.02";
    return c;
}

// Blocks are written in order; each block runs its scheduled actions, each of
// which opens its own transactions.
class Schedule {
public:
    void at(std::uint64_t block, std::function<void()> action) { actions_[block].push_back(std::move(action)); }
    std::uint64_t last_block() const { return actions_.empty() ? 0 : actions_.rbegin()->first; }
    void run(ChainWriter& w, std::uint64_t from, std::uint64_t to, const std::function<std::int64_t(std::uint64_t)>& ts,
             const std::function<void(std::uint64_t)>& per_block, const std::function<void(std::uint64_t)>& end)
    {
        for (std::uint64_t b = from; b <= to; ++b) {
            w.block(b, ts(b));
            auto it = actions_.find(b);
            if (it != actions_.end())
                for (auto& a : it->second)
                    a();
            if (per_block)
                per_block(b);
            if (end)
                end(b);
        }
    }

private:
    std::map<std::uint64_t, std::vector<std::function<void()>>> actions_;
};

// --- demo: arbitrage -----------------------------------------------------------

struct CyclePlan {
    std::vector<int> tokens;  // Y, X, ...; the cycle is Y -> X -> ... -> Y
    std::vector<Venue> venues;
    std::uint64_t distance = 0;
    std::uint64_t opportunity_block = 0;
    std::vector<Address> pools;
    Hash32 opportunity_tx;
};

struct ArbTxPlan {
    std::vector<std::size_t> cycles;  // indexes into the cycle plans
    std::uint64_t block = 0;
    std::optional<std::string> flash_loan;  // "aave_v2", "aave_v3", "aave_v1"
    bool builder_payment = false;
};

Venue cp_venue(std::size_t k)
{
    static const Venue v[] = {Venue::uniswap_v2, Venue::uniswap_v3, Venue::balancer_v1, Venue::balancer_v2};
    return v[k % 4];
}

// Best cycle input among a grid of sizes, by exact replay.
BigInt best_cycle_input(const Market& m, const CyclePlan& c, const std::vector<Token>& tokens, BigInt& profit)
{
    BigInt best = 0;
    profit = 0;
    const BigInt& reserve = m.state(c.pools[0]).reserves[m.state(c.pools[0]).index_of(tokens[c.tokens[0]].address)];
    for (int k = 1; k <= 120; ++k) {
        const BigInt in = reserve * k / 1000;
        BigInt amount = in;
        for (std::size_t i = 0; i < c.pools.size(); ++i) {
            const Address& a = tokens[c.tokens[i]].address;
            const Address& b = tokens[c.tokens[(i + 1) % c.tokens.size()]].address;
            amount = m.quote(c.pools[i], a, b, amount);
        }
        if (amount - in > profit) {
            profit = amount - in;
            best = in;
        }
    }
    return best;
}

Bytes random_payload(Random& rng, std::size_t words)
{
    Bytes b(32 * words);
    for (auto& x : b)
        x = static_cast<std::uint8_t>(rng.uniform(0, 255));
    return b;
}

}  // namespace

Fixture make_demo_fixture(std::uint64_t seed)
{
    Random rng(seed);
    Fixture fx;
    const auto tokens = l1_tokens();
    Market market;
    ChainWriter eth(ChainName::ethereum, 0x11);
    Schedule schedule;
    Json gt;

    // Prices: every token from the day before genesis; ETH/USD drifts monthly.
    std::string prices = "token_address,unix_day,price_eth\n";
    const std::int64_t day0 = unix_day(demo_base_ts) - 1;
    for (const auto& t : tokens)
        prices += hex(t.address) + "," + std::to_string(day0) + "," + t.price_eth + "\n";
    const Address cDAI = make_address(0xce, 1);
    const Address cETH = make_address(0xce, 2);
    prices += hex(cDAI) + "," + std::to_string(day0) + "," + tokens[DAI].price_eth + "\n";
    prices += hex(cETH) + "," + std::to_string(day0) + "," + tokens[WETH].price_eth + "\n";
    prices += "ETHUSD," + std::to_string(day0) + ",3000\n";
    prices += "ETHUSD," + std::to_string(day0 + 31) + ",2800\n";
    prices += "ETHUSD," + std::to_string(day0 + 59) + ",3100\n";

    const std::uint64_t genesis = demo_start_block - 1;

    // Noise pools: single swaps that never form cycles.
    std::vector<std::pair<Address, std::pair<int, int>>> noise;
    for (auto [a, b] : {std::pair{WETH, USDC}, std::pair{LINK, UNI}, std::pair{WBTC, DAI}}) {
        const Address p = market.add_pool(Venue::uniswap_v2, {tokens[a].address, tokens[b].address},
                                          {tokens[a].fair_reserve * 4, tokens[b].fair_reserve * 4}, genesis);
        noise.push_back({p, {a, b}});
    }

    // 25 cycles; plans 10/11 and 20/21 share a transaction.
    const std::vector<std::vector<int>> paths = {
        {WETH, USDC},       {WETH, LINK},        {WETH, UNI},         {USDC, WBTC},       {WETH, WBTC},
        {WETH, DAI, SUSD},  {WETH, LINK, UNI},   {USDC, WETH, WBTC},  {WETH, USDC, DAI, UNI},
    };
    const std::uint64_t distances[25] = {0, 1, 2, 3, 5, 8, 13, 21, 34, 55, 4, 6, 9,
                                         16, 25, 36, 49, 64, 81, 99, 7, 12, 100, 1, 2};
    std::vector<CyclePlan> cycles;
    for (std::size_t k = 0; k < 25; ++k) {
        CyclePlan c;
        c.tokens = paths[k % paths.size()];
        c.distance = distances[k];
        const BigInt scale = 1 + k % 3;
        for (std::size_t i = 0; i < c.tokens.size(); ++i) {
            const int a = c.tokens[i];
            const int b = c.tokens[(i + 1) % c.tokens.size()];
            const bool stable = (a == DAI && b == SUSD) || (a == SUSD && b == DAI);
            // The first leg is constant product so the opportunity moves its price.
            const Venue v = stable && i > 0 ? Venue::curve : cp_venue(k + i);
            c.venues.push_back(v);
            c.pools.push_back(market.add_pool(v, {tokens[a].address, tokens[b].address},
                                              {tokens[a].fair_reserve * scale, tokens[b].fair_reserve * scale},
                                              genesis));
        }
        cycles.push_back(std::move(c));
    }
    std::vector<ArbTxPlan> arb_txs;
    for (std::size_t k = 0; k < 25; ++k) {
        ArbTxPlan t;
        t.cycles.push_back(k);
        if (k == 10 || k == 20)
            t.cycles.push_back(++k);
        arb_txs.push_back(t);
    }
    arb_txs[3].flash_loan = "aave_v2";
    arb_txs[7].flash_loan = "aave_v2";
    arb_txs[13].flash_loan = "aave_v2";
    arb_txs[16].flash_loan = "aave_v3";
    arb_txs[20].flash_loan = "aave_v1";
    for (std::size_t i = 0; i < arb_txs.size(); i += 4)
        arb_txs[i].builder_payment = true;

    const std::vector<Address> bots = {make_address(0xa0, 0xb01), make_address(0xa0, 0xb02),
                                       make_address(0xa0, 0xb03)};
    const Address bot_contract = make_address(0xc0, 0xb0c);
    Json arb_truth = Json::array();

    std::uint64_t cursor = demo_start_block + 3;
    std::size_t trader_n = 1;
    for (std::size_t t = 0; t < arb_txs.size(); ++t) {
        ArbTxPlan& plan = arb_txs[t];
        std::uint64_t reach = 0;
        for (std::size_t c : plan.cycles)
            reach = std::max(reach, cycles[c].distance);
        plan.block = cursor + reach;
        for (std::size_t c : plan.cycles) {
            CyclePlan& cp = cycles[c];
            cp.opportunity_block = plan.block - cp.distance;
            const Address trader = make_address(0xa1, trader_n++);
            const int pct = 5 + static_cast<int>(rng.uniform(0, 4));
            schedule.at(cp.opportunity_block, [&, c, trader, pct] {
                CyclePlan& cy = cycles[c];
                TxRecord& tx = eth.tx(trader);
                tx.fee_paid = BigInt(3) * pow10(15);
                cy.opportunity_tx = tx.hash;
                const Token& x = tokens[cy.tokens[1]];
                const Token& y = tokens[cy.tokens[0]];
                const BigInt reserve = market.state(cy.pools[0]).reserves[market.state(cy.pools[0]).index_of(x.address)];
                market.swap(eth, cy.pools[0], x.address, y.address, reserve * pct / 100, trader);
            });
        }
        const Address bot = bots[t % bots.size()];
        schedule.at(plan.block, [&, t, bot] {
            const ArbTxPlan& p = arb_txs[t];
            TxRecord& tx = eth.tx(bot);
            tx.to = bot_contract;
            tx.fee_paid = BigInt(4 + t % 5) * pow10(15);
            if (p.builder_payment)
                tx.builder_payment = BigInt(2) * pow10(16);
            const Hash32 tx_hash = tx.hash;
            Json entry;
            entry["tx"] = hex(tx_hash);
            entry["block"] = p.block;
            entry["extractor"] = hex(bot);
            entry["cycles"] = Json::array();
            std::vector<BigInt> inputs;
            for (std::size_t c : p.cycles) {
                BigInt profit;
                const BigInt in = best_cycle_input(market, cycles[c], tokens, profit);
                if (in == 0)
                    throw InvariantViolation("planted cycle is not profitable");
                inputs.push_back(in);
            }
            if (p.flash_loan) {
                const Token& y = tokens[cycles[p.cycles[0]].tokens[0]];
                const BigInt amount = inputs[0];
                const BigInt fee = amount * 9 / 10000;
                if (*p.flash_loan == "aave_v2")
                    eth.log(topic_of("Aave V2", "FlashLoan"),
                            {{"target", bot_contract}, {"initiator", bot}, {"token", y.address}, {"amount", amount},
                             {"fee", fee}},
                            make_address(0xaa, 2));
                else if (*p.flash_loan == "aave_v3")
                    eth.log(topic_of("Aave V3", "FlashLoan"),
                            {{"target", bot_contract}, {"initiator", bot}, {"token", y.address}, {"amount", amount},
                             {"fee", fee}},
                            make_address(0xaa, 3));
                else
                    eth.log(topic_of("Aave V1", "FlashLoan"),
                            {{"target", bot_contract}, {"token", y.address}, {"amount", amount}, {"fee", fee}},
                            make_address(0xaa, 1));
            }
            for (std::size_t n = 0; n < p.cycles.size(); ++n) {
                const CyclePlan& cy = cycles[p.cycles[n]];
                Json cj;
                cj["tokens"] = Json::array();
                BigInt amount = inputs[n];
                for (std::size_t i = 0; i < cy.pools.size(); ++i) {
                    const Address& a = tokens[cy.tokens[i]].address;
                    const Address& b = tokens[cy.tokens[(i + 1) % cy.tokens.size()]].address;
                    amount = market.swap(eth, cy.pools[i], a, b, amount, bot_contract);
                    cj["tokens"].push_back(tokens[cy.tokens[i]].symbol);
                }
                cj["venues"] = Json::array();
                for (const Address& pool : cy.pools)
                    cj["venues"].push_back(hex(pool));
                cj["opportunity_tx"] = hex(cy.opportunity_tx);
                cj["opportunity_distance"] = cy.distance;
                entry["cycles"].push_back(cj);
            }
            arb_truth.push_back(entry);
        });
        cursor = plan.block + 2 + rng.uniform(0, 2);
    }

    // Reverted attempts by the same bots.
    for (int i = 0; i < 6; ++i) {
        const Address bot = bots[i % bots.size()];
        schedule.at(demo_start_block + 20 + 97 * i, [&, bot] {
            TxRecord& tx = eth.tx(bot);
            tx.to = bot_contract;
            tx.status = TxStatus::reverted;
            tx.fee_paid = BigInt(1) * pow10(15);
        });
    }

    // --- liquidations ------------------------------------------------------------
    struct LiqPlan {
        LiquidationProtocol protocol = LiquidationProtocol::aave_v2v3;
        std::uint64_t distance = 0;
        std::uint64_t block = 0;
        Address borrower;
        Address liquidator;
        bool flash = false;
        std::optional<std::size_t> shares_update_of;  // reuse another plan's opportunity update
        Hash32 update_tx;
    };
    auto liq = [](LiquidationProtocol protocol, std::uint64_t distance, std::uint64_t borrower, std::uint64_t liquidator) {
        LiqPlan p;
        p.protocol = protocol;
        p.distance = distance;
        p.borrower = make_address(0xbb, borrower);
        p.liquidator = make_address(0xa0, liquidator);
        return p;
    };
    std::vector<LiqPlan> liqs = {
        liq(LiquidationProtocol::aave_v2v3, 3, 1, 0x111),   liq(LiquidationProtocol::aave_v2v3, 4, 2, 0x112),
        liq(LiquidationProtocol::aave_v1, 10, 3, 0x111),    liq(LiquidationProtocol::aave_v2v3, 0, 4, 0x113),
        liq(LiquidationProtocol::compound_v2, 6, 5, 0x114), liq(LiquidationProtocol::compound_v2, 20, 6, 0x114),
        liq(LiquidationProtocol::aave_v2v3, 150, 7, 0x115),
    };
    liqs[1].shares_update_of = 0;
    liqs[5].flash = true;
    const Address feed = make_address(0xfe, 1);
    const Address oracle_node = make_address(0xa0, 0x0fe);
    std::uint64_t round = 1000;
    std::uint64_t lcur = cursor + 170;
    SnapshotStore& snaps = market.snapshots();
    Json liq_truth = Json::array();
    for (std::size_t i = 0; i < liqs.size(); ++i) {
        LiqPlan& lp = liqs[i];
        lp.block = i == 1 ? liqs[0].block + 1 : lcur;
        const std::uint64_t update_block = lp.block - lp.distance;
        const std::uint64_t healthy_block = update_block - 5;
        const bool compound = lp.protocol == LiquidationProtocol::compound_v2;
        auto mark = [&, compound, lp](std::uint64_t block, bool liquidable) {
            if (compound)
                snaps.add_shortfall(lp.borrower, block, liquidable ? BigInt(4) * pow10(17) : BigInt(0));
            else
                snaps.add_health(lp.borrower, block,
                                 liquidable ? parse_rational("0.96") : parse_rational("1.03"), lp.protocol);
        };
        if (!compound)
            snaps.add_health(lp.borrower, genesis, parse_rational("1.10"), lp.protocol);
        else
            snaps.add_shortfall(lp.borrower, genesis, 0);
        if (!lp.shares_update_of) {
            const std::uint64_t r1 = round++;
            schedule.at(healthy_block, [&, r1] {
                eth.tx(oracle_node).fee_paid = pow10(15);
                eth.log(topic_of("Chainlink", "AnswerUpdated"),
                        {{"answer", BigInt(3000) * pow10(8)}, {"round_id", BigInt(r1)},
                         {"updated_at", BigInt(eth.current_timestamp())}},
                        feed);
            });
            const std::uint64_t r2 = round++;
            schedule.at(update_block, [&, r2, i] {
                TxRecord& tx = eth.tx(oracle_node);
                tx.fee_paid = pow10(15);
                liqs[i].update_tx = tx.hash;
                eth.log(topic_of("Chainlink", "AnswerUpdated"),
                        {{"answer", BigInt(2700) * pow10(8)}, {"round_id", BigInt(r2)},
                         {"updated_at", BigInt(eth.current_timestamp())}},
                        feed);
            });
        } else {
            lp.update_tx = Hash32{};
        }
        mark(healthy_block, false);
        mark(update_block, true);
        schedule.at(lp.block, [&, i, compound] {
            LiqPlan& p = liqs[i];
            if (p.shares_update_of)
                p.update_tx = liqs[*p.shares_update_of].update_tx;
            TxRecord& tx = eth.tx(p.liquidator);
            tx.fee_paid = BigInt(6) * pow10(15);
            const BigInt debt = BigInt(10000 + 1000 * i) * pow10(18);  // DAI
            const BigInt collateral = debt / 2000 * 108 / 100;  // WETH units, 8% bonus at 2000 DAI/ETH
            if (p.flash)
                eth.log(topic_of("Balancer", "FlashLoan"),
                        {{"recipient", p.liquidator}, {"token", tokens[DAI].address}, {"amount", debt}, {"fee", BigInt(0)}},
                        balancer_vault);
            if (compound) {
                eth.log(topic_of("Compound V2", "LiquidateBorrow"),
                        {{"liquidator", p.liquidator}, {"borrower", p.borrower}, {"debt_amount", debt},
                         {"collateral_ctoken", cETH}, {"seize_tokens", collateral}},
                        cDAI);
                eth.log(topic_of("Compound", "Redeem"),
                        {{"redeemer", p.liquidator}, {"redeem_amount", collateral}, {"redeem_tokens", collateral}},
                        cETH);
            } else if (p.protocol == LiquidationProtocol::aave_v1) {
                eth.log(topic_of("Aave V1", "LiquidationCall"),
                        {{"collateral_token", tokens[WETH].address}, {"debt_token", tokens[DAI].address},
                         {"borrower", p.borrower}, {"debt_amount", debt}, {"collateral_amount", collateral},
                         {"liquidator", p.liquidator}, {"timestamp", BigInt(eth.current_timestamp())}},
                        make_address(0xaa, 1));
            } else {
                eth.log(topic_of("Aave V2/V3", "LiquidationCall"),
                        {{"collateral_token", tokens[WETH].address}, {"debt_token", tokens[DAI].address},
                         {"borrower", p.borrower}, {"debt_amount", debt}, {"collateral_amount", collateral},
                         {"liquidator", p.liquidator}},
                        make_address(0xaa, 2));
            }
            Json e;
            e["tx"] = hex(tx.hash);
            e["block"] = p.block;
            e["protocol"] = std::string(to_string(p.protocol));
            e["borrower"] = hex(p.borrower);
            e["liquidator"] = hex(p.liquidator);
            if (p.distance <= default_horizon) {
                e["opportunity_status"] = "found";
                e["opportunity_tx"] = hex(p.update_tx);
                e["opportunity_distance"] = p.distance;
            } else {
                e["opportunity_status"] = "not_found_within_100";
            }
            liq_truth.push_back(e);
        });
        if (i != 0)
            lcur = lp.block + 12 + rng.uniform(0, 6);
        else
            lcur = lp.block + 14;
    }
    // Reverted liquidation attempts.
    for (int i = 0; i < 2; ++i)
        schedule.at(lcur + 1 + i, [&] {
            TxRecord& tx = eth.tx(liqs[0].liquidator);
            tx.status = TxStatus::reverted;
            tx.fee_paid = pow10(15);
        });

    // --- sandwiches --------------------------------------------------------------
    Json sandwich_truth = Json::array();
    std::uint64_t scur = lcur + 5;
    for (int i = 0; i < 3; ++i) {
        const std::uint64_t block = scur + 3 * i;
        const Address attacker_eoa = make_address(0xa0, 0x5a0 + i);
        const Address attacker = make_address(0xc0, 0x5a0 + i);
        const Address victim = make_address(0xa2, 0x71 + i);
        const Address pool = noise[static_cast<std::size_t>(i) % noise.size()].first;
        schedule.at(block, [&, attacker_eoa, attacker, victim, pool, i] {
            const Token& bought = tokens[LINK];
            const Token& paid = tokens[WETH];
            const BigInt a = BigInt(500 + 100 * i) * pow10(18);
            const BigInt w1 = BigInt(4) * pow10(18);
            const BigInt w2 = w1 + BigInt(30 + 10 * i) * pow10(15);
            Json e;
            TxRecord& front = eth.tx(attacker_eoa);
            front.to = attacker;
            front.fee_paid = BigInt(5) * pow10(15);
            if (i == 1)
                eth.log(topic_of("Aave V2", "FlashLoan"),
                        {{"target", attacker}, {"initiator", attacker_eoa}, {"token", paid.address}, {"amount", w1},
                         {"fee", w1 * 9 / 10000}},
                        make_address(0xaa, 2));
            eth.log(topic_of("ERC-20", "Transfer"), {{"from", attacker}, {"to", pool}, {"amount", w1}}, paid.address);
            eth.log(topic_of("ERC-20", "Transfer"), {{"from", pool}, {"to", attacker}, {"amount", a}}, bought.address);
            e["front_tx"] = hex(front.hash);
            TxRecord& vt = eth.tx(victim);
            vt.fee_paid = BigInt(2) * pow10(15);
            eth.log(topic_of("ERC-20", "Transfer"), {{"from", victim}, {"to", pool}, {"amount", BigInt(2) * pow10(18)}},
                    paid.address);
            eth.log(topic_of("ERC-20", "Transfer"), {{"from", pool}, {"to", victim}, {"amount", a / 2}}, bought.address);
            e["victim_txs"] = Json::array({hex(vt.hash)});
            TxRecord& back = eth.tx(attacker_eoa);
            back.to = attacker;
            back.fee_paid = BigInt(5) * pow10(15);
            eth.log(topic_of("ERC-20", "Transfer"), {{"from", attacker}, {"to", pool}, {"amount", a}}, bought.address);
            eth.log(topic_of("ERC-20", "Transfer"), {{"from", pool}, {"to", attacker}, {"amount", w2}}, paid.address);
            e["back_tx"] = hex(back.hash);
            e["attacker"] = hex(attacker);
            sandwich_truth.push_back(e);
        });
    }

    // --- cross-layer emissions on L1 -------------------------------------------------
    struct L2Exec {
        ChainName rollup;
        Hash32 l1_tx;
        std::int64_t l1_ts = 0;
        std::int64_t delay = 0;
        Bytes key;  // arbitrum message number word, optimism payload
        bool linked = true;
        bool victim = false;
        bool with_min_out = false;
    };
    std::vector<L2Exec> execs;
    Json link_truth = Json::array();
    Json orphan_truth = Json::array();
    std::uint64_t message_number = 500;
    const Address bridge_user = make_address(0xa3, 1);
    std::uint64_t ecount = 0;
    for (ChainName rollup : {ChainName::arbitrum, ChainName::optimism, ChainName::zksync}) {
        const int linked = rollup == ChainName::zksync ? 9 : 8;
        for (int i = 0; i < linked + 1; ++i) {
            L2Exec e;
            e.rollup = rollup;
            e.linked = i < linked;
            e.victim = e.linked && (i == 1 || i == 4 || i == 6);
            e.with_min_out = e.victim && i != 6;
            e.delay = static_cast<std::int64_t>(rng.uniform(240, 1800));
            if (rollup == ChainName::arbitrum) {
                const Hash32 w = word_from_uint(BigInt(message_number++));
                e.key.assign(w.bytes.begin(), w.bytes.end());
            } else if (rollup == ChainName::optimism) {
                e.key = random_payload(rng, 2);
            }
            const std::uint64_t block = demo_start_block + 11 + 31 * ecount++;
            const std::size_t idx = execs.size();
            execs.push_back(e);
            schedule.at(block, [&, idx] {
                L2Exec& x = execs[idx];
                TxRecord& tx = eth.tx(make_address(0xa3, 10 + idx));
                tx.fee_paid = BigInt(2) * pow10(15);
                x.l1_tx = tx.hash;
                x.l1_ts = eth.current_timestamp();
                if (x.rollup == ChainName::arbitrum) {
                    Hash32 key;
                    std::copy(x.key.begin(), x.key.end(), key.bytes.begin());
                    eth.log(topic_of("Arbitrum", "InboxMessageDelivered"), {{"link_key", key}},
                            make_address(0xdd, 1));
                } else if (x.rollup == ChainName::optimism) {
                    eth.log_data(topic_of("Optimism", "TransactionDeposited"),
                                 {{"origin", bridge_user}, {"target", make_address(0xc0, 0x0b)}, {"version", BigInt(0)}},
                                 x.key, make_address(0xdd, 2));
                } else {
                    eth.log(topic_of("zkSync", "NewPriorityRequest"),
                            {{"tx_id", BigInt(idx)}, {"l2_tx_hash", tx.hash}, {"expiration", BigInt(x.l1_ts + 86400)}},
                            make_address(0xdd, 3));
                }
            });
        }
    }

    // --- write L1 ---------------------------------------------------------------------
    const std::uint64_t last = std::max(schedule.last_block(), scur + 10);
    schedule.run(
        eth, demo_start_block, last, demo_ts,
        [&](std::uint64_t) {
            if (!rng.chance(0.5))
                return;
            const auto& [pool, pair] = noise[rng.uniform(0, noise.size() - 1)];
            const bool flip = rng.chance(0.5);
            const Token& in = tokens[flip ? pair.second : pair.first];
            const Token& out = tokens[flip ? pair.first : pair.second];
            const Address trader = make_address(0xa4, rng.uniform(1, 40));
            eth.tx(trader).fee_paid = pow10(15);
            market.swap(eth, pool, in.address, out.address, in.fair_reserve / 1000 * rng.uniform(1, 5), trader);
        },
        [&](std::uint64_t b) { market.end_block(b); });
    fx.chains[ChainName::ethereum] = eth.build();

    // --- rollups --------------------------------------------------------------------------
    struct L2Token {
        Address address;
        const char* price_eth;
        BigInt fair_reserve;
    };
    for (ChainName rollup : {ChainName::arbitrum, ChainName::optimism, ChainName::zksync}) {
        const std::uint8_t tag = rollup == ChainName::arbitrum ? 0x21 : rollup == ChainName::optimism ? 0x31 : 0x41;
        const std::uint64_t rn = static_cast<std::uint64_t>(rollup);
        const L2Token weth{make_address(0xe1, rn * 16 + 1), "0.000000000000000001", pow10(21)};
        const L2Token usdc{make_address(0xe1, rn * 16 + 2), "0.0000000005", 2 * pow10(12)};
        prices += hex(weth.address) + "," + std::to_string(day0) + "," + weth.price_eth + "\n";
        prices += hex(usdc.address) + "," + std::to_string(day0) + "," + usdc.price_eth + "\n";
        const Venue venue = rollup == ChainName::optimism ? Venue::uniswap_v3 : Venue::stableswap;
        // StableSwap pools pair two dollar tokens; Uniswap pools pair WETH/USDC.
        const L2Token usdt{make_address(0xe1, rn * 16 + 3), "0.0000000005", 2 * pow10(12)};
        if (venue == Venue::stableswap)
            prices += hex(usdt.address) + "," + std::to_string(day0) + "," + usdt.price_eth + "\n";
        const L2Token& t0 = venue == Venue::stableswap ? usdt : weth;
        const Address pool = market.add_pool(venue, {t0.address, usdc.address},
                                             {t0.fair_reserve * 5, usdc.fair_reserve * 5}, 0);

        ChainWriter l2(rollup, tag);
        std::uint64_t block = 70000000 + 1000 * rn;
        auto ts_of = [&](const L2Exec& e) { return e.l1_ts + e.delay; };
        std::vector<std::size_t> order;
        for (std::size_t i = 0; i < execs.size(); ++i)
            if (execs[i].rollup == rollup)
                order.push_back(i);
        // The rollup's orphan execution: a key nobody emitted on L1.
        std::optional<std::size_t> orphan_pos;
        if (rollup != ChainName::zksync)
            orphan_pos = order.size() / 2;
        std::size_t victim_n = 0;
        for (std::size_t pos = 0; pos < order.size(); ++pos) {
            const L2Exec& e = execs[order[pos]];
            if (orphan_pos && pos == *orphan_pos) {
                l2.block(block, ts_of(e) - 60);
                TxRecord& tx = l2.tx(make_address(0xa5, rn));
                Bytes key = rollup == ChainName::arbitrum ? Bytes(32, 0x99) : random_payload(rng, 1);
                Hash32 k;
                if (rollup == ChainName::arbitrum) {
                    std::copy(key.begin(), key.end(), k.bytes.begin());
                    l2.log(topic_of("Arbitrum", "RedeemScheduled"),
                           {{"link_key", k}, {"retry_tx_hash", make_hash(tag, 9999)}, {"sequence_num", BigInt(1)}},
                           make_address(0xdd, 0x6e));
                } else {
                    k = keccak256(key);
                    l2.log(topic_of("Optimism", "RelayedMessage"), {{"link_key", k}}, make_address(0xdd, 0x4200));
                }
                orphan_truth.push_back({{"kind", "unlinked_l2"}, {"rollup", std::string(to_string(rollup))},
                                        {"tx", hex(tx.hash)}});
                market.end_block(block);
                ++block;
            }
            if (!e.linked) {
                orphan_truth.push_back(
                    {{"kind", "unlinked_l1"}, {"rollup", std::string(to_string(rollup))}, {"tx", hex(e.l1_tx)}});
                continue;
            }
            l2.block(block, ts_of(e));
            const Address user = make_address(0xa6, rn * 100 + pos);
            TxRecord& tx = l2.tx(user, rollup == ChainName::zksync ? std::optional<Hash32>(e.l1_tx) : std::nullopt);
            const Hash32 l2_hash = tx.hash;
            if (rollup == ChainName::arbitrum) {
                Hash32 k;
                std::copy(e.key.begin(), e.key.end(), k.bytes.begin());
                l2.log(topic_of("Arbitrum", "RedeemScheduled"),
                       {{"link_key", k}, {"retry_tx_hash", make_hash(tag, 5000 + pos)}, {"sequence_num", BigInt(0)}},
                       make_address(0xdd, 0x6e));
            } else if (rollup == ChainName::optimism) {
                l2.log(topic_of("Optimism", "RelayedMessage"), {{"link_key", keccak256(e.key)}},
                       make_address(0xdd, 0x4200));
            }
            if (e.victim) {
                const BigInt in = usdc.fair_reserve / 100 * (2 + victim_n);  // 2%.. of a pool side
                const BigInt quote = market.quote(pool, usdc.address, t0.address, in);
                if (e.with_min_out)
                    tx.min_amount_out = quote * 99 / 100;
                l2.log(topic_of("ERC-20", "Transfer"), {{"from", user}, {"to", pool}, {"amount", in}}, usdc.address);
                const BigInt out = market.swap(l2, pool, usdc.address, t0.address, in, user);
                l2.log(topic_of("ERC-20", "Transfer"), {{"from", pool}, {"to", user}, {"amount", out}}, t0.address);
                Json v;
                v["rollup"] = std::string(to_string(rollup));
                v["l1_tx"] = hex(e.l1_tx);
                v["l2_tx"] = hex(l2_hash);
                v["pool"] = hex(pool);
                v["token_in"] = hex(usdc.address);
                v["token_out"] = hex(t0.address);
                v["amount_in"] = in.str();
                v["amount_out"] = out.str();
                gt["victims"].push_back(v);
                ++victim_n;
            } else {
                // A deposit credit: one transfer, not a swap.
                l2.log(topic_of("ERC-20", "Transfer"),
                       {{"from", Address{}}, {"to", user}, {"amount", BigInt(1000 + pos) * pow10(15)}}, weth.address);
            }
            link_truth.push_back({{"rollup", std::string(to_string(rollup))},
                                  {"l1_tx", hex(e.l1_tx)},
                                  {"l2_tx", hex(l2_hash)},
                                  {"delay_s", e.delay}});
            market.end_block(block);
            ++block;
        }
        // Arbitrum also carries one multi-block sandwich inside the window.
        if (rollup == ChainName::arbitrum) {
            const Address bot = make_address(0xc0, 0x2b0);
            const Address bot_eoa = make_address(0xa0, 0x2b0);
            const Address victim = make_address(0xa2, 0x2b);
            const std::int64_t ts = l2.current_timestamp();
            const BigInt a = BigInt(3) * pow10(18);
            Json s;
            l2.block(block, ts + 10);
            TxRecord& f = l2.tx(bot_eoa);
            f.to = bot;
            l2.log(topic_of("ERC-20", "Transfer"), {{"from", pool}, {"to", bot}, {"amount", a}}, weth.address);
            s["front_tx"] = hex(f.hash);
            l2.block(block + 4, ts + 30);
            const Hash32 vh = l2.tx(victim).hash;
            l2.log(topic_of("ERC-20", "Transfer"), {{"from", pool}, {"to", victim}, {"amount", a / 3}}, weth.address);
            s["victim_txs"] = Json::array({hex(vh)});
            l2.block(block + 9, ts + 55);
            TxRecord& bk = l2.tx(bot_eoa);
            bk.to = bot;
            l2.log(topic_of("ERC-20", "Transfer"), {{"from", bot}, {"to", pool}, {"amount", a}}, weth.address);
            s["back_tx"] = hex(bk.hash);
            s["attacker"] = hex(bot);
            gt["rollup_sandwiches"]["arbitrum"].push_back(s);
            // In zkSync terms these would be unlinked executions; on Arbitrum they
            // carry no bridge event and are ignored by the join.
        }
        fx.chains[rollup] = l2.build();
    }

    gt["arbitrages"] = arb_truth;
    gt["arbitrage_cycle_count"] = 25;
    gt["liquidations"] = liq_truth;
    gt["sandwiches"] = sandwich_truth;
    gt["links"] = link_truth;
    gt["orphans"] = orphan_truth;
    gt["competition"] = {{"liquidation_max_group", 2}};
    gt["reverted"] = {{"arbitrage_bots", 6}, {"liquidators", 2}};

    fx.pools = market.directory();
    fx.snapshots_jsonl = market.snapshots().to_jsonl();
    fx.prices_csv = prices;
    const auto corpus = make_bytecode_corpus(seed);
    fx.bytecode_jsonl = bytecode_jsonl(corpus);
    gt["bytecode"] = {{"records", corpus.size()}, {"excluded_verified", 2}, {"excluded_delegatecall", 2},
                      {"cross_chain_cluster_size", 3}};
    fx.config = default_config();
    fx.ground_truth = gt;
    return fx;
}

// --- attack fixture ----------------------------------------------------------------------

Fixture make_attack_fixture(std::uint64_t seed)
{
    Random rng(seed);
    Fixture fx;
    Market market;
    const std::int64_t base = 1656633600;  // 2022-07-01
    const std::int64_t day0 = unix_day(base) - 1;
    const Address weth = make_address(0xe2, 1);
    const Address usdc = make_address(0xe2, 2);
    const Address usdt = make_address(0xe2, 3);
    const Address arb = make_address(0xe2, 4);
    std::string prices = "token_address,unix_day,price_eth\n";
    prices += hex(weth) + "," + std::to_string(day0) + ",0.000000000000000001\n";
    prices += hex(usdc) + "," + std::to_string(day0) + ",0.0000000005\n";
    prices += hex(usdt) + "," + std::to_string(day0) + ",0.0000000005\n";
    prices += hex(arb) + "," + std::to_string(day0) + ",0.0000000000000000005\n";
    prices += "ETHUSD," + std::to_string(day0) + ",2000\n";

    // Pool depth in ETH: 20000, 2000 and a 100M-dollar stable pool.
    struct PoolSpec {
        Address address;
        Address a;
        Address b;
    };
    std::vector<PoolSpec> pools = {
        {market.add_pool(Venue::uniswap_v3, {weth, usdc}, {20000 * pow10(18), 40 * pow10(12)}, 0), weth, usdc},
        {market.add_pool(Venue::uniswap_v3, {weth, arb}, {2000 * pow10(18), 4000 * pow10(21)}, 0), weth, arb},
        {market.add_pool(Venue::stableswap, {usdt, usdc}, {50 * pow10(12), 50 * pow10(12)}, 0), usdt,
         usdc},
    };
    auto price_of = [&](const Address& t) -> Rational {
        if (t == weth)
            return parse_rational("0.000000000000000001");
        if (t == arb)
            return parse_rational("0.0000000000000000005");
        return parse_rational("0.0000000005");
    };

    ChainWriter eth(ChainName::ethereum, 0x12);
    ChainWriter l2(ChainName::arbitrum, 0x22);
    Json victims = Json::array();
    std::uint64_t l1_block = 15050000;
    std::uint64_t l2_block = 17000000;
    const double tolerances[] = {0.001, 0.003, 0.005, 0.01, 0.02, 0.05};
    for (int i = 0; i < 50; ++i) {
        const std::int64_t ts = base + 1200 * i;
        eth.block(l1_block + 50 * i, ts);
        TxRecord& l1tx = eth.tx(make_address(0xa7, i));
        l1tx.fee_paid = BigInt(3) * pow10(15);
        const Hash32 key = word_from_uint(BigInt(9000 + i));
        eth.log(topic_of("Arbitrum", "InboxMessageDelivered"), {{"link_key", key}}, make_address(0xdd, 1));

        const std::int64_t delay = i % 10 == 9 ? static_cast<std::int64_t>(rng.uniform(5, 25))
                                               : static_cast<std::int64_t>(rng.uniform(60, 900));
        l2.block(l2_block + i, ts + delay);
        const Address user = make_address(0xa8, i);
        TxRecord& tx = l2.tx(user);
        l2.log(topic_of("Arbitrum", "RedeemScheduled"),
               {{"link_key", key}, {"retry_tx_hash", make_hash(0x22, 7000 + i)}, {"sequence_num", BigInt(0)}},
               make_address(0xdd, 0x6e));
        const PoolSpec& p = pools[i % 3];
        const bool flip = rng.chance(0.5);
        const Address in = flip ? p.b : p.a;
        const Address out = flip ? p.a : p.b;
        // Victim size: 10^(2.7 .. 6.5) dollars, log-uniform.
        const double exponent = 2.7 + 3.8 * static_cast<double>(rng.uniform(0, 1000)) / 1000.0;
        const Rational usd(static_cast<long long>(std::pow(10.0, exponent)));
        const Rational eth_amount = usd / 2000;
        const Rational units = eth_amount / price_of(in);
        const BigInt amount = boost::multiprecision::numerator(units) / boost::multiprecision::denominator(units);
        const BigInt quote = market.quote(p.address, in, out, amount);
        if (i % 5 != 4) {
            const double tol = tolerances[rng.uniform(0, 5)];
            tx.min_amount_out = quote * static_cast<long long>((1.0 - tol) * 100000) / 100000;
        }
        l2.log(topic_of("ERC-20", "Transfer"), {{"from", user}, {"to", p.address}, {"amount", amount}}, in);
        const BigInt got = market.swap(l2, p.address, in, out, amount, user);
        l2.log(topic_of("ERC-20", "Transfer"), {{"from", p.address}, {"to", user}, {"amount", got}}, out);
        market.end_block(l2_block + i);
        victims.push_back({{"l2_tx", hex(tx.hash)}, {"pool", hex(p.address)}, {"usd", format_fixed(usd, 0)}});
    }
    fx.chains[ChainName::ethereum] = eth.build();
    fx.chains[ChainName::arbitrum] = l2.build();
    fx.pools = market.directory();
    fx.snapshots_jsonl = market.snapshots().to_jsonl();
    fx.prices_csv = prices;
    fx.config = default_config();
    fx.ground_truth = {{"victims", victims}, {"victim_count", 50}};
    return fx;
}

// --- bulk fixture ---------------------------------------------------------------------

Fixture make_bulk_fixture(std::uint64_t seed, std::size_t target_logs)
{
    Random rng(seed);
    Fixture fx;
    const auto tokens = l1_tokens();
    Market market;
    struct P {
        Address address;
        int a;
        int b;
    };
    std::vector<P> pools;
    for (int i = 0; i < 7; ++i)
        for (int j = i + 1; j < 7; ++j) {
            if ((i == DAI && j == SUSD) || rng.chance(0.25))
                continue;
            const Venue v = cp_venue(pools.size());
            const BigInt scale = 2 + rng.uniform(0, 6);
            pools.push_back({market.add_pool(v, {tokens[i].address, tokens[j].address},
                                             {tokens[i].fair_reserve * scale, tokens[j].fair_reserve * scale}, 0),
                             i, j});
        }
    // Every token needs a pool to continue a walk from.
    auto pools_with = [&](int t) {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < pools.size(); ++i)
            if (pools[i].a == t || pools[i].b == t)
                out.push_back(i);
        return out;
    };

    ChainWriter w(ChainName::ethereum, 0x13);
    std::uint64_t block = 16000000;
    const std::int64_t base = 1669852800;  // 2022-12-01
    std::size_t cycles = 0;
    const Address feed = make_address(0xfe, 9);
    while (w.log_count() < target_logs) {
        w.block(block, base + static_cast<std::int64_t>(block - 16000000) * 12);
        const std::uint64_t txs = rng.uniform(8, 14);
        for (std::uint64_t t = 0; t < txs; ++t) {
            const Address from = make_address(0xa9, rng.uniform(1, 300));
            TxRecord& tx = w.tx(from);
            tx.fee_paid = BigInt(rng.uniform(1, 20)) * pow10(14);
            if (rng.chance(0.03))
                tx.status = TxStatus::reverted;
            const std::uint64_t roll = rng.uniform(0, 99);
            if (roll < 45) {
                // Random walk of 1..8 swaps, closed into a cycle half the time.
                const int start = static_cast<int>(rng.uniform(0, 6));
                int cur = start;
                const std::size_t hops = rng.uniform(1, 7);
                BigInt amount = tokens[start].fair_reserve / 10000 * rng.uniform(1, 50);
                std::optional<std::size_t> last_pool;
                for (std::size_t h = 0; h < hops; ++h) {
                    auto cands = pools_with(cur);
                    if (cands.empty())
                        break;
                    const std::size_t pi = cands[rng.uniform(0, cands.size() - 1)];
                    if (last_pool && pi == *last_pool)
                        break;
                    const int next = pools[pi].a == cur ? pools[pi].b : pools[pi].a;
                    amount = market.swap(w, pools[pi].address, tokens[cur].address, tokens[next].address, amount, from);
                    last_pool = pi;
                    cur = next;
                    if (cur == start)
                        break;
                }
                if (cur != start && rng.chance(0.5)) {
                    for (std::size_t pi : pools_with(cur)) {
                        const int next = pools[pi].a == cur ? pools[pi].b : pools[pi].a;
                        if (next == start && (!last_pool || pi != *last_pool)) {
                            market.swap(w, pools[pi].address, tokens[cur].address, tokens[start].address, amount, from);
                            ++cycles;
                            break;
                        }
                    }
                }
            } else if (roll < 85) {
                // A user swap seen through token transfers.
                const P& p = pools[rng.uniform(0, pools.size() - 1)];
                const bool flip = rng.chance(0.5);
                const Token& in = tokens[flip ? p.b : p.a];
                const Token& out = tokens[flip ? p.a : p.b];
                const BigInt amount = in.fair_reserve / 10000 * rng.uniform(1, 30);
                w.log(topic_of("ERC-20", "Transfer"), {{"from", from}, {"to", p.address}, {"amount", amount}},
                      in.address);
                const BigInt got = market.swap(w, p.address, in.address, out.address, amount, from);
                w.log(topic_of("ERC-20", "Transfer"), {{"from", p.address}, {"to", from}, {"amount", got}},
                      out.address);
            } else if (roll < 95) {
                const Token& t = tokens[rng.uniform(0, 6)];
                w.log(topic_of("ERC-20", "Transfer"),
                      {{"from", from}, {"to", make_address(0xa9, rng.uniform(1, 300))},
                       {"amount", t.fair_reserve / 100000 * rng.uniform(1, 100)}},
                      t.address);
            } else {
                w.log(topic_of("Chainlink", "AnswerUpdated"),
                      {{"answer", BigInt(rng.uniform(2500, 3500)) * pow10(8)},
                       {"round_id", BigInt(block)},
                       {"updated_at", BigInt(w.current_timestamp())}},
                      feed);
            }
        }
        market.end_block(block);
        ++block;
    }
    fx.chains[ChainName::ethereum] = w.build();
    fx.pools = market.directory();
    fx.config = default_config();
    fx.ground_truth = {{"logs", w.log_count()}, {"closed_walks", cycles}};
    return fx;
}

// --- bytecode corpus --------------------------------------------------------------------

namespace {

// Opcodes used for filler: arithmetic, stack, memory, flow, no pushes.
constexpr std::uint8_t filler_ops[] = {0x01, 0x02, 0x03, 0x04, 0x10, 0x11, 0x14, 0x15, 0x16, 0x17, 0x19,
                                       0x1b, 0x1c, 0x20, 0x33, 0x34, 0x35, 0x36, 0x50, 0x51, 0x52, 0x54,
                                       0x55, 0x56, 0x57, 0x5b, 0x80, 0x81, 0x82, 0x90, 0x91, 0xf1, 0xf3, 0xfd};

struct Shape {
    // Non-push opcode, or a push width 1..32 encoded as 0x100 + width.
    std::vector<int> ops;
};

Shape random_shape(Random& rng, std::size_t length)
{
    Shape s;
    for (std::size_t i = 0; i < length; ++i) {
        if (rng.chance(0.35))
            s.ops.push_back(0x100 + static_cast<int>(rng.uniform(1, 32)));
        else
            s.ops.push_back(filler_ops[rng.uniform(0, sizeof(filler_ops) - 1)]);
    }
    return s;
}

Bytes metadata_trailer(Random& rng)
{
    Bytes t = {0xa2, 0x64, 'i', 'p', 'f', 's', 0x58, 0x22};
    for (int i = 0; i < 34; ++i)
        t.push_back(static_cast<std::uint8_t>(rng.uniform(0, 255)));
    for (int c : {0x64, int('s'), int('o'), int('l'), int('c'), 0x43, 0x00, 0x08, 0x11})
        t.push_back(static_cast<std::uint8_t>(c));
    const std::size_t n = t.size();
    t.push_back(static_cast<std::uint8_t>(n >> 8));
    t.push_back(static_cast<std::uint8_t>(n & 0xff));
    return t;
}

Bytes render(Random& rng, const Shape& s, bool trailer)
{
    Bytes code;
    for (int op : s.ops) {
        if (op >= 0x100) {
            const int width = op - 0x100;
            code.push_back(static_cast<std::uint8_t>(0x5f + width));
            for (int i = 0; i < width; ++i)
                code.push_back(static_cast<std::uint8_t>(rng.uniform(0, 255)));
        } else {
            code.push_back(static_cast<std::uint8_t>(op));
        }
    }
    if (trailer) {
        const Bytes t = metadata_trailer(rng);
        code.insert(code.end(), t.begin(), t.end());
    }
    return code;
}

}  // namespace

std::vector<BytecodeRecord> make_bytecode_corpus(std::uint64_t seed)
{
    Random rng(seed * 31 + 5);
    std::vector<BytecodeRecord> out;
    std::uint64_t n = 1;
    auto add = [&](ChainName chain, Bytes code, bool verified) {
        out.push_back({ChainId::of(chain), make_address(0xcc, n++), std::move(code), verified});
    };
    // A bot deployed on three chains with different constants.
    const Shape bot = random_shape(rng, 180);
    add(ChainName::ethereum, render(rng, bot, true), false);
    add(ChainName::arbitrum, render(rng, bot, true), false);
    add(ChainName::optimism, render(rng, bot, false), false);
    // The same bot verified on Ethereum: excluded.
    add(ChainName::ethereum, render(rng, bot, true), true);
    // Two copies of another bot on Ethereum only.
    const Shape pair = random_shape(rng, 120);
    add(ChainName::ethereum, render(rng, pair, true), false);
    add(ChainName::ethereum, render(rng, pair, true), false);
    // Proxies: DELEGATECALL in the skeleton.
    for (int i = 0; i < 2; ++i) {
        Shape proxy = random_shape(rng, 40);
        proxy.ops.insert(proxy.ops.begin() + 10, 0xf4);
        add(i == 0 ? ChainName::ethereum : ChainName::arbitrum, render(rng, proxy, true), false);
    }
    // A verified token contract.
    add(ChainName::optimism, render(rng, random_shape(rng, 300), true), true);
    // Singletons.
    for (int i = 0; i < 4; ++i)
        add(i % 2 ? ChainName::zksync : ChainName::arbitrum, render(rng, random_shape(rng, 60 + 20 * i), i != 3),
            false);
    return out;
}

std::string bytecode_jsonl(const std::vector<BytecodeRecord>& records)
{
    std::string s;
    for (const auto& r : records) {
        Json j;
        j["chain"] = std::string(to_string(r.chain.name));
        j["address"] = to_hex(r.address);
        j["code_hex"] = to_hex(r.code);
        j["verified"] = r.verified;
        s += j.dump() + "\n";
    }
    return s;
}

void write_fixture(const Fixture& fx, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    auto put = [&](const std::string& name, const std::string& content) {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out)
            throw Error("cannot write " + (dir / name).string());
        out << content;
    };
    for (const auto& [chain, data] : fx.chains)
        put(std::string(to_string(chain)) + ".jsonl", serialize_fixture(data));
    if (!fx.pools.empty())
        put("pools.json", fx.pools.to_json());
    if (!fx.prices_csv.empty())
        put("prices.csv", fx.prices_csv);
    if (!fx.snapshots_jsonl.empty())
        put("snapshots.jsonl", fx.snapshots_jsonl);
    if (!fx.bytecode_jsonl.empty())
        put("bytecode.jsonl", fx.bytecode_jsonl);
    if (!fx.config.is_null())
        put("config.json", fx.config.dump(2) + "\n");
    if (!fx.ground_truth.is_null())
        put("ground_truth.json", fx.ground_truth.dump(2) + "\n");
}

}  // namespace mevlens::synth
