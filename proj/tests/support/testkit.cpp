#include "testkit.hpp"

#include <algorithm>
#include <array>
#include <set>

namespace testkit {

Address addr(std::uint64_t n, std::uint8_t tag)
{
    Address a;
    a.bytes[0] = tag;
    for (int i = 0; i < 8; ++i)
        a.bytes[19 - i] = static_cast<std::uint8_t>(n >> (8 * i));
    return a;
}

Hash32 txh(std::uint64_t n, std::uint8_t tag)
{
    Hash32 h;
    h.bytes[0] = tag;
    for (int i = 0; i < 8; ++i)
        h.bytes[31 - i] = static_cast<std::uint8_t>(n >> (8 * i));
    return h;
}

// --- reference keccak ------------------------------------------------------

namespace {

using Lanes = std::array<std::array<std::uint64_t, 5>, 5>;  // [x][y]

std::uint64_t rotl(std::uint64_t v, unsigned n)
{
    n %= 64;
    return n == 0 ? v : (v << n) | (v >> (64 - n));
}

bool rc_bit(unsigned t)
{
    if (t % 255 == 0)
        return true;
    std::array<bool, 9> r{true, false, false, false, false, false, false, false, false};
    for (unsigned i = 1; i <= t % 255; ++i) {
        for (int k = 8; k > 0; --k)
            r[k] = r[k - 1];
        r[0] = false;
        r[0] = r[0] != r[8];
        r[4] = r[4] != r[8];
        r[5] = r[5] != r[8];
        r[6] = r[6] != r[8];
    }
    return r[0];
}

struct Constants {
    std::array<std::uint64_t, 24> rc{};
    std::array<std::array<unsigned, 5>, 5> rho{};

    Constants()
    {
        for (unsigned ir = 0; ir < 24; ++ir)
            for (unsigned j = 0; j <= 6; ++j)
                if (rc_bit(j + 7 * ir))
                    rc[ir] |= std::uint64_t{1} << ((1u << j) - 1);
        unsigned x = 1, y = 0;
        for (unsigned t = 0; t < 24; ++t) {
            rho[x][y] = ((t + 1) * (t + 2) / 2) % 64;
            const unsigned nx = y;
            const unsigned ny = (2 * x + 3 * y) % 5;
            x = nx;
            y = ny;
        }
    }
};

void permute(Lanes& a)
{
    static const Constants k;
    for (unsigned round = 0; round < 24; ++round) {
        std::array<std::uint64_t, 5> c{};
        for (unsigned x = 0; x < 5; ++x)
            c[x] = a[x][0] ^ a[x][1] ^ a[x][2] ^ a[x][3] ^ a[x][4];
        for (unsigned x = 0; x < 5; ++x) {
            const std::uint64_t d = c[(x + 4) % 5] ^ rotl(c[(x + 1) % 5], 1);
            for (unsigned y = 0; y < 5; ++y)
                a[x][y] ^= d;
        }
        Lanes b{};
        for (unsigned x = 0; x < 5; ++x)
            for (unsigned y = 0; y < 5; ++y)
                b[y][(2 * x + 3 * y) % 5] = rotl(a[x][y], k.rho[x][y]);
        for (unsigned x = 0; x < 5; ++x)
            for (unsigned y = 0; y < 5; ++y)
                a[x][y] = b[x][y] ^ (~b[(x + 1) % 5][y] & b[(x + 2) % 5][y]);
        a[0][0] ^= k.rc[round];
    }
}

}  // namespace

Hash32 reference_keccak(std::span<const std::uint8_t> data)
{
    constexpr std::size_t rate = 136;
    std::vector<std::uint8_t> msg(data.begin(), data.end());
    msg.push_back(0x01);
    while (msg.size() % rate != 0)
        msg.push_back(0x00);
    msg.back() |= 0x80;

    Lanes s{};
    for (std::size_t block = 0; block < msg.size(); block += rate) {
        for (std::size_t i = 0; i < rate / 8; ++i) {
            std::uint64_t lane = 0;
            for (int b = 0; b < 8; ++b)
                lane |= std::uint64_t{msg[block + 8 * i + b]} << (8 * b);
            s[i % 5][i / 5] ^= lane;
        }
        permute(s);
    }
    Hash32 out;
    for (std::size_t i = 0; i < 4; ++i)
        for (int b = 0; b < 8; ++b)
            out.bytes[8 * i + b] = static_cast<std::uint8_t>(s[i % 5][i / 5] >> (8 * b));
    return out;
}

Hash32 reference_keccak(std::string_view text)
{
    return reference_keccak(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

// --- rng -------------------------------------------------------------------

std::uint64_t Rng::uniform(std::uint64_t lo, std::uint64_t hi)
{
    return std::uniform_int_distribution<std::uint64_t>(lo, hi)(gen_);
}

BigInt Rng::big(const BigInt& lo, const BigInt& hi)
{
    const BigInt span = hi - lo + 1;
    BigInt r = 0;
    const unsigned words = static_cast<unsigned>(boost::multiprecision::msb(span) / 64 + 2);
    for (unsigned i = 0; i < words; ++i)
        r = (r << 64) + gen_();
    return lo + r % span;
}

bool Rng::chance(double p)
{
    return std::bernoulli_distribution(p)(gen_);
}

// --- dataset builder -------------------------------------------------------

DatasetBuilder::DatasetBuilder(ChainName chain, std::uint64_t tx_seed) : chain_(ChainId::of(chain)), tx_counter_(tx_seed)
{
}

DatasetBuilder& DatasetBuilder::block(std::uint64_t number, std::int64_t timestamp)
{
    BlockRecord b;
    b.chain = chain_;
    b.number = number;
    b.timestamp = timestamp;
    blocks_.push_back(b);
    next_log_ = 0;
    return *this;
}

TxRecord& DatasetBuilder::tx(const Address& from, std::optional<Hash32> hash)
{
    if (blocks_.empty())
        throw Error("DatasetBuilder: tx before any block");
    TxRecord t;
    t.chain = chain_;
    t.hash = hash.value_or(txh(tx_counter_++));
    t.block_number = blocks_.back().number;
    t.tx_index = static_cast<std::uint32_t>(blocks_.back().tx_hashes.size());
    t.from = from;
    t.to = addr(0xC0FFEE);
    blocks_.back().tx_hashes.push_back(t.hash);
    txs_.push_back(t);
    return txs_.back();
}

LogPosition DatasetBuilder::next_position() const
{
    return {blocks_.back().number, txs_.back().tx_index, next_log_};
}

EventLog& DatasetBuilder::log(const Hash32& topic, const FieldValues& fields, const Address& emitter)
{
    if (txs_.empty() || txs_.back().block_number != blocks_.back().number)
        throw Error("DatasetBuilder: log outside a tx");
    logs_.push_back(encode_event(topic, fields, emitter, chain_, next_position(), txs_.back().hash));
    ++next_log_;
    return logs_.back();
}

EventLog& DatasetBuilder::log_data(const Hash32& topic, const FieldValues& fields, Bytes data, const Address& emitter)
{
    if (txs_.empty() || txs_.back().block_number != blocks_.back().number)
        throw Error("DatasetBuilder: log outside a tx");
    logs_.push_back(
        encode_event_with_data(topic, fields, std::move(data), emitter, chain_, next_position(), txs_.back().hash));
    ++next_log_;
    return logs_.back();
}

ChainDataset DatasetBuilder::build() const
{
    return ChainDataset(blocks_, txs_, logs_);
}

// --- topics ----------------------------------------------------------------

namespace topics {
Hash32 uniswap_v2_swap() { return reference_keccak("Swap(address,uint256,uint256,uint256,uint256,address)"); }
Hash32 uniswap_v3_swap() { return reference_keccak("Swap(address,address,int256,int256,uint160,uint128,int24)"); }
Hash32 balancer_v1_swap() { return reference_keccak("LOG_SWAP(address,address,address,uint256,uint256)"); }
Hash32 balancer_v2_swap() { return reference_keccak("Swap(bytes32,address,address,uint256,uint256)"); }
Hash32 curve_exchange() { return reference_keccak("TokenExchange(address,int128,uint256,int128,uint256)"); }
Hash32 curve_exchange_underlying()
{
    return reference_keccak("TokenExchangeUnderlying(address,int128,uint256,int128,uint256)");
}
Hash32 aave_v1_liquidation()
{
    return reference_keccak("LiquidationCall(address,address,address,uint256,uint256,uint256,address,bool,uint256)");
}
Hash32 aave_v2_liquidation()
{
    return reference_keccak("LiquidationCall(address,address,address,uint256,uint256,address,bool)");
}
Hash32 compound_liquidate_borrow() { return reference_keccak("LiquidateBorrow(address,address,uint256,address,uint256)"); }
Hash32 compound_redeem() { return reference_keccak("Redeem(address,uint256,uint256)"); }
Hash32 transfer() { return reference_keccak("Transfer(address,address,uint256)"); }
Hash32 answer_updated() { return reference_keccak("AnswerUpdated(int256,uint256,uint256)"); }
Hash32 aave_v1_flashloan()
{
    return reference_keccak("FlashLoan(address,address,uint256,uint256,uint256,uint256)");
}
Hash32 aave_v2_flashloan() { return reference_keccak("FlashLoan(address,address,address,uint256,uint256,uint16)"); }
Hash32 aave_v3_flashloan()
{
    return reference_keccak("FlashLoan(address,address,address,uint256,uint8,uint256,uint16)");
}
Hash32 balancer_flashloan() { return reference_keccak("FlashLoan(address,address,uint256,uint256)"); }
Hash32 inbox_message_delivered() { return reference_keccak("InboxMessageDelivered(uint256,bytes)"); }
Hash32 transaction_enqueued()
{
    return reference_keccak("TransactionEnqueued(address,address,uint256,bytes,uint256,uint256)");
}
Hash32 transaction_deposited() { return reference_keccak("TransactionDeposited(address,address,uint256,bytes)"); }
Hash32 redeem_scheduled()
{
    return reference_keccak("RedeemScheduled(bytes32,bytes32,uint64,uint64,address,uint256,uint256)");
}
Hash32 relayed_message() { return reference_keccak("RelayedMessage(bytes32)"); }
Hash32 token_swap() { return reference_keccak("TokenSwap(address,uint256,uint256,uint128,uint128)"); }
}  // namespace topics

// --- arbitrage oracle ------------------------------------------------------

namespace {

bool links(const SwapAction& a, const SwapAction& b)
{
    return a.token_out == b.token_in && a.amount_out >= b.amount_in && a.venue != b.venue;
}

bool valid_cycle(const std::vector<SwapAction>& s, const std::vector<std::size_t>& seq)
{
    if (seq.size() < 2)
        return false;
    const Address& home = s[seq[0]].token_in;
    for (std::size_t k = 0; k + 1 < seq.size(); ++k) {
        if (!links(s[seq[k]], s[seq[k + 1]]))
            return false;
        if (s[seq[k]].token_out == home)
            return false;
    }
    return s[seq.back()].token_out == home;
}

}  // namespace

std::vector<std::vector<std::size_t>> brute_force_cycles(const std::vector<SwapAction>& swaps)
{
    const std::size_t n = swaps.size();
    if (n > 20)
        throw Error("brute_force_cycles: too many swaps");
    std::vector<bool> used(n, false);
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t seed = 0; seed < n; ++seed) {
        if (used[seed])
            continue;
        std::vector<std::size_t> later;
        for (std::size_t i = seed + 1; i < n; ++i)
            if (!used[i])
                later.push_back(i);
        std::optional<std::vector<std::size_t>> best;
        for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << later.size()); ++mask) {
            std::vector<std::size_t> seq{seed};
            for (std::size_t b = 0; b < later.size(); ++b)
                if (mask >> b & 1)
                    seq.push_back(later[b]);
            if (valid_cycle(swaps, seq) && (!best || seq < *best))
                best = seq;
        }
        used[seed] = true;
        if (best) {
            for (auto i : *best)
                used[i] = true;
            out.push_back(*best);
        }
    }
    return out;
}

// --- sandwich oracle -------------------------------------------------------

std::vector<SandwichKey> sliding_window_sandwiches(const std::vector<TransferAction>& transfers,
                                                   std::uint64_t window)
{
    std::set<SandwichKey> found;
    if (transfers.empty())
        return {};
    std::uint64_t lo = UINT64_MAX, hi = 0;
    for (const auto& t : transfers) {
        lo = std::min(lo, t.position.block);
        hi = std::max(hi, t.position.block);
    }
    const std::uint64_t first = lo >= window - 1 ? lo - (window - 1) : 0;
    std::set<std::pair<Hash32, Hash32>> pairs;
    for (std::uint64_t s = first; s <= hi; ++s) {
        const std::uint64_t e = s + window - 1;
        std::vector<const TransferAction*> in;
        for (const auto& t : transfers)
            if (t.position.block >= s && t.position.block <= e)
                in.push_back(&t);
        for (std::size_t i = 0; i < in.size(); ++i) {
            const auto& a1 = *in[i];
            if (a1.sender == a1.receiver)
                continue;
            for (std::size_t j = i + 1; j < in.size(); ++j) {
                const auto& a2 = *in[j];
                if (a2.token != a1.token || a2.tx_hash == a1.tx_hash || a2.position.tx() <= a1.position.tx())
                    continue;
                if (a2.sender != a1.receiver || a2.receiver != a1.sender || a2.amount > a1.amount)
                    continue;
                std::vector<Hash32> victims;
                for (std::size_t k = i + 1; k < j; ++k) {
                    const auto& v = *in[k];
                    if (v.token != a1.token || v.position.tx() <= a1.position.tx() ||
                        v.position.tx() >= a2.position.tx())
                        continue;
                    if (v.sender == a1.sender && v.receiver != a1.receiver &&
                        std::find(victims.begin(), victims.end(), v.tx_hash) == victims.end())
                        victims.push_back(v.tx_hash);
                }
                if (victims.empty())
                    continue;
                if (pairs.emplace(a1.tx_hash, a2.tx_hash).second)
                    found.insert({a1.tx_hash, a2.tx_hash, victims});
                break;
            }
        }
    }
    return {found.begin(), found.end()};
}

std::vector<SandwichKey> keys_of(const std::vector<SandwichFinding>& findings)
{
    std::vector<SandwichKey> out;
    for (const auto& f : findings)
        out.push_back({f.front_tx, f.back_tx, f.victim_txs});
    std::sort(out.begin(), out.end());
    return out;
}

// --- amm oracles -----------------------------------------------------------

namespace {

BigInt floor_of(const Rational& r)
{
    BigInt num = boost::multiprecision::numerator(r);
    BigInt den = boost::multiprecision::denominator(r);
    BigInt q = num / den;
    if (num < 0 && q * den != num)
        --q;
    return q;
}

}  // namespace

BigInt rational_cp_out(const BigInt& r_in, const BigInt& r_out, const BigInt& in, const BigInt& fee_num,
                       const BigInt& fee_den)
{
    const BigInt a = floor_of(Rational(in) * Rational(fee_den - fee_num, fee_den));
    return floor_of(Rational(r_out) * Rational(a) / Rational(r_in + a));
}

int stable_residual_sign(std::span<const BigInt> x, const BigInt& amp, const BigInt& D)
{
    const std::size_t n = x.size();
    BigInt nn = 1;
    for (std::size_t i = 0; i < n; ++i)
        nn *= n;
    const BigInt ann = amp * nn;
    BigInt sum = 0, prod = 1;
    for (const auto& v : x) {
        sum += v;
        prod *= v;
    }
    // A zero balance sends the last term to +infinity.
    if (prod == 0)
        return -1;
    BigInt dpow = 1;
    for (std::size_t i = 0; i <= n; ++i)
        dpow *= D;
    const Rational f = Rational(ann * sum + D - ann * D) - Rational(dpow, nn * prod);
    return f > 0 ? 1 : (f < 0 ? -1 : 0);
}

std::vector<GridPoint> brute_force_frontrun_grid(const BigInt& r_in, const BigInt& r_out, const BigInt& fee_num,
                                                 const BigInt& fee_den, const BigInt& victim_in,
                                                 const BigInt& min_out, const BigInt& limit)
{
    std::vector<GridPoint> grid;
    for (BigInt x = 0; x <= limit; ++x) {
        BigInt in = r_in, out = r_out;
        BigInt f_out = 0;
        if (x > 0) {
            f_out = rational_cp_out(in, out, x, fee_num, fee_den);
            in += x;
            out -= f_out;
        }
        const BigInt v_out = rational_cp_out(in, out, victim_in, fee_num, fee_den);
        if (v_out < min_out)
            break;
        in += victim_in;
        out -= v_out;
        BigInt back = 0;
        if (f_out > 0)
            back = rational_cp_out(out, in, f_out, fee_num, fee_den);
        grid.push_back({x, back - x, v_out});
    }
    return grid;
}

std::unique_ptr<PlantedArbitrage> plant_arbitrage(std::uint64_t distance, std::uint64_t block)
{
    auto p = std::make_unique<PlantedArbitrage>();
    const Address a = addr(0xa, 0xe0), b = addr(0xb, 0xe0);
    const Address p1 = addr(0x101, 0xb0), p2 = addr(0x102, 0xb0), other = addr(0x103, 0xb0);
    p->pools.add({p1, PoolKind::constant_product, {a, b}});
    p->pools.add({p2, PoolKind::constant_product, {b, a}});
    p->pools.add({other, PoolKind::constant_product, {a, b}});
    const BigInt base = 1000000;
    p->state.add_pool(p1, 0, {base, base});
    p->state.add_pool(p2, 0, {base, base});
    p->state.add_pool(other, 0, {base, base});

    std::uint64_t tx = 5000;
    auto make = [&](const Address& venue, const Address& in, const Address& out, BigInt amount_in, BigInt amount_out,
                    std::uint64_t at, std::uint32_t tx_index, std::uint32_t log_index, std::uint64_t id) {
        SwapAction s;
        s.venue = venue;
        s.token_in = in;
        s.token_out = out;
        s.amount_in = std::move(amount_in);
        s.amount_out = std::move(amount_out);
        s.position = {at, tx_index, log_index};
        s.tx_hash = txh(id, 0x77);
        return s;
    };

    const std::uint64_t planted_block = block - distance;
    PoolState pool1 = PoolState::from_metadata(*p->pools.find(p1), {base, base});
    const SwapQuote big = cp_swap_out(pool1, b, 100000);
    p->opportunity_tx = txh(tx, 0x77);
    p->swaps.push_back(make(p1, b, a, 100000, big.amount_out, planted_block, 0, 0, tx++));
    p->state.add_pool(p1, planted_block, big.post_state.reserves);

    // Noise: tiny swaps on the second pool after the planted one, and swaps on
    // an unrelated pool everywhere.
    for (std::uint64_t at = planted_block + 1; at < block; at += 3)
        p->swaps.push_back(make(p2, a, b, 1, 0, at, 1, 0, tx++));
    for (std::uint64_t at = block > 150 ? block - 150 : 0; at <= block; at += 2)
        p->swaps.push_back(make(other, a, b, 10, 9, at, 2, 0, tx++));
    // The finding's own swaps.
    const std::uint32_t own = 3;
    const SwapQuote leg1 = cp_swap_out(PoolState::from_metadata(*p->pools.find(p1), big.post_state.reserves), a, 1000);
    const SwapQuote leg2 = cp_swap_out(PoolState::from_metadata(*p->pools.find(p2), {base, base}), b, leg1.amount_out);
    SwapAction s1 = make(p1, a, b, 1000, leg1.amount_out, block, own, 0, tx);
    SwapAction s2 = make(p2, b, a, leg1.amount_out, leg2.amount_out, block, own, 1, tx);
    p->swaps.push_back(s1);
    p->swaps.push_back(s2);
    std::stable_sort(p->swaps.begin(), p->swaps.end(),
                     [](const SwapAction& x, const SwapAction& y) { return x.position < y.position; });
    p->finding.tx_hash = s1.tx_hash;
    p->finding.position = s1.position.tx();
    p->finding.cycle = {s1, s2};
    p->finding.token_balances = cycle_balances(p->finding.cycle);
    return p;
}

PlainStats sorted_stats(std::vector<Rational> v)
{
    PlainStats s;
    if (v.empty())
        return s;
    std::sort(v.begin(), v.end());
    s.count = v.size();
    s.min = v.front();
    s.max = v.back();
    for (const auto& x : v)
        s.total += x;
    s.mean = s.total / Rational(static_cast<long long>(v.size()));
    const std::size_t n = v.size();
    s.median = n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
    std::size_t rank = (9 * n + 9) / 10;  // ceil(0.9 n)
    s.p90 = v[rank - 1];
    return s;
}

// --- bytecode oracle -------------------------------------------------------

Bytes oracle_skeleton(const Bytes& code)
{
    std::size_t end = code.size();
    if (code.size() >= 2) {
        const std::size_t len = (std::size_t(code[code.size() - 2]) << 8) | code.back();
        if (len + 2 <= code.size() && len > 0) {
            const std::uint8_t head = code[code.size() - 2 - len];
            if (head >= 0xa1 && head <= 0xb7)
                end = code.size() - 2 - len;
        }
    }
    Bytes out;
    for (std::size_t i = 0; i < end;) {
        const std::uint8_t op = code[i];
        if (op >= 0x60 && op <= 0x7f) {
            i += 1 + (op - 0x5f);
            continue;
        }
        out.push_back(op);
        ++i;
    }
    return out;
}

}  // namespace testkit
