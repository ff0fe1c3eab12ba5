#include <gtest/gtest.h>

#include "mevlens/keccak.hpp"
#include "testkit.hpp"

using namespace mevlens;
using namespace testkit;

namespace {

const Address token0 = addr(0x10, 0xe0);
const Address token1 = addr(0x11, 0xe0);
const Address token2 = addr(0x12, 0xe0);
const Address pool_v2 = addr(0x501, 0xb0);
const Address pool_v3 = addr(0x502, 0xb0);
const Address pool_curve = addr(0x503, 0xb0);

PoolDirectory directory()
{
    PoolDirectory d;
    d.add({pool_v2, PoolKind::constant_product, {token0, token1}});
    d.add({pool_v3, PoolKind::constant_product, {token0, token1}});
    PoolMetadata curve{pool_curve, PoolKind::stableswap, {token0, token1}, {token0, token1, token2}, 4, 10000, 100};
    d.add(curve);
    return d;
}

// A raw 32-byte big-endian word written by hand.
void put_word(Bytes& data, std::size_t slot, std::uint64_t v, bool negative = false)
{
    if (data.size() < (slot + 1) * 32)
        data.resize((slot + 1) * 32, 0);
    std::uint64_t w = negative ? ~(v - 1) : v;
    for (int i = 0; i < 32; ++i)
        data[slot * 32 + i] = negative ? 0xff : 0x00;
    for (int i = 0; i < 8; ++i)
        data[slot * 32 + 31 - i] = static_cast<std::uint8_t>(w >> (8 * i));
}

void put_address(Bytes& data, std::size_t slot, const Address& a)
{
    if (data.size() < (slot + 1) * 32)
        data.resize((slot + 1) * 32, 0);
    std::copy(a.bytes.begin(), a.bytes.end(), data.begin() + static_cast<std::ptrdiff_t>(slot * 32 + 12));
}

Hash32 topic_of(const Address& a)
{
    Hash32 h;
    std::copy(a.bytes.begin(), a.bytes.end(), h.bytes.begin() + 12);
    return h;
}

EventLog raw_log(const Hash32& topic0, std::vector<Hash32> more, Bytes data, const Address& emitter)
{
    EventLog l;
    l.chain = ChainId::of(ChainName::ethereum);
    l.address = emitter;
    l.topics.push_back(topic0);
    for (auto& t : more)
        l.topics.push_back(t);
    l.data = std::move(data);
    l.block_number = 10;
    l.tx_hash = txh(1);
    return l;
}

}  // namespace

TEST(WordDecoding, SlotValues)
{
    Bytes data(32, 0);
    EXPECT_EQ(decode_uint(data, 0), 0);
    put_word(data, 0, 0x0de0b6b3a7640000ull);
    EXPECT_EQ(decode_uint(data, 0), BigInt("1000000000000000000"));
    Bytes ones(32, 0xff);
    EXPECT_EQ(decode_int(ones, 0), -1);
    EXPECT_EQ(decode_uint(ones, 0), (BigInt(1) << 256) - 1);
    EXPECT_THROW(decode_uint(ones, 1), SlotOutOfRange);
    put_address(data, 1, token2);
    EXPECT_EQ(decode_address(data, 1), token2);
}

TEST(SwapDecoding, UniswapV2HandBuilt)
{
    const PoolDirectory pools = directory();
    Bytes data;
    put_word(data, 0, 100);
    put_word(data, 1, 0);
    put_word(data, 2, 0);
    put_word(data, 3, 90);
    const EventLog log =
        raw_log(topics::uniswap_v2_swap(), {topic_of(addr(1)), topic_of(addr(2))}, data, pool_v2);
    const auto s = decode_swap(log, &pools);
    ASSERT_TRUE(s.has_value());
    EXPECT_EQ(s->venue, pool_v2);
    EXPECT_EQ(s->token_in, token0);
    EXPECT_EQ(s->amount_in, 100);
    EXPECT_EQ(s->token_out, token1);
    EXPECT_EQ(s->amount_out, 90);
}

TEST(SwapDecoding, UniswapV3SignedDeltas)
{
    const PoolDirectory pools = directory();
    Bytes data;
    put_word(data, 0, 100);
    put_word(data, 1, 90, true);
    put_word(data, 2, 1);
    put_word(data, 3, 1);
    put_word(data, 4, 7, true);
    const EventLog log = raw_log(topics::uniswap_v3_swap(), {topic_of(addr(1)), topic_of(addr(2))}, data, pool_v3);
    const auto s = decode_swap(log, &pools);
    ASSERT_TRUE(s.has_value());
    EXPECT_EQ(s->token_in, token0);
    EXPECT_EQ(s->amount_in, 100);
    EXPECT_EQ(s->token_out, token1);
    EXPECT_EQ(s->amount_out, 90);
}

TEST(SwapDecoding, ExplicitTokenLayouts)
{
    Bytes data;
    put_word(data, 0, 5000);
    put_word(data, 1, 4900);
    const EventLog bal1 = raw_log(topics::balancer_v1_swap(), {topic_of(addr(3)), topic_of(token1), topic_of(token2)},
                                  data, addr(0x600));
    auto s = decode_swap(bal1);
    ASSERT_TRUE(s.has_value());
    EXPECT_EQ(s->venue, addr(0x600));
    EXPECT_EQ(s->token_in, token1);
    EXPECT_EQ(s->token_out, token2);

    Hash32 pool_id;
    for (int i = 0; i < 20; ++i)
        pool_id.bytes[i] = 0x42;
    pool_id.bytes[31] = 0x01;
    const EventLog bal2 =
        raw_log(topics::balancer_v2_swap(), {pool_id, topic_of(token2), topic_of(token0)}, data, addr(0xba12));
    s = decode_swap(bal2);
    ASSERT_TRUE(s.has_value());
    Address venue;
    std::fill(venue.bytes.begin(), venue.bytes.end(), 0x42);
    EXPECT_EQ(s->venue, venue);
    EXPECT_EQ(s->amount_in, 5000);
    EXPECT_EQ(s->amount_out, 4900);
}

TEST(SwapDecoding, CurveIndexesResolveThroughMetadata)
{
    const PoolDirectory pools = directory();
    Bytes data;
    put_word(data, 0, 1);
    put_word(data, 1, 777);
    put_word(data, 2, 0);
    put_word(data, 3, 770);
    EventLog plain = raw_log(topics::curve_exchange(), {topic_of(addr(9))}, data, pool_curve);
    auto s = decode_swap(plain, &pools);
    ASSERT_TRUE(s.has_value());
    EXPECT_EQ(s->token_in, token1);
    EXPECT_EQ(s->token_out, token0);

    put_word(data, 0, 2);
    EventLog under = raw_log(topics::curve_exchange_underlying(), {topic_of(addr(9))}, data, pool_curve);
    s = decode_swap(under, &pools);
    ASSERT_TRUE(s.has_value());
    EXPECT_EQ(s->token_in, token2);
    EXPECT_EQ(s->token_out, token0);

    EXPECT_THROW(decode_swap(plain, nullptr), UnresolvedTokens);
    put_word(data, 0, 2);
    plain = raw_log(topics::curve_exchange(), {topic_of(addr(9))}, data, pool_curve);
    EXPECT_THROW(decode_swap(plain, &pools), UnresolvedTokens);
}

TEST(SwapDecoding, WrongKindAndBadShape)
{
    const PoolDirectory pools = directory();
    Bytes data;
    put_word(data, 0, 5);
    const EventLog transfer = raw_log(topics::transfer(), {topic_of(addr(1)), topic_of(addr(2))}, data, token0);
    EXPECT_FALSE(decode_swap(transfer, &pools).has_value());
    EventLog short_v2 = raw_log(topics::uniswap_v2_swap(), {topic_of(addr(1)), topic_of(addr(2))}, data, pool_v2);
    EXPECT_THROW(decode_swap(short_v2, &pools), SchemaMismatch);
    EventLog unknown = raw_log(Hash32{}, {}, data, pool_v2);
    EXPECT_FALSE(decode_swap(unknown, &pools).has_value());
}

TEST(TransferDecoding, Cases)
{
    Bytes data;
    put_word(data, 0, 5);
    const EventLog ok = raw_log(topics::transfer(), {topic_of(addr(1)), topic_of(addr(2))}, data, token0);
    auto t = decode_transfer(ok);
    ASSERT_TRUE(t.has_value());
    EXPECT_EQ(t->token, token0);
    EXPECT_EQ(t->sender, addr(1));
    EXPECT_EQ(t->receiver, addr(2));
    EXPECT_EQ(t->amount, 5);

    Bytes zero(32, 0);
    t = decode_transfer(raw_log(topics::transfer(), {topic_of(addr(1)), topic_of(addr(2))}, zero, token0));
    ASSERT_TRUE(t.has_value());
    EXPECT_EQ(t->amount, 0);

    EXPECT_THROW(decode_transfer(raw_log(topics::transfer(), {}, data, token0)), SchemaMismatch);
}

TEST(LiquidationDecoding, AaveV2HandBuilt)
{
    Bytes data;
    put_word(data, 0, 1500);
    put_word(data, 1, 2000);
    put_address(data, 2, addr(0x77));
    put_word(data, 3, 0);
    const EventLog log = raw_log(topics::aave_v2_liquidation(), {topic_of(token0), topic_of(token1), topic_of(addr(5))},
                                 data, addr(0xaa));
    const auto l = decode_liquidation(log);
    ASSERT_TRUE(l.has_value());
    EXPECT_EQ(l->protocol, LiquidationProtocol::aave_v2v3);
    EXPECT_EQ(l->collateral_token, token0);
    EXPECT_EQ(l->debt_token, token1);
    EXPECT_EQ(l->borrower, addr(5));
    EXPECT_EQ(l->debt_amount, 1500);
    ASSERT_TRUE(l->collateral_amount.has_value());
    EXPECT_EQ(*l->collateral_amount, 2000);
    EXPECT_EQ(l->liquidator, addr(0x77));
}

TEST(LiquidationDecoding, CompoundTakesMarketFromEmitter)
{
    Bytes data;
    put_address(data, 0, addr(0x77));
    put_address(data, 1, addr(5));
    put_word(data, 2, 300);
    put_address(data, 3, addr(0xc2));
    put_word(data, 4, 12345);
    const EventLog log = raw_log(topics::compound_liquidate_borrow(), {}, data, addr(0xc1));
    const auto l = decode_liquidation(log);
    ASSERT_TRUE(l.has_value());
    EXPECT_EQ(l->protocol, LiquidationProtocol::compound_v2);
    EXPECT_EQ(l->debt_token, addr(0xc1));
    EXPECT_EQ(l->collateral_token, addr(0xc2));
    EXPECT_FALSE(l->collateral_amount.has_value());

    Bytes r;
    put_address(r, 0, addr(0x77));
    put_word(r, 1, 999);
    put_word(r, 2, 12345);
    const auto red = decode_redeem(raw_log(topics::compound_redeem(), {}, r, addr(0xc2)));
    ASSERT_TRUE(red.has_value());
    EXPECT_EQ(red->token, addr(0xc2));
    EXPECT_EQ(red->amount, 999);
}

TEST(FlashLoanDecoding, AllProviders)
{
    const ChainId eth = ChainId::of(ChainName::ethereum);
    const LogPosition pos{1, 0, 0};
    auto check = [&](const Hash32& topic, FlashLoanProvider provider) {
        const EventLog log = encode_event(topic, {{"token", token1}, {"amount", BigInt(10)}, {"fee", BigInt(1)}},
                                          addr(0xf1), eth, pos, txh(3));
        const auto f = decode_flashloan(log);
        ASSERT_TRUE(f.has_value());
        EXPECT_EQ(f->provider, provider);
        EXPECT_EQ(f->token, token1);
        EXPECT_EQ(f->amount, 10);
        EXPECT_EQ(f->fee, 1);
    };
    check(topics::aave_v1_flashloan(), FlashLoanProvider::aave_v1);
    check(topics::aave_v2_flashloan(), FlashLoanProvider::aave_v2);
    check(topics::aave_v3_flashloan(), FlashLoanProvider::aave_v3);
    check(topics::balancer_flashloan(), FlashLoanProvider::balancer);
}

TEST(OracleDecoding, NegativeAnswer)
{
    const EventLog log = encode_event(topics::answer_updated(),
                                      {{"answer", BigInt(-5)}, {"round_id", BigInt(9)}, {"updated_at", BigInt(100)}},
                                      addr(0xfeed), ChainId::of(ChainName::ethereum), {1, 0, 0}, txh(4));
    const auto u = decode_oracle_update(log);
    ASSERT_TRUE(u.has_value());
    EXPECT_EQ(u->feed, addr(0xfeed));
    EXPECT_EQ(u->new_answer, -5);
    EXPECT_EQ(u->round_id, 9);
}

TEST(BridgeDecoding, ArbitrumPairSharesKey)
{
    const EventLog l1 = encode_event(topics::inbox_message_delivered(), {{"link_key", BigInt(42)}}, addr(0x4dbd),
                                     ChainId::of(ChainName::ethereum), {1, 0, 0}, txh(5));
    const EventLog l2 = encode_event(topics::redeem_scheduled(), {{"link_key", BigInt(42)}}, addr(0x6e),
                                     ChainId::of(ChainName::arbitrum), {8, 0, 0}, txh(6));
    const auto a = decode_bridge_message(l1, 1000);
    const auto b = decode_bridge_message(l2);
    ASSERT_TRUE(a && b);
    EXPECT_EQ(a->direction, BridgeDirection::l1_emit);
    EXPECT_EQ(b->direction, BridgeDirection::l2_execute);
    EXPECT_EQ(a->rollup.name, ChainName::arbitrum);
    EXPECT_EQ(a->link_key, b->link_key);
    EXPECT_EQ(uint_from_be(a->link_key), 42);
    EXPECT_EQ(a->timestamp, 1000);
}

TEST(BridgeDecoding, OptimismPayloadKeccakAndZkSyncHash)
{
    const Bytes payload = bytes_from_hex("0xdeadbeef00112233");
    const EventLog enq = encode_event_with_data(topics::transaction_enqueued(), {}, payload, addr(0x0e),
                                                ChainId::of(ChainName::ethereum), {1, 0, 0}, txh(7));
    const auto a = decode_bridge_message(enq);
    ASSERT_TRUE(a.has_value());
    const Hash32 k = reference_keccak(payload);
    EXPECT_EQ(a->link_key, Bytes(k.bytes.begin(), k.bytes.end()));
    EXPECT_EQ(a->rollup.name, ChainName::optimism);

    const EventLog empty = encode_event_with_data(topics::transaction_deposited(), {}, {}, addr(0x0e),
                                                  ChainId::of(ChainName::ethereum), {1, 0, 1}, txh(7));
    const auto e = decode_bridge_message(empty);
    ASSERT_TRUE(e.has_value());
    EXPECT_EQ(to_hex(e->link_key), "0xc5d2460186f7233c927e7db2dcc703c0e500b653ca82273b7bfad8045d85a470");

    EventLog zk;
    zk.chain = ChainId::of(ChainName::ethereum);
    zk.address = addr(0x2c);
    zk.topics = {hash_from_hex("0x4531cd5795773d7101c17bdeb9f5ab7f47d7056017506f937083be5d6e77a382")};
    zk.data.assign(32 * 8, 0);
    zk.tx_hash = txh(8);
    const auto z = decode_bridge_message(zk);
    ASSERT_TRUE(z.has_value());
    EXPECT_EQ(z->rollup.name, ChainName::zksync);
    EXPECT_EQ(z->link_key, Bytes(zk.tx_hash.bytes.begin(), zk.tx_hash.bytes.end()));
}

TEST(SwapDecoding, EncodeDecodeFuzz)
{
    const PoolDirectory pools = directory();
    Rng rng(5);
    const ChainId eth = ChainId::of(ChainName::ethereum);
    for (int i = 0; i < 2000; ++i) {
        const BigInt in = rng.big(1, BigInt(1) << 200);
        const BigInt out = rng.big(1, BigInt(1) << 200);
        const bool zero_for_one = rng.chance(0.5);
        FieldValues f;
        if (zero_for_one) {
            f = {{"amount0_in", in}, {"amount1_out", out}};
        } else {
            f = {{"amount1_in", in}, {"amount0_out", out}};
        }
        const EventLog log = encode_event(topics::uniswap_v2_swap(), f, pool_v2, eth, {1, 0, 0}, txh(1));
        const auto s = decode_swap(log, &pools);
        ASSERT_TRUE(s.has_value());
        EXPECT_EQ(s->token_in, zero_for_one ? token0 : token1);
        EXPECT_EQ(s->amount_in, in);
        EXPECT_EQ(s->amount_out, out);

        FieldValues g = {{"amount0", zero_for_one ? in : -out}, {"amount1", zero_for_one ? -out : in}};
        const EventLog v3 = encode_event(topics::uniswap_v3_swap(), g, pool_v3, eth, {1, 0, 1}, txh(1));
        const auto t = decode_swap(v3, &pools);
        ASSERT_TRUE(t.has_value());
        EXPECT_EQ(t->amount_in, in);
        EXPECT_EQ(t->amount_out, out);
    }
}

TEST(DecodeActions, CountsAndSkips)
{
    const PoolDirectory pools = directory();
    DatasetBuilder b(ChainName::ethereum);
    b.block(1, 100);
    b.tx(addr(1));
    b.log(topics::uniswap_v2_swap(), {{"amount0_in", BigInt(10)}, {"amount1_out", BigInt(9)}}, pool_v2);
    b.log(topics::transfer(), {{"from", addr(1)}, {"to", addr(2)}, {"amount", BigInt(3)}}, token0);
    b.log(topics::balancer_flashloan(), {{"token", token0}, {"amount", BigInt(1)}}, addr(0xba));
    b.log(topics::uniswap_v2_swap(), {{"amount0_in", BigInt(10)}, {"amount1_out", BigInt(9)}}, addr(0xdead));
    const ChainDataset d = b.build();
    const DecodedActions a = decode_actions(d.logs(), &pools);
    EXPECT_EQ(a.swaps.size(), 1u);
    EXPECT_EQ(a.transfers.size(), 1u);
    EXPECT_EQ(a.flash_loans.size(), 1u);
    EXPECT_EQ(a.skipped, 1u);
}
