#include "mevlens/event_decoding.hpp"

#include "mevlens/keccak.hpp"

namespace mevlens {

namespace {

std::span<const std::uint8_t> slot_bytes(std::span<const std::uint8_t> data, std::size_t slot)
{
    if (slot >= data.size() / 32)
        throw SlotOutOfRange("slot " + std::to_string(slot) + " beyond " + std::to_string(data.size()) +
                             " data bytes");
    return data.subspan(slot * 32, 32);
}

BigInt signed_from_word(std::span<const std::uint8_t> word)
{
    static const BigInt modulus = BigInt(1) << 256;
    BigInt v = uint_from_be(word);
    if (word[0] & 0x80)
        v -= modulus;
    return v;
}

// Schema-checked view of one log.
class FieldReader {
public:
    FieldReader(const EventLog& log, const RegistryEntry& entry) : log_(log), entry_(entry)
    {
        const auto& s = entry.schema;
        if (log.topics.size() != s.topic_count)
            throw SchemaMismatch(entry.event + ": expected " + std::to_string(s.topic_count) + " topics, got " +
                                 std::to_string(log.topics.size()));
        if (log.data.size() < s.min_data_slots() * 32)
            throw SchemaMismatch(entry.event + ": data holds " + std::to_string(log.data.size()) +
                                 " bytes, schema needs " + std::to_string(s.min_data_slots() * 32));
    }

    bool has(std::string_view name) const { return entry_.schema.find(name) != nullptr; }

    Hash32 word(std::string_view name) const
    {
        const FieldSpec& f = spec(name);
        if (f.source == FieldSource::topic)
            return log_.topics.at(f.index);
        Hash32 out;
        auto bytes = slot_bytes(log_.data, f.index);
        std::copy(bytes.begin(), bytes.end(), out.bytes.begin());
        return out;
    }

    BigInt integer(std::string_view name) const
    {
        const FieldSpec& f = spec(name);
        Hash32 w = word(name);
        if (f.type == WordType::int_)
            return signed_from_word(w.span());
        return uint_from_be(w.span());
    }

    Address address(std::string_view name) const { return address_from_word(word(name)); }

private:
    const EventLog& log_;
    const RegistryEntry& entry_;

    const FieldSpec& spec(std::string_view name) const
    {
        const FieldSpec* f = entry_.schema.find(name);
        if (!f)
            throw SchemaMismatch(entry_.event + ": schema lacks field '" + std::string(name) + "'");
        return *f;
    }
};

const RegistryEntry* entry_for(const EventLog& log, const TopicRegistry& registry)
{
    if (log.topics.empty())
        return nullptr;
    return registry.lookup(log.topics[0]);
}

const Address& token_at(const PoolMetadata& pool, bool underlying, const BigInt& index)
{
    const auto& list = underlying && !pool.underlying_tokens.empty() ? pool.underlying_tokens : pool.tokens;
    if (index < 0 || index >= list.size())
        throw UnresolvedTokens("pool " + to_hex(pool.address) + " has no token index " + index.str());
    return list[static_cast<std::size_t>(index)];
}

const PoolMetadata& require_pool(const PoolDirectory* pools, const Address& venue)
{
    const PoolMetadata* p = pools ? pools->find(venue) : nullptr;
    if (!p)
        throw UnresolvedTokens("no pool metadata for " + to_hex(venue));
    return *p;
}

}  // namespace

WordValue decode_word(std::span<const std::uint8_t> data, std::size_t slot, WordType type)
{
    auto bytes = slot_bytes(data, slot);
    switch (type) {
    case WordType::address: return decode_address(data, slot);
    case WordType::uint: return uint_from_be(bytes);
    case WordType::int_: return signed_from_word(bytes);
    case WordType::bytes32: {
        Hash32 h;
        std::copy(bytes.begin(), bytes.end(), h.bytes.begin());
        return h;
    }
    }
    throw Error("unknown word type");
}

BigInt decode_uint(std::span<const std::uint8_t> data, std::size_t slot)
{
    return uint_from_be(slot_bytes(data, slot));
}

BigInt decode_int(std::span<const std::uint8_t> data, std::size_t slot)
{
    return signed_from_word(slot_bytes(data, slot));
}

Address decode_address(std::span<const std::uint8_t> data, std::size_t slot)
{
    auto bytes = slot_bytes(data, slot);
    Address a;
    std::copy(bytes.begin() + 12, bytes.end(), a.bytes.begin());
    return a;
}

std::string_view to_string(LiquidationProtocol p)
{
    switch (p) {
    case LiquidationProtocol::aave_v1: return "aave_v1";
    case LiquidationProtocol::aave_v2v3: return "aave_v2v3";
    case LiquidationProtocol::compound_v2: return "compound_v2";
    }
    return "unknown";
}

std::string_view to_string(FlashLoanProvider p)
{
    switch (p) {
    case FlashLoanProvider::aave_v1: return "aave_v1";
    case FlashLoanProvider::aave_v2: return "aave_v2";
    case FlashLoanProvider::aave_v3: return "aave_v3";
    case FlashLoanProvider::balancer: return "balancer";
    }
    return "unknown";
}

std::optional<SwapAction> decode_swap(const EventLog& log, const PoolDirectory* pools, const TopicRegistry& registry)
{
    const RegistryEntry* entry = entry_for(log, registry);
    if (!entry)
        return std::nullopt;
    const auto& schema = entry->schema;
    const bool pair_deltas = schema.find("amount0_in") || schema.find("amount0");
    const bool explicit_amounts = schema.find("amount_in") && schema.find("amount_out");
    if (!pair_deltas && !explicit_amounts)
        return std::nullopt;

    FieldReader r(log, *entry);
    SwapAction s;
    s.venue = log.address;
    s.position = log.position();
    s.tx_hash = log.tx_hash;
    if (r.has("pool_id")) {
        Hash32 id = r.word("pool_id");
        std::copy(id.bytes.begin(), id.bytes.begin() + 20, s.venue.bytes.begin());
    }

    if (pair_deltas) {
        BigInt d0, d1;
        if (r.has("amount0_in")) {
            d0 = r.integer("amount0_in") - r.integer("amount0_out");
            d1 = r.integer("amount1_in") - r.integer("amount1_out");
        } else {
            d0 = r.integer("amount0");
            d1 = r.integer("amount1");
        }
        if (!((d0 > 0 && d1 < 0) || (d0 < 0 && d1 > 0)))
            return std::nullopt;
        const PoolMetadata& pool = require_pool(pools, s.venue);
        const bool zero_in = d0 > 0;
        s.token_in = token_at(pool, false, zero_in ? 0 : 1);
        s.token_out = token_at(pool, false, zero_in ? 1 : 0);
        s.amount_in = zero_in ? d0 : d1;
        s.amount_out = zero_in ? -d1 : -d0;
    } else {
        s.amount_in = r.integer("amount_in");
        s.amount_out = r.integer("amount_out");
        if (s.amount_in <= 0 || s.amount_out <= 0)
            return std::nullopt;
        if (r.has("token_in")) {
            s.token_in = r.address("token_in");
            s.token_out = r.address("token_out");
        } else {
            const PoolMetadata& pool = require_pool(pools, s.venue);
            s.token_in = token_at(pool, schema.underlying, r.integer("token_in_index"));
            s.token_out = token_at(pool, schema.underlying, r.integer("token_out_index"));
        }
    }
    if (s.token_in == s.token_out)
        return std::nullopt;
    return s;
}

std::optional<TransferAction> decode_transfer(const EventLog& log, const TopicRegistry& registry)
{
    const RegistryEntry* entry = entry_for(log, registry);
    if (!entry || !entry->has(Category::sandwich) || !entry->schema.find("from") || !entry->schema.find("to"))
        return std::nullopt;
    FieldReader r(log, *entry);
    return TransferAction{log.address, r.address("from"), r.address("to"), r.integer("amount"), log.position(),
                          log.tx_hash};
}

std::optional<LiquidationAction> decode_liquidation(const EventLog& log, const TopicRegistry& registry)
{
    const RegistryEntry* entry = entry_for(log, registry);
    if (!entry || !entry->has(Category::liquidation) || !entry->schema.find("debt_amount"))
        return std::nullopt;
    FieldReader r(log, *entry);
    LiquidationAction a;
    a.liquidator = r.address("liquidator");
    a.borrower = r.address("borrower");
    a.debt_amount = r.integer("debt_amount");
    a.position = log.position();
    a.tx_hash = log.tx_hash;
    if (r.has("collateral_ctoken")) {
        a.protocol = LiquidationProtocol::compound_v2;
        a.debt_token = log.address;
        a.collateral_token = r.address("collateral_ctoken");
    } else {
        a.protocol = entry->variant == "aave_v1" ? LiquidationProtocol::aave_v1 : LiquidationProtocol::aave_v2v3;
        a.debt_token = r.address("debt_token");
        a.collateral_token = r.address("collateral_token");
        a.collateral_amount = r.integer("collateral_amount");
    }
    if (a.debt_amount <= 0)
        return std::nullopt;
    return a;
}

std::optional<RedeemAction> decode_redeem(const EventLog& log, const TopicRegistry& registry)
{
    const RegistryEntry* entry = entry_for(log, registry);
    if (!entry || !entry->has(Category::liquidation) || !entry->schema.find("redeem_amount"))
        return std::nullopt;
    FieldReader r(log, *entry);
    return RedeemAction{r.address("redeemer"), log.address, r.integer("redeem_amount"), log.position(), log.tx_hash};
}

std::optional<FlashLoanAction> decode_flashloan(const EventLog& log, const TopicRegistry& registry)
{
    const RegistryEntry* entry = entry_for(log, registry);
    if (!entry || !entry->has(Category::flash_loan))
        return std::nullopt;
    FieldReader r(log, *entry);
    FlashLoanAction a;
    if (entry->variant == "aave_v1")
        a.provider = FlashLoanProvider::aave_v1;
    else if (entry->variant == "aave_v2")
        a.provider = FlashLoanProvider::aave_v2;
    else if (entry->variant == "aave_v3")
        a.provider = FlashLoanProvider::aave_v3;
    else
        a.provider = FlashLoanProvider::balancer;
    a.token = r.address("token");
    a.amount = r.integer("amount");
    a.fee = r.integer("fee");
    a.position = log.position();
    a.tx_hash = log.tx_hash;
    if (a.amount <= 0)
        return std::nullopt;
    return a;
}

std::optional<OracleUpdateAction> decode_oracle_update(const EventLog& log, const TopicRegistry& registry)
{
    const RegistryEntry* entry = entry_for(log, registry);
    if (!entry || !entry->has(Category::oracle_update))
        return std::nullopt;
    FieldReader r(log, *entry);
    return OracleUpdateAction{log.address, r.integer("answer"), r.integer("round_id"), log.position(), log.tx_hash};
}

std::optional<BridgeMessageAction> decode_bridge_message(const EventLog& log, std::int64_t timestamp,
                                                         const TopicRegistry& registry)
{
    const RegistryEntry* entry = entry_for(log, registry);
    if (!entry || !entry->rollup || !(entry->has(Category::l1_message) || entry->has(Category::l2_message)))
        return std::nullopt;
    FieldReader r(log, *entry);
    BridgeMessageAction a;
    a.direction = entry->has(Category::l1_message) ? BridgeDirection::l1_emit : BridgeDirection::l2_execute;
    a.rollup = ChainId::of(*entry->rollup);
    a.position = log.position();
    a.tx_hash = log.tx_hash;
    a.timestamp = timestamp;
    switch (entry->schema.link) {
    case LinkRule::field: {
        Hash32 w = r.word("link_key");
        a.link_key.assign(w.bytes.begin(), w.bytes.end());
        break;
    }
    case LinkRule::payload_keccak: {
        Hash32 h = keccak256(std::span<const std::uint8_t>(log.data));
        a.link_key.assign(h.bytes.begin(), h.bytes.end());
        break;
    }
    case LinkRule::tx_hash: a.link_key.assign(log.tx_hash.bytes.begin(), log.tx_hash.bytes.end()); break;
    case LinkRule::none: throw SchemaMismatch(entry->event + ": bridge event without a link rule");
    }
    return a;
}

}  // namespace mevlens
