#pragma once

#include <optional>
#include <span>
#include <variant>

#include "mevlens/chain_model.hpp"
#include "mevlens/pool_metadata.hpp"
#include "mevlens/topic_registry.hpp"

namespace mevlens {

class SlotOutOfRange : public Error {
public:
    using Error::Error;
};

class SchemaMismatch : public Error {
public:
    using Error::Error;
};

// A swap whose pool is missing from metadata, or whose token index is out of range.
class UnresolvedTokens : public Error {
public:
    using Error::Error;
};

using WordValue = std::variant<Address, BigInt, Hash32>;

// Reads 32-byte slot `slot` of an ABI data blob. Addresses are the low 20
// bytes, uint is big-endian unsigned, int is 256-bit two's complement.
WordValue decode_word(std::span<const std::uint8_t> data, std::size_t slot, WordType type);
BigInt decode_uint(std::span<const std::uint8_t> data, std::size_t slot);
BigInt decode_int(std::span<const std::uint8_t> data, std::size_t slot);
Address decode_address(std::span<const std::uint8_t> data, std::size_t slot);

struct SwapAction {
    Address venue;
    Address token_in;
    Address token_out;
    BigInt amount_in = 0;
    BigInt amount_out = 0;
    LogPosition position;
    Hash32 tx_hash;

    bool operator==(const SwapAction&) const = default;
};

struct TransferAction {
    Address token;
    Address sender;
    Address receiver;
    BigInt amount = 0;
    LogPosition position;
    Hash32 tx_hash;

    bool operator==(const TransferAction&) const = default;
};

enum class LiquidationProtocol { aave_v1, aave_v2v3, compound_v2 };
std::string_view to_string(LiquidationProtocol p);

struct LiquidationAction {
    LiquidationProtocol protocol = LiquidationProtocol::aave_v2v3;
    Address liquidator;
    Address borrower;
    Address debt_token;  // Compound: the cToken market repaid into
    BigInt debt_amount = 0;
    Address collateral_token;  // Compound: the seized cToken
    std::optional<BigInt> collateral_amount;  // Compound: set by Redeem pairing
    LogPosition position;
    Hash32 tx_hash;
};

struct RedeemAction {
    Address redeemer;
    Address token;  // the cToken that emitted Redeem
    BigInt amount = 0;  // underlying units
    LogPosition position;
    Hash32 tx_hash;
};

enum class FlashLoanProvider { aave_v1, aave_v2, aave_v3, balancer };
std::string_view to_string(FlashLoanProvider p);

struct FlashLoanAction {
    FlashLoanProvider provider = FlashLoanProvider::balancer;
    Address token;
    BigInt amount = 0;
    BigInt fee = 0;
    LogPosition position;
    Hash32 tx_hash;
};

struct OracleUpdateAction {
    Address feed;
    BigInt new_answer = 0;
    BigInt round_id = 0;
    LogPosition position;
    Hash32 tx_hash;
};

enum class BridgeDirection { l1_emit, l2_execute };

struct BridgeMessageAction {
    BridgeDirection direction = BridgeDirection::l1_emit;
    ChainId rollup;
    Bytes link_key;
    LogPosition position;
    Hash32 tx_hash;
    std::int64_t timestamp = 0;
};

// Each decoder returns nullopt when the log's topic is not in the registry or
// belongs to a different action kind, and throws SchemaMismatch when the
// topic matches but the topic count or data length does not fit the schema.
//
// Swaps: deltas are taken from the pool's view, positive = into the pool.
// Token addresses of index-based layouts come from `pools`. Zero amounts or
// identical in/out tokens yield nullopt.
std::optional<SwapAction> decode_swap(const EventLog& log, const PoolDirectory* pools = nullptr,
                                      const TopicRegistry& registry = TopicRegistry::builtin());
std::optional<TransferAction> decode_transfer(const EventLog& log,
                                              const TopicRegistry& registry = TopicRegistry::builtin());
std::optional<LiquidationAction> decode_liquidation(const EventLog& log,
                                                    const TopicRegistry& registry = TopicRegistry::builtin());
std::optional<RedeemAction> decode_redeem(const EventLog& log,
                                          const TopicRegistry& registry = TopicRegistry::builtin());
std::optional<FlashLoanAction> decode_flashloan(const EventLog& log,
                                                const TopicRegistry& registry = TopicRegistry::builtin());
std::optional<OracleUpdateAction> decode_oracle_update(const EventLog& log,
                                                       const TopicRegistry& registry = TopicRegistry::builtin());
std::optional<BridgeMessageAction> decode_bridge_message(const EventLog& log, std::int64_t timestamp = 0,
                                                         const TopicRegistry& registry = TopicRegistry::builtin());

}  // namespace mevlens
