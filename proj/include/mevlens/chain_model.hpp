#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mevlens/primitives.hpp"

namespace mevlens {

enum class TxStatus { success, reverted };

struct TxPosition {
    std::uint64_t block = 0;
    std::uint32_t tx_index = 0;
    auto operator<=>(const TxPosition&) const = default;
};

struct LogPosition {
    std::uint64_t block = 0;
    std::uint32_t tx_index = 0;
    std::uint32_t log_index = 0;
    auto operator<=>(const LogPosition&) const = default;
    TxPosition tx() const { return {block, tx_index}; }
};

struct BlockRecord {
    ChainId chain;
    std::uint64_t number = 0;
    std::int64_t timestamp = 0;
    std::vector<Hash32> tx_hashes;
};

struct TxRecord {
    ChainId chain;
    Hash32 hash;
    std::uint64_t block_number = 0;
    std::uint32_t tx_index = 0;
    Address from;
    std::optional<Address> to;  // absent for contract creation
    BigInt fee_paid = 0;         // wei
    BigInt builder_payment = 0;  // coinbase transfer, wei
    TxStatus status = TxStatus::success;
    // Cross-layer extension: the victim's slippage bound when known from calldata.
    std::optional<BigInt> min_amount_out;

    TxPosition position() const { return {block_number, tx_index}; }
};

struct EventLog {
    ChainId chain;
    Address address;
    std::vector<Hash32> topics;  // topics[0] is the event topic hash
    Bytes data;
    std::uint64_t block_number = 0;
    std::uint32_t tx_index = 0;
    std::uint32_t log_index = 0;
    Hash32 tx_hash;

    LogPosition position() const { return {block_number, tx_index, log_index}; }
};

class FixtureError : public Error {
public:
    enum class Kind { malformed_record, ordering_violation, duplicate_key };

    FixtureError(Kind kind, std::size_t line, const std::string& reason);

    Kind kind() const { return kind_; }
    // 1-based; 0 when the records did not come from a file.
    std::size_t line() const { return line_; }

private:
    Kind kind_;
    std::size_t line_;
};

class InvalidRange : public Error {
public:
    using Error::Error;
};

// Blocks, transactions and logs of one chain. Immutable once constructed;
// safe for concurrent readers.
class ChainDataset {
public:
    ChainDataset() = default;

    // Validates ordering and uniqueness; throws FixtureError (line 0).
    ChainDataset(std::vector<BlockRecord> blocks, std::vector<TxRecord> txs, std::vector<EventLog> logs);

    std::optional<ChainId> chain() const { return chain_; }
    const std::vector<BlockRecord>& blocks() const { return blocks_; }
    const std::vector<TxRecord>& txs() const { return txs_; }
    const std::vector<EventLog>& logs() const { return logs_; }
    bool empty() const { return blocks_.empty() && txs_.empty() && logs_.empty(); }

    const TxRecord* find_tx(const Hash32& hash) const;
    const BlockRecord* find_block(std::uint64_t number) const;
    std::optional<std::int64_t> block_timestamp(std::uint64_t number) const;

    // Logs with block in [from_block, to_block] whose topic0 is in the filter
    // (an empty filter matches everything), in (block, tx_index, log_index) order.
    std::vector<const EventLog*> logs_in_range(std::uint64_t from_block, std::uint64_t to_block,
                                               std::span<const Hash32> topic_filter = {}) const;

    // Contiguous slice of logs() with block in [from_block, to_block].
    std::span<const EventLog> log_slice(std::uint64_t from_block, std::uint64_t to_block) const;

private:
    friend ChainDataset load_fixture_text(std::string_view text);

    std::optional<ChainId> chain_;
    std::vector<BlockRecord> blocks_;
    std::vector<TxRecord> txs_;
    std::vector<EventLog> logs_;
    std::unordered_map<Hash32, std::size_t> tx_by_hash_;

    void build_indexes();
};

// Line-delimited JSON fixture; see docs/formats.md.
ChainDataset load_fixture(const std::filesystem::path& path);
ChainDataset load_fixture_text(std::string_view text);

// Canonical serialization: per block number, the block record, then its
// transactions, then its logs. load∘serialize is the identity on canonical files.
std::string serialize_fixture(const ChainDataset& dataset);

}  // namespace mevlens
