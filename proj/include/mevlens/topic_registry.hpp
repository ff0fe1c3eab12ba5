#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "mevlens/primitives.hpp"

namespace mevlens {

enum class Category {
    arbitrage,
    liquidation,
    sandwich,
    oracle_update,
    flash_loan,
    l1_message,
    l2_message,
    victim_inference,
};

std::string_view to_string(Category c);
std::optional<Category> category_from_string(std::string_view s);

enum class WordType { address, uint, int_, bytes32 };

enum class FieldSource { topic, data };

struct FieldSpec {
    std::string name;
    FieldSource source = FieldSource::data;
    std::size_t index = 0;  // topic index (1..3) or 32-byte data slot
    WordType type = WordType::uint;
};

// How a bridge message event yields its cross-layer link key.
enum class LinkRule {
    none,
    field,           // the "link_key" field's 32-byte word
    payload_keccak,  // keccak-256 of the log's data bytes
    tx_hash,         // the emitting transaction's hash
};

// Word-slot layout of one event. Decoders look fields up by role name
// (e.g. "amount0_in", "token_in", "borrower"), never by protocol.
struct EventSchema {
    std::size_t topic_count = 1;  // exact number of topics including topic0
    std::vector<FieldSpec> fields;
    LinkRule link = LinkRule::none;
    bool underlying = false;  // token indexes resolve against a pool's underlying coins

    const FieldSpec* find(std::string_view name) const;
    std::size_t min_data_slots() const;
};

struct RegistryEntry {
    Hash32 topic;
    std::vector<Category> categories;
    std::string protocol;  // e.g. "Uniswap V2"
    std::string event;     // e.g. "Swap"
    // Machine tag for protocol-specific enums: "aave_v1", "balancer", ...
    std::string variant;
    std::optional<ChainName> rollup;  // bridge events only
    EventSchema schema;

    bool has(Category c) const;
};

class TopicRegistry {
public:
    // The compiled-in event table.
    static const TopicRegistry& builtin();

    TopicRegistry() = default;
    explicit TopicRegistry(std::vector<RegistryEntry> entries);

    // Adds or replaces entries from a registry JSON file (see docs/formats.md).
    void merge_json_text(std::string_view text);
    void merge_json_file(const std::filesystem::path& path);

    const RegistryEntry* lookup(const Hash32& topic) const;
    const std::vector<RegistryEntry>& entries() const { return entries_; }
    std::vector<Hash32> topics_with(Category c) const;

private:
    std::vector<RegistryEntry> entries_;
    std::unordered_map<Hash32, std::size_t> index_;

    void add(RegistryEntry e);
};

}  // namespace mevlens
