#pragma once

#include <filesystem>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mevlens/primitives.hpp"

namespace mevlens {

enum class PoolKind { constant_product, stableswap };

std::string_view to_string(PoolKind k);

struct PoolMetadata {
    Address address;
    PoolKind kind = PoolKind::constant_product;
    std::vector<Address> tokens;
    // Curve meta pools: the coin list that TokenExchangeUnderlying indexes.
    std::vector<Address> underlying_tokens;
    BigInt fee_num = 3;
    BigInt fee_den = 1000;
    BigInt amp = 200;
};

// Static pool parameters keyed by pool address.
class PoolDirectory {
public:
    void add(PoolMetadata pool);
    const PoolMetadata* find(const Address& pool) const;
    std::size_t size() const { return pools_.size(); }
    bool empty() const { return pools_.empty(); }

    // {"pools": [{"address", "kind", "tokens", "underlying_tokens"?, "fee"?, "amp"?}]}
    static PoolDirectory from_json_text(std::string_view text);
    static PoolDirectory load(const std::filesystem::path& path);
    std::string to_json() const;

private:
    std::vector<PoolMetadata> pools_;
    std::unordered_map<Address, std::size_t> index_;
};

}  // namespace mevlens
