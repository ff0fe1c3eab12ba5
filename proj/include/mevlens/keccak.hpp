#pragma once

#include <span>
#include <string_view>

#include "mevlens/primitives.hpp"

namespace mevlens {

// Ethereum keccak-256 (original Keccak padding, not FIPS-202 SHA3).
Hash32 keccak256(std::span<const std::uint8_t> data);
Hash32 keccak256(std::string_view text);

// Topic hash of an event signature such as "Transfer(address,address,uint256)".
inline Hash32 event_topic(std::string_view signature) { return keccak256(signature); }

}  // namespace mevlens
