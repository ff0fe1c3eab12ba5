#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "mevlens/primitives.hpp"

namespace mevlens {

struct BytecodeRecord {
    ChainId chain;
    Address address;
    Bytes code;
    bool verified = false;
};

struct NormalizedCode {
    Bytes skeleton;  // no PUSH1..PUSH32 opcodes or operands, no metadata trailer
    Hash32 digest;   // keccak-256 of the skeleton
};

inline constexpr std::uint8_t op_push1 = 0x60;
inline constexpr std::uint8_t op_push32 = 0x7f;
inline constexpr std::uint8_t op_delegatecall = 0xf4;

// Length of the Solidity CBOR metadata trailer (including its 2-byte length
// suffix) or 0 when the tail is not a well-formed CBOR map with text keys.
std::size_t metadata_trailer_size(std::span<const std::uint8_t> code);

NormalizedCode normalize(std::span<const std::uint8_t> code);

struct ClusterMember {
    ChainId chain;
    Address address;
};

struct CodeCluster {
    Hash32 digest;
    std::vector<ClusterMember> members;  // sorted by (chain, address)
    std::vector<ChainName> chains;       // distinct, sorted

    bool cross_chain() const { return chains.size() > 1; }
};

struct ClusterReport {
    std::vector<CodeCluster> clusters;  // every retained record, largest first
    std::size_t excluded_verified = 0;
    std::size_t excluded_delegatecall = 0;
};

// Drops verified records and those whose skeleton holds DELEGATECALL, then
// groups the rest by digest.
ClusterReport cluster(std::span<const BytecodeRecord> records);

// JSONL {chain, address, code_hex, verified}.
std::vector<BytecodeRecord> load_bytecode_text(std::string_view text);
std::vector<BytecodeRecord> load_bytecode(const std::filesystem::path& path);

}  // namespace mevlens
