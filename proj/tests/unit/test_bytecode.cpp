#include <gtest/gtest.h>

#include <set>

#include "mevlens/bytecode.hpp"
#include "mevlens/keccak.hpp"
#include "synth.hpp"
#include "testkit.hpp"

using namespace mevlens;
using namespace testkit;

namespace {

// Code built from a shape so that PUSH operands are known.
struct Program {
    Bytes code;
    std::vector<std::size_t> operand_bytes;
    std::vector<std::size_t> opcode_bytes;  // non-PUSH opcodes
};

Program random_program(Rng& rng, std::size_t ops)
{
    static const std::uint8_t plain[] = {0x01, 0x02, 0x10, 0x14, 0x16, 0x33, 0x35, 0x50,
                                         0x51, 0x52, 0x54, 0x56, 0x57, 0x5b, 0x80, 0x90};
    Program p;
    for (std::size_t i = 0; i < ops; ++i) {
        if (rng.chance(0.4)) {
            const auto width = rng.uniform(1, 32);
            p.code.push_back(static_cast<std::uint8_t>(0x5f + width));
            for (std::uint64_t k = 0; k < width; ++k) {
                p.operand_bytes.push_back(p.code.size());
                p.code.push_back(static_cast<std::uint8_t>(rng.uniform(0, 255)));
            }
        } else {
            p.opcode_bytes.push_back(p.code.size());
            p.code.push_back(plain[rng.uniform(0, sizeof(plain) - 1)]);
        }
    }
    return p;
}

BytecodeRecord record(ChainName chain, std::uint64_t n, Bytes code, bool verified = false)
{
    return {ChainId::of(chain), addr(n, 0xcc), std::move(code), verified};
}

}  // namespace

TEST(Normalize, EmptyAndPushOnly)
{
    EXPECT_TRUE(normalize({}).skeleton.empty());
    const Bytes push_only = {0x60, 0xaa, 0x61, 0xbb, 0xcc};
    EXPECT_TRUE(normalize(push_only).skeleton.empty());
    EXPECT_EQ(normalize(push_only).digest, normalize({}).digest);
}

TEST(Normalize, TruncatedPushRunsToEnd)
{
    const Bytes code = {0x01, 0x02, 0x7f, 0x01, 0x02};
    EXPECT_EQ(normalize(code).skeleton, (Bytes{0x01, 0x02}));
}

TEST(Normalize, TrailerRules)
{
    // a1 64 'solc' 43 00 08 11 -> 10 bytes, declared length 0x000a.
    const Bytes trailer = {0xa1, 0x64, 's', 'o', 'l', 'c', 0x43, 0x00, 0x08, 0x11, 0x00, 0x0a};
    Bytes code = {0x5b, 0x01};
    code.insert(code.end(), trailer.begin(), trailer.end());
    EXPECT_EQ(normalize(code).skeleton, (Bytes{0x5b, 0x01}));
    // Declared length longer than the code: nothing stripped.
    Bytes too_long = code;
    too_long.back() = 0xff;
    EXPECT_EQ(normalize(too_long).skeleton, oracle_skeleton(too_long));
    EXPECT_GT(normalize(too_long).skeleton.size(), 2u);
    // Not a map header: nothing stripped.
    Bytes not_map = code;
    not_map[2] = 0x01;
    EXPECT_EQ(metadata_trailer_size(not_map), 0u);
}

TEST(Normalize, MatchesOracleOnRandomCode)
{
    Rng rng(2024);
    for (int i = 0; i < 300; ++i) {
        Bytes code(rng.uniform(0, 300));
        for (auto& b : code)
            b = static_cast<std::uint8_t>(rng.uniform(0, 255));
        // Declared trailer length beyond the code: trailers are covered above.
        if (code.size() >= 2)
            code[code.size() - 2] = 0xff;
        const auto n = normalize(code);
        EXPECT_EQ(n.skeleton, oracle_skeleton(code)) << "case " << i;
        EXPECT_EQ(n.digest, reference_keccak(n.skeleton));
    }
}

TEST(Normalize, OperandFuzzKeepsDigestOpcodeEditChangesIt)
{
    Rng rng(77);
    for (int i = 0; i < 200; ++i) {
        const Program p = random_program(rng, 60);
        if (p.operand_bytes.empty() || p.opcode_bytes.empty())
            continue;
        const Hash32 base = normalize(p.code).digest;
        Bytes mutated = p.code;
        mutated[p.operand_bytes[rng.uniform(0, p.operand_bytes.size() - 1)]] ^= 0x5a;
        EXPECT_EQ(normalize(mutated).digest, base);

        Bytes edited = p.code;
        const std::size_t at = p.opcode_bytes[rng.uniform(0, p.opcode_bytes.size() - 1)];
        edited[at] = edited[at] == 0x01 ? 0x02 : 0x01;
        EXPECT_NE(normalize(edited).digest, base);
    }
}

TEST(Normalize, Idempotent)
{
    Rng rng(5);
    for (int i = 0; i < 100; ++i) {
        const Program p = random_program(rng, 80);
        const auto once = normalize(p.code);
        EXPECT_EQ(normalize(once.skeleton).skeleton, once.skeleton);
    }
}

TEST(Cluster, ExclusionsAndCrossChain)
{
    Rng rng(9);
    const Program bot = random_program(rng, 50);
    auto variant = [&](const Program& p) {
        Bytes c = p.code;
        for (std::size_t i : p.operand_bytes)
            c[i] = static_cast<std::uint8_t>(rng.uniform(0, 255));
        return c;
    };
    std::vector<BytecodeRecord> records = {
        record(ChainName::ethereum, 1, variant(bot)),
        record(ChainName::arbitrum, 2, variant(bot)),
        record(ChainName::optimism, 3, variant(bot)),
        record(ChainName::ethereum, 4, variant(bot), true),
    };
    // A DELEGATECALL in the skeleton excludes; 0xf4 as a PUSH operand does not.
    Bytes proxy = random_program(rng, 20).code;
    proxy.push_back(0xf4);
    records.push_back(record(ChainName::ethereum, 5, proxy));
    records.push_back(record(ChainName::ethereum, 6, {0x60, 0xf4, 0x01}));

    const ClusterReport r = cluster(records);
    EXPECT_EQ(r.excluded_verified, 1u);
    EXPECT_EQ(r.excluded_delegatecall, 1u);
    ASSERT_EQ(r.clusters.size(), 2u);
    EXPECT_EQ(r.clusters[0].members.size(), 3u);
    EXPECT_TRUE(r.clusters[0].cross_chain());
    EXPECT_EQ(r.clusters[0].chains.size(), 3u);
    EXPECT_EQ(r.clusters[1].members.size(), 1u);
    EXPECT_EQ(r.clusters[1].members[0].address, addr(6, 0xcc));
}

TEST(Cluster, PartitionOfRetainedRecords)
{
    const auto corpus = synth::make_bytecode_corpus(3);
    const ClusterReport r = cluster(corpus);
    std::size_t members = 0;
    std::set<Address> seen;
    for (const auto& c : r.clusters)
        for (const auto& m : c.members) {
            ++members;
            EXPECT_TRUE(seen.insert(m.address).second);
        }
    EXPECT_EQ(members + r.excluded_verified + r.excluded_delegatecall, corpus.size());
}

TEST(Cluster, AllDistinct)
{
    std::vector<BytecodeRecord> records;
    for (std::uint8_t i = 1; i <= 5; ++i)
        records.push_back(record(ChainName::ethereum, i, Bytes(i, 0x01)));
    const ClusterReport r = cluster(records);
    for (const auto& c : r.clusters)
        EXPECT_EQ(c.members.size(), 1u);
}

TEST(Cluster, JsonlRoundTrip)
{
    const auto corpus = synth::make_bytecode_corpus(3);
    const auto again = load_bytecode_text(synth::bytecode_jsonl(corpus));
    ASSERT_EQ(again.size(), corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        EXPECT_EQ(again[i].code, corpus[i].code);
        EXPECT_EQ(again[i].address, corpus[i].address);
        EXPECT_EQ(again[i].verified, corpus[i].verified);
        EXPECT_EQ(again[i].chain, corpus[i].chain);
    }
}
