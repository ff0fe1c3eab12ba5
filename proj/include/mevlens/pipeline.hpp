#pragma once

#include <cstdint>
#include <vector>

#include "mevlens/detectors.hpp"

namespace mevlens {

struct ScanOptions {
    std::uint64_t from_block = 0;
    std::uint64_t to_block = UINT64_MAX;
    unsigned jobs = 1;
    std::uint64_t window = 100;  // rollup sandwich window, blocks
    bool arbitrage = true;
    bool liquidation = true;
    bool sandwich = true;
    const PoolDirectory* pools = nullptr;
    const TopicRegistry* registry = nullptr;  // builtin when null
};

struct ScanResult {
    ChainId chain;
    DecodedActions actions;
    std::vector<ArbitrageFinding> arbitrages;
    std::vector<LiquidationFinding> liquidations;
    std::vector<SandwichFinding> sandwiches;
};

// Splits the range into `jobs` contiguous block shards, decodes and detects
// per shard in parallel and concatenates in shard order. Rollup sandwich
// shards read transfers up to window - 1 blocks past their end. The result
// does not depend on `jobs`.
ScanResult scan_chain(const ChainDataset& dataset, const ScanOptions& options);

// Fills extractor, profit and flash-loan fields. The fee and builder payment
// of a transaction are charged to its first finding of each type.
void price_findings(ScanResult& scan, const ChainDataset& dataset, const PriceProvider& prices);

}  // namespace mevlens
