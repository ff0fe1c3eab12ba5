#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "mevlens/cross_layer.hpp"
#include "mevlens/primitives.hpp"

namespace mevlens::cli {

// Everything a subcommand needs, after config.json and flags are merged.
struct RunConfig {
    ChainName chain = ChainName::ethereum;
    bool chain_given = false;
    std::uint64_t from_block = 0;
    std::uint64_t to_block = UINT64_MAX;
    std::filesystem::path fixtures = ".";
    std::optional<std::filesystem::path> prices;
    std::optional<std::filesystem::path> pools;
    std::optional<std::filesystem::path> snapshots;
    std::optional<std::filesystem::path> bytecode;
    std::filesystem::path out = "out";
    std::uint64_t window = 100;
    std::uint64_t horizon = 100;
    unsigned jobs = 1;
    bool arbitrage = true;
    bool liquidation = true;
    bool sandwich = true;
    AttackConfig attack;

    std::filesystem::path chain_file(ChainName chain) const;
    // Explicit path, else the default name under the fixtures directory when it exists.
    std::optional<std::filesystem::path> prices_file() const;
    std::optional<std::filesystem::path> pools_file() const;
    std::optional<std::filesystem::path> snapshots_file() const;
    std::filesystem::path bytecode_file() const;
};

// Applies a config.json document; keys absent from it keep their values.
void apply_config_file(RunConfig& config, const std::filesystem::path& path);
void validate(const RunConfig& config);

enum class DetectKind { arbitrage, liquidation, sandwich, flashloan };
enum class CrossLayerKind { infer, delay, simulate };

int run_decode(const RunConfig& config);
int run_detect(const RunConfig& config, DetectKind kind);
int run_opportunity(const RunConfig& config);
int run_compete(const RunConfig& config);
int run_crosslayer(const RunConfig& config, CrossLayerKind kind);
int run_bytecode_cluster(const RunConfig& config);
int run_report(const RunConfig& config);

}  // namespace mevlens::cli
