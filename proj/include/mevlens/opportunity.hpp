#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "mevlens/amm.hpp"
#include "mevlens/detectors.hpp"

namespace mevlens {

class StateProvider {
public:
    virtual ~StateProvider() = default;
    virtual std::optional<PoolState> pool_state(const Address& pool, std::uint64_t block) const = 0;
    virtual std::optional<Rational> health_factor(LiquidationProtocol protocol, const Address& borrower,
                                                  std::uint64_t block) const = 0;
    virtual std::optional<BigInt> shortfall(const Address& borrower, std::uint64_t block) const = 0;
};

// Snapshot-backed provider. Each snapshot holds the state at the end of its
// block; a lookup returns the latest snapshot at or before the requested block.
// JSONL records: {"kind": "pool"|"health"|"shortfall", "key", "block", "value"}
// with pool values a reserve list, health values a decimal and shortfall
// values an integer. Health records may carry a "protocol" tag.
class SnapshotStore : public StateProvider {
public:
    explicit SnapshotStore(const PoolDirectory* pools = nullptr) : pools_(pools) {}

    void add_pool(const Address& pool, std::uint64_t block, std::vector<BigInt> reserves);
    void add_health(const Address& borrower, std::uint64_t block, Rational hf,
                    std::optional<LiquidationProtocol> protocol = std::nullopt);
    void add_shortfall(const Address& borrower, std::uint64_t block, BigInt sf);

    std::optional<PoolState> pool_state(const Address& pool, std::uint64_t block) const override;
    std::optional<Rational> health_factor(LiquidationProtocol protocol, const Address& borrower,
                                          std::uint64_t block) const override;
    std::optional<BigInt> shortfall(const Address& borrower, std::uint64_t block) const override;

    void load_jsonl_text(std::string_view text);
    void load(const std::filesystem::path& path);
    std::string to_jsonl() const;

private:
    template <typename T>
    using Series = std::map<std::uint64_t, T>;

    const PoolDirectory* pools_;
    std::map<Address, Series<std::vector<BigInt>>> pool_;
    std::map<std::pair<Address, int>, Series<Rational>> health_;  // protocol -1 = untagged
    std::map<Address, Series<BigInt>> shortfall_;
};

inline constexpr std::uint64_t default_horizon = 100;

enum class OpportunityStatus { found, not_found_within_horizon, unsimulatable };
std::string_view to_string(OpportunityStatus s);

struct OpportunityResult {
    std::string finding_id;
    OpportunityStatus status = OpportunityStatus::not_found_within_horizon;
    std::optional<Hash32> opportunity_tx;
    std::optional<std::uint64_t> block_distance;
    // The crossing lies between the closest candidate and the finding.
    bool approximate = false;
    std::string detail;
    std::uint64_t horizon = default_horizon;
};

// not_found_within_<horizon> for a miss, else the status name.
std::string status_label(const OpportunityResult& r);

// Swaps on the cycle's venues within `horizon` blocks before the finding are
// grouped by block and walked from the closest block outwards. Each block is
// tested on the pool states just before it; the first block whose pre-state
// makes the cycle unprofitable holds the opportunity, its last such swap.
// When the closest candidate block already leaves the cycle unprofitable
// after it, the result is found with no opportunity_tx and is approximate.
OpportunityResult find_arbitrage_opportunity(const ArbitrageFinding& finding, const std::string& finding_id,
                                             std::span<const SwapAction> swaps, const StateProvider& state,
                                             std::uint64_t horizon = default_horizon);

// Oracle updates within `horizon` blocks before the finding, closest first.
// The walk stops at the first update block where the borrower is no longer
// liquidable (hf >= 1 or shortfall = 0); the previously visited update is the
// opportunity.
OpportunityResult find_liquidation_opportunity(const LiquidationFinding& finding, const std::string& finding_id,
                                               std::span<const OracleUpdateAction> updates,
                                               const StateProvider& state,
                                               std::uint64_t horizon = default_horizon);

// Fraction of found results with distance <= d for d = 0..horizon; empty when
// nothing was found.
std::vector<Rational> block_distance_cdf(std::span<const OpportunityResult> results,
                                         std::uint64_t horizon = default_horizon);

enum class MevType { arbitrage, liquidation, sandwich };
std::string_view to_string(MevType t);

struct CompetitionEntry {
    MevType type = MevType::arbitrage;
    std::string finding_id;
    Hash32 opportunity_tx;
    Address extractor;
};

struct CompetitionGroup {
    MevType type = MevType::arbitrage;
    Hash32 opportunity_tx;
    std::vector<Address> extractors;  // distinct, sorted
    std::vector<std::string> finding_ids;
    std::size_t size() const { return extractors.size(); }
};

// Groups by (type, opportunity_tx); keeps groups with >= 2 distinct extractors.
std::vector<CompetitionGroup> detect_competition(std::span<const CompetitionEntry> entries);
std::map<MevType, std::size_t> max_group_size(std::span<const CompetitionGroup> groups);

struct RevertedRate {
    std::map<Address, std::optional<Rational>> per_extractor;
    std::optional<Rational> aggregate;
};

RevertedRate reverted_rate(const std::map<Address, std::vector<TxStatus>>& statuses);
std::optional<Rational> reverted_fraction(std::span<const TxStatus> statuses);

}  // namespace mevlens
