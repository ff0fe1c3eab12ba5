#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mevlens/bytecode.hpp"
#include "mevlens/cross_layer.hpp"
#include "mevlens/opportunity.hpp"
#include "mevlens/pipeline.hpp"
#include "mevlens/stats.hpp"

namespace mevlens {

using Json = nlohmann::ordered_json;

// RFC 4180 CSV: CRLF line ends, fields quoted when they hold a comma, quote or line break.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);
    void row(const std::vector<std::string>& fields);
    const std::string& str() const { return out_; }

private:
    std::size_t columns_;
    std::string out_;
    void emit(const std::vector<std::string>& fields);
};

std::string csv_escape(const std::string& field);

// Context for rendering findings.
struct FindingContext {
    const ChainDataset* dataset = nullptr;
    const PriceProvider* prices = nullptr;
};

std::string finding_id(MevType type, ChainName chain, const Hash32& tx, std::size_t ordinal);

// One JSON object per finding, in scan order. Ids number findings per tx.
std::vector<Json> findings_json(const ScanResult& scan, MevType type, const FindingContext& ctx);
std::vector<std::string> finding_ids(const ScanResult& scan, MevType type);

Json to_json(const SwapAction& s);
Json to_json(const FlashLoanAction& f);
Json to_json(const OpportunityResult& r);
Json to_json(const CrossLayerLink& l);
Json to_json(const VictimCandidate& v);
Json to_json(const LinkDiagnostic& d);

std::string to_jsonl(const std::vector<Json>& lines);

// The fields of a findings file the summary tables need.
struct FindingRow {
    MevType type = MevType::arbitrage;
    ChainName chain = ChainName::ethereum;
    std::string month;
    std::optional<Rational> profit_eth;
    std::optional<Rational> profit_usd;
    std::vector<std::string> flash_loan_providers;
};

std::vector<FindingRow> read_finding_rows(std::string_view jsonl);

// month x chain x type counts.
std::string monthly_counts_csv(const std::vector<FindingRow>& rows);
// Per chain, type and unit: Total, Max, P90, Mean, Median, Min.
std::string profit_stats_csv(const std::vector<FindingRow>& rows);
// Per chain, type and provider: loans and findings using them.
std::string flash_loans_csv(const std::vector<FindingRow>& rows);

std::string distance_cdf_csv(const std::vector<std::pair<std::string, std::vector<Rational>>>& series);
std::string delay_stats_csv(const std::vector<std::pair<ChainName, std::span<const CrossLayerLink>>>& per_rollup);
std::string attack_profitability_csv(const std::vector<TierResult>& table);
std::string bytecode_clusters_csv(const ClusterReport& report);

std::string format_decimal(const Rational& v, int decimals);

void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace mevlens
