#include "commands.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "mevlens/bytecode.hpp"
#include "mevlens/chain_model.hpp"
#include "mevlens/opportunity.hpp"
#include "mevlens/pipeline.hpp"
#include "mevlens/pool_metadata.hpp"
#include "mevlens/prices.hpp"
#include "mevlens/report.hpp"

namespace mevlens::cli {

namespace fs = std::filesystem;

// --- configuration -------------------------------------------------------------

fs::path RunConfig::chain_file(ChainName c) const
{
    return fixtures / (std::string(to_string(c)) + ".jsonl");
}

namespace {

std::optional<fs::path> explicit_or_default(const std::optional<fs::path>& given, const fs::path& fallback)
{
    if (given)
        return given;
    if (fs::exists(fallback))
        return fallback;
    return std::nullopt;
}

Rational rational_field(const nlohmann::json& j, const char* key)
{
    const auto& v = j.at(key);
    if (v.is_string())
        return parse_rational(v.get<std::string>());
    if (v.is_number_integer())
        return Rational(v.get<std::int64_t>());
    throw Error(std::string("'") + key + "' must be a decimal string or an integer");
}

}  // namespace

std::optional<fs::path> RunConfig::prices_file() const
{
    return explicit_or_default(prices, fixtures / "prices.csv");
}

std::optional<fs::path> RunConfig::pools_file() const
{
    return explicit_or_default(pools, fixtures / "pools.json");
}

std::optional<fs::path> RunConfig::snapshots_file() const
{
    return explicit_or_default(snapshots, fixtures / "snapshots.jsonl");
}

fs::path RunConfig::bytecode_file() const
{
    return bytecode.value_or(fixtures / "bytecode.jsonl");
}

void apply_config_file(RunConfig& c, const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open config " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    try {
        const auto j = nlohmann::json::parse(text);
        if (!j.is_object())
            throw Error("top level must be an object");
        if (j.contains("window"))
            c.window = j["window"].get<std::uint64_t>();
        if (j.contains("horizon"))
            c.horizon = j["horizon"].get<std::uint64_t>();
        if (j.contains("jobs"))
            c.jobs = j["jobs"].get<unsigned>();
        if (j.contains("detectors")) {
            const auto& d = j["detectors"];
            c.arbitrage = d.value("arbitrage", c.arbitrage);
            c.liquidation = d.value("liquidation", c.liquidation);
            c.sandwich = d.value("sandwich", c.sandwich);
        }
        if (j.contains("cost_model")) {
            const auto& m = j["cost_model"];
            if (m.contains("l1_tx_cost_eth"))
                c.attack.costs.l1_tx_cost_eth = rational_field(m, "l1_tx_cost_eth");
            if (m.contains("l2_tx_cost_eth"))
                c.attack.costs.l2_tx_cost_eth = rational_field(m, "l2_tx_cost_eth");
            if (m.contains("bribe_eth"))
                c.attack.costs.bribe_eth = rational_field(m, "bribe_eth");
        }
        if (j.contains("capital_tiers_usd")) {
            c.attack.capital_tiers_usd.clear();
            for (const auto& t : j["capital_tiers_usd"]) {
                if (t.is_null())
                    c.attack.capital_tiers_usd.push_back(std::nullopt);
                else
                    c.attack.capital_tiers_usd.push_back(rational_field(nlohmann::json{{"tier", t}}, "tier"));
            }
        }
        if (j.contains("reaction_time_s"))
            c.attack.reaction_time_s = j["reaction_time_s"].get<std::int64_t>();
        if (j.contains("slippage_fallback"))
            c.attack.slippage_fallback = rational_field(j, "slippage_fallback");
    } catch (const nlohmann::json::parse_error& e) {
        // Byte offset to line number.
        const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
        const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
        throw Error(path.string() + ": line " + std::to_string(line) + ": " + e.what());
    } catch (const std::exception& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

void validate(const RunConfig& c)
{
    if (c.from_block > c.to_block)
        throw InvalidRange("--from-block " + std::to_string(c.from_block) + " is after --to-block " +
                           std::to_string(c.to_block));
    if (c.jobs == 0)
        throw Error("--jobs must be at least 1");
    if (c.window == 0)
        throw Error("--window must be at least 1");
    for (const auto* p : {&c.prices, &c.pools, &c.snapshots, &c.bytecode})
        if (*p && !fs::exists(**p))
            throw Error("no such file: " + (*p)->string());
    if (!fs::is_directory(c.fixtures))
        throw Error("no such fixtures directory: " + c.fixtures.string());
}

// --- shared plumbing -----------------------------------------------------------------

namespace {

struct Inputs {
    PoolDirectory pools;
    PriceTable prices;
    std::unique_ptr<SnapshotStore> snapshots;
};

ChainDataset load_chain(const RunConfig& c, ChainName chain)
{
    const fs::path path = c.chain_file(chain);
    spdlog::debug("loading {}", path.string());
    ChainDataset d = load_fixture(path);
    if (d.chain() && d.chain()->name != chain)
        throw Error(path.string() + ": records belong to " + std::string(to_string(d.chain()->name)));
    spdlog::info("{}: {} blocks, {} txs, {} logs", path.string(), d.blocks().size(), d.txs().size(), d.logs().size());
    return d;
}

std::unique_ptr<Inputs> load_inputs(const RunConfig& c, bool want_snapshots)
{
    auto in = std::make_unique<Inputs>();
    if (auto p = c.pools_file())
        in->pools = PoolDirectory::load(*p);
    if (auto p = c.prices_file())
        in->prices = PriceTable::load(*p);
    in->snapshots = std::make_unique<SnapshotStore>(&in->pools);
    if (want_snapshots) {
        if (auto p = c.snapshots_file())
            in->snapshots->load(*p);
        else
            spdlog::warn("no state snapshots; opportunity and attack results will be unsimulatable");
    }
    return in;
}

ScanResult scan(const RunConfig& c, const ChainDataset& d, const Inputs& in, bool arb, bool liq, bool sandwich)
{
    ScanOptions o;
    o.from_block = c.from_block;
    o.to_block = c.to_block;
    o.jobs = c.jobs;
    o.window = c.window;
    o.arbitrage = arb;
    o.liquidation = liq;
    o.sandwich = sandwich;
    o.pools = &in.pools;
    ScanResult r = scan_chain(d, o);
    price_findings(r, d, in.prices);
    if (r.actions.skipped)
        spdlog::warn("{} logs with known topics failed to decode", r.actions.skipped);
    return r;
}

void write(const fs::path& path, const std::string& content)
{
    write_text_file(path, content);
    std::cout << "wrote " << path.string() << "\n";
}

fs::path findings_path(const RunConfig& c, const std::string& stem, ChainName chain)
{
    return c.out / "findings" / (stem + "_" + std::string(to_string(chain)) + ".jsonl");
}

fs::path report_path(const RunConfig& c, const std::string& name)
{
    return c.out / "report" / name;
}

std::string mev_stem(MevType t)
{
    return std::string(to_string(t));
}

Json pos_json(const LogPosition& p)
{
    return Json{{"block", p.block}, {"tx_index", p.tx_index}, {"log_index", p.log_index}};
}

// The rollups to process: the one named by --chain, else every rollup with a chain file.
std::vector<ChainName> rollups(const RunConfig& c)
{
    if (c.chain_given) {
        if (c.chain == ChainName::ethereum)
            throw Error("cross-layer commands take a rollup chain (arbitrum, optimism or zksync)");
        return {c.chain};
    }
    std::vector<ChainName> out;
    for (ChainName r : {ChainName::arbitrum, ChainName::optimism, ChainName::zksync})
        if (fs::exists(c.chain_file(r)))
            out.push_back(r);
    if (out.empty())
        throw Error("no rollup chain files under " + c.fixtures.string());
    return out;
}

struct Opportunities {
    ScanResult scan;
    std::vector<OpportunityResult> arbitrage;
    std::vector<OpportunityResult> liquidation;
};

Opportunities search_opportunities(const RunConfig& c, const ChainDataset& d, const Inputs& in)
{
    Opportunities o{scan(c, d, in, true, true, false), {}, {}};
    // Candidates may precede the scanned range by up to the horizon.
    const std::uint64_t lo = c.from_block > c.horizon ? c.from_block - c.horizon : 0;
    const DecodedActions lookback = decode_actions(d.log_slice(lo, c.to_block), &in.pools);
    const auto arb_ids = finding_ids(o.scan, MevType::arbitrage);
    for (std::size_t i = 0; i < o.scan.arbitrages.size(); ++i)
        o.arbitrage.push_back(
            find_arbitrage_opportunity(o.scan.arbitrages[i], arb_ids[i], lookback.swaps, *in.snapshots, c.horizon));
    const auto liq_ids = finding_ids(o.scan, MevType::liquidation);
    for (std::size_t i = 0; i < o.scan.liquidations.size(); ++i)
        o.liquidation.push_back(find_liquidation_opportunity(o.scan.liquidations[i], liq_ids[i],
                                                             lookback.oracle_updates, *in.snapshots, c.horizon));
    return o;
}

}  // namespace

// --- decode -------------------------------------------------------------------------

int run_decode(const RunConfig& c)
{
    const ChainDataset d = load_chain(c, c.chain);
    const auto in = load_inputs(c, false);
    const DecodedActions a = decode_actions(d.log_slice(c.from_block, c.to_block), &in->pools);

    std::vector<std::pair<LogPosition, Json>> rows;
    for (const auto& s : a.swaps) {
        Json j{{"kind", "swap"}};
        j.update(to_json(s));
        rows.push_back({s.position, std::move(j)});
    }
    for (const auto& t : a.transfers)
        rows.push_back({t.position, Json{{"kind", "transfer"},
                                         {"token", to_hex(t.token)},
                                         {"sender", to_hex(t.sender)},
                                         {"receiver", to_hex(t.receiver)},
                                         {"amount", t.amount.str()},
                                         {"tx_hash", to_hex(t.tx_hash)}}});
    for (const auto& l : a.liquidations)
        rows.push_back({l.position, Json{{"kind", "liquidation"},
                                         {"protocol", std::string(to_string(l.protocol))},
                                         {"liquidator", to_hex(l.liquidator)},
                                         {"borrower", to_hex(l.borrower)},
                                         {"debt_token", to_hex(l.debt_token)},
                                         {"debt_amount", l.debt_amount.str()},
                                         {"collateral_token", to_hex(l.collateral_token)},
                                         {"tx_hash", to_hex(l.tx_hash)}}});
    for (const auto& r : a.redeems)
        rows.push_back({r.position, Json{{"kind", "redeem"},
                                         {"redeemer", to_hex(r.redeemer)},
                                         {"token", to_hex(r.token)},
                                         {"amount", r.amount.str()},
                                         {"tx_hash", to_hex(r.tx_hash)}}});
    for (const auto& f : a.flash_loans) {
        Json j{{"kind", "flash_loan"}};
        j.update(to_json(f));
        rows.push_back({f.position, std::move(j)});
    }
    for (const auto& u : a.oracle_updates)
        rows.push_back({u.position, Json{{"kind", "oracle_update"},
                                         {"feed", to_hex(u.feed)},
                                         {"answer", u.new_answer.str()},
                                         {"round_id", u.round_id.str()},
                                         {"tx_hash", to_hex(u.tx_hash)}}});
    std::stable_sort(rows.begin(), rows.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    std::vector<Json> lines;
    for (auto& [pos, j] : rows) {
        j["position"] = pos_json(pos);
        lines.push_back(std::move(j));
    }
    write(findings_path(c, "decoded", c.chain), to_jsonl(lines));
    std::cout << "swaps " << a.swaps.size() << ", transfers " << a.transfers.size() << ", liquidations "
              << a.liquidations.size() << ", redeems " << a.redeems.size() << ", flash loans " << a.flash_loans.size()
              << ", oracle updates " << a.oracle_updates.size() << ", undecodable " << a.skipped << "\n";
    return 0;
}

// --- detect --------------------------------------------------------------------------

int run_detect(const RunConfig& c, DetectKind kind)
{
    const ChainDataset d = load_chain(c, c.chain);
    const auto in = load_inputs(c, false);
    const FindingContext ctx{&d, &in->prices};
    if (kind == DetectKind::flashloan) {
        const ScanResult r = scan(c, d, *in, true, true, true);
        // Which findings borrowed each loan.
        std::map<std::pair<Hash32, std::uint32_t>, std::vector<std::string>> users;
        auto note = [&](const auto& findings, MevType t) {
            const auto ids = finding_ids(r, t);
            for (std::size_t i = 0; i < findings.size(); ++i)
                for (const auto& l : findings[i].flash_loans)
                    users[{l.tx_hash, l.position.log_index}].push_back(ids[i]);
        };
        note(r.arbitrages, MevType::arbitrage);
        note(r.liquidations, MevType::liquidation);
        note(r.sandwiches, MevType::sandwich);
        std::vector<Json> lines;
        for (const auto& f : r.actions.flash_loans) {
            Json j = to_json(f);
            j["tx_hash"] = to_hex(f.tx_hash);
            j["position"] = pos_json(f.position);
            const auto it = users.find({f.tx_hash, f.position.log_index});
            j["used_by"] = it == users.end() ? Json::array() : Json(it->second);
            lines.push_back(std::move(j));
        }
        write(findings_path(c, "flashloan", c.chain), to_jsonl(lines));
        std::cout << "flash loans " << lines.size() << "\n";
        return 0;
    }
    const MevType type = kind == DetectKind::arbitrage     ? MevType::arbitrage
                         : kind == DetectKind::liquidation ? MevType::liquidation
                                                           : MevType::sandwich;
    const ScanResult r = scan(c, d, *in, type == MevType::arbitrage, type == MevType::liquidation,
                              type == MevType::sandwich);
    const auto lines = findings_json(r, type, ctx);
    write(findings_path(c, mev_stem(type), c.chain), to_jsonl(lines));
    std::cout << to_string(type) << " findings " << lines.size() << "\n";
    return 0;
}

// --- opportunity and competition -------------------------------------------------------

int run_opportunity(const RunConfig& c)
{
    const ChainDataset d = load_chain(c, c.chain);
    const auto in = load_inputs(c, true);
    const Opportunities o = search_opportunities(c, d, *in);
    std::vector<Json> lines;
    for (const auto& [type, results] : {std::pair{MevType::arbitrage, &o.arbitrage},
                                        std::pair{MevType::liquidation, &o.liquidation}})
        for (const auto& r : *results) {
            Json j{{"type", std::string(to_string(type))}};
            j.update(to_json(r));
            lines.push_back(std::move(j));
        }
    write(findings_path(c, "opportunity", c.chain), to_jsonl(lines));
    const std::string chain(to_string(c.chain));
    write(report_path(c, "distance_cdf_" + chain + ".csv"),
          distance_cdf_csv({{"arbitrage_" + chain, block_distance_cdf(o.arbitrage, c.horizon)},
                            {"liquidation_" + chain, block_distance_cdf(o.liquidation, c.horizon)}}));
    auto count_found = [](const std::vector<OpportunityResult>& v) {
        return std::count_if(v.begin(), v.end(), [](const auto& r) { return r.status == OpportunityStatus::found; });
    };
    std::cout << "arbitrage opportunities found " << count_found(o.arbitrage) << "/" << o.arbitrage.size()
              << ", liquidation " << count_found(o.liquidation) << "/" << o.liquidation.size() << "\n";
    return 0;
}

int run_compete(const RunConfig& c)
{
    const ChainDataset d = load_chain(c, c.chain);
    const auto in = load_inputs(c, true);
    const Opportunities o = search_opportunities(c, d, *in);

    std::vector<CompetitionEntry> entries;
    auto collect = [&](MevType type, const std::vector<OpportunityResult>& results, const auto& findings) {
        for (std::size_t i = 0; i < results.size(); ++i)
            if (results[i].status == OpportunityStatus::found && results[i].opportunity_tx)
                entries.push_back({type, results[i].finding_id, *results[i].opportunity_tx, findings[i].extractor});
    };
    collect(MevType::arbitrage, o.arbitrage, o.scan.arbitrages);
    collect(MevType::liquidation, o.liquidation, o.scan.liquidations);
    const auto groups = detect_competition(entries);

    std::vector<Json> lines;
    for (const auto& g : groups) {
        Json extractors = Json::array();
        for (const auto& e : g.extractors)
            extractors.push_back(to_hex(e));
        lines.push_back(Json{{"type", std::string(to_string(g.type))},
                             {"opportunity_tx", to_hex(g.opportunity_tx)},
                             {"size", g.size()},
                             {"extractors", extractors},
                             {"finding_ids", g.finding_ids}});
    }
    write(findings_path(c, "competition", c.chain), to_jsonl(lines));

    const std::string chain(to_string(c.chain));
    const auto max_sizes = max_group_size(groups);
    CsvWriter comp({"chain", "type", "groups", "max_group_size"});
    for (MevType t : {MevType::arbitrage, MevType::liquidation}) {
        const auto n = std::count_if(groups.begin(), groups.end(), [&](const auto& g) { return g.type == t; });
        const auto it = max_sizes.find(t);
        comp.row({chain, std::string(to_string(t)), std::to_string(n),
                  std::to_string(it == max_sizes.end() ? 0 : it->second)});
    }
    write(report_path(c, "competition_" + chain + ".csv"), comp.str());

    // Reverted share of every transaction sent by an extractor seen in a finding.
    std::set<Address> extractors;
    for (const auto& f : o.scan.arbitrages)
        extractors.insert(f.extractor);
    for (const auto& f : o.scan.liquidations)
        extractors.insert(f.extractor);
    std::map<Address, std::vector<TxStatus>> statuses;
    for (const auto& e : extractors)
        statuses[e];
    for (const auto& tx : d.txs())
        if (tx.block_number >= c.from_block && tx.block_number <= c.to_block && extractors.count(tx.from))
            statuses[tx.from].push_back(tx.status);
    const RevertedRate rate = reverted_rate(statuses);
    CsvWriter rev({"chain", "extractor", "txs", "reverted", "reverted_fraction"});
    auto fraction = [](const std::optional<Rational>& f) { return f ? format_decimal(*f, 6) : std::string(); };
    std::size_t all = 0, all_reverted = 0;
    for (const auto& [who, s] : statuses) {
        const auto reverted = static_cast<std::size_t>(std::count(s.begin(), s.end(), TxStatus::reverted));
        all += s.size();
        all_reverted += reverted;
        rev.row({chain, to_hex(who), std::to_string(s.size()), std::to_string(reverted),
                 fraction(rate.per_extractor.at(who))});
    }
    rev.row({chain, "all", std::to_string(all), std::to_string(all_reverted), fraction(rate.aggregate)});
    write(report_path(c, "reverted_" + chain + ".csv"), rev.str());
    std::cout << "competition groups " << groups.size() << "\n";
    return 0;
}

// --- cross-layer ---------------------------------------------------------------------------

int run_crosslayer(const RunConfig& c, CrossLayerKind kind)
{
    const auto targets = rollups(c);
    const ChainDataset l1 = load_chain(c, ChainName::ethereum);
    const auto in = load_inputs(c, kind == CrossLayerKind::simulate);

    std::vector<std::pair<ChainName, InferenceResult>> results;
    for (ChainName r : targets) {
        const ChainDataset l2 = load_chain(c, r);
        results.emplace_back(r, infer_victims(l1, l2));
    }

    if (kind == CrossLayerKind::infer) {
        for (const auto& [r, res] : results) {
            std::vector<Json> links, victims, diags;
            for (const auto& l : res.links)
                links.push_back(to_json(l));
            for (const auto& v : res.victims)
                victims.push_back(to_json(v));
            for (const auto& g : res.diagnostics)
                diags.push_back(to_json(g));
            write(findings_path(c, "links", r), to_jsonl(links));
            write(findings_path(c, "victims", r), to_jsonl(victims));
            write(findings_path(c, "diagnostics", r), to_jsonl(diags));
            std::cout << to_string(r) << ": links " << links.size() << ", victims " << victims.size()
                      << ", diagnostics " << diags.size() << "\n";
        }
        return 0;
    }
    if (kind == CrossLayerKind::delay) {
        std::vector<std::pair<ChainName, std::span<const CrossLayerLink>>> per;
        for (const auto& [r, res] : results)
            per.emplace_back(r, res.links);
        write(report_path(c, "delay_stats.csv"), delay_stats_csv(per));
        return 0;
    }

    std::vector<VictimCandidate> victims;
    for (const auto& [r, res] : results)
        victims.insert(victims.end(), res.victims.begin(), res.victims.end());
    const SweepPreparation prep = prepare_sweep(victims, *in->snapshots, in->prices);
    std::vector<Json> skipped;
    for (const auto& [v, reason] : prep.skipped) {
        Json j{{"reason", reason}};
        j["victim"] = to_json(v);
        skipped.push_back(std::move(j));
    }
    write(c.out / "findings" / "sweep_skipped.jsonl", to_jsonl(skipped));
    const auto table = capital_sweep(prep.ready, c.attack);
    write(report_path(c, "attack_profitability.csv"), attack_profitability_csv(table));
    std::cout << "victims " << victims.size() << ", simulated " << prep.ready.size() << ", skipped "
              << prep.skipped.size() << "\n";
    return 0;
}

// --- bytecode ---------------------------------------------------------------------------------

int run_bytecode_cluster(const RunConfig& c)
{
    const auto records = load_bytecode(c.bytecode_file());
    const ClusterReport report = cluster(records);
    write(report_path(c, "bytecode_clusters.csv"), bytecode_clusters_csv(report));
    const auto shared = std::count_if(report.clusters.begin(), report.clusters.end(),
                                      [](const auto& k) { return k.members.size() > 1; });
    const auto cross = std::count_if(report.clusters.begin(), report.clusters.end(),
                                     [](const auto& k) { return k.members.size() > 1 && k.cross_chain(); });
    std::cout << "records " << records.size() << ", excluded verified " << report.excluded_verified
              << ", excluded delegatecall " << report.excluded_delegatecall << ", clusters of 2+ " << shared
              << ", cross-chain " << cross << "\n";
    return 0;
}

// --- report -------------------------------------------------------------------------------------

int run_report(const RunConfig& c)
{
    std::vector<FindingRow> rows;
    const fs::path dir = c.out / "findings";
    std::vector<fs::path> files;
    if (fs::is_directory(dir))
        for (const auto& e : fs::directory_iterator(dir)) {
            const std::string name = e.path().filename().string();
            for (MevType t : {MevType::arbitrage, MevType::liquidation, MevType::sandwich})
                if (name.rfind(mev_stem(t) + "_", 0) == 0 && e.path().extension() == ".jsonl")
                    files.push_back(e.path());
        }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        std::ifstream in(f, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        try {
            auto part = read_finding_rows(buf.str());
            rows.insert(rows.end(), part.begin(), part.end());
        } catch (const Error& e) {
            throw Error(f.string() + ": " + e.what());
        }
    }
    write(report_path(c, "monthly_counts.csv"), monthly_counts_csv(rows));
    write(report_path(c, "profit_stats.csv"), profit_stats_csv(rows));
    write(report_path(c, "flash_loans.csv"), flash_loans_csv(rows));
    std::cout << "findings " << rows.size() << " from " << files.size() << " files\n";
    return 0;
}

}  // namespace mevlens::cli
