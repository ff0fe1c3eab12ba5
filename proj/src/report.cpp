#include "mevlens/report.hpp"

#include <fstream>
#include <set>

namespace mevlens {

std::string csv_escape(const std::string& field)
{
    if (field.find_first_of(",\"\r\n") == std::string::npos)
        return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"')
            out += '"';
        out += c;
    }
    out += '"';
    return out;
}

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size())
{
    emit(header);
}

void CsvWriter::row(const std::vector<std::string>& fields)
{
    if (fields.size() != columns_)
        throw InvariantViolation("csv row has " + std::to_string(fields.size()) + " fields, header has " +
                                 std::to_string(columns_));
    emit(fields);
}

void CsvWriter::emit(const std::vector<std::string>& fields)
{
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i)
            out_ += ',';
        out_ += csv_escape(fields[i]);
    }
    out_ += "\r\n";
}

std::string format_decimal(const Rational& v, int decimals)
{
    return format_fixed(v, decimals);
}

std::string finding_id(MevType type, ChainName chain, const Hash32& tx, std::size_t ordinal)
{
    return std::string(to_string(type)) + ":" + std::string(to_string(chain)) + ":" + to_hex(tx) + ":" +
           std::to_string(ordinal);
}

namespace {

template <typename Finding>
std::vector<std::string> ids_for(const std::vector<Finding>& list, MevType type, ChainName chain)
{
    std::vector<std::string> ids;
    std::map<Hash32, std::size_t> per_tx;
    for (const auto& f : list) {
        const Hash32& tx = [&]() -> const Hash32& {
            if constexpr (std::is_same_v<Finding, SandwichFinding>)
                return f.back_tx;
            else
                return f.tx_hash;
        }();
        ids.push_back(finding_id(type, chain, tx, per_tx[tx]++));
    }
    return ids;
}

Json profit_json(Json& j, const ProfitAccount& p, std::optional<Rational> eth_usd)
{
    j["gain_eth"] = format_eth(p.gain_eth);
    j["cost_eth"] = format_eth(p.cost_eth);
    j["profit_eth"] = format_eth(p.profit_eth);
    j["profit_usd"] = eth_usd ? Json(format_fixed(p.profit_eth * *eth_usd, 2)) : Json(nullptr);
    j["unpriced"] = p.unpriced;
    return j;
}

Json loans_json(const std::vector<FlashLoanAction>& loans)
{
    Json arr = Json::array();
    for (const auto& l : loans)
        arr.push_back(to_json(l));
    return arr;
}

Json header(const std::string& id, MevType type, ChainName chain, const Hash32& tx, TxPosition pos,
            const Address& extractor, const FindingContext& ctx, std::optional<Rational>& eth_usd)
{
    Json j;
    j["id"] = id;
    j["type"] = std::string(to_string(type));
    j["chain"] = std::string(to_string(chain));
    j["tx_hash"] = to_hex(tx);
    j["block"] = pos.block;
    j["tx_index"] = pos.tx_index;
    const std::int64_t ts = ctx.dataset ? ctx.dataset->block_timestamp(pos.block).value_or(0) : 0;
    j["timestamp"] = ts;
    j["month"] = utc_month(ts);
    j["extractor"] = to_hex(extractor);
    eth_usd = ctx.prices ? ctx.prices->eth_usd(unix_day(ts)) : std::nullopt;
    return j;
}

}  // namespace

std::vector<std::string> finding_ids(const ScanResult& scan, MevType type)
{
    switch (type) {
    case MevType::arbitrage: return ids_for(scan.arbitrages, type, scan.chain.name);
    case MevType::liquidation: return ids_for(scan.liquidations, type, scan.chain.name);
    case MevType::sandwich: return ids_for(scan.sandwiches, type, scan.chain.name);
    }
    return {};
}

Json to_json(const SwapAction& s)
{
    return Json{{"venue", to_hex(s.venue)},       {"token_in", to_hex(s.token_in)},
                {"token_out", to_hex(s.token_out)}, {"amount_in", s.amount_in.str()},
                {"amount_out", s.amount_out.str()}, {"log_index", s.position.log_index}};
}

Json to_json(const FlashLoanAction& f)
{
    return Json{{"provider", std::string(to_string(f.provider))},
                {"token", to_hex(f.token)},
                {"amount", f.amount.str()},
                {"fee", f.fee.str()},
                {"log_index", f.position.log_index}};
}

std::vector<Json> findings_json(const ScanResult& scan, MevType type, const FindingContext& ctx)
{
    std::vector<Json> out;
    const auto ids = finding_ids(scan, type);
    const ChainName chain = scan.chain.name;
    std::optional<Rational> usd;
    if (type == MevType::arbitrage) {
        for (std::size_t i = 0; i < scan.arbitrages.size(); ++i) {
            const auto& f = scan.arbitrages[i];
            Json j = header(ids[i], type, chain, f.tx_hash, f.position, f.extractor, ctx, usd);
            profit_json(j, f.profit, usd);
            Json cycle = Json::array();
            for (const auto& s : f.cycle)
                cycle.push_back(to_json(s));
            j["cycle"] = std::move(cycle);
            Json balances = Json::object();
            for (const auto& [token, amount] : f.token_balances)
                balances[to_hex(token)] = amount.str();
            j["token_balances"] = std::move(balances);
            j["flash_loans"] = loans_json(f.flash_loans);
            out.push_back(std::move(j));
        }
    } else if (type == MevType::liquidation) {
        for (std::size_t i = 0; i < scan.liquidations.size(); ++i) {
            const auto& f = scan.liquidations[i];
            Json j = header(ids[i], type, chain, f.tx_hash, f.position, f.extractor, ctx, usd);
            profit_json(j, f.profit, usd);
            j["unredeemed"] = f.unredeemed;
            Json actions = Json::array();
            for (const auto& a : f.actions)
                actions.push_back(Json{{"protocol", std::string(to_string(a.protocol))},
                                       {"liquidator", to_hex(a.liquidator)},
                                       {"borrower", to_hex(a.borrower)},
                                       {"debt_token", to_hex(a.debt_token)},
                                       {"debt_amount", a.debt_amount.str()},
                                       {"collateral_token", to_hex(a.collateral_token)},
                                       {"collateral_amount",
                                        a.collateral_amount ? Json(a.collateral_amount->str()) : Json(nullptr)},
                                       {"log_index", a.position.log_index}});
            j["actions"] = std::move(actions);
            j["flash_loans"] = loans_json(f.flash_loans);
            out.push_back(std::move(j));
        }
    } else {
        for (std::size_t i = 0; i < scan.sandwiches.size(); ++i) {
            const auto& f = scan.sandwiches[i];
            Json j = header(ids[i], type, chain, f.back_tx, f.back_position, f.extractor, ctx, usd);
            profit_json(j, f.profit, usd);
            j["front_tx"] = to_hex(f.front_tx);
            j["back_tx"] = to_hex(f.back_tx);
            Json victims = Json::array();
            for (const auto& v : f.victim_txs)
                victims.push_back(to_hex(v));
            j["victim_txs"] = std::move(victims);
            j["token"] = to_hex(f.token);
            j["attacker"] = to_hex(f.attacker);
            j["first_block"] = f.first_block();
            j["last_block"] = f.last_block();
            j["flash_loans"] = loans_json(f.flash_loans);
            out.push_back(std::move(j));
        }
    }
    return out;
}

Json to_json(const OpportunityResult& r)
{
    return Json{{"finding_id", r.finding_id},
                {"status", status_label(r)},
                {"opportunity_tx", r.opportunity_tx ? Json(to_hex(*r.opportunity_tx)) : Json(nullptr)},
                {"block_distance", r.block_distance ? Json(*r.block_distance) : Json(nullptr)},
                {"approximate", r.approximate},
                {"detail", r.detail}};
}

Json to_json(const CrossLayerLink& l)
{
    return Json{{"rollup", std::string(to_string(l.rollup.name))},
                {"link_key", to_hex(l.link_key)},
                {"l1_tx", to_hex(l.l1_tx)},
                {"l2_tx", to_hex(l.l2_tx)},
                {"l1_block", l.l1_block},
                {"l2_block", l.l2_block},
                {"l1_timestamp", l.l1_timestamp},
                {"l2_timestamp", l.l2_timestamp},
                {"delay_s", l.delay_s},
                {"anomalous", l.anomalous()}};
}

Json to_json(const VictimCandidate& v)
{
    return Json{{"link", to_json(v.link)},
                {"pool", to_hex(v.pool)},
                {"user", to_hex(v.swap.user)},
                {"token_in", to_hex(v.swap.token_in)},
                {"token_out", to_hex(v.swap.token_out)},
                {"amount_in", v.swap.amount_in.str()},
                {"amount_out", v.swap.amount_out.str()},
                {"min_amount_out", v.swap.min_amount_out ? Json(v.swap.min_amount_out->str()) : Json(nullptr)},
                {"slippage_assumed", !v.swap.min_amount_out.has_value()}};
}

Json to_json(const LinkDiagnostic& d)
{
    return Json{{"kind", std::string(to_string(d.kind))},
                {"rollup", std::string(to_string(d.rollup.name))},
                {"link_key", to_hex(d.link_key)},
                {"tx", to_hex(d.tx)}};
}

std::string to_jsonl(const std::vector<Json>& lines)
{
    std::string out;
    for (const auto& j : lines)
        out += j.dump() + "\n";
    return out;
}

std::vector<FindingRow> read_finding_rows(std::string_view jsonl)
{
    std::vector<FindingRow> rows;
    std::size_t line_no = 0;
    while (!jsonl.empty()) {
        auto nl = jsonl.find('\n');
        std::string_view line = jsonl.substr(0, nl);
        jsonl = nl == std::string_view::npos ? std::string_view{} : jsonl.substr(nl + 1);
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos)
            continue;
        try {
            const auto j = nlohmann::json::parse(line);
            FindingRow r;
            const auto type = j.at("type").get<std::string>();
            if (type == "arbitrage")
                r.type = MevType::arbitrage;
            else if (type == "liquidation")
                r.type = MevType::liquidation;
            else if (type == "sandwich")
                r.type = MevType::sandwich;
            else
                throw Error("unknown finding type '" + type + "'");
            auto chain = chain_from_string(j.at("chain").get<std::string>());
            if (!chain)
                throw Error("unknown chain");
            r.chain = *chain;
            r.month = j.at("month").get<std::string>();
            if (j.contains("profit_eth") && j["profit_eth"].is_string())
                r.profit_eth = parse_rational(j["profit_eth"].get<std::string>());
            if (j.contains("profit_usd") && j["profit_usd"].is_string())
                r.profit_usd = parse_rational(j["profit_usd"].get<std::string>());
            for (const auto& l : j.value("flash_loans", nlohmann::json::array()))
                r.flash_loan_providers.push_back(l.at("provider").get<std::string>());
            rows.push_back(std::move(r));
        } catch (const std::exception& e) {
            throw Error("findings line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return rows;
}

std::string monthly_counts_csv(const std::vector<FindingRow>& rows)
{
    std::map<std::tuple<std::string, ChainName, MevType>, std::size_t> counts;
    for (const auto& r : rows)
        ++counts[{r.month, r.chain, r.type}];
    CsvWriter csv({"month", "chain", "type", "count"});
    for (const auto& [key, n] : counts)
        csv.row({std::get<0>(key), std::string(to_string(std::get<1>(key))), std::string(to_string(std::get<2>(key))),
                 std::to_string(n)});
    return csv.str();
}

std::string profit_stats_csv(const std::vector<FindingRow>& rows)
{
    std::map<std::tuple<ChainName, MevType, std::string>, std::vector<Rational>> samples;
    for (const auto& r : rows) {
        if (r.profit_usd)
            samples[{r.chain, r.type, "USD"}].push_back(*r.profit_usd);
        if (r.profit_eth)
            samples[{r.chain, r.type, "ETH"}].push_back(*r.profit_eth);
    }
    CsvWriter csv({"chain", "type", "unit", "count", "total", "max", "p90", "mean", "median", "min"});
    for (const auto& [key, values] : samples) {
        const Summary s = *summarize(values);
        const int d = std::get<2>(key) == "USD" ? 2 : 18;
        csv.row({std::string(to_string(std::get<0>(key))), std::string(to_string(std::get<1>(key))), std::get<2>(key),
                 std::to_string(s.count), format_decimal(s.total, d), format_decimal(s.max, d),
                 format_decimal(s.p90, d), format_decimal(s.mean, d), format_decimal(s.median, d),
                 format_decimal(s.min, d)});
    }
    return csv.str();
}

std::string flash_loans_csv(const std::vector<FindingRow>& rows)
{
    struct Tally {
        std::size_t loans = 0;
        std::size_t findings = 0;
    };
    std::map<std::tuple<ChainName, MevType, std::string>, Tally> tallies;
    for (const auto& r : rows) {
        std::set<std::string> used;
        for (const auto& p : r.flash_loan_providers) {
            ++tallies[{r.chain, r.type, p}].loans;
            used.insert(p);
        }
        for (const auto& p : used)
            ++tallies[{r.chain, r.type, p}].findings;
    }
    CsvWriter csv({"chain", "type", "provider", "loans", "findings"});
    for (const auto& [key, t] : tallies)
        csv.row({std::string(to_string(std::get<0>(key))), std::string(to_string(std::get<1>(key))), std::get<2>(key),
                 std::to_string(t.loans), std::to_string(t.findings)});
    return csv.str();
}

std::string distance_cdf_csv(const std::vector<std::pair<std::string, std::vector<Rational>>>& series)
{
    CsvWriter csv({"series", "distance", "cdf"});
    for (const auto& [name, cdf] : series)
        for (std::size_t d = 0; d < cdf.size(); ++d)
            csv.row({name, std::to_string(d), format_decimal(cdf[d], 6)});
    return csv.str();
}

std::string delay_stats_csv(const std::vector<std::pair<ChainName, std::span<const CrossLayerLink>>>& per_rollup)
{
    CsvWriter csv({"rollup", "period", "count", "min", "mean", "median", "max"});
    auto emit = [&](ChainName rollup, const std::string& period, const DelayStats& s) {
        csv.row({std::string(to_string(rollup)), period, std::to_string(s.count), std::to_string(s.min),
                 format_decimal(s.mean, 1), format_decimal(s.median, 1), std::to_string(s.max)});
    };
    for (const auto& [rollup, links] : per_rollup) {
        try {
            emit(rollup, "all", delay_stats(links));
        } catch (const EmptyInput&) {
            continue;
        }
        for (const auto& [month, s] : delay_stats_by_month(links))
            emit(rollup, month, s);
    }
    return csv.str();
}

std::string attack_profitability_csv(const std::vector<TierResult>& table)
{
    CsvWriter csv({"strategy", "capital_usd", "evaluated", "infeasible", "profitable", "total", "max", "p90", "mean",
                   "median", "min"});
    for (const auto& t : table) {
        std::vector<std::string> row{std::string(to_string(t.strategy)),
                                     t.capital_usd ? format_decimal(*t.capital_usd, 0) : "inf",
                                     std::to_string(t.evaluated), std::to_string(t.infeasible),
                                     std::to_string(t.profitable)};
        if (t.summary) {
            for (const auto* v : {&t.summary->total, &t.summary->max, &t.summary->p90, &t.summary->mean,
                                  &t.summary->median, &t.summary->min})
                row.push_back(format_decimal(*v, 2));
        } else {
            row.insert(row.end(), 6, "");
        }
        csv.row(row);
    }
    return csv.str();
}

std::string bytecode_clusters_csv(const ClusterReport& report)
{
    CsvWriter csv({"digest", "size", "chains", "cross_chain", "members"});
    for (const auto& c : report.clusters) {
        std::string chains, members;
        for (auto ch : c.chains)
            chains += (chains.empty() ? "" : ";") + std::string(to_string(ch));
        for (const auto& m : c.members)
            members += (members.empty() ? "" : ";") + std::string(to_string(m.chain.name)) + ":" + to_hex(m.address);
        csv.row({to_hex(c.digest), std::to_string(c.members.size()), chains, c.cross_chain() ? "true" : "false",
                 members});
    }
    return csv.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error("cannot write " + path.string());
    out << content;
    if (!out)
        throw Error("failed writing " + path.string());
}

}  // namespace mevlens
