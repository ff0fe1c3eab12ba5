#include "mevlens/opportunity.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace mevlens {

namespace {

template <typename T>
std::optional<T> at_or_before(const std::map<std::uint64_t, T>& series, std::uint64_t block)
{
    auto it = series.upper_bound(block);
    if (it == series.begin())
        return std::nullopt;
    return std::prev(it)->second;
}

std::optional<LiquidationProtocol> protocol_from_string(const std::string& s)
{
    for (auto p : {LiquidationProtocol::aave_v1, LiquidationProtocol::aave_v2v3, LiquidationProtocol::compound_v2})
        if (to_string(p) == s)
            return p;
    return std::nullopt;
}

std::uint64_t lower_bound_block(std::uint64_t block, std::uint64_t horizon)
{
    return block > horizon ? block - horizon : 0;
}

OpportunityResult make_result(const std::string& id, OpportunityStatus status, std::string detail = {})
{
    OpportunityResult r;
    r.finding_id = id;
    r.status = status;
    r.detail = std::move(detail);
    return r;
}

}  // namespace

void SnapshotStore::add_pool(const Address& pool, std::uint64_t block, std::vector<BigInt> reserves)
{
    pool_[pool][block] = std::move(reserves);
}

void SnapshotStore::add_health(const Address& borrower, std::uint64_t block, Rational hf,
                               std::optional<LiquidationProtocol> protocol)
{
    const int tag = protocol ? static_cast<int>(*protocol) : -1;
    health_[{borrower, tag}][block] = std::move(hf);
}

void SnapshotStore::add_shortfall(const Address& borrower, std::uint64_t block, BigInt sf)
{
    shortfall_[borrower][block] = std::move(sf);
}

std::optional<PoolState> SnapshotStore::pool_state(const Address& pool, std::uint64_t block) const
{
    const PoolMetadata* meta = pools_ ? pools_->find(pool) : nullptr;
    if (!meta)
        return std::nullopt;
    auto it = pool_.find(pool);
    if (it == pool_.end())
        return std::nullopt;
    auto reserves = at_or_before(it->second, block);
    if (!reserves || reserves->size() != meta->tokens.size())
        return std::nullopt;
    return PoolState::from_metadata(*meta, std::move(*reserves));
}

std::optional<Rational> SnapshotStore::health_factor(LiquidationProtocol protocol, const Address& borrower,
                                                     std::uint64_t block) const
{
    if (auto it = health_.find({borrower, static_cast<int>(protocol)}); it != health_.end())
        return at_or_before(it->second, block);
    if (auto it = health_.find({borrower, -1}); it != health_.end())
        return at_or_before(it->second, block);
    return std::nullopt;
}

std::optional<BigInt> SnapshotStore::shortfall(const Address& borrower, std::uint64_t block) const
{
    auto it = shortfall_.find(borrower);
    if (it == shortfall_.end())
        return std::nullopt;
    return at_or_before(it->second, block);
}

void SnapshotStore::load_jsonl_text(std::string_view text)
{
    std::size_t line_no = 0;
    while (!text.empty()) {
        auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos)
            continue;
        try {
            const auto j = nlohmann::json::parse(line);
            const auto kind = j.at("kind").get<std::string>();
            const auto block = j.at("block").get<std::uint64_t>();
            const Address key = address_from_hex(j.at("key").get<std::string>());
            const auto& value = j.at("value");
            if (kind == "pool") {
                std::vector<BigInt> reserves;
                for (const auto& r : value)
                    reserves.push_back(parse_uint(r.get<std::string>()));
                add_pool(key, block, std::move(reserves));
            } else if (kind == "health") {
                std::optional<LiquidationProtocol> protocol;
                if (j.contains("protocol")) {
                    protocol = protocol_from_string(j["protocol"].get<std::string>());
                    if (!protocol)
                        throw Error("unknown protocol tag");
                }
                add_health(key, block, parse_rational(value.get<std::string>()), protocol);
            } else if (kind == "shortfall") {
                add_shortfall(key, block, parse_uint(value.get<std::string>()));
            } else {
                throw Error("unknown snapshot kind '" + kind + "'");
            }
        } catch (const std::exception& e) {
            throw Error("snapshots line " + std::to_string(line_no) + ": " + e.what());
        }
    }
}

void SnapshotStore::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open snapshot file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        load_jsonl_text(buf.str());
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

std::string SnapshotStore::to_jsonl() const
{
    std::string out;
    auto emit = [&](nlohmann::ordered_json j) { out += j.dump() + "\n"; };
    for (const auto& [pool, series] : pool_)
        for (const auto& [block, reserves] : series) {
            nlohmann::ordered_json value = nlohmann::ordered_json::array();
            for (const auto& r : reserves)
                value.push_back(r.str());
            emit({{"kind", "pool"}, {"key", to_hex(pool)}, {"block", block}, {"value", value}});
        }
    for (const auto& [key, series] : health_)
        for (const auto& [block, hf] : series) {
            nlohmann::ordered_json j{{"kind", "health"}, {"key", to_hex(key.first)}, {"block", block},
                                     {"value", hf.str()}};
            if (key.second >= 0)
                j["protocol"] = std::string(to_string(static_cast<LiquidationProtocol>(key.second)));
            emit(std::move(j));
        }
    for (const auto& [borrower, series] : shortfall_)
        for (const auto& [block, sf] : series)
            emit({{"kind", "shortfall"}, {"key", to_hex(borrower)}, {"block", block}, {"value", sf.str()}});
    return out;
}

std::string_view to_string(OpportunityStatus s)
{
    switch (s) {
    case OpportunityStatus::found: return "found";
    case OpportunityStatus::not_found_within_horizon: return "not_found_within_horizon";
    case OpportunityStatus::unsimulatable: return "unsimulatable";
    }
    return "unknown";
}

namespace {

class CycleSimulator {
public:
    CycleSimulator(const ArbitrageFinding& finding, const StateProvider& state) : state_(state)
    {
        for (const auto& s : finding.cycle) {
            path_.push_back({s.venue, s.token_in, s.token_out});
            if (std::find(venues_.begin(), venues_.end(), s.venue) == venues_.end())
                venues_.push_back(s.venue);
        }
        amount_in_ = finding.cycle.front().amount_in;
    }

    const std::vector<Address>& venues() const { return venues_; }

    // Cycle profit on the states at the end of `block`; nullopt when a state is missing.
    std::optional<BigInt> profit_at(std::uint64_t block, std::string& detail) const
    {
        std::unordered_map<Address, PoolState> pools;
        for (const auto& v : venues_) {
            auto s = state_.pool_state(v, block);
            if (!s) {
                detail = "no state for pool " + to_hex(v) + " at block " + std::to_string(block);
                return std::nullopt;
            }
            pools.emplace(v, std::move(*s));
        }
        try {
            return simulate_path(pools, path_, amount_in_).amount_out - amount_in_;
        } catch (const DrainedPool&) {
            return -amount_in_;
        } catch (const Error& e) {
            detail = e.what();
            return std::nullopt;
        }
    }

private:
    const StateProvider& state_;
    std::vector<PathStep> path_;
    std::vector<Address> venues_;
    BigInt amount_in_ = 0;
};

OpportunityResult search_arbitrage(const ArbitrageFinding& finding, const std::string& finding_id,
                                   std::span<const SwapAction> swaps, const StateProvider& state,
                                   std::uint64_t horizon)
{
    if (finding.cycle.empty())
        return make_result(finding_id, OpportunityStatus::unsimulatable, "empty cycle");
    CycleSimulator sim(finding, state);
    const std::uint64_t B = finding.position.block;
    const std::uint64_t lo = lower_bound_block(B, horizon);

    // Last qualifying swap of each candidate block, closest block first.
    std::map<std::uint64_t, const SwapAction*, std::greater<>> last_in_block;
    for (const auto& s : swaps) {
        if (s.position.block < lo || s.position.block > B || !(s.position.tx() < finding.position))
            continue;
        if (std::find(sim.venues().begin(), sim.venues().end(), s.venue) == sim.venues().end())
            continue;
        auto& slot = last_in_block[s.position.block];
        if (!slot || slot->position < s.position)
            slot = &s;
    }
    if (last_in_block.empty())
        return make_result(finding_id, OpportunityStatus::not_found_within_horizon, "no prior swaps on cycle venues");

    std::string detail;
    const auto& [closest_block, closest_swap] = *last_in_block.begin();
    if (closest_block < B) {
        auto after = sim.profit_at(closest_block, detail);
        if (!after)
            return make_result(finding_id, OpportunityStatus::unsimulatable, detail);
        if (*after <= 0) {
            OpportunityResult r = make_result(finding_id, OpportunityStatus::found);
            r.block_distance = B - closest_block > 0 ? B - closest_block - 1 : 0;
            r.approximate = true;
            return r;
        }
    }
    for (const auto& [block, swap] : last_in_block) {
        if (block == 0)
            break;
        auto before = sim.profit_at(block - 1, detail);
        if (!before)
            return make_result(finding_id, OpportunityStatus::unsimulatable, detail);
        if (*before <= 0) {
            OpportunityResult r = make_result(finding_id, OpportunityStatus::found);
            r.opportunity_tx = swap->tx_hash;
            r.block_distance = B - block;
            return r;
        }
    }
    return make_result(finding_id, OpportunityStatus::not_found_within_horizon,
                       "cycle stays profitable across the horizon");
}

OpportunityResult search_liquidation(const LiquidationFinding& finding, const std::string& finding_id,
                                     std::span<const OracleUpdateAction> updates,
                                     const StateProvider& state, std::uint64_t horizon)
{
    if (finding.actions.empty())
        return make_result(finding_id, OpportunityStatus::unsimulatable, "no liquidation actions");
    const LiquidationAction& action = finding.actions.front();
    const std::uint64_t B = finding.position.block;
    const std::uint64_t lo = lower_bound_block(B, horizon);

    std::map<std::uint64_t, const OracleUpdateAction*, std::greater<>> last_in_block;
    for (const auto& u : updates) {
        if (u.position.block < lo || u.position.block > B || !(u.position.tx() < finding.position))
            continue;
        auto& slot = last_in_block[u.position.block];
        if (!slot || slot->position < u.position)
            slot = &u;
    }
    if (last_in_block.empty())
        return make_result(finding_id, OpportunityStatus::not_found_within_horizon, "no prior oracle updates");

    const OracleUpdateAction* previous = nullptr;
    std::uint64_t previous_block = 0;
    for (const auto& [block, update] : last_in_block) {
        bool liquidable = false;
        if (action.protocol == LiquidationProtocol::compound_v2) {
            auto sf = state.shortfall(action.borrower, block);
            if (!sf)
                return make_result(finding_id, OpportunityStatus::unsimulatable,
                                   "no shortfall snapshot at block " + std::to_string(block));
            liquidable = *sf > 0;
        } else {
            auto hf = state.health_factor(action.protocol, action.borrower, block);
            if (!hf)
                return make_result(finding_id, OpportunityStatus::unsimulatable,
                                   "no health snapshot at block " + std::to_string(block));
            liquidable = *hf < 1;
        }
        if (!liquidable) {
            OpportunityResult r = make_result(finding_id, OpportunityStatus::found);
            if (previous) {
                r.opportunity_tx = previous->tx_hash;
                r.block_distance = B - previous_block;
            } else {
                r.block_distance = B - block > 0 ? B - block - 1 : 0;
                r.approximate = true;
            }
            return r;
        }
        previous = update;
        previous_block = block;
    }
    return make_result(finding_id, OpportunityStatus::not_found_within_horizon,
                       "borrower stays liquidable across the horizon");
}

}  // namespace

OpportunityResult find_arbitrage_opportunity(const ArbitrageFinding& finding, const std::string& finding_id,
                                             std::span<const SwapAction> swaps, const StateProvider& state,
                                             std::uint64_t horizon)
{
    OpportunityResult r = search_arbitrage(finding, finding_id, swaps, state, horizon);
    r.horizon = horizon;
    return r;
}

OpportunityResult find_liquidation_opportunity(const LiquidationFinding& finding, const std::string& finding_id,
                                               std::span<const OracleUpdateAction> updates,
                                               const StateProvider& state, std::uint64_t horizon)
{
    OpportunityResult r = search_liquidation(finding, finding_id, updates, state, horizon);
    r.horizon = horizon;
    return r;
}

std::string status_label(const OpportunityResult& r)
{
    if (r.status == OpportunityStatus::not_found_within_horizon)
        return "not_found_within_" + std::to_string(r.horizon);
    return std::string(to_string(r.status));
}

std::vector<Rational> block_distance_cdf(std::span<const OpportunityResult> results, std::uint64_t horizon)
{
    std::vector<std::uint64_t> counts(horizon + 1, 0);
    std::uint64_t total = 0;
    for (const auto& r : results) {
        if (r.status != OpportunityStatus::found || !r.block_distance || *r.block_distance > horizon)
            continue;
        ++counts[*r.block_distance];
        ++total;
    }
    if (total == 0)
        return {};
    std::vector<Rational> cdf;
    cdf.reserve(counts.size());
    std::uint64_t running = 0;
    for (auto c : counts) {
        running += c;
        cdf.emplace_back(BigInt(running), BigInt(total));
    }
    return cdf;
}

std::string_view to_string(MevType t)
{
    switch (t) {
    case MevType::arbitrage: return "arbitrage";
    case MevType::liquidation: return "liquidation";
    case MevType::sandwich: return "sandwich";
    }
    return "unknown";
}

std::vector<CompetitionGroup> detect_competition(std::span<const CompetitionEntry> entries)
{
    std::map<std::pair<MevType, Hash32>, CompetitionGroup> groups;
    std::map<std::pair<MevType, Hash32>, std::set<Address>> extractors;
    for (const auto& e : entries) {
        auto key = std::make_pair(e.type, e.opportunity_tx);
        auto& g = groups[key];
        g.type = e.type;
        g.opportunity_tx = e.opportunity_tx;
        g.finding_ids.push_back(e.finding_id);
        extractors[key].insert(e.extractor);
    }
    std::vector<CompetitionGroup> out;
    for (auto& [key, g] : groups) {
        const auto& ex = extractors[key];
        if (ex.size() < 2)
            continue;
        g.extractors.assign(ex.begin(), ex.end());
        out.push_back(std::move(g));
    }
    return out;
}

std::map<MevType, std::size_t> max_group_size(std::span<const CompetitionGroup> groups)
{
    std::map<MevType, std::size_t> out;
    for (const auto& g : groups)
        out[g.type] = std::max(out[g.type], g.size());
    return out;
}

std::optional<Rational> reverted_fraction(std::span<const TxStatus> statuses)
{
    if (statuses.empty())
        return std::nullopt;
    const auto reverted = std::count(statuses.begin(), statuses.end(), TxStatus::reverted);
    return Rational(BigInt(reverted), BigInt(statuses.size()));
}

RevertedRate reverted_rate(const std::map<Address, std::vector<TxStatus>>& statuses)
{
    RevertedRate out;
    std::vector<TxStatus> all;
    for (const auto& [extractor, list] : statuses) {
        out.per_extractor[extractor] = reverted_fraction(list);
        all.insert(all.end(), list.begin(), list.end());
    }
    out.aggregate = reverted_fraction(all);
    return out;
}

}  // namespace mevlens
