#include "mevlens/pool_metadata.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace mevlens {

std::string_view to_string(PoolKind k)
{
    return k == PoolKind::constant_product ? "constant_product" : "stableswap";
}

void PoolDirectory::add(PoolMetadata pool)
{
    if (pool.fee_den <= 0 || pool.fee_num < 0 || pool.fee_num >= pool.fee_den)
        throw Error("pool " + to_hex(pool.address) + ": fee must lie in [0,1)");
    if (pool.kind == PoolKind::constant_product && pool.tokens.size() != 2)
        throw Error("pool " + to_hex(pool.address) + ": constant_product pools hold exactly 2 tokens");
    if (pool.kind == PoolKind::stableswap && (pool.tokens.size() < 2 || pool.amp <= 0))
        throw Error("pool " + to_hex(pool.address) + ": stableswap pools need >= 2 tokens and amp > 0");
    if (auto it = index_.find(pool.address); it != index_.end()) {
        pools_[it->second] = std::move(pool);
        return;
    }
    index_.emplace(pool.address, pools_.size());
    pools_.push_back(std::move(pool));
}

const PoolMetadata* PoolDirectory::find(const Address& pool) const
{
    auto it = index_.find(pool);
    return it == index_.end() ? nullptr : &pools_[it->second];
}

namespace {

std::vector<Address> address_list(const nlohmann::json& arr)
{
    std::vector<Address> out;
    for (const auto& a : arr)
        out.push_back(address_from_hex(a.get<std::string>()));
    return out;
}

}  // namespace

PoolDirectory PoolDirectory::from_json_text(std::string_view text)
{
    PoolDirectory dir;
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(std::string("pool metadata: invalid JSON: ") + e.what());
    }
    std::size_t i = 0;
    for (const auto& p : doc.at("pools")) {
        try {
            PoolMetadata m;
            m.address = address_from_hex(p.at("address").get<std::string>());
            const auto kind = p.at("kind").get<std::string>();
            if (kind == "constant_product")
                m.kind = PoolKind::constant_product;
            else if (kind == "stableswap")
                m.kind = PoolKind::stableswap;
            else
                throw Error("unknown pool kind '" + kind + "'");
            m.tokens = address_list(p.at("tokens"));
            if (p.contains("underlying_tokens"))
                m.underlying_tokens = address_list(p["underlying_tokens"]);
            if (m.kind == PoolKind::stableswap) {
                m.fee_num = 4;
                m.fee_den = 10000;
            }
            if (p.contains("fee")) {
                Rational fee = parse_rational(p["fee"].get<std::string>());
                m.fee_num = boost::multiprecision::numerator(fee);
                m.fee_den = boost::multiprecision::denominator(fee);
            }
            if (p.contains("amp"))
                m.amp = p["amp"].is_string() ? parse_uint(p["amp"].get<std::string>()) : BigInt(p["amp"].get<std::uint64_t>());
            dir.add(std::move(m));
        } catch (const nlohmann::json::exception& e) {
            throw Error("pool metadata entry " + std::to_string(i) + ": " + e.what());
        } catch (const Error& e) {
            throw Error("pool metadata entry " + std::to_string(i) + ": " + e.what());
        }
        ++i;
    }
    return dir;
}

PoolDirectory PoolDirectory::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open pool metadata " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return from_json_text(buf.str());
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

std::string PoolDirectory::to_json() const
{
    nlohmann::ordered_json pools = nlohmann::ordered_json::array();
    for (const auto& p : pools_) {
        nlohmann::ordered_json j;
        j["address"] = to_hex(p.address);
        j["kind"] = std::string(to_string(p.kind));
        j["tokens"] = nlohmann::ordered_json::array();
        for (const auto& t : p.tokens)
            j["tokens"].push_back(to_hex(t));
        if (!p.underlying_tokens.empty()) {
            j["underlying_tokens"] = nlohmann::ordered_json::array();
            for (const auto& t : p.underlying_tokens)
                j["underlying_tokens"].push_back(to_hex(t));
        }
        j["fee"] = p.fee_num.str() + "/" + p.fee_den.str();
        if (p.kind == PoolKind::stableswap)
            j["amp"] = p.amp.str();
        pools.push_back(std::move(j));
    }
    nlohmann::ordered_json doc;
    doc["pools"] = std::move(pools);
    return doc.dump(2) + "\n";
}

}  // namespace mevlens
