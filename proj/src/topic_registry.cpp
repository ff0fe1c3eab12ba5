#include "mevlens/topic_registry.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace mevlens {

namespace {

using C = Category;
using S = FieldSource;
using W = WordType;

FieldSpec topic(std::string name, std::size_t i, W type) { return {std::move(name), S::topic, i, type}; }
FieldSpec slot(std::string name, std::size_t i, W type) { return {std::move(name), S::data, i, type}; }

struct BuiltinRow {
    const char* topic;
    std::vector<Category> categories;
    const char* protocol;
    const char* event;
    const char* variant;
    std::optional<ChainName> rollup;
    EventSchema schema;
};

std::vector<RegistryEntry> builtin_entries()
{
    // Swap(address indexed sender, uint amount0In, uint amount1In, uint amount0Out, uint amount1Out, address indexed to)
    EventSchema uni_v2{3,
                       {topic("sender", 1, W::address), topic("recipient", 2, W::address),
                        slot("amount0_in", 0, W::uint), slot("amount1_in", 1, W::uint),
                        slot("amount0_out", 2, W::uint), slot("amount1_out", 3, W::uint)}};
    // Swap(address indexed sender, address indexed recipient, int256 amount0, int256 amount1,
    //      uint160 sqrtPriceX96, uint128 liquidity, int24 tick)
    EventSchema uni_v3{3,
                       {topic("sender", 1, W::address), topic("recipient", 2, W::address),
                        slot("amount0", 0, W::int_), slot("amount1", 1, W::int_),
                        slot("sqrt_price_x96", 2, W::uint), slot("liquidity", 3, W::uint), slot("tick", 4, W::int_)}};
    // LOG_SWAP(address indexed caller, address indexed tokenIn, address indexed tokenOut, uint256, uint256)
    EventSchema bal_v1{4,
                       {topic("sender", 1, W::address), topic("token_in", 2, W::address),
                        topic("token_out", 3, W::address), slot("amount_in", 0, W::uint),
                        slot("amount_out", 1, W::uint)}};
    // Swap(bytes32 indexed poolId, address indexed tokenIn, address indexed tokenOut, uint256, uint256)
    EventSchema bal_v2{4,
                       {topic("pool_id", 1, W::bytes32), topic("token_in", 2, W::address),
                        topic("token_out", 3, W::address), slot("amount_in", 0, W::uint),
                        slot("amount_out", 1, W::uint)}};
    // TokenExchange(address indexed buyer, int128 sold_id, uint256 tokens_sold, int128 bought_id, uint256 tokens_bought)
    EventSchema curve{2,
                      {topic("sender", 1, W::address), slot("token_in_index", 0, W::int_),
                       slot("amount_in", 1, W::uint), slot("token_out_index", 2, W::int_),
                       slot("amount_out", 3, W::uint)}};
    EventSchema curve_underlying = curve;
    curve_underlying.underlying = true;
    // TokenSwap(address indexed buyer, uint256 tokensSold, uint256 tokensBought, uint128 soldId, uint128 boughtId)
    EventSchema token_swap{2,
                           {topic("sender", 1, W::address), slot("amount_in", 0, W::uint),
                            slot("amount_out", 1, W::uint), slot("token_in_index", 2, W::uint),
                            slot("token_out_index", 3, W::uint)}};

    EventSchema aave_v1_liq{4,
                            {topic("collateral_token", 1, W::address), topic("debt_token", 2, W::address),
                             topic("borrower", 3, W::address), slot("debt_amount", 0, W::uint),
                             slot("collateral_amount", 1, W::uint), slot("accrued_interest", 2, W::uint),
                             slot("liquidator", 3, W::address), slot("receive_atoken", 4, W::uint),
                             slot("timestamp", 5, W::uint)}};
    EventSchema aave_v2_liq{4,
                            {topic("collateral_token", 1, W::address), topic("debt_token", 2, W::address),
                             topic("borrower", 3, W::address), slot("debt_amount", 0, W::uint),
                             slot("collateral_amount", 1, W::uint), slot("liquidator", 2, W::address),
                             slot("receive_atoken", 3, W::uint)}};
    // LiquidateBorrow(address liquidator, address borrower, uint repayAmount, address cTokenCollateral, uint seizeTokens)
    EventSchema compound_liq{1,
                             {slot("liquidator", 0, W::address), slot("borrower", 1, W::address),
                              slot("debt_amount", 2, W::uint), slot("collateral_ctoken", 3, W::address),
                              slot("seize_tokens", 4, W::uint)}};
    EventSchema redeem{1,
                       {slot("redeemer", 0, W::address), slot("redeem_amount", 1, W::uint),
                        slot("redeem_tokens", 2, W::uint)}};

    EventSchema transfer{3,
                         {topic("from", 1, W::address), topic("to", 2, W::address), slot("amount", 0, W::uint)}};
    EventSchema answer_updated{3,
                               {topic("answer", 1, W::int_), topic("round_id", 2, W::uint),
                                slot("updated_at", 0, W::uint)}};

    EventSchema aave_v1_flash{3,
                              {topic("target", 1, W::address), topic("token", 2, W::address),
                               slot("amount", 0, W::uint), slot("fee", 1, W::uint),
                               slot("protocol_fee", 2, W::uint), slot("timestamp", 3, W::uint)}};
    EventSchema aave_v2_flash{4,
                              {topic("target", 1, W::address), topic("initiator", 2, W::address),
                               topic("token", 3, W::address), slot("amount", 0, W::uint), slot("fee", 1, W::uint),
                               slot("referral_code", 2, W::uint)}};
    EventSchema aave_v3_flash{4,
                              {topic("target", 1, W::address), topic("token", 2, W::address),
                               topic("referral_code", 3, W::uint), slot("initiator", 0, W::address),
                               slot("amount", 1, W::uint), slot("rate_mode", 2, W::uint), slot("fee", 3, W::uint)}};
    EventSchema balancer_flash{3,
                               {topic("recipient", 1, W::address), topic("token", 2, W::address),
                                slot("amount", 0, W::uint), slot("fee", 1, W::uint)}};

    EventSchema inbox_delivered{2, {topic("link_key", 1, W::bytes32)}, LinkRule::field};
    EventSchema tx_enqueued{4,
                            {topic("origin", 1, W::address), topic("target", 2, W::address),
                             topic("queue_index", 3, W::uint)},
                            LinkRule::payload_keccak};
    EventSchema tx_deposited{4,
                             {topic("origin", 1, W::address), topic("target", 2, W::address),
                              topic("version", 3, W::uint)},
                             LinkRule::payload_keccak};
    EventSchema priority_request{1,
                                 {slot("tx_id", 0, W::uint), slot("l2_tx_hash", 1, W::bytes32),
                                  slot("expiration", 2, W::uint)},
                                 LinkRule::tx_hash};
    // The ticket id topic carries the inbox message number in fixtures.
    EventSchema redeem_scheduled{4,
                                 {topic("link_key", 1, W::bytes32), topic("retry_tx_hash", 2, W::bytes32),
                                  topic("sequence_num", 3, W::uint)},
                                 LinkRule::field};
    EventSchema relayed_message{2, {topic("link_key", 1, W::bytes32)}, LinkRule::field};

    const std::vector<BuiltinRow> rows = {
        {"0xd78ad95fa46c994b6551d0da85fc275fe613ce37657fb8d5e3d130840159d822", {C::arbitrage}, "Uniswap V2", "Swap",
         "uniswap_v2", std::nullopt, uni_v2},
        {"0xc42079f94a6350d7e6235f29174924f928cc2ac818eb64fed8004e115fbcca67", {C::arbitrage, C::victim_inference},
         "Uniswap V3", "Swap", "uniswap_v3", std::nullopt, uni_v3},
        {"0x908fb5ee8f16c6bc9bc3690973819f32a4d4b10188134543c88706e0e1d43378", {C::arbitrage}, "Balancer V1",
         "LOG_SWAP", "balancer_v1", std::nullopt, bal_v1},
        {"0x2170c741c41531aec20e7c107c24eecfdd15e69c9bb0a8dd37b1840b9e0b207b", {C::arbitrage}, "Balancer V2", "Swap",
         "balancer_v2", std::nullopt, bal_v2},
        {"0xd013ca23e77a65003c2c659c5442c00c805371b7fc1ebd4c206c41d1536bd90b", {C::arbitrage}, "Curve",
         "TokenExchangeUnderlying", "curve", std::nullopt, curve_underlying},
        {"0x8b3e96f2b889fa771c53c981b40daf005f63f637f1869f707052d15a3dd97140", {C::arbitrage}, "Curve",
         "TokenExchange", "curve", std::nullopt, curve},
        {"0x56864757fd5b1fc9f38f5f3a981cd8ae512ce41b902cf73fc506ee369c6bc237", {C::liquidation}, "Aave V1",
         "LiquidationCall", "aave_v1", std::nullopt, aave_v1_liq},
        {"0xe413a321e8681d831f4dbccbca790d2952b56f977908e45be37335533e005286", {C::liquidation}, "Aave V2/V3",
         "LiquidationCall", "aave_v2v3", std::nullopt, aave_v2_liq},
        {"0x298637f684da70674f26509b10f07ec2fbc77a335ab1e7d6215a4b2484d8bb52", {C::liquidation}, "Compound V2",
         "LiquidateBorrow", "compound_v2", std::nullopt, compound_liq},
        {"0xe5b754fb1abb7f01b499791d0b820ae3b6af3424ac1c59768edb53f4ec31a929", {C::liquidation}, "Compound", "Redeem",
         "compound_redeem", std::nullopt, redeem},
        {"0xe02f6383e19e87c24e0c03e2cd5dbd05156cb29a1b0f3dbca1fa3430e444f63d", {C::liquidation}, "Compound", "Redeem",
         "compound_redeem", std::nullopt, redeem},
        {"0xddf252ad1be2c89b69c2b068fc378daa952ba7f163c4a11628f55a4df523b3ef", {C::sandwich, C::victim_inference},
         "ERC-20", "Transfer", "erc20", std::nullopt, transfer},
        {"0x0559884fd3a460db3073b7fc896cc77986f16e378210ded43186175bf646fc5f", {C::oracle_update}, "Chainlink",
         "AnswerUpdated", "chainlink", std::nullopt, answer_updated},
        {"0x5b8f46461c1dd69fb968f1a003acee221ea3e19540e350233b612ddb43433b55", {C::flash_loan}, "Aave V1", "FlashLoan",
         "aave_v1", std::nullopt, aave_v1_flash},
        {"0x631042c832b07452973831137f2d73e395028b44b250dedc5abb0ee766e168ac", {C::flash_loan}, "Aave V2", "FlashLoan",
         "aave_v2", std::nullopt, aave_v2_flash},
        {"0xefefaba5e921573100900a3ad9cf29f222d995fb3b6045797eaea7521bd8d6f0", {C::flash_loan}, "Aave V3", "FlashLoan",
         "aave_v3", std::nullopt, aave_v3_flash},
        {"0x0d7d75e01ab95780d3cd1c8ec0dd6c2ce19e3a20427eec8bf53283b6fb8e95f0", {C::flash_loan}, "Balancer",
         "FlashLoan", "balancer", std::nullopt, balancer_flash},
        {"0xff64905f73a67fb594e0f940a8075a860db489ad991e032f48c81123eb52d60b", {C::l1_message}, "Arbitrum",
         "InboxMessageDelivered", "arbitrum", ChainName::arbitrum, inbox_delivered},
        {"0x4b388aecf9fa6cc92253704e5975a6129a4f735bdbd99567df4ed0094ee4ceb5", {C::l1_message}, "Optimism",
         "TransactionEnqueued", "optimism", ChainName::optimism, tx_enqueued},
        {"0xb3813568d9991fc951961fcb4c784893574240a28925604d09fc577c55bb7c32", {C::l1_message}, "Optimism",
         "TransactionDeposited", "optimism", ChainName::optimism, tx_deposited},
        {"0x4531cd5795773d7101c17bdeb9f5ab7f47d7056017506f937083be5d6e77a382", {C::l1_message}, "zkSync",
         "NewPriorityRequest", "zksync", ChainName::zksync, priority_request},
        {"0x5ccd009502509cf28762c67858994d85b163bb6e451f5e9df7c5e18c9c2e123e", {C::l2_message}, "Arbitrum",
         "RedeemScheduled", "arbitrum", ChainName::arbitrum, redeem_scheduled},
        {"0x4641df4a962071e12719d8c8c8e5ac7fc4d97b927346a3d7a335b1f7517e133c", {C::l2_message}, "Optimism",
         "RelayedMessage", "optimism", ChainName::optimism, relayed_message},
        {"0xc6c1e0630dbe9130cc068028486c0d118ddcea348550819defd5cb8c257f8a38", {C::victim_inference}, "StableSwap",
         "TokenSwap", "stableswap", std::nullopt, token_swap},
    };

    std::vector<RegistryEntry> out;
    out.reserve(rows.size());
    for (const auto& r : rows)
        out.push_back({hash_from_hex(r.topic), r.categories, r.protocol, r.event, r.variant, r.rollup, r.schema});
    return out;
}

WordType word_type_from_string(const std::string& s)
{
    if (s == "address")
        return WordType::address;
    if (s == "uint")
        return WordType::uint;
    if (s == "int")
        return WordType::int_;
    if (s == "bytes32")
        return WordType::bytes32;
    throw Error("unknown field type '" + s + "'");
}

LinkRule link_rule_from_string(const std::string& s)
{
    if (s == "none")
        return LinkRule::none;
    if (s == "field")
        return LinkRule::field;
    if (s == "payload_keccak")
        return LinkRule::payload_keccak;
    if (s == "tx_hash")
        return LinkRule::tx_hash;
    throw Error("unknown link rule '" + s + "'");
}

}  // namespace

std::string_view to_string(Category c)
{
    switch (c) {
    case Category::arbitrage: return "arbitrage";
    case Category::liquidation: return "liquidation";
    case Category::sandwich: return "sandwich";
    case Category::oracle_update: return "oracle_update";
    case Category::flash_loan: return "flash_loan";
    case Category::l1_message: return "l1_message";
    case Category::l2_message: return "l2_message";
    case Category::victim_inference: return "victim_inference";
    }
    return "unknown";
}

std::optional<Category> category_from_string(std::string_view s)
{
    for (auto c : {Category::arbitrage, Category::liquidation, Category::sandwich, Category::oracle_update,
                   Category::flash_loan, Category::l1_message, Category::l2_message, Category::victim_inference})
        if (to_string(c) == s)
            return c;
    return std::nullopt;
}

const FieldSpec* EventSchema::find(std::string_view name) const
{
    for (const auto& f : fields)
        if (f.name == name)
            return &f;
    return nullptr;
}

std::size_t EventSchema::min_data_slots() const
{
    std::size_t n = 0;
    for (const auto& f : fields)
        if (f.source == FieldSource::data)
            n = std::max(n, f.index + 1);
    return n;
}

bool RegistryEntry::has(Category c) const
{
    return std::find(categories.begin(), categories.end(), c) != categories.end();
}

const TopicRegistry& TopicRegistry::builtin()
{
    static const TopicRegistry registry(builtin_entries());
    return registry;
}

TopicRegistry::TopicRegistry(std::vector<RegistryEntry> entries)
{
    for (auto& e : entries) {
        if (index_.count(e.topic))
            throw Error("duplicate registry topic " + to_hex(e.topic));
        add(std::move(e));
    }
}

void TopicRegistry::add(RegistryEntry e)
{
    for (const auto& f : e.schema.fields) {
        if (f.source == FieldSource::topic && (f.index == 0 || f.index >= e.schema.topic_count))
            throw Error("field '" + f.name + "' of " + e.event + " reads topic " + std::to_string(f.index) +
                        " outside topic_count");
    }
    if (auto it = index_.find(e.topic); it != index_.end()) {
        entries_[it->second] = std::move(e);
        return;
    }
    index_.emplace(e.topic, entries_.size());
    entries_.push_back(std::move(e));
}

const RegistryEntry* TopicRegistry::lookup(const Hash32& topic) const
{
    auto it = index_.find(topic);
    return it == index_.end() ? nullptr : &entries_[it->second];
}

std::vector<Hash32> TopicRegistry::topics_with(Category c) const
{
    std::vector<Hash32> out;
    for (const auto& e : entries_)
        if (e.has(c))
            out.push_back(e.topic);
    return out;
}

void TopicRegistry::merge_json_text(std::string_view text)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(std::string("registry: invalid JSON: ") + e.what());
    }
    const auto& events = doc.at("events");
    for (const auto& ev : events) {
        try {
            RegistryEntry e;
            e.topic = hash_from_hex(ev.at("topic").get<std::string>());
            for (const auto& c : ev.at("categories")) {
                auto cat = category_from_string(c.get<std::string>());
                if (!cat)
                    throw Error("unknown category '" + c.get<std::string>() + "'");
                e.categories.push_back(*cat);
            }
            e.protocol = ev.value("protocol", "");
            e.event = ev.value("event", "");
            e.variant = ev.value("variant", "");
            if (ev.contains("rollup") && !ev["rollup"].is_null()) {
                auto r = chain_from_string(ev["rollup"].get<std::string>());
                if (!r)
                    throw Error("unknown rollup");
                e.rollup = *r;
            }
            e.schema.topic_count = ev.value("topic_count", std::size_t{1});
            e.schema.link = link_rule_from_string(ev.value("link", std::string("none")));
            e.schema.underlying = ev.value("underlying", false);
            for (const auto& f : ev.value("fields", nlohmann::json::array())) {
                FieldSpec spec;
                spec.name = f.at("name").get<std::string>();
                const auto src = f.at("source").get<std::string>();
                if (src == "topic")
                    spec.source = FieldSource::topic;
                else if (src == "data")
                    spec.source = FieldSource::data;
                else
                    throw Error("unknown field source '" + src + "'");
                spec.index = f.at("index").get<std::size_t>();
                spec.type = word_type_from_string(f.at("type").get<std::string>());
                e.schema.fields.push_back(std::move(spec));
            }
            add(std::move(e));
        } catch (const nlohmann::json::exception& ex) {
            throw Error(std::string("registry: ") + ex.what());
        }
    }
}

void TopicRegistry::merge_json_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open registry " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    merge_json_text(buf.str());
}

}  // namespace mevlens
