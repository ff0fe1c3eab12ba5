#include "mevlens/chain_model.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace mevlens {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string kind_label(FixtureError::Kind kind)
{
    switch (kind) {
    case FixtureError::Kind::malformed_record: return "malformed record";
    case FixtureError::Kind::ordering_violation: return "ordering violation";
    case FixtureError::Kind::duplicate_key: return "duplicate key";
    }
    return "fixture error";
}

// Per-kind ordering checks shared by the loader and the record constructor.
class OrderingValidator {
public:
    void block(const BlockRecord& b, std::size_t line)
    {
        check_chain(b.chain, line);
        if (last_block_) {
            if (b.number == last_block_->first)
                throw FixtureError(FixtureError::Kind::duplicate_key, line,
                                   "block " + std::to_string(b.number) + " appears twice");
            if (b.number < last_block_->first)
                throw FixtureError(FixtureError::Kind::ordering_violation, line,
                                   "block " + std::to_string(b.number) + " follows block " +
                                       std::to_string(last_block_->first));
            if (b.timestamp < last_block_->second)
                throw FixtureError(FixtureError::Kind::ordering_violation, line,
                                   "timestamp of block " + std::to_string(b.number) + " decreases");
        }
        last_block_ = {b.number, b.timestamp};
    }

    void tx(const TxRecord& t, std::size_t line)
    {
        check_chain(t.chain, line);
        if (t.fee_paid < 0 || t.builder_payment < 0)
            throw FixtureError(FixtureError::Kind::malformed_record, line, "negative fee");
        const auto pos = t.position();
        if (last_tx_) {
            if (pos == *last_tx_)
                throw FixtureError(FixtureError::Kind::duplicate_key, line, "tx " + coords(pos) + " appears twice");
            if (pos < *last_tx_)
                throw FixtureError(FixtureError::Kind::ordering_violation, line,
                                   "tx " + coords(pos) + " follows tx " + coords(*last_tx_));
        }
        if (!tx_hashes_.insert(t.hash).second)
            throw FixtureError(FixtureError::Kind::duplicate_key, line, "tx hash " + to_hex(t.hash) + " appears twice");
        last_tx_ = pos;
    }

    void log(const EventLog& l, std::size_t line)
    {
        check_chain(l.chain, line);
        if (l.topics.empty() || l.topics.size() > 4)
            throw FixtureError(FixtureError::Kind::malformed_record, line, "log must carry 1 to 4 topics");
        if (l.data.size() % 32 != 0)
            throw FixtureError(FixtureError::Kind::malformed_record, line, "log data length is not a multiple of 32");
        const auto pos = l.position();
        if (last_log_) {
            if (pos == *last_log_)
                throw FixtureError(FixtureError::Kind::duplicate_key, line, "log " + coords(pos) + " appears twice");
            if (pos < *last_log_)
                throw FixtureError(FixtureError::Kind::ordering_violation, line,
                                   "log " + coords(pos) + " follows log " + coords(*last_log_));
        }
        last_log_ = pos;
    }

    std::optional<ChainId> chain() const { return chain_; }

private:
    std::optional<ChainId> chain_;
    std::optional<std::pair<std::uint64_t, std::int64_t>> last_block_;
    std::optional<TxPosition> last_tx_;
    std::optional<LogPosition> last_log_;
    std::unordered_set<Hash32> tx_hashes_;

    void check_chain(const ChainId& c, std::size_t line)
    {
        if (!chain_)
            chain_ = c;
        else if (chain_->name != c.name)
            throw FixtureError(FixtureError::Kind::malformed_record, line,
                               "record for chain " + std::string(to_string(c.name)) + " in a " +
                                   std::string(to_string(chain_->name)) + " fixture");
    }

    static std::string coords(TxPosition p)
    {
        return "(" + std::to_string(p.block) + "," + std::to_string(p.tx_index) + ")";
    }
    static std::string coords(LogPosition p)
    {
        return "(" + std::to_string(p.block) + "," + std::to_string(p.tx_index) + "," + std::to_string(p.log_index) +
               ")";
    }
};

[[noreturn]] void malformed(std::size_t line, const std::string& reason)
{
    throw FixtureError(FixtureError::Kind::malformed_record, line, reason);
}

const json& field(const json& obj, const char* name, std::size_t line)
{
    auto it = obj.find(name);
    if (it == obj.end())
        malformed(line, std::string("missing field '") + name + "'");
    return *it;
}

std::string str_field(const json& obj, const char* name, std::size_t line)
{
    const auto& v = field(obj, name, line);
    if (!v.is_string())
        malformed(line, std::string("field '") + name + "' must be a string");
    return v.get<std::string>();
}

std::uint64_t uint_field(const json& obj, const char* name, std::size_t line)
{
    const auto& v = field(obj, name, line);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
        malformed(line, std::string("field '") + name + "' must be a non-negative integer");
    return v.get<std::uint64_t>();
}

ChainId chain_field(const json& obj, std::size_t line)
{
    auto name = chain_from_string(str_field(obj, "chain", line));
    if (!name)
        malformed(line, "unknown chain");
    return ChainId::of(*name);
}

template <typename F>
auto guarded(std::size_t line, F&& f)
{
    try {
        return f();
    } catch (const FixtureError&) {
        throw;
    } catch (const std::exception& e) {
        malformed(line, e.what());
    }
}

BlockRecord parse_block(const json& j, std::size_t line)
{
    return guarded(line, [&] {
        BlockRecord b;
        b.chain = chain_field(j, line);
        b.number = uint_field(j, "number", line);
        const auto& ts = field(j, "timestamp", line);
        if (!ts.is_number_integer())
            malformed(line, "field 'timestamp' must be an integer");
        b.timestamp = ts.get<std::int64_t>();
        const auto& txs = field(j, "txs", line);
        if (!txs.is_array())
            malformed(line, "field 'txs' must be an array");
        for (const auto& h : txs) {
            if (!h.is_string())
                malformed(line, "tx hashes must be strings");
            b.tx_hashes.push_back(hash_from_hex(h.get<std::string>()));
        }
        return b;
    });
}

TxRecord parse_tx(const json& j, std::size_t line)
{
    return guarded(line, [&] {
        TxRecord t;
        t.chain = chain_field(j, line);
        t.hash = hash_from_hex(str_field(j, "hash", line));
        t.block_number = uint_field(j, "block", line);
        t.tx_index = static_cast<std::uint32_t>(uint_field(j, "index", line));
        t.from = address_from_hex(str_field(j, "from", line));
        if (auto it = j.find("to"); it != j.end() && !it->is_null())
            t.to = address_from_hex(it->get<std::string>());
        t.fee_paid = parse_uint(str_field(j, "fee", line));
        if (j.contains("builder_payment"))
            t.builder_payment = parse_uint(str_field(j, "builder_payment", line));
        const auto status = str_field(j, "status", line);
        if (status == "success")
            t.status = TxStatus::success;
        else if (status == "reverted")
            t.status = TxStatus::reverted;
        else
            malformed(line, "unknown tx status '" + status + "'");
        if (auto it = j.find("min_amount_out"); it != j.end() && !it->is_null())
            t.min_amount_out = parse_uint(it->get<std::string>());
        return t;
    });
}

EventLog parse_log(const json& j, std::size_t line)
{
    return guarded(line, [&] {
        EventLog l;
        l.chain = chain_field(j, line);
        l.block_number = uint_field(j, "block", line);
        l.tx_index = static_cast<std::uint32_t>(uint_field(j, "tx_index", line));
        l.log_index = static_cast<std::uint32_t>(uint_field(j, "log_index", line));
        l.tx_hash = hash_from_hex(str_field(j, "tx_hash", line));
        l.address = address_from_hex(str_field(j, "address", line));
        const auto& topics = field(j, "topics", line);
        if (!topics.is_array())
            malformed(line, "field 'topics' must be an array");
        for (const auto& t : topics) {
            if (!t.is_string())
                malformed(line, "topics must be strings");
            l.topics.push_back(hash_from_hex(t.get<std::string>()));
        }
        l.data = bytes_from_hex(str_field(j, "data", line));
        return l;
    });
}

ordered_json block_json(const BlockRecord& b)
{
    ordered_json j;
    j["kind"] = "block";
    j["chain"] = to_string(b.chain.name);
    j["number"] = b.number;
    j["timestamp"] = b.timestamp;
    j["txs"] = ordered_json::array();
    for (const auto& h : b.tx_hashes)
        j["txs"].push_back(to_hex(h));
    return j;
}

ordered_json tx_json(const TxRecord& t)
{
    ordered_json j;
    j["kind"] = "tx";
    j["chain"] = to_string(t.chain.name);
    j["hash"] = to_hex(t.hash);
    j["block"] = t.block_number;
    j["index"] = t.tx_index;
    j["from"] = to_hex(t.from);
    j["to"] = t.to ? ordered_json(to_hex(*t.to)) : ordered_json(nullptr);
    j["fee"] = t.fee_paid.str();
    j["builder_payment"] = t.builder_payment.str();
    j["status"] = t.status == TxStatus::success ? "success" : "reverted";
    if (t.min_amount_out)
        j["min_amount_out"] = t.min_amount_out->str();
    return j;
}

ordered_json log_json(const EventLog& l)
{
    ordered_json j;
    j["kind"] = "log";
    j["chain"] = to_string(l.chain.name);
    j["block"] = l.block_number;
    j["tx_index"] = l.tx_index;
    j["log_index"] = l.log_index;
    j["tx_hash"] = to_hex(l.tx_hash);
    j["address"] = to_hex(l.address);
    j["topics"] = ordered_json::array();
    for (const auto& t : l.topics)
        j["topics"].push_back(to_hex(t));
    j["data"] = to_hex(l.data);
    return j;
}

}  // namespace

FixtureError::FixtureError(Kind kind, std::size_t line, const std::string& reason)
    : Error(kind_label(kind) + (line ? " at line " + std::to_string(line) : std::string()) + ": " + reason),
      kind_(kind),
      line_(line)
{
}

ChainDataset::ChainDataset(std::vector<BlockRecord> blocks, std::vector<TxRecord> txs, std::vector<EventLog> logs)
    : blocks_(std::move(blocks)), txs_(std::move(txs)), logs_(std::move(logs))
{
    OrderingValidator v;
    for (const auto& b : blocks_)
        v.block(b, 0);
    for (const auto& t : txs_)
        v.tx(t, 0);
    for (const auto& l : logs_)
        v.log(l, 0);
    chain_ = v.chain();
    build_indexes();
}

void ChainDataset::build_indexes()
{
    tx_by_hash_.clear();
    tx_by_hash_.reserve(txs_.size());
    for (std::size_t i = 0; i < txs_.size(); ++i)
        tx_by_hash_.emplace(txs_[i].hash, i);
}

const TxRecord* ChainDataset::find_tx(const Hash32& hash) const
{
    auto it = tx_by_hash_.find(hash);
    return it == tx_by_hash_.end() ? nullptr : &txs_[it->second];
}

const BlockRecord* ChainDataset::find_block(std::uint64_t number) const
{
    auto it = std::lower_bound(blocks_.begin(), blocks_.end(), number,
                               [](const BlockRecord& b, std::uint64_t n) { return b.number < n; });
    if (it == blocks_.end() || it->number != number)
        return nullptr;
    return &*it;
}

std::optional<std::int64_t> ChainDataset::block_timestamp(std::uint64_t number) const
{
    if (const auto* b = find_block(number))
        return b->timestamp;
    return std::nullopt;
}

std::span<const EventLog> ChainDataset::log_slice(std::uint64_t from_block, std::uint64_t to_block) const
{
    if (from_block > to_block)
        throw InvalidRange("from_block " + std::to_string(from_block) + " > to_block " + std::to_string(to_block));
    auto lo = std::lower_bound(logs_.begin(), logs_.end(), from_block,
                               [](const EventLog& l, std::uint64_t n) { return l.block_number < n; });
    auto hi = std::upper_bound(lo, logs_.end(), to_block,
                               [](std::uint64_t n, const EventLog& l) { return n < l.block_number; });
    return {lo, hi};
}

std::vector<const EventLog*> ChainDataset::logs_in_range(std::uint64_t from_block, std::uint64_t to_block,
                                                         std::span<const Hash32> topic_filter) const
{
    std::vector<const EventLog*> out;
    for (const auto& l : log_slice(from_block, to_block)) {
        if (topic_filter.empty() || std::find(topic_filter.begin(), topic_filter.end(), l.topics[0]) !=
                                        topic_filter.end())
            out.push_back(&l);
    }
    return out;
}

ChainDataset load_fixture_text(std::string_view text)
{
    OrderingValidator v;
    ChainDataset ds;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos)
            end = text.size();
        auto line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        if (line.find_first_not_of(" \t") == std::string_view::npos)
            continue;

        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            malformed(line_no, std::string("invalid JSON: ") + e.what());
        }
        if (!j.is_object())
            malformed(line_no, "record is not a JSON object");
        const auto kind = str_field(j, "kind", line_no);
        if (kind == "block") {
            auto b = parse_block(j, line_no);
            v.block(b, line_no);
            ds.blocks_.push_back(std::move(b));
        } else if (kind == "tx") {
            auto t = parse_tx(j, line_no);
            v.tx(t, line_no);
            ds.txs_.push_back(std::move(t));
        } else if (kind == "log") {
            auto l = parse_log(j, line_no);
            v.log(l, line_no);
            ds.logs_.push_back(std::move(l));
        } else {
            malformed(line_no, "unknown kind '" + kind + "'");
        }
    }
    ds.chain_ = v.chain();
    ds.build_indexes();
    return ds;
}

ChainDataset load_fixture(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open fixture " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return load_fixture_text(buf.str());
    } catch (const FixtureError& e) {
        throw FixtureError(e.kind(), e.line(), std::string(path.string()) + ": " + e.what());
    }
}

std::string serialize_fixture(const ChainDataset& dataset)
{
    std::string out;
    const auto& blocks = dataset.blocks();
    const auto& txs = dataset.txs();
    const auto& logs = dataset.logs();
    std::size_t bi = 0, ti = 0, li = 0;
    auto emit = [&out](const ordered_json& j) {
        out += j.dump();
        out += '\n';
    };
    while (bi < blocks.size() || ti < txs.size() || li < logs.size()) {
        std::uint64_t next = UINT64_MAX;
        if (bi < blocks.size())
            next = std::min(next, blocks[bi].number);
        if (ti < txs.size())
            next = std::min(next, txs[ti].block_number);
        if (li < logs.size())
            next = std::min(next, logs[li].block_number);
        if (bi < blocks.size() && blocks[bi].number == next)
            emit(block_json(blocks[bi++]));
        while (ti < txs.size() && txs[ti].block_number == next)
            emit(tx_json(txs[ti++]));
        while (li < logs.size() && logs[li].block_number == next)
            emit(log_json(logs[li++]));
    }
    return out;
}

}  // namespace mevlens
