#include "mevlens/bytecode.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mevlens/keccak.hpp"

namespace mevlens {

namespace {

// Minimal CBOR reader: definite-length items only.
class CborReader {
public:
    explicit CborReader(std::span<const std::uint8_t> in) : in_(in) {}

    bool at_end() const { return pos_ == in_.size(); }

    // Reads one item header; false on truncation or unsupported encoding.
    bool header(int& major, std::uint64_t& arg)
    {
        if (pos_ >= in_.size())
            return false;
        const std::uint8_t b = in_[pos_++];
        major = b >> 5;
        const int info = b & 0x1f;
        if (info < 24) {
            arg = static_cast<std::uint64_t>(info);
            return true;
        }
        if (info > 27)
            return false;
        const std::size_t n = std::size_t{1} << (info - 24);
        if (in_.size() - pos_ < n)
            return false;
        arg = 0;
        for (std::size_t k = 0; k < n; ++k)
            arg = (arg << 8) | in_[pos_++];
        return true;
    }

    bool item(int depth = 0)
    {
        if (depth > 16)
            return false;
        int major = 0;
        std::uint64_t arg = 0;
        if (!header(major, arg))
            return false;
        switch (major) {
        case 0:
        case 1: return true;
        case 2:
        case 3: return skip(arg);
        case 4:
            for (std::uint64_t k = 0; k < arg; ++k)
                if (!item(depth + 1))
                    return false;
            return true;
        case 5:
            for (std::uint64_t k = 0; k < arg; ++k)
                if (!item(depth + 1) || !item(depth + 1))
                    return false;
            return true;
        case 7: return true;
        default: return false;  // tags
        }
    }

    bool text_key()
    {
        int major = 0;
        std::uint64_t arg = 0;
        return header(major, arg) && major == 3 && skip(arg);
    }

private:
    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;

    bool skip(std::uint64_t n)
    {
        if (in_.size() - pos_ < n)
            return false;
        pos_ += static_cast<std::size_t>(n);
        return true;
    }
};

bool is_metadata_map(std::span<const std::uint8_t> seg)
{
    CborReader r(seg);
    int major = 0;
    std::uint64_t entries = 0;
    if (!r.header(major, entries) || major != 5 || entries == 0)
        return false;
    for (std::uint64_t k = 0; k < entries; ++k)
        if (!r.text_key() || !r.item())
            return false;
    return r.at_end();
}

}  // namespace

std::size_t metadata_trailer_size(std::span<const std::uint8_t> code)
{
    if (code.size() < 2)
        return 0;
    const std::size_t len = (std::size_t{code[code.size() - 2]} << 8) | code[code.size() - 1];
    if (len == 0 || len + 2 > code.size())
        return 0;
    if (!is_metadata_map(code.subspan(code.size() - 2 - len, len)))
        return 0;
    return len + 2;
}

NormalizedCode normalize(std::span<const std::uint8_t> code)
{
    code = code.first(code.size() - metadata_trailer_size(code));
    NormalizedCode out;
    out.skeleton.reserve(code.size());
    for (std::size_t i = 0; i < code.size();) {
        const std::uint8_t op = code[i];
        if (op >= op_push1 && op <= op_push32) {
            i += 1 + static_cast<std::size_t>(op - op_push1 + 1);
            continue;
        }
        out.skeleton.push_back(op);
        ++i;
    }
    out.digest = keccak256(std::span<const std::uint8_t>(out.skeleton));
    return out;
}

ClusterReport cluster(std::span<const BytecodeRecord> records)
{
    ClusterReport report;
    std::map<Hash32, CodeCluster> groups;
    for (const auto& r : records) {
        if (r.verified) {
            ++report.excluded_verified;
            continue;
        }
        NormalizedCode n = normalize(r.code);
        if (std::find(n.skeleton.begin(), n.skeleton.end(), op_delegatecall) != n.skeleton.end()) {
            ++report.excluded_delegatecall;
            continue;
        }
        auto& g = groups[n.digest];
        g.digest = n.digest;
        g.members.push_back({r.chain, r.address});
    }
    for (auto& [digest, g] : groups) {
        std::sort(g.members.begin(), g.members.end(), [](const ClusterMember& a, const ClusterMember& b) {
            if (a.chain.name != b.chain.name)
                return a.chain.name < b.chain.name;
            return a.address < b.address;
        });
        for (const auto& m : g.members)
            if (std::find(g.chains.begin(), g.chains.end(), m.chain.name) == g.chains.end())
                g.chains.push_back(m.chain.name);
        std::sort(g.chains.begin(), g.chains.end());
        report.clusters.push_back(std::move(g));
    }
    std::stable_sort(report.clusters.begin(), report.clusters.end(),
                     [](const CodeCluster& a, const CodeCluster& b) { return a.members.size() > b.members.size(); });
    return report;
}

std::vector<BytecodeRecord> load_bytecode_text(std::string_view text)
{
    std::vector<BytecodeRecord> out;
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
            auto chain = chain_from_string(j.at("chain").get<std::string>());
            if (!chain)
                throw Error("unknown chain");
            BytecodeRecord r;
            r.chain = ChainId::of(*chain);
            r.address = address_from_hex(j.at("address").get<std::string>());
            r.code = bytes_from_hex(j.at("code_hex").get<std::string>());
            r.verified = j.value("verified", false);
            out.push_back(std::move(r));
        } catch (const std::exception& e) {
            throw Error("bytecode line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

std::vector<BytecodeRecord> load_bytecode(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open bytecode file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return load_bytecode_text(buf.str());
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

}  // namespace mevlens
