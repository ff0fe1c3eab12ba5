#include "mevlens/prices.hpp"

#include <fstream>
#include <sstream>

namespace mevlens {

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"'))
        s.remove_suffix(1);
    return s;
}

}  // namespace

void PriceTable::set(const Address& token, std::int64_t day, Rational price)
{
    tokens_[token][day] = std::move(price);
}

void PriceTable::set_eth_usd(std::int64_t day, Rational usd_per_eth)
{
    eth_usd_[day] = std::move(usd_per_eth);
}

std::optional<Rational> PriceTable::at_or_before(const Series& s, std::int64_t day)
{
    auto it = s.upper_bound(day);
    if (it == s.begin())
        return std::nullopt;
    return std::prev(it)->second;
}

std::optional<Rational> PriceTable::price_eth(const Address& token, std::int64_t day) const
{
    auto it = tokens_.find(token);
    if (it == tokens_.end())
        return std::nullopt;
    return at_or_before(it->second, day);
}

std::optional<Rational> PriceTable::eth_usd(std::int64_t day) const
{
    return at_or_before(eth_usd_, day);
}

PriceTable PriceTable::from_csv_text(std::string_view text)
{
    PriceTable table;
    std::size_t line_no = 0;
    while (!text.empty()) {
        auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        line = trim(line);
        if (line.empty())
            continue;
        std::vector<std::string_view> cols;
        std::size_t start = 0;
        while (true) {
            auto comma = line.find(',', start);
            cols.push_back(trim(line.substr(start, comma - start)));
            if (comma == std::string_view::npos)
                break;
            start = comma + 1;
        }
        if (line_no == 1 && !cols.empty() && cols[0] == "token_address")
            continue;
        try {
            if (cols.size() != 3)
                throw Error("expected 3 columns");
            const std::int64_t day = std::stoll(std::string(cols[1]));
            Rational price = parse_rational(cols[2]);
            if (price < 0)
                throw Error("negative price");
            if (cols[0] == "ETHUSD")
                table.set_eth_usd(day, std::move(price));
            else
                table.set(address_from_hex(cols[0]), day, std::move(price));
        } catch (const std::exception& e) {
            throw Error("prices line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return table;
}

PriceTable PriceTable::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open price file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return from_csv_text(buf.str());
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

}  // namespace mevlens
