#include "mevlens/primitives.hpp"

#include <chrono>
#include <cstdio>

namespace mevlens {

namespace {

int hex_digit(char c)
{
    if (c >= '0' && c <= '9')
        return c - '0';
    if (c >= 'a' && c <= 'f')
        return c - 'a' + 10;
    if (c >= 'A' && c <= 'F')
        return c - 'A' + 10;
    return -1;
}

std::string_view strip_0x(std::string_view hex)
{
    if (hex.size() >= 2 && hex[0] == '0' && (hex[1] == 'x' || hex[1] == 'X'))
        hex.remove_prefix(2);
    return hex;
}

template <std::size_t N>
FixedBytes<N> fixed_from_hex(std::string_view hex, const char* what)
{
    auto raw = bytes_from_hex(hex);
    if (raw.size() != N)
        throw Error(std::string("expected ") + std::to_string(N) + "-byte " + what + ", got " +
                    std::to_string(raw.size()) + " bytes");
    FixedBytes<N> out;
    std::copy(raw.begin(), raw.end(), out.bytes.begin());
    return out;
}

BigInt pow10(unsigned exp)
{
    BigInt r = 1;
    for (unsigned i = 0; i < exp; ++i)
        r *= 10;
    return r;
}

bool all_digits(std::string_view s)
{
    if (s.empty())
        return false;
    for (char c : s)
        if (c < '0' || c > '9')
            return false;
    return true;
}

}  // namespace

std::string to_hex(std::span<const std::uint8_t> bytes)
{
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 + bytes.size() * 2);
    out += "0x";
    for (auto b : bytes) {
        out += digits[b >> 4];
        out += digits[b & 0xf];
    }
    return out;
}

Bytes bytes_from_hex(std::string_view hex)
{
    hex = strip_0x(hex);
    if (hex.size() % 2 != 0)
        throw Error("odd-length hex string");
    Bytes out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        int hi = hex_digit(hex[2 * i]);
        int lo = hex_digit(hex[2 * i + 1]);
        if (hi < 0 || lo < 0)
            throw Error("invalid hex digit");
        out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return out;
}

Address address_from_hex(std::string_view hex)
{
    Address a;
    static_cast<FixedBytes<20>&>(a) = fixed_from_hex<20>(hex, "address");
    return a;
}

Hash32 hash_from_hex(std::string_view hex)
{
    Hash32 h;
    static_cast<FixedBytes<32>&>(h) = fixed_from_hex<32>(hex, "hash");
    return h;
}

BigInt uint_from_be(std::span<const std::uint8_t> bytes)
{
    BigInt v = 0;
    if (!bytes.empty())
        boost::multiprecision::import_bits(v, bytes.begin(), bytes.end(), 8, true);
    return v;
}

Hash32 word_from_uint(const BigInt& value)
{
    static const BigInt modulus = BigInt(1) << 256;
    BigInt v = value % modulus;
    if (v < 0)
        v += modulus;
    Hash32 out;
    std::vector<std::uint8_t> raw;
    boost::multiprecision::export_bits(v, std::back_inserter(raw), 8, true);
    if (raw.size() > 32)
        throw Error("value does not fit a 32-byte word");
    std::copy(raw.begin(), raw.end(), out.bytes.begin() + (32 - raw.size()));
    return out;
}

Address address_from_word(const Hash32& word)
{
    Address a;
    std::copy(word.bytes.begin() + 12, word.bytes.end(), a.bytes.begin());
    return a;
}

Hash32 word_from_address(const Address& a)
{
    Hash32 w;
    std::copy(a.bytes.begin(), a.bytes.end(), w.bytes.begin() + 12);
    return w;
}

BigInt parse_uint(std::string_view decimal)
{
    if (!all_digits(decimal))
        throw Error("invalid unsigned decimal '" + std::string(decimal) + "'");
    // A leading zero would make the string constructor read octal.
    const auto first = decimal.find_first_not_of('0');
    if (first == std::string_view::npos)
        return 0;
    return BigInt(std::string(decimal.substr(first)));
}

BigInt parse_int(std::string_view decimal)
{
    if (!decimal.empty() && decimal.front() == '-')
        return -parse_uint(decimal.substr(1));
    return parse_uint(decimal);
}

Rational parse_rational(std::string_view text)
{
    const std::string original(text);
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        BigInt num = parse_int(text.substr(0, slash));
        BigInt den = parse_uint(text.substr(slash + 1));
        if (den == 0)
            throw Error("zero denominator in '" + original + "'");
        return Rational(num, den);
    }
    bool negative = false;
    if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
        negative = text.front() == '-';
        text.remove_prefix(1);
    }
    long exponent = 0;
    if (auto e = text.find_first_of("eE"); e != std::string_view::npos) {
        auto exp_text = text.substr(e + 1);
        bool exp_negative = !exp_text.empty() && exp_text.front() == '-';
        if (!exp_text.empty() && (exp_text.front() == '-' || exp_text.front() == '+'))
            exp_text.remove_prefix(1);
        if (!all_digits(exp_text) || exp_text.size() > 6)
            throw Error("invalid exponent in '" + original + "'");
        exponent = std::stol(std::string(exp_text)) * (exp_negative ? -1 : 1);
        text = text.substr(0, e);
    }
    std::string digits;
    if (auto dot = text.find('.'); dot != std::string_view::npos) {
        auto int_part = text.substr(0, dot);
        auto frac_part = text.substr(dot + 1);
        if ((!int_part.empty() && !all_digits(int_part)) || (!frac_part.empty() && !all_digits(frac_part)) ||
            (int_part.empty() && frac_part.empty()))
            throw Error("invalid decimal '" + original + "'");
        digits = std::string(int_part) + std::string(frac_part);
        exponent -= static_cast<long>(frac_part.size());
    } else {
        if (!all_digits(text))
            throw Error("invalid number '" + original + "'");
        digits = std::string(text);
    }
    Rational value{parse_uint(digits)};
    if (exponent > 0)
        value *= pow10(static_cast<unsigned>(exponent));
    else if (exponent < 0)
        value /= pow10(static_cast<unsigned>(-exponent));
    return negative ? Rational(-value) : value;
}

std::string format_fixed(const Rational& value, int decimals)
{
    const BigInt scale = pow10(static_cast<unsigned>(decimals));
    BigInt num = boost::multiprecision::numerator(value);
    BigInt den = boost::multiprecision::denominator(value);
    bool negative = num < 0;
    if (negative)
        num = -num;
    BigInt scaled = num * scale / den;
    if (scaled == 0)
        negative = false;
    BigInt int_part = scaled / scale;
    BigInt frac_part = scaled % scale;
    std::string frac = frac_part.str();
    if (static_cast<int>(frac.size()) < decimals)
        frac.insert(0, static_cast<std::size_t>(decimals) - frac.size(), '0');
    std::string out = negative ? "-" : "";
    out += int_part.str();
    if (decimals > 0)
        out += "." + frac;
    return out;
}

ChainId ChainId::of(ChainName name)
{
    if (name == ChainName::ethereum)
        return {name, Layer::l1, OrderingPolicy::gas_price};
    return {name, Layer::l2, OrderingPolicy::fcfs};
}

std::string_view to_string(ChainName name)
{
    switch (name) {
    case ChainName::ethereum: return "ethereum";
    case ChainName::arbitrum: return "arbitrum";
    case ChainName::optimism: return "optimism";
    case ChainName::zksync: return "zksync";
    }
    return "unknown";
}

std::optional<ChainName> chain_from_string(std::string_view s)
{
    if (s == "ethereum")
        return ChainName::ethereum;
    if (s == "arbitrum")
        return ChainName::arbitrum;
    if (s == "optimism")
        return ChainName::optimism;
    if (s == "zksync")
        return ChainName::zksync;
    return std::nullopt;
}

std::string utc_month(std::int64_t timestamp)
{
    using namespace std::chrono;
    const year_month_day ymd{sys_days{days{unix_day(timestamp)}}};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()));
    return buf;
}

}  // namespace mevlens
