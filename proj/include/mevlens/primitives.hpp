#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace mevlens {

// Token amounts are 256-bit on chain; intermediate products in the AMM
// solvers exceed that, so amounts use the unbounded integer type.
using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;
using Bytes = std::vector<std::uint8_t>;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised when an internal invariant does not hold (CLI exit status 2).
class InvariantViolation : public Error {
public:
    using Error::Error;
};

template <std::size_t N>
struct FixedBytes {
    std::array<std::uint8_t, N> bytes{};

    static constexpr std::size_t size() { return N; }
    auto operator<=>(const FixedBytes&) const = default;
    bool is_zero() const;
    std::span<const std::uint8_t> span() const { return bytes; }
};

template <std::size_t N>
bool FixedBytes<N>::is_zero() const
{
    for (auto b : bytes)
        if (b != 0)
            return false;
    return true;
}

struct Address : FixedBytes<20> {
    auto operator<=>(const Address&) const = default;
};

struct Hash32 : FixedBytes<32> {
    auto operator<=>(const Hash32&) const = default;
};

// Lowercase 0x-prefixed hex.
std::string to_hex(std::span<const std::uint8_t> bytes);
template <std::size_t N>
std::string to_hex(const FixedBytes<N>& v)
{
    return to_hex(v.span());
}

// Accepts an optional 0x prefix and either case; throws Error on bad input.
Bytes bytes_from_hex(std::string_view hex);
Address address_from_hex(std::string_view hex);
Hash32 hash_from_hex(std::string_view hex);

// Big-endian 32-byte word helpers.
BigInt uint_from_be(std::span<const std::uint8_t> bytes);
Hash32 word_from_uint(const BigInt& value);  // two's complement for negatives
Address address_from_word(const Hash32& word);
Hash32 word_from_address(const Address& a);

BigInt parse_uint(std::string_view decimal);
BigInt parse_int(std::string_view decimal);
// Accepts "12", "-0.5", "1/3", "1e-18".
Rational parse_rational(std::string_view text);

// Fixed-point rendering, truncating toward zero.
std::string format_fixed(const Rational& value, int decimals);
inline std::string format_eth(const Rational& value) { return format_fixed(value, 18); }

enum class ChainName { ethereum, arbitrum, optimism, zksync };
enum class Layer { l1, l2 };
enum class OrderingPolicy { gas_price, fcfs };

struct ChainId {
    ChainName name = ChainName::ethereum;
    Layer layer = Layer::l1;
    OrderingPolicy ordering = OrderingPolicy::gas_price;

    static ChainId of(ChainName name);
    bool operator==(const ChainId&) const = default;
};

std::string_view to_string(ChainName name);
std::optional<ChainName> chain_from_string(std::string_view s);

inline constexpr std::int64_t seconds_per_day = 86400;
inline std::int64_t unix_day(std::int64_t timestamp)
{
    return timestamp >= 0 ? timestamp / seconds_per_day : -((-timestamp + seconds_per_day - 1) / seconds_per_day);
}
// "YYYY-MM" of a unix timestamp (UTC).
std::string utc_month(std::int64_t timestamp);

}  // namespace mevlens

template <>
struct std::hash<mevlens::Address> {
    std::size_t operator()(const mevlens::Address& a) const noexcept
    {
        std::size_t h = 1469598103934665603ull;
        for (auto b : a.bytes)
            h = (h ^ b) * 1099511628211ull;
        return h;
    }
};

template <>
struct std::hash<mevlens::Hash32> {
    std::size_t operator()(const mevlens::Hash32& a) const noexcept
    {
        std::size_t h = 1469598103934665603ull;
        for (auto b : a.bytes)
            h = (h ^ b) * 1099511628211ull;
        return h;
    }
};
