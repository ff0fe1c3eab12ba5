#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string_view>
#include <unordered_map>

#include "mevlens/primitives.hpp"

namespace mevlens {

class PriceProvider {
public:
    virtual ~PriceProvider() = default;
    // ETH per smallest token unit on the given unix day.
    virtual std::optional<Rational> price_eth(const Address& token, std::int64_t day) const = 0;
    // USD per ETH on the given unix day.
    virtual std::optional<Rational> eth_usd(std::int64_t day) const = 0;
};

// CSV rows `token_address,unix_day,price_eth`; the token column may be
// `ETHUSD` for the dollar series. A lookup returns the latest row at or before
// the requested day.
class PriceTable : public PriceProvider {
public:
    void set(const Address& token, std::int64_t day, Rational price);
    void set_eth_usd(std::int64_t day, Rational usd_per_eth);

    std::optional<Rational> price_eth(const Address& token, std::int64_t day) const override;
    std::optional<Rational> eth_usd(std::int64_t day) const override;

    static PriceTable from_csv_text(std::string_view text);
    static PriceTable load(const std::filesystem::path& path);

private:
    using Series = std::map<std::int64_t, Rational>;
    std::unordered_map<Address, Series> tokens_;
    Series eth_usd_;

    static std::optional<Rational> at_or_before(const Series& s, std::int64_t day);
};

inline const Rational wei_per_eth{BigInt("1000000000000000000")};

inline Rational wei_to_eth(const BigInt& wei)
{
    return Rational(wei) / wei_per_eth;
}

}  // namespace mevlens
