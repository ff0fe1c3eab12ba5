#include "mevlens/stats.hpp"

#include <algorithm>

namespace mevlens {

Rational percentile_nearest_rank(std::span<const Rational> sorted, unsigned pct)
{
    if (sorted.empty() || pct == 0 || pct > 100)
        throw Error("percentile of an empty sample or out-of-range rank");
    const std::size_t n = sorted.size();
    const std::size_t rank = (pct * n + 99) / 100;  // ceil(pct/100 * n)
    return sorted[std::max<std::size_t>(rank, 1) - 1];
}

std::optional<Summary> summarize(std::span<const Rational> values)
{
    if (values.empty())
        return std::nullopt;
    std::vector<Rational> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    Summary s;
    s.count = v.size();
    for (const auto& x : v)
        s.total += x;
    s.min = v.front();
    s.max = v.back();
    s.mean = s.total / Rational(BigInt(v.size()));
    const std::size_t mid = v.size() / 2;
    s.median = v.size() % 2 ? v[mid] : (v[mid - 1] + v[mid]) / 2;
    s.p90 = percentile_nearest_rank(v, 90);
    return s;
}

}  // namespace mevlens
