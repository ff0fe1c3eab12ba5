#pragma once

#include <optional>
#include <span>
#include <vector>

#include "mevlens/primitives.hpp"

namespace mevlens {

struct Summary {
    std::size_t count = 0;
    Rational total = 0;
    Rational max = 0;
    Rational p90 = 0;  // nearest rank: the ceil(0.9 n)-th smallest value
    Rational mean = 0;
    Rational median = 0;  // mean of the two middle values for even n
    Rational min = 0;
};

// nullopt for an empty sample.
std::optional<Summary> summarize(std::span<const Rational> values);

// Nearest-rank percentile, pct in (0, 100].
Rational percentile_nearest_rank(std::span<const Rational> sorted, unsigned pct);

}  // namespace mevlens
