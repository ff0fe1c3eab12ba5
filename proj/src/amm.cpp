#include "mevlens/amm.hpp"

namespace mevlens {

namespace {

BigInt ipow(const BigInt& base, std::size_t exp)
{
    BigInt r = 1;
    for (std::size_t i = 0; i < exp; ++i)
        r *= base;
    return r;
}

BigInt abs_diff(const BigInt& a, const BigInt& b)
{
    return a > b ? a - b : b - a;
}

void require_tradable(const PoolState& pool)
{
    if (pool.reserves.size() != pool.tokens.size())
        throw EmptyPool("pool " + to_hex(pool.address) + ": reserve count does not match token count");
    for (const auto& r : pool.reserves)
        if (r <= 0)
            throw EmptyPool("pool " + to_hex(pool.address) + " has an empty reserve");
}

void require_positive(const BigInt& amount_in)
{
    if (amount_in <= 0)
        throw Error("swap amount must be positive");
}

}  // namespace

PoolState PoolState::from_metadata(const PoolMetadata& meta, std::vector<BigInt> reserves)
{
    PoolState s;
    s.address = meta.address;
    s.kind = meta.kind;
    s.tokens = meta.tokens;
    s.reserves = std::move(reserves);
    s.fee_num = meta.fee_num;
    s.fee_den = meta.fee_den;
    s.amp = meta.amp;
    return s;
}

std::size_t PoolState::index_of(const Address& token) const
{
    for (std::size_t i = 0; i < tokens.size(); ++i)
        if (tokens[i] == token)
            return i;
    throw UnknownToken("token " + to_hex(token) + " not in pool " + to_hex(address));
}

SwapQuote cp_swap_out(const PoolState& pool, const Address& token_in, const BigInt& amount_in)
{
    if (pool.kind != PoolKind::constant_product)
        throw Error("cp_swap_out on a non constant-product pool");
    require_positive(amount_in);
    const std::size_t i = pool.index_of(token_in);
    require_tradable(pool);
    const std::size_t j = 1 - i;
    const BigInt a = amount_in * (pool.fee_den - pool.fee_num) / pool.fee_den;
    const BigInt out = pool.reserves[j] * a / (pool.reserves[i] + a);

    SwapQuote q{token_in, pool.tokens[j], amount_in, out, pool};
    q.post_state.reserves[i] += amount_in;
    q.post_state.reserves[j] -= out;
    return q;
}

BigInt stable_D(std::span<const BigInt> xp, const BigInt& amp, unsigned* iterations)
{
    const std::size_t n = xp.size();
    BigInt S = 0;
    for (const auto& x : xp) {
        if (x <= 0)
            throw EmptyPool("stableswap reserve must be positive");
        S += x;
    }
    if (iterations)
        *iterations = 0;
    const BigInt nn = n;
    const BigInt Ann = amp * ipow(nn, n);
    BigInt D = S;
    for (unsigned it = 1; it <= max_solver_iterations; ++it) {
        BigInt D_P = D;
        for (const auto& x : xp)
            D_P = D_P * D / (x * nn);
        const BigInt prev = D;
        D = (Ann * S + D_P * nn) * D / ((Ann - 1) * D + (nn + 1) * D_P);
        if (abs_diff(D, prev) <= 1) {
            if (iterations)
                *iterations = it;
            return D;
        }
    }
    throw NoConvergence("stable_D did not converge in " + std::to_string(max_solver_iterations) + " iterations");
}

BigInt stable_D(const PoolState& pool, unsigned* iterations)
{
    if (pool.kind != PoolKind::stableswap)
        throw Error("stable_D on a non-stableswap pool");
    require_tradable(pool);
    return stable_D(pool.reserves, pool.amp, iterations);
}

BigInt stable_y(std::span<const BigInt> xp, const BigInt& amp, std::size_t i, std::size_t j, const BigInt& x_new,
                const BigInt& D, unsigned* iterations)
{
    const std::size_t n = xp.size();
    if (i == j || i >= n || j >= n)
        throw Error("stable_y: invalid coin indexes");
    const BigInt nn = n;
    const BigInt Ann = amp * ipow(nn, n);
    BigInt c = D;
    BigInt S_ = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (k == j)
            continue;
        const BigInt& x = k == i ? x_new : xp[k];
        if (x <= 0)
            throw EmptyPool("stableswap balance must be positive");
        S_ += x;
        c = c * D / (x * nn);
    }
    c = c * D / (Ann * nn);
    const BigInt b = S_ + D / Ann;
    if (iterations)
        *iterations = 0;
    BigInt y = D;
    for (unsigned it = 1; it <= max_solver_iterations; ++it) {
        const BigInt prev = y;
        const BigInt denom = 2 * y + b - D;
        if (denom <= 0)
            throw NoConvergence("stable_y: non-positive Newton denominator");
        y = (y * y + c) / denom;
        if (abs_diff(y, prev) <= 1) {
            if (iterations)
                *iterations = it;
            return y;
        }
    }
    throw NoConvergence("stable_y did not converge in " + std::to_string(max_solver_iterations) + " iterations");
}

SwapQuote stable_swap_out(const PoolState& pool, const Address& token_in, const Address& token_out,
                          const BigInt& amount_in)
{
    if (pool.kind != PoolKind::stableswap)
        throw Error("stable_swap_out on a non-stableswap pool");
    require_positive(amount_in);
    const std::size_t i = pool.index_of(token_in);
    const std::size_t j = pool.index_of(token_out);
    if (i == j)
        throw Error("stable_swap_out: token_in equals token_out");
    require_tradable(pool);
    const BigInt D = stable_D(pool.reserves, pool.amp);
    const BigInt y = stable_y(pool.reserves, pool.amp, i, j, pool.reserves[i] + amount_in, D);
    const BigInt gross = pool.reserves[j] - y - 1;
    const BigInt out = gross - gross * pool.fee_num / pool.fee_den;
    if (gross <= 0 || out <= 0)
        throw DrainedPool("stableswap output is not positive");

    SwapQuote q{token_in, token_out, amount_in, out, pool};
    q.post_state.reserves[i] += amount_in;
    q.post_state.reserves[j] -= out;
    return q;
}

SwapQuote swap_out(const PoolState& pool, const Address& token_in, const Address& token_out, const BigInt& amount_in)
{
    if (pool.kind == PoolKind::constant_product) {
        SwapQuote q = cp_swap_out(pool, token_in, amount_in);
        if (q.token_out != token_out)
            throw UnknownToken("token " + to_hex(token_out) + " is not the counter token of pool " +
                               to_hex(pool.address));
        return q;
    }
    return stable_swap_out(pool, token_in, token_out, amount_in);
}

PoolState apply_swap(const PoolState& pool, const SwapQuote& quote)
{
    PoolState next = pool;
    const std::size_t i = next.index_of(quote.token_in);
    const std::size_t j = next.index_of(quote.token_out);
    if (quote.amount_out >= next.reserves[j])
        throw DrainedPool("swap would drain pool " + to_hex(pool.address));
    next.reserves[i] += quote.amount_in;
    next.reserves[j] -= quote.amount_out;
    return next;
}

PathResult simulate_path(const std::unordered_map<Address, PoolState>& pools, std::span<const PathStep> path,
                         const BigInt& amount_in)
{
    PathResult result{amount_in, {}};
    for (std::size_t k = 0; k < path.size(); ++k) {
        const PathStep& step = path[k];
        if (k > 0 && path[k - 1].token_out != step.token_in)
            throw BrokenPath("path step " + std::to_string(k) + " does not continue the previous token");
        auto it = result.pools.find(step.pool);
        if (it == result.pools.end()) {
            auto src = pools.find(step.pool);
            if (src == pools.end())
                throw BrokenPath("no state for pool " + to_hex(step.pool));
            it = result.pools.emplace(step.pool, src->second).first;
        }
        if (result.amount_out <= 0)
            throw DrainedPool("path ran dry before step " + std::to_string(k));
        SwapQuote q = swap_out(it->second, step.token_in, step.token_out, result.amount_out);
        it->second = std::move(q.post_state);
        result.amount_out = q.amount_out;
    }
    return result;
}

}  // namespace mevlens
