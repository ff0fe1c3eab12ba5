#pragma once

#include <span>
#include <unordered_map>
#include <vector>

#include "mevlens/pool_metadata.hpp"

namespace mevlens {

class UnknownToken : public Error {
public:
    using Error::Error;
};
class EmptyPool : public Error {
public:
    using Error::Error;
};
class NoConvergence : public Error {
public:
    using Error::Error;
};
class DrainedPool : public Error {
public:
    using Error::Error;
};
class BrokenPath : public Error {
public:
    using Error::Error;
};

inline constexpr unsigned max_solver_iterations = 255;

struct PoolState {
    Address address;
    PoolKind kind = PoolKind::constant_product;
    std::vector<Address> tokens;
    std::vector<BigInt> reserves;
    BigInt fee_num = 3;
    BigInt fee_den = 1000;
    BigInt amp = 200;

    static PoolState from_metadata(const PoolMetadata& meta, std::vector<BigInt> reserves);
    std::size_t index_of(const Address& token) const;  // throws UnknownToken
    bool operator==(const PoolState&) const = default;
};

struct SwapQuote {
    Address token_in;
    Address token_out;
    BigInt amount_in = 0;
    BigInt amount_out = 0;
    PoolState post_state;
};

// Uniswap V2 style: fee is taken from the input, the pool keeps all of it.
SwapQuote cp_swap_out(const PoolState& pool, const Address& token_in, const BigInt& amount_in);

// StableSwap invariant with Ann = A * n^n:
//   Ann * sum(x) + D = Ann * D + D^(n+1) / (n^n * prod(x))
// `iterations`, when given, receives the Newton step count.
BigInt stable_D(const PoolState& pool, unsigned* iterations = nullptr);
BigInt stable_D(std::span<const BigInt> balances, const BigInt& amp, unsigned* iterations = nullptr);

// Balance of coin j that keeps D fixed after coin i moves to x_new.
BigInt stable_y(std::span<const BigInt> balances, const BigInt& amp, std::size_t i, std::size_t j,
                const BigInt& x_new, const BigInt& D, unsigned* iterations = nullptr);

SwapQuote stable_swap_out(const PoolState& pool, const Address& token_in, const Address& token_out,
                          const BigInt& amount_in);

// Dispatches on pool.kind.
SwapQuote swap_out(const PoolState& pool, const Address& token_in, const Address& token_out,
                   const BigInt& amount_in);

PoolState apply_swap(const PoolState& pool, const SwapQuote& quote);

struct PathStep {
    Address pool;
    Address token_in;
    Address token_out;
};

struct PathResult {
    BigInt amount_out = 0;
    std::unordered_map<Address, PoolState> pools;  // post-trade states
};

// Replays the path hop by hop; a pool visited twice sees its updated state.
PathResult simulate_path(const std::unordered_map<Address, PoolState>& pools, std::span<const PathStep> path,
                         const BigInt& amount_in);

}  // namespace mevlens
