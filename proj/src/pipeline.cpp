#include "mevlens/pipeline.hpp"

#include <algorithm>
#include <future>
#include <set>

namespace mevlens {

namespace {

struct Shard {
    std::uint64_t first_block = 0;
    std::uint64_t last_block = 0;
    std::span<const EventLog> logs;
};

// Cuts the range's logs into at most `jobs` pieces of similar size at block
// boundaries.
std::vector<Shard> make_shards(const ChainDataset& dataset, std::uint64_t from, std::uint64_t to, unsigned jobs)
{
    std::span<const EventLog> all = dataset.log_slice(from, to);
    std::vector<Shard> shards;
    if (all.empty())
        return shards;
    jobs = std::max(1u, jobs);
    const std::size_t target = (all.size() + jobs - 1) / jobs;
    std::size_t begin = 0;
    while (begin < all.size()) {
        std::size_t end = std::min(all.size(), begin + target);
        while (end < all.size() && all[end].block_number == all[end - 1].block_number)
            ++end;
        shards.push_back({all[begin].block_number, all[end - 1].block_number, all.subspan(begin, end - begin)});
        begin = end;
    }
    return shards;
}

template <typename T>
void append(std::vector<T>& into, std::vector<T>&& from)
{
    into.insert(into.end(), std::make_move_iterator(from.begin()), std::make_move_iterator(from.end()));
}

template <typename Fn>
auto run_parallel(std::size_t n, unsigned jobs, Fn fn)
{
    using R = decltype(fn(std::size_t{0}));
    std::vector<R> out(n);
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            out[i] = fn(i);
        return out;
    }
    std::vector<std::future<R>> futures;
    futures.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        futures.push_back(std::async(std::launch::async, fn, i));
    for (std::size_t i = 0; i < n; ++i)
        out[i] = futures[i].get();
    return out;
}

}  // namespace

ScanResult scan_chain(const ChainDataset& dataset, const ScanOptions& options)
{
    if (options.from_block > options.to_block)
        throw InvalidRange("from_block " + std::to_string(options.from_block) + " exceeds to_block " +
                           std::to_string(options.to_block));
    const TopicRegistry& registry = options.registry ? *options.registry : TopicRegistry::builtin();
    ScanResult result;
    result.chain = dataset.chain().value_or(ChainId{});

    const auto shards = make_shards(dataset, options.from_block, options.to_block, options.jobs);

    struct Partial {
        DecodedActions actions;
        std::vector<ArbitrageFinding> arbitrages;
        std::vector<LiquidationFinding> liquidations;
    };
    auto partials = run_parallel(shards.size(), options.jobs, [&](std::size_t i) {
        Partial p;
        p.actions = decode_actions(shards[i].logs, options.pools, registry);
        if (options.arbitrage)
            p.arbitrages = detect_arbitrages(p.actions.swaps);
        if (options.liquidation)
            p.liquidations = detect_liquidations(p.actions.liquidations, p.actions.redeems);
        return p;
    });

    std::vector<std::size_t> transfer_begin;
    for (auto& p : partials) {
        transfer_begin.push_back(result.actions.transfers.size());
        auto& a = result.actions;
        append(a.swaps, std::move(p.actions.swaps));
        append(a.transfers, std::move(p.actions.transfers));
        append(a.liquidations, std::move(p.actions.liquidations));
        append(a.redeems, std::move(p.actions.redeems));
        append(a.flash_loans, std::move(p.actions.flash_loans));
        append(a.oracle_updates, std::move(p.actions.oracle_updates));
        a.skipped += p.actions.skipped;
        append(result.arbitrages, std::move(p.arbitrages));
        append(result.liquidations, std::move(p.liquidations));
    }
    transfer_begin.push_back(result.actions.transfers.size());

    if (options.sandwich) {
        const auto& transfers = result.actions.transfers;
        const bool per_block = result.chain.layer == Layer::l1;
        auto found = run_parallel(shards.size(), options.jobs, [&](std::size_t i) {
            if (per_block) {
                std::span<const TransferAction> own(transfers.data() + transfer_begin[i],
                                                    transfer_begin[i + 1] - transfer_begin[i]);
                return detect_sandwiches_per_block(own);
            }
            // Transfers from this shard's start through window - 1 blocks past its end.
            const std::uint64_t reach = shards[i].last_block + (options.window ? options.window - 1 : 0);
            std::size_t end = transfer_begin[i];
            while (end < transfers.size() && transfers[end].position.block <= reach)
                ++end;
            std::span<const TransferAction> view(transfers.data() + transfer_begin[i], end - transfer_begin[i]);
            return detect_sandwiches_windowed(view, options.window, shards[i].first_block, shards[i].last_block);
        });
        std::set<std::pair<Hash32, Hash32>> seen;
        for (auto& list : found)
            for (auto& f : list)
                if (seen.emplace(f.front_tx, f.back_tx).second)
                    result.sandwiches.push_back(std::move(f));
        std::stable_sort(result.sandwiches.begin(), result.sandwiches.end(),
                         [](const SandwichFinding& a, const SandwichFinding& b) {
                             if (a.front_position != b.front_position)
                                 return a.front_position < b.front_position;
                             return a.back_position < b.back_position;
                         });
    }
    return result;
}

void price_findings(ScanResult& scan, const ChainDataset& dataset, const PriceProvider& prices)
{
    const auto& loans = scan.actions.flash_loans;
    auto day_of = [&](std::uint64_t block) { return unix_day(dataset.block_timestamp(block).value_or(0)); };
    static const TxRecord no_tx{};

    std::set<Hash32> charged;
    for (auto& f : scan.arbitrages) {
        const TxRecord* tx = dataset.find_tx(f.tx_hash);
        if (tx)
            f.extractor = tx->from;
        f.profit = arbitrage_profit(f, prices, tx ? *tx : no_tx, day_of(f.position.block),
                                    charged.insert(f.tx_hash).second);
        attribute_flash_loans(f, loans);
    }
    charged.clear();
    for (auto& f : scan.liquidations) {
        const TxRecord* tx = dataset.find_tx(f.tx_hash);
        if (tx)
            f.extractor = tx->from;
        f.profit = liquidation_profit(f, prices, tx ? *tx : no_tx, day_of(f.position.block),
                                      charged.insert(f.tx_hash).second);
        attribute_flash_loans(f, loans);
    }
    for (auto& f : scan.sandwiches) {
        const TxRecord* front = dataset.find_tx(f.front_tx);
        const TxRecord* back = dataset.find_tx(f.back_tx);
        if (front)
            f.extractor = front->from;
        f.profit = sandwich_profit(f, scan.actions.transfers, prices, front ? *front : no_tx,
                                   back ? *back : no_tx, day_of(f.front_position.block));
        attribute_flash_loans(f, loans);
    }
}

}  // namespace mevlens
