// mevlens: MEV measurement over fixture chains.

#include <cstdlib>
#include <functional>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "commands.hpp"

namespace {

using mevlens::cli::RunConfig;

void setup_logging()
{
    auto logger = spdlog::stderr_logger_st("mevlens");
    logger->set_pattern("[%l] %v");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("MEVLENS_LOG")) {
        const auto level = spdlog::level::from_str(env);
        // from_str maps unknown names to off; only honour real level names.
        if (level != spdlog::level::off || std::string(env) == "off")
            spdlog::set_level(level);
    }
}

struct Flags {
    std::string chain = "ethereum";
    std::uint64_t from_block = 0;
    std::uint64_t to_block = UINT64_MAX;
    std::string fixtures = ".";
    std::string prices, pools, snapshots, bytecode, config;
    std::string out = "out";
    std::uint64_t window = 100;
    std::uint64_t horizon = 100;
    unsigned jobs = 1;
};

}  // namespace

int main(int argc, char** argv)
{
    setup_logging();
    CLI::App app{"mevlens: detect and measure MEV in fixture chains"};
    app.require_subcommand(1);
    app.fallthrough();

    Flags f;
    auto* o_chain = app.add_option("--chain", f.chain, "ethereum, arbitrum, optimism or zksync");
    app.add_option("--from-block", f.from_block, "first block of the range");
    app.add_option("--to-block", f.to_block, "last block of the range");
    app.add_option("--fixtures", f.fixtures, "directory with <chain>.jsonl and default input files");
    auto* o_prices = app.add_option("--prices", f.prices, "price CSV (default <fixtures>/prices.csv)");
    auto* o_pools = app.add_option("--pools", f.pools, "pool metadata JSON (default <fixtures>/pools.json)");
    auto* o_snaps = app.add_option("--snapshots", f.snapshots, "state snapshots JSONL (default <fixtures>/snapshots.jsonl)");
    auto* o_code = app.add_option("--bytecode", f.bytecode, "bytecode JSONL (default <fixtures>/bytecode.jsonl)");
    auto* o_config = app.add_option("--config", f.config, "run config JSON (default <fixtures>/config.json)");
    app.add_option("--out", f.out, "output directory");
    auto* o_window = app.add_option("--window", f.window, "rollup sandwich window in blocks");
    auto* o_horizon = app.add_option("--horizon", f.horizon, "opportunity search horizon in blocks");
    auto* o_jobs = app.add_option("--jobs", f.jobs, "worker threads");

    std::function<int(const RunConfig&)> action;
    auto leaf = [&](CLI::App* parent, const std::string& name, const std::string& help,
                    std::function<int(const RunConfig&)> run) {
        auto* sub = parent->add_subcommand(name, help);
        sub->fallthrough();
        sub->callback([&action, run] { action = run; });
        return sub;
    };
    using namespace mevlens::cli;
    leaf(&app, "decode", "decode logs into actions", run_decode);
    auto* detect = app.add_subcommand("detect", "run one detector");
    detect->fallthrough();
    detect->require_subcommand(1);
    leaf(detect, "arb", "cyclic arbitrage", [](const RunConfig& c) { return run_detect(c, DetectKind::arbitrage); });
    leaf(detect, "liq", "liquidations", [](const RunConfig& c) { return run_detect(c, DetectKind::liquidation); });
    leaf(detect, "sandwich", "sandwich attacks", [](const RunConfig& c) { return run_detect(c, DetectKind::sandwich); });
    leaf(detect, "flashloan", "flash loans and the findings that use them",
         [](const RunConfig& c) { return run_detect(c, DetectKind::flashloan); });
    leaf(&app, "opportunity", "locate the transaction that opened each arbitrage and liquidation", run_opportunity);
    leaf(&app, "compete", "extractors competing for the same opportunity, reverted rates", run_compete);
    auto* cross = app.add_subcommand("crosslayer", "L1 to L2 message analysis");
    cross->fallthrough();
    cross->require_subcommand(1);
    leaf(cross, "infer", "link bridge messages and find swap-bearing victims",
         [](const RunConfig& c) { return run_crosslayer(c, CrossLayerKind::infer); });
    leaf(cross, "delay", "L1 to L2 delay statistics",
         [](const RunConfig& c) { return run_crosslayer(c, CrossLayerKind::delay); });
    leaf(cross, "simulate", "sandwich attack profitability by strategy and capital",
         [](const RunConfig& c) { return run_crosslayer(c, CrossLayerKind::simulate); });
    auto* code = app.add_subcommand("bytecode", "contract bytecode analysis");
    code->fallthrough();
    code->require_subcommand(1);
    leaf(code, "cluster", "group contracts by normalized bytecode", run_bytecode_cluster);
    leaf(&app, "report", "summary tables from the findings under --out", run_report);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return 1;
    }

    try {
        RunConfig c;
        c.fixtures = f.fixtures;
        if (o_config->count())
            apply_config_file(c, f.config);
        else if (std::filesystem::exists(c.fixtures / "config.json"))
            apply_config_file(c, c.fixtures / "config.json");
        const auto chain = mevlens::chain_from_string(f.chain);
        if (!chain)
            throw mevlens::Error("unknown chain '" + f.chain + "'");
        c.chain = *chain;
        c.chain_given = o_chain->count() > 0;
        c.from_block = f.from_block;
        c.to_block = f.to_block;
        if (o_prices->count())
            c.prices = f.prices;
        if (o_pools->count())
            c.pools = f.pools;
        if (o_snaps->count())
            c.snapshots = f.snapshots;
        if (o_code->count())
            c.bytecode = f.bytecode;
        c.out = f.out;
        if (o_window->count())
            c.window = f.window;
        if (o_horizon->count())
            c.horizon = f.horizon;
        if (o_jobs->count())
            c.jobs = f.jobs;
        validate(c);
        return action(c);
    } catch (const mevlens::InvariantViolation& e) {
        spdlog::critical("invariant violated: {}", e.what());
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
