// Writes synthetic fixture directories with planted MEV and their ground truth.

#include <iostream>

#include <CLI11.hpp>

#include "synth.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"mevlens_gen: synthetic fixture generator"};
    app.require_subcommand(1);
    std::string out;
    std::uint64_t seed = 0;
    std::size_t logs = 100000;

    auto* demo = app.add_subcommand("demo", "Ethereum MEV, cross-layer links and a bytecode corpus");
    auto* attack = app.add_subcommand("attack", "50 Arbitrum bridge victims for the capital sweep");
    auto* bulk = app.add_subcommand("bulk", "random swap traffic for throughput runs");
    for (auto* sub : {demo, attack, bulk}) {
        sub->add_option("--out", out, "output directory")->required();
        sub->add_option("--seed", seed, "random seed (0 picks the builder default)");
    }
    bulk->add_option("--logs", logs, "target log count");
    CLI11_PARSE(app, argc, argv);

    try {
        mevlens::synth::Fixture fx;
        if (*demo)
            fx = seed ? mevlens::synth::make_demo_fixture(seed) : mevlens::synth::make_demo_fixture();
        else if (*attack)
            fx = seed ? mevlens::synth::make_attack_fixture(seed) : mevlens::synth::make_attack_fixture();
        else
            fx = mevlens::synth::make_bulk_fixture(seed ? seed : 42, logs);
        mevlens::synth::write_fixture(fx, out);
    } catch (const std::exception& e) {
        std::cerr << "mevlens_gen: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
