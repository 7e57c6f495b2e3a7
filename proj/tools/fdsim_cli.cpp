// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: run, sweep, reproduce.

#include "fdsim/simulator.hpp"

#include <CLI11.hpp>
#include <iostream>

namespace
{
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

int finish(int runs, int failures)
{
    std::cout << "runs: " << runs << ", failed: " << failures << "\n";
    return failures * 10 > runs ? kExitNumerical : 0;
}
} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Wideband full-duplex MIMO OFDM self-interference cancellation simulator"};
    app.require_subcommand(1);

    std::string config_path, spec_path, out_dir = "out", figure;
    std::uint64_t seed = 0;
    int runs = 0, workers = 0;
    bool psd = false, dumps = false;

    auto *run = app.add_subcommand("run", "Monte Carlo runs of one configuration");
    run->add_option("--config", config_path, "JSON configuration file")->required();
    run->add_option("--seed", seed, "Seed override");
    run->add_option("--runs", runs, "Run count override");
    run->add_option("--out", out_dir, "Output directory");
    run->add_option("--workers", workers, "Worker threads (0: all cores)");
    run->add_flag("--psd", psd, "Write SI power spectra");
    run->add_flag("--dump", dumps, "Write channel, canceller and TSVD dumps");

    auto *sweep = app.add_subcommand("sweep", "Parameter sweep from a scenario file");
    sweep->add_option("--spec", spec_path, "JSON scenario file")->required();
    sweep->add_option("--seed", seed, "Seed override");
    sweep->add_option("--runs", runs, "Run count override");
    sweep->add_option("--out", out_dir, "Output directory");
    sweep->add_option("--workers", workers, "Worker threads (0: all cores)");

    auto *repro = app.add_subcommand("reproduce", "Figure presets at desk scale");
    repro->add_option("figure", figure, "fig3 .. fig10")->required()->check(CLI::IsMember(fdsim::figure_ids()));
    repro->add_option("--runs", runs, "Runs per sweep point (default 100)");
    repro->add_option("--seed", seed, "Seed (default 1)");
    repro->add_option("--out", out_dir, "Output directory");
    repro->add_option("--workers", workers, "Worker threads (0: all cores)");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try
    {
        if (*run)
        {
            fdsim::ScenarioSpec spec;
            spec.config = fdsim::load_config(config_path);
            spec.name = "run";
            spec.runs = runs > 0 ? runs : spec.config.mc_runs;
            spec.seed = run->count("--seed") ? seed : spec.config.seed;
            spec.workers = workers;
            spec.want_psd = psd;
            spec.want_dumps = dumps;
            const auto r = fdsim::monte_carlo(spec);
            fdsim::write_outputs(out_dir, spec, r);
            return finish(r.total_runs(), r.total_failures());
        }
        if (*sweep)
        {
            fdsim::ScenarioSpec spec = fdsim::load_scenario(spec_path);
            if (runs > 0)
                spec.runs = runs;
            if (sweep->count("--seed"))
                spec.seed = seed;
            if (workers > 0)
                spec.workers = workers;
            const auto r = fdsim::monte_carlo(spec);
            fdsim::write_outputs(out_dir, spec, r);
            return finish(r.total_runs(), r.total_failures());
        }
        const auto r = fdsim::reproduce(figure, runs > 0 ? runs : 100, out_dir,
                                        repro->count("--seed") ? seed : 1, workers);
        for (const auto &f : r.files)
            std::cout << f << "\n";
        return finish(r.runs, r.failures);
    }
    catch (const fdsim::ConfigError &e)
    {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    }
    catch (const std::invalid_argument &e)
    {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    }
}
