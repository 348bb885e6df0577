// Command-line front end: solve, chaos-curve, bound-scan, simulate, verify.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "parisi/commands.hpp"

using namespace parisi;

int main(int argc, char** argv) {
    CLI::App app{"Parisi measures, temperature chaos curves and exact small-N checks for mixed p-spin models"};
    app.require_subcommand(1, 1);

    std::string config_path, out_dir = ".", preset;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    app.add_option("--config", config_path, "JSON run configuration");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--seed", seed, "random seed (overrides the config)");
    app.add_option("--threads", threads, "worker threads (overrides the config)")->check(CLI::PositiveNumber);
    app.add_option("--preset", preset, "model preset sk:beta=F[,h=F] (overrides the config model)");

    struct Sub {
        const char* name;
        const char* help;
        int (*run)(const CommandContext&);
    };
    const Sub subs[] = {
        {"solve", "optimise the Parisi functional and write measure.json", cmd_solve},
        {"chaos-curve", "solve for u_t over the t grid and write chaos_curve.csv", cmd_chaos_curve},
        {"bound-scan", "evaluate the quadratic chaos bound over a u grid and write bound_scan.csv", cmd_bound_scan},
        {"simulate", "exact enumeration over disorder samples; writes simulate.json and tables", cmd_simulate},
        {"verify", "run the property checks and write verify.json", cmd_verify},
    };
    for (const auto& s : subs) app.add_subcommand(s.name, s.help)->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    CommandContext ctx;
    ctx.out_dir = out_dir;
    try {
        if (!config_path.empty()) {
            apply_json(ctx.cfg, read_json_file(config_path), !preset.empty());
        } else if (preset.empty()) {
            throw ConfigError("need --config or --preset");
        }
        if (!preset.empty()) apply_preset(ctx.cfg, preset);
        if (seed) ctx.cfg.seed = *seed;
        if (threads) ctx.cfg.threads = *threads;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    try {
        for (const auto& s : subs)
            if (name == s.name) return s.run(ctx);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const CapacityError& e) {
        std::cerr << "capacity error: " << e.what() << "\n";
        return kExitCapacity;
    } catch (const InvalidArgument& e) {
        std::cerr << "invalid argument: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitConfig;
}
