#include <cstdlib>
#include <optional>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "polymerlab/config.hpp"

int main(int argc, char** argv) {
    CLI::App app{"directed-polymer martingale and overshoot experiments"};
    app.require_subcommand(1);

    std::string config_path, output_dir;
    long long seed = -1;
    int workers = 0;

    auto add = [&](const std::string& name, const std::string& desc) {
        CLI::App* sub = app.add_subcommand(name, desc);
        sub->add_option("--config", config_path, "experiment config file")->required();
        sub->add_option("--seed", seed, "override the config seed");
        sub->add_option("--workers", workers, "override worker count");
        sub->add_option("--output-dir", output_dir, "override the artifact directory");
        return sub;
    };
    add("simulate", "run martingale traces and store them");
    add("moments", "Monte Carlo moment trace with exact p=2 cross-check");
    add("overshoot", "stopping-time overshoot ratio experiment");
    add("check-conditions", "tail-condition checkers, single spec or battery");
    add("decompose", "verify the Markov decomposition on a sampled field");
    add("oracle", "dynamic program vs full path enumeration");

    CLI11_PARSE(app, argc, argv);
    std::string cmd = app.get_subcommands().front()->get_name();

    std::ifstream in(config_path, std::ios::binary);
    if (!in) {
        std::cerr << "error: cannot read config " << config_path << "\n";
        return 1;
    }
    std::ostringstream text;
    text << in.rdbuf();

    try {
        polymerlab::ExperimentConfig cfg = polymerlab::parse_config(text.str());
        // subcommand wins over the command key in the file
        cfg.command = *[&] {
            for (polymerlab::Command c :
                 {polymerlab::Command::simulate, polymerlab::Command::moments,
                  polymerlab::Command::overshoot, polymerlab::Command::check_conditions,
                  polymerlab::Command::decompose, polymerlab::Command::oracle})
                if (polymerlab::to_string(c) == cmd) return std::optional{c};
            return std::optional<polymerlab::Command>{};
        }();
        if (seed >= 0) cfg.seed = static_cast<uint64_t>(seed);
        if (!output_dir.empty()) cfg.output_dir = output_dir;
        if (workers > 0) {
            cfg.workers = workers;
        } else if (const char* env = std::getenv("POLYMERLAB_WORKERS")) {
            int w = std::atoi(env);
            if (w > 0) cfg.workers = w;
        }
        return polymerlab::run(cfg);
    } catch (const polymerlab::ConfigError& e) {
        for (const auto& msg : e.errors) std::cerr << "config: " << msg << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
