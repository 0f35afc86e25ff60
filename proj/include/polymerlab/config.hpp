#ifndef POLYMERLAB_CONFIG_HPP
#define POLYMERLAB_CONFIG_HPP

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "polymerlab/env_model.hpp"

namespace polymerlab {

enum class Command { simulate, moments, overshoot, check_conditions, decompose, oracle };

std::string to_string(Command c);

struct ExperimentConfig {
    Command command = Command::simulate;
    EnvironmentSpec spec{Gaussian{0.0, 1.0}, 4.0};
    double beta = 0.3;
    int dim = 3;
    int horizon = 50;
    int64_t replicas = 1000;
    uint64_t seed = 1;
    int workers = 1;
    std::string output_dir = "out";
    std::map<std::string, std::vector<double>> grids;
    double radius_cap_a = 0.0;  // 0 disables the cone radius cap
    int radius_cap_b = 0;
    bool battery = false;  // check-conditions over the built-in distribution battery
};

struct ConfigError : std::runtime_error {
    std::vector<std::string> errors;  // "line N: message"
    explicit ConfigError(std::vector<std::string> errs);
};

// Sectioned key-value text ([experiment], [environment], [grids]) to a
// validated config; collects every problem with its line number.
ExperimentConfig parse_config(const std::string& text);

// Canonical emission; parse(emit(c)) == c and the echo doubles as the
// provenance record hashed into every artifact.
std::string emit_config(const ExperimentConfig& cfg);

// FNV-1a over the canonical form.
uint64_t config_hash(const ExperimentConfig& cfg);

// Grid lookup with a fallback when the config does not name one.
std::vector<double> grid_or(const ExperimentConfig& cfg, const std::string& name,
                            std::vector<double> fallback);

// Executes the configured experiment and writes report.json, CSVs, an SVG
// where it makes sense, and config.echo into output_dir.
// Exit code: 0 success, 2 some verdict INCONCLUSIVE, 1 error.
int run(const ExperimentConfig& cfg);

}  // namespace polymerlab

#endif
