#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nots/bandit.hpp"

namespace nots {

/// Value in the configuration subset of TOML: booleans, integers, floats,
/// basic strings and flat arrays of those.
struct TomlValue {
    enum class Type { Bool, Int, Float, String, Array } type = Type::Int;
    bool b = false;
    std::int64_t i = 0;
    double d = 0.0;
    std::string s;
    std::vector<TomlValue> array;

    double as_number() const;
};

/// Keys are flattened as "section.key"; top-level keys have no prefix.
using TomlTable = std::map<std::string, TomlValue>;

TomlTable parse_toml(const std::string& text);
TomlTable load_toml(const std::string& path);

struct PoolSpec {
    std::string path;  ///< existing NOBENCH1 file; empty means generate
    std::size_t size = 200;
    int nx = 16, ny = 16;
    std::uint64_t seed = 0;
    double tau = 3.0, alpha = 2.0, a_low = 3.0, a_high = 12.0, forcing = 1.0;
};

struct ExperimentConfig {
    PoolSpec pool;
    std::string functional = "neg_flow_rate";
    int high_gradient_k = 10;
    std::size_t target_index = 0;  ///< pool member whose output is the inverse target
    std::vector<std::string> algorithms{"snots", "nots-fno", "gp-ts", "bo-logei", "bfo", "sto-nts", "rs"};
    int budget = 50;
    int trials = 10;
    std::uint64_t seed = 0;
    double noise = -1.0;  ///< negative selects 0.01 x std of pool outputs
    std::string out = "results";
    unsigned threads = 0;
    AlgorithmConfig settings;  ///< shared per-kind settings; kind and budget are filled per run

    void validate() const;
};

/// Reads a config file; unknown keys are errors.
ExperimentConfig experiment_from_toml(const TomlTable& t);
ExperimentConfig load_experiment(const std::string& path);

}  // namespace nots
