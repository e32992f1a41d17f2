#include "nots/experiment.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "nots/errors.hpp"
#include "nots/parallel.hpp"
#include "nots/report.hpp"

namespace nots {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

CandidatePool generate_from_spec(const PoolSpec& spec, unsigned threads) {
    GRFConfig g;
    g.tau = spec.tau;
    g.alpha = spec.alpha;
    g.grid = Grid2D(spec.nx, spec.ny);
    return generate_pool(spec.size, g, spec.a_low, spec.a_high, spec.forcing, spec.seed, threads);
}

CandidatePool obtain_pool(const ExperimentConfig& cfg) {
    if (!cfg.pool.path.empty()) return read_pool(cfg.pool.path);
    return generate_from_spec(cfg.pool, cfg.threads);
}

FunctionalSpec functional_for(const ExperimentConfig& cfg, const CandidatePool& pool) {
    FunctionalSpec f = FunctionalSpec::from_name(cfg.functional);
    f.k = cfg.high_gradient_k;
    f.forcing = pool.metadata().forcing;
    if (f.kind == FunctionalKind::Inverse) {
        if (cfg.target_index >= pool.size()) throw ValidationError("target_index outside the pool");
        f.target = pool[cfg.target_index].output;
    }
    return f;
}

double noise_for(const ExperimentConfig& cfg, const CandidatePool& pool) {
    return cfg.noise >= 0.0 ? cfg.noise : default_noise_sigma(pool);
}

ExperimentOutput run_experiment(const ExperimentConfig& cfg, const CandidatePool& pool) {
    cfg.validate();
    const Oracle oracle(pool, NoiseModel{noise_for(cfg, pool)}, functional_for(cfg, pool));
    const std::size_t na = cfg.algorithms.size(), nt = static_cast<std::size_t>(cfg.trials);
    std::vector<std::optional<TrialResult>> slots(na * nt);
    std::vector<std::string> errors(na * nt);
    parallel_for(
        na * nt,
        [&](std::size_t task) {
            const std::size_t a = task / nt;
            const int trial = static_cast<int>(task % nt);
            AlgorithmConfig ac = cfg.settings;
            ac.kind = algorithm_from_name(cfg.algorithms[a]);
            ac.budget = cfg.budget;
            try {
                slots[task] = run_trial(oracle, ac, cfg.seed + static_cast<std::uint64_t>(trial), trial);
            } catch (const std::exception& e) {
                errors[task] = e.what();
            }
        },
        cfg.threads);
    ExperimentOutput out;
    for (std::size_t task = 0; task < slots.size(); ++task) {
        if (slots[task]) out.results.push_back(std::move(*slots[task]));
        else out.failures.push_back({cfg.algorithms[task / nt], static_cast<int>(task % nt), errors[task]});
    }
    return out;
}

std::string trials_csv(const std::vector<TrialResult>& results) {
    std::string s = std::string(kTrialsHeader) + "\n";
    for (const auto& r : results)
        for (std::size_t t = 0; t < r.chosen.size(); ++t)
            s += r.algorithm + "," + std::to_string(r.trial) + "," + std::to_string(t + 1) + "," +
                 std::to_string(r.chosen[t]) + "," + fmt(r.instant[t]) + "," + fmt(r.cumulative[t]) + "\n";
    return s;
}

std::string summary_csv(const std::vector<TrialResult>& results) {
    std::string s = "algorithm,trials,t,mean_cumulative,std_cumulative,mean_average,std_average\n";
    for (const auto& ser : summarize(results)) {
        const auto& c = ser.curve;
        for (std::size_t t = 0; t < c.mean_cumulative.size(); ++t)
            s += ser.algorithm + "," + std::to_string(ser.trials) + "," + std::to_string(t + 1) + "," +
                 fmt(c.mean_cumulative[t]) + "," + fmt(c.std_cumulative[t]) + "," + fmt(c.mean_average[t]) + "," +
                 fmt(c.std_average[t]) + "\n";
    }
    return s;
}

std::vector<TrialResult> parse_trials_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kTrialsHeader) throw ValidationError("trials CSV has an unexpected header");
    std::vector<TrialResult> out;
    std::map<std::pair<std::string, int>, std::size_t> where;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) f.push_back(cell);
        if (f.size() != 6) throw ValidationError("trials CSV line " + std::to_string(lineno) + ": expected 6 fields");
        try {
            const int trial = std::stoi(f[1]);
            const auto key = std::make_pair(f[0], trial);
            auto it = where.find(key);
            if (it == where.end()) {
                it = where.emplace(key, out.size()).first;
                out.push_back(TrialResult{f[0], trial, {}, {}, {}, {}});
            }
            TrialResult& r = out[it->second];
            const auto t = static_cast<std::size_t>(std::stoul(f[2]));
            if (t != r.chosen.size() + 1) throw ValidationError("out-of-order t");
            r.chosen.push_back(std::stoul(f[3]));
            r.instant.push_back(std::stod(f[4]));
            r.cumulative.push_back(std::stod(f[5]));
        } catch (const std::logic_error& e) {
            throw ValidationError("trials CSV line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (out.empty()) throw ValidationError("trials CSV has no rows");
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ValidationError("cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << text;
    if (!f) throw std::runtime_error("write failed: " + path);
}

void write_results(const std::string& dir, const ExperimentOutput& out) {
    std::filesystem::create_directories(dir);
    const auto base = std::filesystem::path(dir);
    write_file((base / "trials.csv").string(), trials_csv(out.results));
    if (!out.results.empty()) write_file((base / "summary.csv").string(), summary_csv(out.results));
    const auto fpath = base / "failures.txt";
    if (out.failures.empty()) {
        std::filesystem::remove(fpath);
    } else {
        std::string s;
        for (const auto& f : out.failures) s += f.algorithm + " trial " + std::to_string(f.trial) + ": " + f.message + "\n";
        write_file(fpath.string(), s);
    }
}

}  // namespace nots
