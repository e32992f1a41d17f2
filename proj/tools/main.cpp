#include <chrono>
#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "nots/config.hpp"
#include "nots/experiment.hpp"
#include "nots/pool.hpp"
#include "nots/report.hpp"

namespace {

struct Overrides {
    std::string config, out, pool;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials, budget, size;
    std::optional<unsigned> threads;
    std::vector<std::string> algos;
};

nots::ExperimentConfig resolve(const Overrides& o) {
    nots::ExperimentConfig cfg = o.config.empty() ? nots::ExperimentConfig{} : nots::load_experiment(o.config);
    if (!o.pool.empty()) cfg.pool.path = o.pool;
    if (o.trials) cfg.trials = *o.trials;
    if (o.budget) cfg.budget = *o.budget;
    if (o.size) cfg.pool.size = static_cast<std::size_t>(*o.size);
    if (o.threads) cfg.threads = *o.threads;
    if (!o.algos.empty()) cfg.algorithms = o.algos;
    return cfg;
}

int cmd_generate(const Overrides& o) {
    nots::ExperimentConfig cfg = resolve(o);
    if (o.seed) cfg.pool.seed = *o.seed;
    const std::string path = !o.out.empty() ? o.out : (!cfg.pool.path.empty() ? cfg.pool.path : "pool.nob");
    const auto start = std::chrono::steady_clock::now();
    const nots::CandidatePool pool = nots::generate_from_spec(cfg.pool, cfg.threads);
    nots::write_pool(pool, path);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("wrote %s: %zu instances on %dx%d grid in %.2f s\ndigest %s\n", path.c_str(), pool.size(),
                pool.grid().nx(), pool.grid().ny(), secs, nots::hex_digest(nots::pool_digest(pool)).c_str());
    return 0;
}

int cmd_run(const Overrides& o) {
    nots::ExperimentConfig cfg = resolve(o);
    if (o.seed) cfg.seed = *o.seed;
    if (!o.out.empty()) cfg.out = o.out;
    cfg.validate();
    const nots::CandidatePool pool = nots::obtain_pool(cfg);
    std::printf("pool: %zu candidates, digest %s\n", pool.size(), nots::hex_digest(nots::pool_digest(pool)).c_str());
    const auto out = nots::run_experiment(cfg, pool);
    nots::write_results(cfg.out, out);
    for (const auto& f : out.failures)
        std::fprintf(stderr, "failed: %s trial %d: %s\n", f.algorithm.c_str(), f.trial, f.message.c_str());
    if (!out.results.empty()) std::cout << nots::final_regret_table(nots::summarize(out.results));
    std::printf("results in %s\n", cfg.out.c_str());
    return out.failures.empty() ? 0 : 1;
}

int cmd_report(const Overrides& o, const std::string& dir_arg) {
    std::string dir = !dir_arg.empty() ? dir_arg : o.out;
    if (dir.empty()) dir = o.config.empty() ? "results" : nots::load_experiment(o.config).out;
    std::cout << nots::report_directory(dir);
    std::printf("plots in %s\n", dir.c_str());
    return 0;
}

void add_common(CLI::App* app, Overrides& o) {
    app->add_option("--config", o.config, "Configuration file (TOML subset)");
    app->add_option("--seed", o.seed, "Base seed (pool seed for generate)");
    app->add_option("--out", o.out, "Output path");
    app->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Thompson sampling over function spaces with neural-operator surrogates"};
    app.require_subcommand(1);
    Overrides o;
    std::string report_dir;

    auto* gen = app.add_subcommand("generate", "Generate a Darcy candidate pool");
    add_common(gen, o);
    gen->add_option("--size", o.size, "Number of instances");

    auto* run = app.add_subcommand("run", "Run the configured algorithms over seeded trials");
    add_common(run, o);
    run->add_option("--algo", o.algos, "Algorithms (repeatable or comma separated)")->delimiter(',');
    run->add_option("--trials", o.trials, "Number of trials");
    run->add_option("--budget", o.budget, "Iterations per trial");
    run->add_option("--pool", o.pool, "Pool file to load instead of generating");
    run->add_option("--size", o.size, "Pool size when generating");

    auto* rep = app.add_subcommand("report", "Summarize a results directory and draw regret plots");
    add_common(rep, o);
    rep->add_option("dir", report_dir, "Results directory");

    CLI11_PARSE(app, argc, argv);
    try {
        if (gen->parsed()) return cmd_generate(o);
        if (run->parsed()) return cmd_run(o);
        return cmd_report(o, report_dir);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
