#pragma once

#include <string>
#include <vector>

#include "nots/bandit.hpp"
#include "nots/config.hpp"
#include "nots/pool.hpp"

namespace nots {

/// Loads pool.path when set, otherwise generates the pool from the spec.
CandidatePool obtain_pool(const ExperimentConfig& cfg);
CandidatePool generate_from_spec(const PoolSpec& spec, unsigned threads = 0);

FunctionalSpec functional_for(const ExperimentConfig& cfg, const CandidatePool& pool);
double noise_for(const ExperimentConfig& cfg, const CandidatePool& pool);

struct TrialFailure {
    std::string algorithm;
    int trial;
    std::string message;
};

struct ExperimentOutput {
    std::vector<TrialResult> results;  ///< sorted by (algorithm order in config, trial)
    std::vector<TrialFailure> failures;
};

/// Runs every (algorithm, trial) pair; trial i uses seed base + i.
ExperimentOutput run_experiment(const ExperimentConfig& cfg, const CandidatePool& pool);

inline const char* kTrialsHeader = "algorithm,trial,t,chosen_index,instant_regret,cumulative_regret";

std::string trials_csv(const std::vector<TrialResult>& results);
std::string summary_csv(const std::vector<TrialResult>& results);

/// Parses a trials CSV back into results (seconds are not stored).
std::vector<TrialResult> parse_trials_csv(const std::string& text);

/// Writes trials.csv and summary.csv (and failures.txt when needed) into dir.
void write_results(const std::string& dir, const ExperimentOutput& out);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

}  // namespace nots
