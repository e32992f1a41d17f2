#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nots/fno.hpp"
#include "nots/functionals.hpp"
#include "nots/gp.hpp"
#include "nots/kernels.hpp"
#include "nots/mlp.hpp"
#include "nots/pool.hpp"
#include "nots/rng.hpp"
#include "nots/single_layer.hpp"

namespace nots {

/// Noisy query access to a candidate pool under a known functional.
class Oracle {
public:
    Oracle(const CandidatePool& pool, NoiseModel noise, FunctionalSpec functional);

    const CandidatePool& pool() const { return *pool_; }
    std::size_t size() const { return pool_->size(); }
    const NoiseModel& noise() const { return noise_; }
    const FunctionalSpec& functional() const { return functional_; }

    /// f(u, a_index).
    double evaluate(const ScalarField& u, std::size_t index) const;
    double true_value(std::size_t i) const { return values_.at(i); }
    const std::vector<double>& true_values() const { return values_; }
    double best() const { return best_; }
    double worst() const { return worst_; }

    /// True output plus i.i.d. N(0, sigma^2) per node.
    ScalarField query(std::size_t index, Rng& rng) const;

private:
    const CandidatePool* pool_;
    NoiseModel noise_;
    FunctionalSpec functional_;
    std::vector<double> values_;
    double best_, worst_;
};

/// 0.01 times the standard deviation of all output node values in the pool.
double default_noise_sigma(const CandidatePool& pool);

enum class AlgorithmKind { NotsFno, Snots, StoNts, GpTs, BoLogEi, Bfo, RandomSearch };

std::string algorithm_name(AlgorithmKind k);
AlgorithmKind algorithm_from_name(const std::string& name);
bool is_nots(AlgorithmKind k);

struct AlgorithmConfig {
    AlgorithmKind kind = AlgorithmKind::Snots;
    int budget = 50;
    int warm_start = 0;  ///< initial uniform queries before the model takes over
    /// Surrogate regularizer; 0 selects the per-kind default.
    double lambda = 0.0;
    /// Lower bound on the SNOTS regularizer. The noise-derived value is tiny on
    /// clean data and a finite-width model then interpolates its own error.
    double lambda_floor = 3e-2;
    SingleLayerConfig snots{};
    FnoTrainConfig fno{};
    MlpConfig mlp{};
    int gp_depth = 3;
    ArcCosParams gp_kernel{};
    double bfo_lengthscale = 0.0;  ///< 0 selects the median pairwise RKHS distance
    double bfo_base_lengthscale = 0.2;

    void validate() const;
};

struct TrialResult {
    std::string algorithm;
    int trial = 0;
    std::vector<std::size_t> chosen;
    std::vector<double> instant;
    std::vector<double> cumulative;
    std::vector<double> seconds;
};

/// Thompson sampling with a neural-operator surrogate (SNOTS or NOTS-FNO).
TrialResult run_nots(const Oracle& oracle, const AlgorithmConfig& cfg, Rng& rng, Rng& noise_rng);
/// GP-TS, BO-logEI, BFO, STO-NTS or random search.
TrialResult run_baseline(const Oracle& oracle, const AlgorithmConfig& cfg, Rng& rng, Rng& noise_rng);

/// Seeds both streams from (seed, kind) and dispatches. The noise stream
/// depends on the seed only, so algorithms run at one seed are paired.
TrialResult run_trial(const Oracle& oracle, const AlgorithmConfig& cfg, std::uint64_t seed, int trial);

/// Index of the largest value; ties go to the lowest index.
std::size_t argmax_lowest(const Eigen::VectorXd& v);

struct RegretCurve {
    std::vector<double> mean_cumulative, std_cumulative;
    std::vector<double> mean_average, std_average;
};

/// Per-t mean and population standard deviation of R_t and R_t / t.
RegretCurve regret_curves(const std::vector<TrialResult>& trials);

}  // namespace nots
