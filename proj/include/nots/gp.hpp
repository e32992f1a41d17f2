#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "nots/rng.hpp"

namespace nots {

struct NoiseModel {
    double sigma_xi = 0.0;
};

struct Observation {
    std::size_t index;
    double value;
};

/// Scalar GP restricted to a finite candidate set.
struct GPPosterior {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    int conditioned = 0;

    static GPPosterior prior(const Eigen::MatrixXd& k);
};

/// Relative jitter ladder shared by every factorization in this module.
inline constexpr double kJitterLadder[] = {0.0, 1e-10, 1e-8, 1e-6};

/// Lower Cholesky factor of A + jitter * mean(diag A) * I for the first
/// jitter in the ladder that succeeds. Throws NumericalError otherwise.
Eigen::MatrixXd jittered_cholesky(const Eigen::MatrixXd& a, double* used_jitter = nullptr);

GPPosterior posterior_batch(const Eigen::MatrixXd& k, std::span<const Observation> observed, double lambda);
GPPosterior posterior_recursive_step(const GPPosterior& prev, Observation obs, double lambda);

/// mu + L z with L the jittered Cholesky factor of the covariance.
Eigen::VectorXd sample_mvn(const GPPosterior& post, Rng& rng);
Eigen::VectorXd sample_mvn(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, Rng& rng);

/// log E[max(0, X - best)], X ~ N(mu, var).
double log_ei(double mu, double var, double best);

/// Greedy lower bound on max_{|S| = T} 1/2 log det(I + K_S / lambda).
double max_info_gain_greedy(const Eigen::MatrixXd& k, double lambda, int t);
/// Brute force over all T-subsets; for small candidate sets only.
double max_info_gain_exhaustive(const Eigen::MatrixXd& k, double lambda, int t);

}  // namespace nots
