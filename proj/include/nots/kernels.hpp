#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "nots/feature_map.hpp"
#include "nots/field.hpp"

namespace nots {

struct ArcCosParams {
    double c_w = 2.0;
    double c_b = 0.0;

    void validate() const;
};

/// E[relu(u) relu(v)] for (u, v) ~ N(0, [[kxx, kxy], [kxy, kyy]]).
double relu_moment(double kxx, double kyy, double kxy);

double nngp_relu(std::span<const double> x, std::span<const double> y, const ArcCosParams& p = {});
inline double nngp_relu(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const ArcCosParams& p = {}) {
    return nngp_relu(std::span<const double>(x.data(), x.size()), std::span<const double>(y.data(), y.size()), p);
}

struct KernelDiagnostics {
    int clamped = 0;  ///< layers whose 2x2 covariance needed clamping
};

/// Depth-L ReLU NNGP kernel; depth 1 equals nngp_relu.
double nngp_deep(std::span<const double> x, std::span<const double> y, int depth, const ArcCosParams& p = {},
                 KernelDiagnostics* diag = nullptr);

/// Gram matrix of nngp_deep over the rows of X.
Eigen::MatrixXd nngp_deep_gram(const Eigen::MatrixXd& rows, int depth, const ArcCosParams& p = {},
                               KernelDiagnostics* diag = nullptr);

/// k_G(a, z, a', z') = nngp_relu(v_z(a), v_z'(a')).
double neural_op_kernel(const ScalarField& a, std::size_t z, const ScalarField& a2, std::size_t z2,
                        const FeatureMap& fm, const ArcCosParams& p = {});

/// Entries k_G(a, z_i, a', z_j) plus the quadrature weights.
struct OperatorKernelMatrix {
    Eigen::MatrixXd entries;
    Eigen::VectorXd weights;

    /// (K_G(a, a') u)(z_i) = sum_j k_G(a, z_i, a', z_j) nu_j u_j
    Eigen::VectorXd apply(const ScalarField& u) const;
};

/// Kernel between the rows of two feature matrices.
Eigen::MatrixXd arccos_cross(const Eigen::MatrixXd& f, const Eigen::MatrixXd& g, const ArcCosParams& p);

OperatorKernelMatrix operator_kernel_matrix(const ScalarField& a, const ScalarField& a2, const FeatureMap& fm,
                                            const ArcCosParams& p = {});

/// Linear functional f(u) = sum_i w_i nu_i u_i.
struct FunctionalWeights {
    std::vector<double> w;

    static FunctionalWeights mean(const Grid2D& grid);
    static FunctionalWeights point(const Grid2D& grid, std::size_t node);
    double apply(const ScalarField& u) const;
};

/// k_f(a, a') = sum_ij w_i nu_i k_G(a, z_i, a', z_j) nu_j w_j.
double functional_kernel(const ScalarField& a, const ScalarField& a2, const FunctionalWeights& f,
                         const FeatureMap& fm, const ArcCosParams& p = {});

/// Maps node values d to L^{-1} d where Q = L L^T is a squared-exponential
/// Gram over node coordinates, so that |embed(d)|^2 = d^T Q^{-1} d.
class RkhsEmbedding {
public:
    explicit RkhsEmbedding(const Grid2D& grid, double base_lengthscale = 0.2, double jitter = 1e-8);

    Eigen::VectorXd embed(const ScalarField& a) const;
    double squared_norm(const ScalarField& d) const;
    double jitter() const { return jitter_; }

private:
    Grid2D grid_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    double jitter_;
};

double bfo_kernel(const ScalarField& a, const ScalarField& a2, double lengthscale, const RkhsEmbedding& emb);
double bfo_kernel(const ScalarField& a, const ScalarField& a2, double lengthscale);

/// exp(-|z_i - z_j|^2 / (2 l^2)) over the rows of an embedded set.
Eigen::MatrixXd bfo_gram(const Eigen::MatrixXd& embedded_rows, double lengthscale);
/// Median pairwise distance between rows.
double median_distance(const Eigen::MatrixXd& rows);

}  // namespace nots
