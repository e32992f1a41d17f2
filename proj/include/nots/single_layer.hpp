#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "nots/feature_map.hpp"
#include "nots/field.hpp"
#include "nots/kernels.hpp"
#include "nots/rng.hpp"

namespace nots {

enum class Initializer { Kaiming, LeCun };

/// c_w implied by an initializer: 2 for Kaiming, 1 for LeCun.
double initializer_gain(Initializer init);

struct SingleLayerConfig {
    int width = 2048;
    FeatureMapConfig features{};
    Initializer init = Initializer::Kaiming;
    bool quadrature_weighted = true;  ///< weight squared errors by nu_z
    bool perturb_targets = true;      ///< add N(0, lambda / nu_z) to targets so fits are posterior samples
};

struct FieldObservation {
    ScalarField input;
    ScalarField output;
};

/// G(a)(z) = M^{-1/2} w^T relu(W v_z(a)). Hidden rows W_j ~ N(0, c_w / d I)
/// and w ~ N(0, I), so the prior covariance of G is the finite-width
/// conjugate kernel (1/M) sum_j relu(W_j v) relu(W_j v'), whose mean over W
/// is nngp_relu with the same c_w.
class SingleLayerNO {
public:
    /// Fresh hidden weights and readout initialization.
    static SingleLayerNO draw(const Grid2D& grid, const SingleLayerConfig& cfg, Rng& rng);

    const FeatureMap& feature_map() const { return map_; }
    const SingleLayerConfig& config() const { return cfg_; }
    int width() const { return static_cast<int>(hidden_.rows()); }
    ArcCosParams kernel_params() const { return {initializer_gain(cfg_.init), 0.0}; }

    const Eigen::MatrixXd& hidden() const { return hidden_; }
    const Eigen::VectorXd& readout() const { return readout_; }
    const Eigen::VectorXd& readout_init() const { return readout_init_; }
    void set_readout(Eigen::VectorXd w) { readout_ = std::move(w); }
    void set_readout_init(Eigen::VectorXd w) { readout_init_ = std::move(w); }

    /// relu(V W^T) / sqrt(M) for a feature matrix V (rows are nodes).
    Eigen::MatrixXd scaled_activations(const Eigen::MatrixXd& v) const;
    Eigen::VectorXd predict_features(const Eigen::MatrixXd& v) const;
    ScalarField predict(const ScalarField& a) const;

private:
    SingleLayerNO(FeatureMap map, SingleLayerConfig cfg, Eigen::MatrixXd hidden, Eigen::VectorXd w0);

    FeatureMap map_;
    SingleLayerConfig cfg_;
    Eigen::MatrixXd hidden_;
    Eigen::VectorXd readout_;
    Eigen::VectorXd readout_init_;
};

/// argmin_w |sqrt(nu) (y~ - A w)|^2 + lambda |w - w0|^2 with
/// y~ = y + N(0, lambda / nu) when perturb is set. Uses normal equations
/// when A has at least as many rows as columns, the dual system otherwise.
Eigen::VectorXd sample_then_optimize(const Eigen::MatrixXd& a, const Eigen::VectorXd& y, const Eigen::VectorXd& nu,
                                     double lambda, const Eigen::VectorXd& w0, bool perturb, Rng& rng);

/// Redraws the readout initialization and fits the readout on data, keeping
/// the hidden weights.
void fit_output_layer(SingleLayerNO& model, std::span<const FieldObservation> data, double lambda, Rng& rng);

/// Fresh hidden weights and initialization, then the closed-form readout fit.
/// With no data the result is a prior sample.
SingleLayerNO snots_fit(std::span<const FieldObservation> data, const Grid2D& grid, const SingleLayerConfig& cfg,
                        double lambda, Rng& rng);

}  // namespace nots
