#pragma once

#include <Eigen/Dense>

#include "nots/rng.hpp"

namespace nots {

struct MlpConfig {
    int hidden = 256;
    int steps = 2000;
    double learning_rate = 1e-3;
    double divergence_factor = 1e6;
};

/// Two hidden ReLU layers and a scalar output, parameters in one flat vector
/// ordered W1, b1, W2, b2, w3, b3 (matrices column-major).
class ScalarMLP {
public:
    static ScalarMLP initialize(int input_dim, const MlpConfig& cfg, Rng& rng);

    int input_dim() const { return input_dim_; }
    int hidden() const { return hidden_; }
    const Eigen::VectorXd& theta() const { return theta_; }
    void set_theta(Eigen::VectorXd t);

    /// One output per column of x.
    Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;

    /// sum_j (y_j - h(x_j))^2 + lambda |theta - ref|^2 and its gradient.
    double objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& ref, double lambda,
                     Eigen::VectorXd* grad) const;

private:
    ScalarMLP(int input_dim, int hidden);

    int input_dim_, hidden_;
    Eigen::VectorXd theta_;
};

/// Fresh initialization theta0, then full-batch Adam on the objective with
/// ref = theta0. With no data the initialization is returned.
ScalarMLP mlp_fit_sto(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda, const MlpConfig& cfg,
                      Rng& rng);

}  // namespace nots
