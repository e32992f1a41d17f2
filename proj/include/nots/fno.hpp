#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nots/field.hpp"
#include "nots/rng.hpp"
#include "nots/single_layer.hpp"

namespace nots {

enum class Activation { Gelu, Identity };

struct FnoConfig {
    int layers = 2;
    int channels = 16;
    int modes = 8;
    bool coordinates = true;  ///< append x, y coordinate channels to the input
    Activation activation = Activation::Gelu;
};

/// Contiguous slice of the flat parameter vector.
struct ParamBlock {
    std::string name;
    Eigen::Index offset;
    Eigen::Index size;
};

/// Truncated real Fourier basis on the index-periodic grid. Modes are the
/// half set of (kx, ky) with |kx|, ky < m: ky > 0, or ky = 0 and kx >= 0.
/// The remaining modes are conjugates, so real fields map to real fields.
struct SpectralBasis {
    SpectralBasis(const Grid2D& grid, int modes);

    int count() const { return static_cast<int>(kx.size()); }

    std::vector<int> kx, ky;
    Eigen::MatrixXd analysis_re, analysis_im;    ///< N x K; X = H A
    Eigen::MatrixXd synthesis_re, synthesis_im;  ///< K x N; h = Yr S_re + Yi S_im
};

/// Lift -> [spectral conv + pointwise residual, activation] x layers -> project.
/// Spectral weights for mode 0 are real; all others are complex per the
/// half set, which keeps the implied full weight conjugate symmetric.
class SmallFNO {
public:
    static SmallFNO initialize(const Grid2D& grid, const FnoConfig& cfg, Rng& rng);
    /// All parameters zero.
    static SmallFNO zeros(const Grid2D& grid, const FnoConfig& cfg);

    const FnoConfig& config() const { return cfg_; }
    const Grid2D& grid() const { return grid_; }
    const std::vector<ParamBlock>& layout() const { return layout_; }
    const ParamBlock& block(const std::string& name) const;
    const Eigen::VectorXd& theta() const { return theta_; }
    void set_theta(Eigen::VectorXd t);
    int input_channels() const { return cfg_.coordinates ? 3 : 1; }
    const SpectralBasis& basis() const { return *basis_; }

    ScalarField forward(const ScalarField& a) const;

    /// sum_j sum_z nu_z (G(a_j)(z) - u_j(z))^2 and its gradient.
    double data_loss(std::span<const FieldObservation> batch, Eigen::VectorXd* grad) const;

private:
    SmallFNO(const Grid2D& grid, const FnoConfig& cfg);

    struct Tape;
    Eigen::RowVectorXd run(const ScalarField& a, Tape* tape) const;
    void backward(const Tape& tape, const Eigen::RowVectorXd& dout, Eigen::VectorXd& grad) const;
    Eigen::MatrixXd input_matrix(const ScalarField& a) const;

    Grid2D grid_;
    FnoConfig cfg_;
    std::vector<ParamBlock> layout_;
    Eigen::VectorXd theta_;
    std::shared_ptr<const SpectralBasis> basis_;
};

enum class Optimizer { Adam, Sgd };
enum class RegularizationTarget { Initialization, Zero };

struct FnoTrainConfig {
    FnoConfig model{};
    int epochs = 10;
    int batch_size = 2;
    double learning_rate = 1e-3;
    Optimizer optimizer = Optimizer::Adam;
    RegularizationTarget regularization = RegularizationTarget::Initialization;
    double divergence_factor = 1e6;
    bool report_losses = false;  ///< evaluate the full objective before and after training
};

/// Objective: (n / B) sum over a minibatch of data_loss + lambda |theta - ref|^2.
double fno_objective(const SmallFNO& model, std::span<const FieldObservation> batch, double scale,
                     const Eigen::VectorXd& ref, double lambda, Eigen::VectorXd* grad);

struct FnoTrainResult {
    SmallFNO model;
    Eigen::VectorXd initial_theta;
    double initial_loss;
    double final_loss;
};

/// Fresh random initialization, then minibatch training with cosine-annealed
/// learning rate.
FnoTrainResult fno_train(std::span<const FieldObservation> data, const Grid2D& grid, const FnoTrainConfig& cfg,
                         double lambda, Rng& rng);
SmallFNO fno_train_sgd(std::span<const FieldObservation> data, const Grid2D& grid, const FnoTrainConfig& cfg,
                       double lambda, Rng& rng);

/// Full-data objective without the penalty.
double fno_dataset_loss(const SmallFNO& model, std::span<const FieldObservation> data);

}  // namespace nots
