#include "nots/single_layer.hpp"

#include <cmath>

#include "nots/errors.hpp"
#include "nots/gp.hpp"

namespace nots {

double initializer_gain(Initializer init) { return init == Initializer::Kaiming ? 2.0 : 1.0; }

SingleLayerNO::SingleLayerNO(FeatureMap map, SingleLayerConfig cfg, Eigen::MatrixXd hidden, Eigen::VectorXd w0)
    : map_(std::move(map)), cfg_(cfg), hidden_(std::move(hidden)), readout_(w0), readout_init_(std::move(w0)) {}

SingleLayerNO SingleLayerNO::draw(const Grid2D& grid, const SingleLayerConfig& cfg, Rng& rng) {
    if (cfg.width < 1) throw ValidationError("width must be positive");
    FeatureMap map(grid, cfg.features);
    const int d = map.dimension();
    const double sd = std::sqrt(initializer_gain(cfg.init) / d);
    Eigen::MatrixXd w(cfg.width, d);
    for (Eigen::Index j = 0; j < w.rows(); ++j)
        for (Eigen::Index i = 0; i < w.cols(); ++i) w(j, i) = sd * rng.normal();
    Eigen::VectorXd w0(cfg.width);
    for (Eigen::Index j = 0; j < w0.size(); ++j) w0(j) = rng.normal();
    return SingleLayerNO(std::move(map), cfg, std::move(w), std::move(w0));
}

Eigen::MatrixXd SingleLayerNO::scaled_activations(const Eigen::MatrixXd& v) const {
    Eigen::MatrixXd h = v * hidden_.transpose();
    h = h.cwiseMax(0.0) / std::sqrt(static_cast<double>(hidden_.rows()));
    return h;
}

Eigen::VectorXd SingleLayerNO::predict_features(const Eigen::MatrixXd& v) const {
    return scaled_activations(v) * readout_;
}

ScalarField SingleLayerNO::predict(const ScalarField& a) const {
    const Eigen::VectorXd y = predict_features(map_.features(a));
    return ScalarField(a.grid(), std::vector<double>(y.data(), y.data() + y.size()));
}

Eigen::VectorXd sample_then_optimize(const Eigen::MatrixXd& a, const Eigen::VectorXd& y, const Eigen::VectorXd& nu,
                                     double lambda, const Eigen::VectorXd& w0, bool perturb, Rng& rng) {
    if (!(lambda > 0.0)) throw ValidationError("lambda must be positive");
    if (a.rows() != y.size() || a.rows() != nu.size() || a.cols() != w0.size())
        throw StructuralError("sample_then_optimize shape mismatch");
    if (a.rows() == 0) return w0;
    const Eigen::VectorXd s = nu.cwiseSqrt();
    // Whitened residual target sqrt(nu) (y~ - A w0).
    Eigen::VectorXd r = s.cwiseProduct(y - a * w0);
    if (perturb) {
        const double sl = std::sqrt(lambda);
        for (Eigen::Index i = 0; i < r.size(); ++i) r(i) += sl * rng.normal();
    }
    const Eigen::MatrixXd aw = s.asDiagonal() * a;
    if (aw.rows() >= aw.cols()) {
        Eigen::MatrixXd g = Eigen::MatrixXd::Zero(aw.cols(), aw.cols());
        g.selfadjointView<Eigen::Lower>().rankUpdate(aw.transpose());
        g = g.selfadjointView<Eigen::Lower>();
        g.diagonal().array() += lambda;
        const Eigen::MatrixXd l = jittered_cholesky(g);
        const auto tri = l.triangularView<Eigen::Lower>();
        const Eigen::VectorXd rhs = aw.transpose() * r;
        return w0 + tri.transpose().solve(tri.solve(rhs));
    }
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(aw.rows(), aw.rows());
    g.selfadjointView<Eigen::Lower>().rankUpdate(aw);
    g = g.selfadjointView<Eigen::Lower>();
    g.diagonal().array() += lambda;
    const Eigen::MatrixXd l = jittered_cholesky(g);
    const auto tri = l.triangularView<Eigen::Lower>();
    const Eigen::VectorXd alpha = tri.transpose().solve(tri.solve(r));
    return w0 + aw.transpose() * alpha;
}

void fit_output_layer(SingleLayerNO& model, std::span<const FieldObservation> data, double lambda, Rng& rng) {
    const Eigen::Index m = model.width();
    Eigen::VectorXd w0(m);
    for (Eigen::Index j = 0; j < m; ++j) w0(j) = rng.normal();
    model.set_readout_init(w0);
    if (data.empty()) {
        model.set_readout(w0);
        return;
    }
    const Grid2D& grid = model.feature_map().grid();
    const auto n = static_cast<Eigen::Index>(grid.size());
    const auto rows = n * static_cast<Eigen::Index>(data.size());
    Eigen::MatrixXd a(rows, m);
    Eigen::VectorXd y(rows), nu(rows);
    for (std::size_t j = 0; j < data.size(); ++j) {
        if (!(data[j].input.grid() == grid) || !(data[j].output.grid() == grid))
            throw StructuralError("observation grid differs from model grid");
        const auto off = static_cast<Eigen::Index>(j) * n;
        a.middleRows(off, n) = model.scaled_activations(model.feature_map().features(data[j].input));
        for (Eigen::Index z = 0; z < n; ++z) {
            y(off + z) = data[j].output[static_cast<std::size_t>(z)];
            nu(off + z) = model.config().quadrature_weighted ? grid.weights()[static_cast<std::size_t>(z)] : 1.0;
        }
    }
    model.set_readout(sample_then_optimize(a, y, nu, lambda, w0, model.config().perturb_targets, rng));
}

SingleLayerNO snots_fit(std::span<const FieldObservation> data, const Grid2D& grid, const SingleLayerConfig& cfg,
                        double lambda, Rng& rng) {
    if (!(lambda > 0.0)) throw ValidationError("lambda must be positive");
    SingleLayerNO model = SingleLayerNO::draw(grid, cfg, rng);
    fit_output_layer(model, data, lambda, rng);
    return model;
}

}  // namespace nots
