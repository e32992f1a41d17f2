#include "nots/mlp.hpp"

#include <cmath>

#include "nots/errors.hpp"

namespace nots {

namespace {

using CMapM = Eigen::Map<const Eigen::MatrixXd>;
using CMapV = Eigen::Map<const Eigen::VectorXd>;

}  // namespace

ScalarMLP::ScalarMLP(int input_dim, int hidden) : input_dim_(input_dim), hidden_(hidden) {
    if (input_dim < 1 || hidden < 1) throw ValidationError("MLP sizes must be positive");
    const Eigen::Index d = input_dim, h = hidden;
    theta_ = Eigen::VectorXd::Zero(h * d + h + h * h + h + h + 1);
}

ScalarMLP ScalarMLP::initialize(int input_dim, const MlpConfig& cfg, Rng& rng) {
    ScalarMLP m(input_dim, cfg.hidden);
    const Eigen::Index d = input_dim, h = cfg.hidden;
    double* p = m.theta_.data();
    const double s1 = std::sqrt(2.0 / d), s2 = std::sqrt(2.0 / h), s3 = std::sqrt(1.0 / h);
    for (Eigen::Index i = 0; i < h * d; ++i) p[i] = s1 * rng.normal();
    p += h * d + h;
    for (Eigen::Index i = 0; i < h * h; ++i) p[i] = s2 * rng.normal();
    p += h * h + h;
    for (Eigen::Index i = 0; i < h; ++i) p[i] = s3 * rng.normal();
    return m;
}

void ScalarMLP::set_theta(Eigen::VectorXd t) {
    if (t.size() != theta_.size()) throw StructuralError("parameter vector length mismatch");
    theta_ = std::move(t);
}

Eigen::VectorXd ScalarMLP::predict(const Eigen::MatrixXd& x) const {
    if (x.rows() != input_dim_) throw StructuralError("MLP input dimension mismatch");
    const Eigen::Index d = input_dim_, h = hidden_;
    const double* p = theta_.data();
    Eigen::MatrixXd a1 = CMapM(p, h, d) * x;
    a1.colwise() += CMapV(p + h * d, h);
    a1 = a1.cwiseMax(0.0);
    p += h * d + h;
    Eigen::MatrixXd a2 = CMapM(p, h, h) * a1;
    a2.colwise() += CMapV(p + h * h, h);
    a2 = a2.cwiseMax(0.0);
    p += h * h + h;
    Eigen::VectorXd out = a2.transpose() * CMapV(p, h);
    out.array() += p[h];
    return out;
}

double ScalarMLP::objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& ref,
                            double lambda, Eigen::VectorXd* grad) const {
    if (x.rows() != input_dim_ || x.cols() != y.size()) throw StructuralError("MLP data shape mismatch");
    const Eigen::Index d = input_dim_, h = hidden_;
    const double* p = theta_.data();
    const auto w1 = CMapM(p, h, d);
    const auto w2 = CMapM(p + h * d + h, h, h);
    const auto w3 = CMapV(p + h * d + h + h * h + h, h);
    Eigen::MatrixXd z1 = w1 * x;
    z1.colwise() += CMapV(p + h * d, h);
    const Eigen::MatrixXd a1 = z1.cwiseMax(0.0);
    Eigen::MatrixXd z2 = w2 * a1;
    z2.colwise() += CMapV(p + h * d + h + h * h, h);
    const Eigen::MatrixXd a2 = z2.cwiseMax(0.0);
    Eigen::VectorXd out = a2.transpose() * w3;
    out.array() += p[h * d + h + h * h + h + h];
    const Eigen::VectorXd r = out - y;
    const Eigen::VectorXd dref = theta_ - ref;
    const double loss = r.squaredNorm() + lambda * dref.squaredNorm();
    if (!grad) return loss;

    grad->resize(theta_.size());
    double* g = grad->data();
    const Eigen::RowVectorXd dout = 2.0 * r.transpose();
    Eigen::Map<Eigen::VectorXd>(g + h * d + h + h * h + h, h) = a2 * dout.transpose();
    g[h * d + h + h * h + h + h] = dout.sum();
    Eigen::MatrixXd dz2 = (w3 * dout).array() * (z2.array() > 0.0).cast<double>();
    Eigen::Map<Eigen::MatrixXd>(g + h * d + h, h, h) = dz2 * a1.transpose();
    Eigen::Map<Eigen::VectorXd>(g + h * d + h + h * h, h) = dz2.rowwise().sum();
    Eigen::MatrixXd dz1 = (w2.transpose() * dz2).array() * (z1.array() > 0.0).cast<double>();
    Eigen::Map<Eigen::MatrixXd>(g, h, d) = dz1 * x.transpose();
    Eigen::Map<Eigen::VectorXd>(g + h * d, h) = dz1.rowwise().sum();
    *grad += 2.0 * lambda * dref;
    return loss;
}

ScalarMLP mlp_fit_sto(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda, const MlpConfig& cfg,
                      Rng& rng) {
    if (!(lambda >= 0.0)) throw ValidationError("lambda must be nonnegative");
    ScalarMLP m = ScalarMLP::initialize(static_cast<int>(x.rows()), cfg, rng);
    if (x.cols() == 0) return m;
    const Eigen::VectorXd theta0 = m.theta();
    Eigen::VectorXd theta = theta0, grad, m1 = Eigen::VectorXd::Zero(theta0.size()), m2 = m1;
    const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    double first = -1.0;
    for (int s = 0; s < cfg.steps; ++s) {
        const double obj = m.objective(x, y, theta0, lambda, &grad);
        if (first < 0.0) first = obj;
        if (!std::isfinite(obj) || obj > cfg.divergence_factor * std::max(first, 1e-300))
            throw NumericalError("MLP training diverged at step " + std::to_string(s));
        const double t = s + 1.0;
        m1 = b1 * m1 + (1.0 - b1) * grad;
        m2 = b2 * m2 + (1.0 - b2) * grad.cwiseAbs2();
        const double c1 = 1.0 - std::pow(b1, t), c2 = 1.0 - std::pow(b2, t);
        theta.array() -= cfg.learning_rate * (m1.array() / c1) / ((m2.array() / c2).sqrt() + eps);
        m.set_theta(theta);
    }
    return m;
}

}  // namespace nots
