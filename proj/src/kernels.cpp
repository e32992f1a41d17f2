#include "nots/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nots/errors.hpp"

namespace nots {

namespace {

double arccos_j(double cos_t) {
    const double c = std::clamp(cos_t, -1.0, 1.0);
    const double t = std::acos(c);
    return std::sin(t) + (std::numbers::pi - t) * c;
}

}  // namespace

void ArcCosParams::validate() const {
    if (!(c_w > 0.0)) throw ValidationError("c_w must be positive");
    if (!(c_b >= 0.0)) throw ValidationError("c_b must be nonnegative");
}

double relu_moment(double kxx, double kyy, double kxy) {
    if (kxx <= 0.0 || kyy <= 0.0) return 0.0;
    const double s = std::sqrt(kxx * kyy);
    return s / (2.0 * std::numbers::pi) * arccos_j(kxy / s);
}

double nngp_relu(std::span<const double> x, std::span<const double> y, const ArcCosParams& p) {
    if (x.size() != y.size() || x.empty()) throw StructuralError("nngp_relu dimension mismatch");
    double xx = 0.0, yy = 0.0, xy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        xx += x[i] * x[i];
        yy += y[i] * y[i];
        xy += x[i] * y[i];
    }
    const double d = static_cast<double>(x.size());
    return p.c_b + p.c_w * relu_moment(xx / d, yy / d, xy / d);
}

double nngp_deep(std::span<const double> x, std::span<const double> y, int depth, const ArcCosParams& p,
                 KernelDiagnostics* diag) {
    if (depth < 1) throw ValidationError("depth must be at least 1");
    if (x.size() != y.size() || x.empty()) throw StructuralError("nngp_deep dimension mismatch");
    double kxx = 0.0, kyy = 0.0, kxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        kxx += x[i] * x[i];
        kyy += y[i] * y[i];
        kxy += x[i] * y[i];
    }
    const double d = static_cast<double>(x.size());
    kxx /= d;
    kyy /= d;
    kxy /= d;
    for (int l = 0; l < depth; ++l) {
        if (kxy * kxy > kxx * kyy) {
            kxy = std::copysign(std::sqrt(kxx * kyy), kxy);
            if (diag) ++diag->clamped;
        }
        const double nxy = p.c_b + p.c_w * relu_moment(kxx, kyy, kxy);
        const double nxx = p.c_b + p.c_w * 0.5 * kxx;
        const double nyy = p.c_b + p.c_w * 0.5 * kyy;
        kxx = nxx;
        kyy = nyy;
        kxy = nxy;
    }
    return kxy;
}

Eigen::MatrixXd nngp_deep_gram(const Eigen::MatrixXd& rows, int depth, const ArcCosParams& p,
                               KernelDiagnostics* diag) {
    if (depth < 1) throw ValidationError("depth must be at least 1");
    const Eigen::Index n = rows.rows();
    const double d = static_cast<double>(rows.cols());
    Eigen::MatrixXd k = rows * rows.transpose() / d;
    for (int l = 0; l < depth; ++l) {
        const Eigen::VectorXd dg = k.diagonal();
        Eigen::MatrixXd next(n, n);
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index i = j; i < n; ++i) {
                double kij = k(i, j);
                const double lim = std::sqrt(dg(i) * dg(j));
                if (std::abs(kij) > lim) {
                    kij = std::copysign(lim, kij);
                    if (diag && i != j) ++diag->clamped;
                }
                const double v = i == j ? p.c_b + p.c_w * 0.5 * dg(i) : p.c_b + p.c_w * relu_moment(dg(i), dg(j), kij);
                next(i, j) = v;
                next(j, i) = v;
            }
        k.swap(next);
    }
    return k;
}

Eigen::MatrixXd arccos_cross(const Eigen::MatrixXd& f, const Eigen::MatrixXd& g, const ArcCosParams& p) {
    if (f.cols() != g.cols()) throw StructuralError("feature dimension mismatch");
    const double d = static_cast<double>(f.cols());
    const Eigen::MatrixXd dot = f * g.transpose() / d;
    const Eigen::VectorXd nf = f.rowwise().squaredNorm() / d;
    const Eigen::VectorXd ng = g.rowwise().squaredNorm() / d;
    Eigen::MatrixXd k(f.rows(), g.rows());
    for (Eigen::Index j = 0; j < g.rows(); ++j)
        for (Eigen::Index i = 0; i < f.rows(); ++i) k(i, j) = p.c_b + p.c_w * relu_moment(nf(i), ng(j), dot(i, j));
    return k;
}

double neural_op_kernel(const ScalarField& a, std::size_t z, const ScalarField& a2, std::size_t z2,
                        const FeatureMap& fm, const ArcCosParams& p) {
    return nngp_relu(fm.feature(a, z), fm.feature(a2, z2), p);
}

Eigen::VectorXd OperatorKernelMatrix::apply(const ScalarField& u) const {
    if (static_cast<Eigen::Index>(u.size()) != entries.cols()) throw StructuralError("operator kernel size mismatch");
    const Eigen::VectorXd uw = weights.cwiseProduct(Eigen::Map<const Eigen::VectorXd>(u.values().data(), u.size()));
    return entries * uw;
}

OperatorKernelMatrix operator_kernel_matrix(const ScalarField& a, const ScalarField& a2, const FeatureMap& fm,
                                            const ArcCosParams& p) {
    require_same_grid(a, a2);
    OperatorKernelMatrix m;
    m.entries = arccos_cross(fm.features(a), fm.features(a2), p);
    const auto& w = a.grid().weights();
    m.weights = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
    return m;
}

FunctionalWeights FunctionalWeights::mean(const Grid2D& grid) { return {std::vector<double>(grid.size(), 1.0)}; }

FunctionalWeights FunctionalWeights::point(const Grid2D& grid, std::size_t node) {
    if (node >= grid.size()) throw ValidationError("node index out of range");
    std::vector<double> w(grid.size(), 0.0);
    w[node] = 1.0 / grid.weights()[node];
    return {w};
}

double FunctionalWeights::apply(const ScalarField& u) const {
    if (w.size() != u.size()) throw StructuralError("functional weight length mismatch");
    const auto& nu = u.grid().weights();
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * nu[i] * u[i];
    return s;
}

double functional_kernel(const ScalarField& a, const ScalarField& a2, const FunctionalWeights& f,
                         const FeatureMap& fm, const ArcCosParams& p) {
    if (f.w.size() != a.size()) throw StructuralError("functional weight length mismatch");
    const OperatorKernelMatrix m = operator_kernel_matrix(a, a2, fm, p);
    const Eigen::VectorXd v = m.weights.cwiseProduct(Eigen::Map<const Eigen::VectorXd>(f.w.data(), m.weights.size()));
    return v.dot(m.entries * v);
}

RkhsEmbedding::RkhsEmbedding(const Grid2D& grid, double base_lengthscale, double jitter)
    : grid_(grid), jitter_(jitter) {
    if (!(base_lengthscale > 0.0)) throw ValidationError("base lengthscale must be positive");
    const Eigen::Index n = static_cast<Eigen::Index>(grid.size());
    Eigen::MatrixXd q(n, n);
    const double inv = 1.0 / (2.0 * base_lengthscale * base_lengthscale);
    for (int jy = 0; jy < grid.ny(); ++jy)
        for (int jx = 0; jx < grid.nx(); ++jx)
            for (int iy = 0; iy < grid.ny(); ++iy)
                for (int ix = 0; ix < grid.nx(); ++ix) {
                    const double dx = grid.x(ix) - grid.x(jx), dy = grid.y(iy) - grid.y(jy);
                    q(static_cast<Eigen::Index>(grid.index(ix, iy)), static_cast<Eigen::Index>(grid.index(jx, jy))) =
                        std::exp(-(dx * dx + dy * dy) * inv);
                }
    for (int attempt = 0; attempt < 6; ++attempt) {
        Eigen::MatrixXd qj = q;
        qj.diagonal().array() += jitter_;
        llt_.compute(qj);
        if (llt_.info() == Eigen::Success) return;
        jitter_ *= 100.0;
    }
    throw NumericalError("RKHS base kernel factorization failed", 0.0);
}

Eigen::VectorXd RkhsEmbedding::embed(const ScalarField& a) const {
    if (!(a.grid() == grid_)) throw StructuralError("embedding grid mismatch");
    Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(a.values().data(), static_cast<Eigen::Index>(a.size()));
    llt_.matrixL().solveInPlace(v);
    return v;
}

double RkhsEmbedding::squared_norm(const ScalarField& d) const { return embed(d).squaredNorm(); }

double bfo_kernel(const ScalarField& a, const ScalarField& a2, double lengthscale, const RkhsEmbedding& emb) {
    if (!(lengthscale > 0.0)) throw ValidationError("lengthscale must be positive");
    require_same_grid(a, a2);
    if (std::isinf(lengthscale)) return 1.0;
    return std::exp(-emb.squared_norm(a - a2) / (2.0 * lengthscale * lengthscale));
}

double bfo_kernel(const ScalarField& a, const ScalarField& a2, double lengthscale) {
    return bfo_kernel(a, a2, lengthscale, RkhsEmbedding(a.grid()));
}

Eigen::MatrixXd bfo_gram(const Eigen::MatrixXd& rows, double lengthscale) {
    if (!(lengthscale > 0.0)) throw ValidationError("lengthscale must be positive");
    const Eigen::VectorXd sq = rows.rowwise().squaredNorm();
    Eigen::MatrixXd d2 = -2.0 * rows * rows.transpose();
    d2.colwise() += sq;
    d2.rowwise() += sq.transpose();
    const double inv = 1.0 / (2.0 * lengthscale * lengthscale);
    Eigen::MatrixXd k = (-(d2.array().max(0.0)) * inv).exp().matrix();
    k = (0.5 * (k + k.transpose())).eval();
    k.diagonal().setOnes();
    return k;
}

double median_distance(const Eigen::MatrixXd& rows) {
    std::vector<double> d;
    for (Eigen::Index i = 0; i < rows.rows(); ++i)
        for (Eigen::Index j = i + 1; j < rows.rows(); ++j) d.push_back((rows.row(i) - rows.row(j)).norm());
    if (d.empty()) return 1.0;
    auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
    std::nth_element(d.begin(), mid, d.end());
    return *mid > 0.0 ? *mid : 1.0;
}

}  // namespace nots
