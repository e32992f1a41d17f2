#include "nots/feature_map.hpp"

#include <numbers>

#include "nots/errors.hpp"

namespace nots {

FeatureMap::FeatureMap(const Grid2D& grid, FeatureMapConfig cfg) : grid_(grid), cfg_(cfg) {
    if (!cfg.fourier && !cfg.pointwise && !cfg.bias && !cfg.coordinates) throw ValidationError("feature map needs at least one channel");
    if (cfg.fourier) {
        if (cfg.n_modes < 1) throw ValidationError("n_modes must be positive");
        if (2 * cfg.n_modes > grid.nx() || 2 * cfg.n_modes > grid.ny())
            throw ValidationError("n_modes exceeds half the grid size");
    }
    dim_ = (cfg.fourier ? 2 * cfg.n_modes * cfg.n_modes : 0) + (cfg.pointwise ? 1 : 0) + (cfg.bias ? 1 : 0) +
           (cfg.coordinates ? 2 : 0);
    const int m = cfg.fourier ? cfg.n_modes : 0;
    const double two_pi = 2.0 * std::numbers::pi;
    ex_.resize(static_cast<std::size_t>(m) * grid.nx());
    ey_.resize(static_cast<std::size_t>(m) * grid.ny());
    for (int s = 0; s < m; ++s) {
        for (int i = 0; i < grid.nx(); ++i)
            ex_[static_cast<std::size_t>(s) * grid.nx() + i] = std::polar(1.0, -two_pi * ((s * i) % grid.nx()) / grid.nx());
        for (int i = 0; i < grid.ny(); ++i)
            ey_[static_cast<std::size_t>(s) * grid.ny() + i] = std::polar(1.0, -two_pi * ((s * i) % grid.ny()) / grid.ny());
    }
}

std::vector<std::complex<double>> FeatureMap::coefficients(const ScalarField& a) const {
    if (!(a.grid() == grid_)) throw StructuralError("feature map grid mismatch");
    const int m = cfg_.fourier ? cfg_.n_modes : 0;
    const int nx = grid_.nx(), ny = grid_.ny();
    // Row transform first: r(sx, iy) = sum_ix a e^{-i..}
    std::vector<std::complex<double>> r(static_cast<std::size_t>(m) * ny, 0.0);
    for (int sx = 0; sx < m; ++sx)
        for (int iy = 0; iy < ny; ++iy) {
            std::complex<double> acc = 0.0;
            for (int ix = 0; ix < nx; ++ix) acc += a(ix, iy) * ex_[static_cast<std::size_t>(sx) * nx + ix];
            r[static_cast<std::size_t>(sx) * ny + iy] = acc;
        }
    std::vector<std::complex<double>> c(static_cast<std::size_t>(m) * m, 0.0);
    const double inv_n = 1.0 / static_cast<double>(grid_.size());
    for (int sy = 0; sy < m; ++sy)
        for (int sx = 0; sx < m; ++sx) {
            std::complex<double> acc = 0.0;
            for (int iy = 0; iy < ny; ++iy)
                acc += r[static_cast<std::size_t>(sx) * ny + iy] * ey_[static_cast<std::size_t>(sy) * ny + iy];
            c[static_cast<std::size_t>(sy) * m + sx] = acc * inv_n;
        }
    return c;
}

Eigen::MatrixXd FeatureMap::features(const ScalarField& a) const {
    if (!(a.grid() == grid_)) throw StructuralError("feature map grid mismatch");
    const int nx = grid_.nx(), ny = grid_.ny();
    Eigen::MatrixXd v(static_cast<Eigen::Index>(grid_.size()), dim_);
    int col = 0;
    if (cfg_.fourier) {
        const int m = cfg_.n_modes;
        const auto c = coefficients(a);
        for (int sy = 0; sy < m; ++sy)
            for (int sx = 0; sx < m; ++sx) {
                const auto cs = c[static_cast<std::size_t>(sy) * m + sx];
                for (int iy = 0; iy < ny; ++iy) {
                    const auto cy = cs * std::conj(ey_[static_cast<std::size_t>(sy) * ny + iy]);
                    for (int ix = 0; ix < nx; ++ix) {
                        const auto val = cy * std::conj(ex_[static_cast<std::size_t>(sx) * nx + ix]);
                        const auto z = static_cast<Eigen::Index>(grid_.index(ix, iy));
                        v(z, col) = val.real();
                        v(z, col + 1) = val.imag();
                    }
                }
                col += 2;
            }
    }
    if (cfg_.pointwise) {
        for (std::size_t z = 0; z < grid_.size(); ++z) v(static_cast<Eigen::Index>(z), col) = a[z];
        ++col;
    }
    if (cfg_.bias) v.col(col++).setOnes();
    if (cfg_.coordinates) {
        for (int iy = 0; iy < ny; ++iy)
            for (int ix = 0; ix < nx; ++ix) {
                const auto z = static_cast<Eigen::Index>(grid_.index(ix, iy));
                v(z, col) = nx > 1 ? 2.0 * ix / (nx - 1) - 1.0 : 0.0;
                v(z, col + 1) = ny > 1 ? 2.0 * iy / (ny - 1) - 1.0 : 0.0;
            }
    }
    return v;
}

Eigen::VectorXd FeatureMap::feature(const ScalarField& a, std::size_t z) const {
    if (z >= grid_.size()) throw ValidationError("node index out of range");
    return features(a).row(static_cast<Eigen::Index>(z)).transpose();
}

}  // namespace nots
