#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "nots/field.hpp"

namespace nots {

struct FeatureMapConfig {
    int n_modes = 8;
    bool fourier = true;
    bool pointwise = true;
    bool bias = true;
    /// Appends node coordinates rescaled to [-1, 1]. Off by default; without
    /// it the map is equivariant on the index torus and cannot locate the
    /// domain boundary.
    bool coordinates = false;
};

/// Per-node input features v_z(a): truncated Fourier coefficients of a
/// modulated back to z (real and imaginary parts), the value a(z), and a
/// constant 1. The DFT treats the node grid as periodic with period nx, ny.
class FeatureMap {
public:
    FeatureMap(const Grid2D& grid, FeatureMapConfig cfg = {});

    const Grid2D& grid() const { return grid_; }
    const FeatureMapConfig& config() const { return cfg_; }
    int dimension() const { return dim_; }

    /// Row z holds v_z(a); shape nodes x dimension.
    Eigen::MatrixXd features(const ScalarField& a) const;
    Eigen::VectorXd feature(const ScalarField& a, std::size_t z) const;

    /// Retained coefficients (1/N) sum a e^{-2 pi i (sx ix/nx + sy iy/ny)},
    /// indexed sy * n_modes + sx.
    std::vector<std::complex<double>> coefficients(const ScalarField& a) const;

private:
    Grid2D grid_;
    FeatureMapConfig cfg_;
    int dim_;
    std::vector<std::complex<double>> ex_, ey_;  // e^{-2 pi i s i / n}
};

}  // namespace nots
