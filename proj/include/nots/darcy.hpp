#pragma once

#include "nots/field.hpp"
#include "nots/rng.hpp"

namespace nots {

struct GRFConfig {
    double tau = 3.0;
    double alpha = 2.0;
    Grid2D grid{16, 16};

    void validate() const;
};

/// Binary permeability: every sample equals a_low or a_high.
class PermeabilityField {
public:
    PermeabilityField(ScalarField field, double a_low, double a_high);

    const ScalarField& field() const { return field_; }
    const Grid2D& grid() const { return field_.grid(); }
    double a_low() const { return a_low_; }
    double a_high() const { return a_high_; }

private:
    ScalarField field_;
    double a_low_, a_high_;
};

struct DarcyInstance {
    PermeabilityField a;
    ScalarField u;
    double g;
};

struct DarcyOptions {
    double tolerance = 1e-10;
    int max_iterations = 0;  ///< 0 picks 10 * unknowns
};

/// Spectral variance of frequency m = (mx, my) (cycles per unit length).
double grf_spectral_variance(int mx, int my, double tau, double alpha);

/// Zero-mean periodic Gaussian field. The constant mode is excluded.
ScalarField sample_grf(const GRFConfig& cfg, Rng& rng);

PermeabilityField binarize(const ScalarField& grf, double a_low, double a_high);

/// Node-centred 5-point finite-volume discretization of -div(a grad u) = g
/// with u = 0 on the boundary, harmonic-mean face coefficients, Jacobi
/// preconditioned CG.
ScalarField solve_darcy(const PermeabilityField& a, double g, const DarcyOptions& opts = {});
/// Same operator for any strictly positive coefficient field.
ScalarField solve_darcy(const ScalarField& a, double g, const DarcyOptions& opts = {});

/// Total outward flux through the boundary, trapezoid rule along each edge.
/// The normal flux at a boundary node is the harmonic-mean flux through the
/// first interior face plus the source g * h / 2 of the half cell between
/// that face and the boundary. Equals g * area up to discretization error
/// for solutions with forcing g.
double boundary_outflow(const ScalarField& u, const ScalarField& a, double g);

}  // namespace nots
