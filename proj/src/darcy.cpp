#include "nots/darcy.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <complex>
#include <numbers>
#include <vector>

#include "nots/errors.hpp"

namespace nots {

void GRFConfig::validate() const {
    if (!(tau > 0.0)) throw ValidationError("GRF tau must be positive");
    if (!(alpha > 1.0)) throw ValidationError("GRF alpha must exceed 1");
}

PermeabilityField::PermeabilityField(ScalarField field, double a_low, double a_high)
    : field_(std::move(field)), a_low_(a_low), a_high_(a_high) {
    if (!(a_low > 0.0) || !(a_high > 0.0)) throw ValidationError("permeability must be positive");
    for (double v : field_.values())
        if (v != a_low && v != a_high) throw ValidationError("permeability sample outside {a_low, a_high}");
}

double grf_spectral_variance(int mx, int my, double tau, double alpha) {
    const double k2 = 4.0 * std::numbers::pi * std::numbers::pi * (double(mx) * mx + double(my) * my);
    return std::pow(k2 + tau * tau, -alpha);
}

ScalarField sample_grf(const GRFConfig& cfg, Rng& rng) {
    cfg.validate();
    const Grid2D& g = cfg.grid;
    const int nx = g.nx(), ny = g.ny();
    const int kx = (nx - 1) / 2, ky = (ny - 1) / 2;
    const double two_pi = 2.0 * std::numbers::pi;

    // Half set of frequencies: my > 0, or my == 0 and mx > 0. Each carries
    // sqrt(2 S) (xi cos + eta sin), written as Re(c e^{i theta}) with c = sqrt(2S)(xi - i eta).
    std::vector<std::complex<double>> coef(static_cast<std::size_t>(2 * kx + 1) * (ky + 1), 0.0);
    for (int my = 0; my <= ky; ++my) {
        for (int mx = -kx; mx <= kx; ++mx) {
            if (my == 0 && mx <= 0) continue;
            const double amp = std::sqrt(2.0 * grf_spectral_variance(mx, my, cfg.tau, cfg.alpha));
            const double xi = rng.normal();
            const double eta = rng.normal();
            coef[static_cast<std::size_t>(my) * (2 * kx + 1) + (mx + kx)] = amp * std::complex<double>(xi, -eta);
        }
    }

    std::vector<std::complex<double>> ex(static_cast<std::size_t>(2 * kx + 1) * nx);
    for (int mx = -kx; mx <= kx; ++mx)
        for (int ix = 0; ix < nx; ++ix) {
            const double t = (g.x(ix) - g.x0()) / (g.x1() - g.x0());
            ex[static_cast<std::size_t>(mx + kx) * nx + ix] = std::polar(1.0, two_pi * mx * t);
        }
    // b(my, ix) = sum_mx c(mx, my) e^{i 2 pi mx x}
    std::vector<std::complex<double>> b(static_cast<std::size_t>(ky + 1) * nx, 0.0);
    for (int my = 0; my <= ky; ++my)
        for (int mx = -kx; mx <= kx; ++mx) {
            const auto c = coef[static_cast<std::size_t>(my) * (2 * kx + 1) + (mx + kx)];
            if (c == 0.0) continue;
            for (int ix = 0; ix < nx; ++ix) b[static_cast<std::size_t>(my) * nx + ix] += c * ex[static_cast<std::size_t>(mx + kx) * nx + ix];
        }
    std::vector<double> v(g.size(), 0.0);
    for (int iy = 0; iy < ny; ++iy) {
        const double t = (g.y(iy) - g.y0()) / (g.y1() - g.y0());
        for (int my = 0; my <= ky; ++my) {
            const auto e = std::polar(1.0, two_pi * my * t);
            for (int ix = 0; ix < nx; ++ix) v[g.index(ix, iy)] += (b[static_cast<std::size_t>(my) * nx + ix] * e).real();
        }
    }
    return ScalarField(g, std::move(v));
}

PermeabilityField binarize(const ScalarField& grf, double a_low, double a_high) {
    if (!(a_low > 0.0) || !(a_high > 0.0)) throw ValidationError("permeability must be positive");
    std::vector<double> v(grf.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = grf[i] >= 0.0 ? a_high : a_low;
    return PermeabilityField(ScalarField(grf.grid(), std::move(v)), a_low, a_high);
}

ScalarField solve_darcy(const PermeabilityField& a, double g, const DarcyOptions& opts) {
    return solve_darcy(a.field(), g, opts);
}

ScalarField solve_darcy(const ScalarField& a, double g, const DarcyOptions& opts) {
    const Grid2D& grid = a.grid();
    const int nx = grid.nx(), ny = grid.ny();
    if (nx < 3 || ny < 3) throw StructuralError("Darcy solve needs at least 3x3 nodes");
    for (double v : a.values())
        if (!(v > 0.0)) throw ValidationError("permeability must be positive");

    const double ihx2 = 1.0 / (grid.hx() * grid.hx());
    const double ihy2 = 1.0 / (grid.hy() * grid.hy());
    auto harm = [](double p, double q) { return 2.0 * p * q / (p + q); };
    // ce(i) couples node i with its east neighbour, cn(i) with its north neighbour.
    std::vector<double> ce(grid.size(), 0.0), cn(grid.size(), 0.0);
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
            const std::size_t i = grid.index(ix, iy);
            if (ix + 1 < nx) ce[i] = harm(a[i], a[i + 1]) * ihx2;
            if (iy + 1 < ny) cn[i] = harm(a[i], a[i + nx]) * ihy2;
        }
    std::vector<double> diag(grid.size(), 1.0);
    for (int iy = 1; iy < ny - 1; ++iy)
        for (int ix = 1; ix < nx - 1; ++ix) {
            const std::size_t i = grid.index(ix, iy);
            diag[i] = ce[i] + ce[i - 1] + cn[i] + cn[i - nx];
        }

    // Vectors span the full grid; boundary entries stay zero.
    auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
        for (int iy = 1; iy < ny - 1; ++iy)
            for (int ix = 1; ix < nx - 1; ++ix) {
                const std::size_t i = grid.index(ix, iy);
                y[i] = diag[i] * x[i] - ce[i] * x[i + 1] - ce[i - 1] * x[i - 1] - cn[i] * x[i + nx] -
                       cn[i - nx] * x[i - nx];
            }
    };
    auto dot = [&](const std::vector<double>& p, const std::vector<double>& q) {
        double s = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) s += p[i] * q[i];
        return s;
    };

    std::vector<double> u(grid.size(), 0.0), r(grid.size(), 0.0), z(grid.size(), 0.0), p(grid.size(), 0.0),
        q(grid.size(), 0.0);
    for (int iy = 1; iy < ny - 1; ++iy)
        for (int ix = 1; ix < nx - 1; ++ix) r[grid.index(ix, iy)] = g;
    const double bnorm = std::sqrt(dot(r, r));
    if (bnorm == 0.0) return ScalarField(grid, std::move(u));

    const int unknowns = (nx - 2) * (ny - 2);
    const int max_it = opts.max_iterations > 0 ? opts.max_iterations : 10 * unknowns + 100;
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = r[i] / diag[i];
    p = z;
    double rz = dot(r, z);
    double rel = 1.0;
    for (int it = 0; it < max_it; ++it) {
        apply(p, q);
        const double alpha = rz / dot(p, q);
        for (std::size_t i = 0; i < u.size(); ++i) {
            u[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        rel = std::sqrt(dot(r, r)) / bnorm;
        if (rel <= opts.tolerance) return ScalarField(grid, std::move(u));
        for (std::size_t i = 0; i < z.size(); ++i) z[i] = r[i] / diag[i];
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = z[i] + beta * p[i];
    }
    throw SolverError("conjugate gradients did not converge", rel, max_it);
}

namespace {

// Outward normal flux -a du/dn at a boundary node: the flux through the
// face half a cell inward, plus what the source adds in between.
double boundary_flux(const ScalarField& u, const ScalarField& a, std::size_t i0, std::ptrdiff_t step, double h,
                     double g) {
    const auto j = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i0) + step);
    const double af = 2.0 * a[i0] * a[j] / (a[i0] + a[j]);
    return af * (u[j] - u[i0]) / h + 0.5 * g * h;
}

}  // namespace

double boundary_outflow(const ScalarField& u, const ScalarField& a, double g) {
    require_same_grid(u, a);
    const Grid2D& grid = u.grid();
    const int nx = grid.nx(), ny = grid.ny();
    for (double v : a.values())
        if (!(v > 0.0)) throw ValidationError("permeability must be positive");
    const auto sx = static_cast<std::ptrdiff_t>(1), sy = static_cast<std::ptrdiff_t>(nx);
    const double hx = grid.hx(), hy = grid.hy();
    auto edge_weight = [](int i, int n, double h) { return (i == 0 || i == n - 1) ? 0.5 * h : h; };
    double outflow = 0.0;
    for (int iy = 0; iy < ny; ++iy)
        outflow += edge_weight(iy, ny, hy) * (boundary_flux(u, a, grid.index(0, iy), sx, hx, g) +
                                              boundary_flux(u, a, grid.index(nx - 1, iy), -sx, hx, g));
    for (int ix = 0; ix < nx; ++ix)
        outflow += edge_weight(ix, nx, hx) * (boundary_flux(u, a, grid.index(ix, 0), sy, hy, g) +
                                              boundary_flux(u, a, grid.index(ix, ny - 1), -sy, hy, g));
    return outflow;
}

}  // namespace nots
