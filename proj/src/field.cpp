#include "nots/field.hpp"

#include <cmath>
#include <string>

#include "nots/errors.hpp"

namespace nots {

Grid2D::Grid2D(int nx, int ny, double x0, double x1, double y0, double y1)
    : nx_(nx), ny_(ny), x0_(x0), x1_(x1), y0_(y0), y1_(y1) {
    if (nx < 2 || ny < 2) throw ValidationError("grid needs at least 2 nodes per axis");
    if (!(x1 > x0) || !(y1 > y0)) throw ValidationError("grid bounds must be increasing");
    weights_.resize(size());
    const double w = hx() * hy();
    for (int iy = 0; iy < ny; ++iy) {
        const double wy = (iy == 0 || iy == ny - 1) ? 0.5 : 1.0;
        for (int ix = 0; ix < nx; ++ix) {
            const double wx = (ix == 0 || ix == nx - 1) ? 0.5 : 1.0;
            weights_[index(ix, iy)] = w * wx * wy;
        }
    }
}

double Grid2D::x(int ix) const { return ix == nx_ - 1 ? x1_ : x0_ + ix * hx(); }
double Grid2D::y(int iy) const { return iy == ny_ - 1 ? y1_ : y0_ + iy * hy(); }

ScalarField::ScalarField(const Grid2D& grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size())
        throw StructuralError("field has " + std::to_string(values_.size()) + " values, grid has " +
                              std::to_string(grid_.size()) + " nodes");
    for (double v : values_)
        if (!std::isfinite(v)) throw StructuralError("field contains a non-finite value");
}

ScalarField ScalarField::constant(const Grid2D& grid, double c) {
    return ScalarField(grid, std::vector<double>(grid.size(), c));
}

ScalarField ScalarField::from_function(const Grid2D& grid, const std::function<double(double, double)>& f) {
    std::vector<double> v(grid.size());
    for (int iy = 0; iy < grid.ny(); ++iy)
        for (int ix = 0; ix < grid.nx(); ++ix) v[grid.index(ix, iy)] = f(grid.x(ix), grid.y(iy));
    return ScalarField(grid, std::move(v));
}

void require_same_grid(const ScalarField& f, const ScalarField& g) {
    if (!(f.grid() == g.grid())) throw StructuralError("fields live on different grids");
}

ScalarField operator+(const ScalarField& f, const ScalarField& g) {
    require_same_grid(f, g);
    std::vector<double> v(f.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f[i] + g[i];
    return ScalarField(f.grid(), std::move(v));
}

ScalarField operator-(const ScalarField& f, const ScalarField& g) {
    require_same_grid(f, g);
    std::vector<double> v(f.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f[i] - g[i];
    return ScalarField(f.grid(), std::move(v));
}

ScalarField operator*(double s, const ScalarField& f) {
    std::vector<double> v(f.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = s * f[i];
    return ScalarField(f.grid(), std::move(v));
}

double integrate(const ScalarField& f) {
    const auto& w = f.grid().weights();
    if (w.size() != f.size()) throw StructuralError("grid/value length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * f[i];
    return s;
}

double l2_inner(const ScalarField& f, const ScalarField& g) {
    require_same_grid(f, g);
    const auto& w = f.grid().weights();
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * (f[i] * g[i]);
    return s;
}

namespace {

// Derivative along a strided line of n samples with spacing h. The boundary
// uses the four-point one-sided stencil when there is room for it; its
// h^3 error keeps boundary slopes as accurate as the interior ones.
void diff_line(const double* f, std::size_t stride, int n, double h, double* out) {
    const double inv2h = 1.0 / (2.0 * h);
    const std::size_t l = static_cast<std::size_t>(n - 1) * stride;
    for (int i = 1; i < n - 1; ++i) out[i * stride] = (f[(i + 1) * stride] - f[(i - 1) * stride]) * inv2h;
    if (n >= 4) {
        const double inv6h = 1.0 / (6.0 * h);
        out[0] = (11.0 * (f[stride] - f[0]) - 7.0 * (f[2 * stride] - f[stride]) + 2.0 * (f[3 * stride] - f[2 * stride])) * inv6h;
        out[l] = (11.0 * (f[l] - f[l - stride]) - 7.0 * (f[l - stride] - f[l - 2 * stride]) +
                  2.0 * (f[l - 2 * stride] - f[l - 3 * stride])) * inv6h;
    } else {
        out[0] = (-3.0 * f[0] + 4.0 * f[stride] - f[2 * stride]) * inv2h;
        out[l] = (3.0 * f[l] - 4.0 * f[l - stride] + f[l - 2 * stride]) * inv2h;
    }
}

}  // namespace

VectorField2D gradient(const ScalarField& f) {
    const Grid2D& g = f.grid();
    if (g.nx() < 3 || g.ny() < 3) throw StructuralError("gradient needs at least 3x3 nodes");
    std::vector<double> dx(g.size()), dy(g.size());
    const double* v = f.values().data();
    for (int iy = 0; iy < g.ny(); ++iy) diff_line(v + g.index(0, iy), 1, g.nx(), g.hx(), dx.data() + g.index(0, iy));
    for (int ix = 0; ix < g.nx(); ++ix) diff_line(v + ix, g.nx(), g.ny(), g.hy(), dy.data() + ix);
    return {ScalarField(g, std::move(dx)), ScalarField(g, std::move(dy))};
}

}  // namespace nots
