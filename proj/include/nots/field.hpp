#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace nots {

/// Uniform node-centred grid including boundary nodes. Node (ix, iy) is
/// stored at iy * nx + ix.
class Grid2D {
public:
    Grid2D(int nx, int ny, double x0 = 0.0, double x1 = 1.0, double y0 = 0.0, double y1 = 1.0);

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    double x0() const { return x0_; }
    double x1() const { return x1_; }
    double y0() const { return y0_; }
    double y1() const { return y1_; }
    double hx() const { return (x1_ - x0_) / (nx_ - 1); }
    double hy() const { return (y1_ - y0_) / (ny_ - 1); }
    double area() const { return (x1_ - x0_) * (y1_ - y0_); }
    std::size_t size() const { return static_cast<std::size_t>(nx_) * ny_; }
    std::size_t index(int ix, int iy) const { return static_cast<std::size_t>(iy) * nx_ + ix; }
    double x(int ix) const;
    double y(int iy) const;

    /// Trapezoid weights, one per node.
    const std::vector<double>& weights() const { return weights_; }

    bool operator==(const Grid2D& o) const {
        return nx_ == o.nx_ && ny_ == o.ny_ && x0_ == o.x0_ && x1_ == o.x1_ && y0_ == o.y0_ && y1_ == o.y1_;
    }

private:
    int nx_, ny_;
    double x0_, x1_, y0_, y1_;
    std::vector<double> weights_;
};

/// Real samples on a grid. Immutable after construction.
class ScalarField {
public:
    ScalarField(const Grid2D& grid, std::vector<double> values);

    static ScalarField constant(const Grid2D& grid, double c);
    static ScalarField from_function(const Grid2D& grid, const std::function<double(double, double)>& f);

    const Grid2D& grid() const { return grid_; }
    std::span<const double> values() const { return values_; }
    const std::vector<double>& vector() const { return values_; }
    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    double operator()(int ix, int iy) const { return values_[grid_.index(ix, iy)]; }

    bool operator==(const ScalarField& o) const { return grid_ == o.grid_ && values_ == o.values_; }

private:
    Grid2D grid_;
    std::vector<double> values_;
};

ScalarField operator+(const ScalarField& f, const ScalarField& g);
ScalarField operator-(const ScalarField& f, const ScalarField& g);
ScalarField operator*(double s, const ScalarField& f);

struct VectorField2D {
    ScalarField dx;
    ScalarField dy;
};

/// Throws StructuralError unless f and g live on the same grid.
void require_same_grid(const ScalarField& f, const ScalarField& g);

double integrate(const ScalarField& f);
double l2_inner(const ScalarField& f, const ScalarField& g);
/// Central differences inside; one-sided four-point stencils on the boundary
/// (three-point on grids with only three nodes along an axis).
VectorField2D gradient(const ScalarField& f);

}  // namespace nots
