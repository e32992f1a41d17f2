#include "nots/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "nots/errors.hpp"

namespace nots {

double f_mean(const ScalarField& u) { return integrate(u); }

double f_neg_flow_rate(const ScalarField& u, const ScalarField& a) {
    require_same_grid(u, a);
    const Grid2D& g = u.grid();
    const VectorField2D du = gradient(u);
    const int nx = g.nx(), ny = g.ny();
    auto edge_weight = [](int i, int n, double h) { return (i == 0 || i == n - 1) ? 0.5 * h : h; };
    double s = 0.0;
    for (int iy = 0; iy < ny; ++iy)
        s += edge_weight(iy, ny, g.hy()) * (a(nx - 1, iy) * du.dx(nx - 1, iy) - a(0, iy) * du.dx(0, iy));
    for (int ix = 0; ix < nx; ++ix)
        s += edge_weight(ix, nx, g.hx()) * (a(ix, ny - 1) * du.dy(ix, ny - 1) - a(ix, 0) * du.dy(ix, 0));
    return s;
}

double f_neg_flow_rate(const ScalarField& u, const PermeabilityField& a) { return f_neg_flow_rate(u, a.field()); }

double f_high_gradient(const ScalarField& u, int k) {
    if (k < 1 || static_cast<std::size_t>(k) > u.size()) throw ValidationError("high_gradient K out of range");
    const VectorField2D du = gradient(u);
    std::vector<double> mag(u.size());
    for (std::size_t i = 0; i < mag.size(); ++i) mag[i] = std::hypot(du.dx[i], du.dy[i]);
    std::vector<std::size_t> order(mag.size());
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](std::size_t p, std::size_t q) {
        return mag[p] != mag[q] ? mag[p] > mag[q] : p < q;
    });
    double s = 0.0;
    for (int i = 0; i < k; ++i) s += mag[order[i]];
    return s / k;
}

double f_neg_total_pressure(const ScalarField& u) {
    const auto& w = u.grid().weights();
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * std::abs(u[i]);
    return -0.5 * s;
}

double f_neg_potential_power(const ScalarField& u, const ScalarField& a, double g) {
    require_same_grid(u, a);
    const double int_a = integrate(a);
    if (!(int_a > 0.0)) throw ValidationError("potential power needs a positive integral of a");
    const VectorField2D du = gradient(u);
    const auto& w = u.grid().weights();
    double uu = 0.0, gg = 0.0, su = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        uu += w[i] * u[i] * u[i];
        gg += w[i] * (du.dx[i] * du.dx[i] + du.dy[i] * du.dy[i]);
        su += w[i] * u[i];
    }
    const double alpha_uu = uu / int_a;
    const double beta_uu = 2.0 * gg;
    return -0.5 * alpha_uu - 0.5 * beta_uu + g * su;
}

double f_neg_potential_power(const ScalarField& u, const PermeabilityField& a, double g) {
    return f_neg_potential_power(u, a.field(), g);
}

double f_inverse(const ScalarField& u, const ScalarField& target) {
    require_same_grid(u, target);
    const auto& w = u.grid().weights();
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double d = u[i] - target[i];
        s += w[i] * d * d;
    }
    return -0.5 * s;
}

FunctionalSpec FunctionalSpec::from_name(const std::string& name) {
    FunctionalSpec s;
    if (name == "mean") s.kind = FunctionalKind::Mean;
    else if (name == "neg_flow_rate") s.kind = FunctionalKind::NegFlowRate;
    else if (name == "high_gradient") s.kind = FunctionalKind::HighGradient;
    else if (name == "neg_total_pressure") s.kind = FunctionalKind::NegTotalPressure;
    else if (name == "neg_potential_power") s.kind = FunctionalKind::NegPotentialPower;
    else if (name == "inverse") s.kind = FunctionalKind::Inverse;
    else throw ValidationError("unknown functional: " + name);
    return s;
}

std::string FunctionalSpec::name() const {
    switch (kind) {
        case FunctionalKind::Mean: return "mean";
        case FunctionalKind::NegFlowRate: return "neg_flow_rate";
        case FunctionalKind::HighGradient: return "high_gradient";
        case FunctionalKind::NegTotalPressure: return "neg_total_pressure";
        case FunctionalKind::NegPotentialPower: return "neg_potential_power";
        case FunctionalKind::Inverse: return "inverse";
    }
    return "?";
}

void FunctionalSpec::validate(const Grid2D& grid) const {
    if (kind == FunctionalKind::HighGradient && (k < 1 || static_cast<std::size_t>(k) > grid.size()))
        throw ValidationError("high_gradient K out of range");
    if (kind == FunctionalKind::Inverse) {
        if (!target) throw ValidationError("inverse functional needs a target field");
        if (!(target->grid() == grid)) throw StructuralError("inverse target grid differs from pool grid");
    }
}

double evaluate(const FunctionalSpec& spec, const ScalarField& u, const ScalarField& a) {
    double v = 0.0;
    switch (spec.kind) {
        case FunctionalKind::Mean: v = f_mean(u); break;
        case FunctionalKind::NegFlowRate: v = f_neg_flow_rate(u, a); break;
        case FunctionalKind::HighGradient: v = f_high_gradient(u, spec.k); break;
        case FunctionalKind::NegTotalPressure: v = f_neg_total_pressure(u); break;
        case FunctionalKind::NegPotentialPower: v = f_neg_potential_power(u, a, spec.forcing); break;
        case FunctionalKind::Inverse:
            if (!spec.target) throw ValidationError("inverse functional needs a target field");
            v = f_inverse(u, *spec.target);
            break;
    }
    return v + spec.offset;
}

}  // namespace nots
