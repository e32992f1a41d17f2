#pragma once

#include <optional>
#include <string>

#include "nots/darcy.hpp"
#include "nots/field.hpp"

namespace nots {

double f_mean(const ScalarField& u);
/// Boundary integral of a (grad u . n) with nodal a and one-sided
/// normal derivatives from gradient(); close to -g * area for Darcy solutions.
double f_neg_flow_rate(const ScalarField& u, const ScalarField& a);
double f_neg_flow_rate(const ScalarField& u, const PermeabilityField& a);
/// Mean of the k largest gradient magnitudes over grid nodes.
double f_high_gradient(const ScalarField& u, int k);
double f_neg_total_pressure(const ScalarField& u);
double f_neg_potential_power(const ScalarField& u, const ScalarField& a, double g);
double f_neg_potential_power(const ScalarField& u, const PermeabilityField& a, double g);
double f_inverse(const ScalarField& u, const ScalarField& target);

enum class FunctionalKind { Mean, NegFlowRate, HighGradient, NegTotalPressure, NegPotentialPower, Inverse };

struct FunctionalSpec {
    FunctionalKind kind = FunctionalKind::NegFlowRate;
    int k = 10;
    std::optional<ScalarField> target;
    double forcing = 1.0;
    double offset = 0.0;  ///< constant added to every value

    /// Accepts "mean", "neg_flow_rate", "high_gradient", "neg_total_pressure",
    /// "neg_potential_power", "inverse". The inverse target is attached later.
    static FunctionalSpec from_name(const std::string& name);
    std::string name() const;
    void validate(const Grid2D& grid) const;
};

/// Evaluates the functional on an output field u for input field a.
double evaluate(const FunctionalSpec& spec, const ScalarField& u, const ScalarField& a);

}  // namespace nots
