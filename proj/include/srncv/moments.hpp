// Moment machinery: the drift polynomial of E[X^m] under the reaction
// network generator, and its expansion into the exponentially weighted
// zero-mean path functional
//
//   Z = e^{lambda T} X_T^m - x_0^m
//       - integral_0^T e^{lambda t} (lambda X_t^m + drift_m(X_t)) dt
//
// realized per trajectory through time-integral accumulators.
#pragma once

#include <compare>
#include <set>
#include <string>
#include <vector>

#include "srncv/model.hpp"
#include "srncv/polynomial.hpp"

namespace srncv {

struct ControlVariateId {
    MultiIndex m;
    double lambda = 0.0;

    friend bool operator==(const ControlVariateId&, const ControlVariateId&) = default;
    friend std::partial_ordering operator<=>(const ControlVariateId& a, const ControlVariateId& b) {
        if (auto c = a.m <=> b.m; c != 0) return c;
        return a.lambda <=> b.lambda;
    }
    std::string to_string() const;
};

/// Key of one trajectory-integral accumulator int_0^T e^{lambda t} X_t^m dt.
using AccumulatorKey = ControlVariateId;

/// Below this magnitude lambda is treated as 0 and the analytic limit of the
/// segment weight is used; resampling can land arbitrarily close to 0.
inline constexpr double kLambdaZeroTolerance = 1e-12;

struct ConstraintExpansion {
    ControlVariateId id;
    double horizon = 0.0;

    double terminal_weight = 0.0;  // e^{lambda T}, multiplies X_T^m
    double initial_value = 0.0;    // x_0^m at the Dirac initial state
    // integrand lambda*x^m + drift_m(x), split into the constant monomial
    // (integrated in closed form) and the monomials that need accumulators
    double constant_coeff = 0.0;
    double constant_integral = 0.0;  // int_0^T e^{lambda t} dt
    std::vector<std::pair<MultiIndex, double>> integral_terms;

    Polynomial integrand;  // full integrand, kept for inspection/tests
};

/// Sum over reactions of (x^m shifted by v_j minus x^m) times the propensity
/// polynomial: the time derivative of E[X^m]. Throws PolynomialityError if a
/// reaction with non-polynomial rate actually moves a species appearing in m.
Polynomial moment_drift(const Model& model, const MultiIndex& m);

/// Closed form of int_0^T e^{lambda t} dt with the lambda -> 0 limit T.
double exp_time_integral(double lambda, double T);

ConstraintExpansion constraint_expansion(const Model& model, const ControlVariateId& id, double T);

/// Deduplicated accumulator keys needed across all expansions; the constant
/// monomial is integrated in closed form and never gets a key.
std::set<AccumulatorKey> accumulator_keys(const std::vector<ConstraintExpansion>& expansions);

/// Monomial -> coefficient table of each expansion, for debugging.
std::string describe_expansions(const Model& model, const std::vector<ConstraintExpansion>& expansions);

}  // namespace srncv
