#include "srncv/moments.hpp"

#include <cmath>
#include <sstream>

namespace srncv {

std::string ControlVariateId::to_string() const {
    std::ostringstream os;
    os << "(m=[";
    for (size_t i = 0; i < m.size(); ++i) os << (i ? "," : "") << m[i];
    os << "], lambda=" << lambda << ")";
    return os.str();
}

Polynomial moment_drift(const Model& model, const MultiIndex& m) {
    if (m.size() != model.n_species()) throw std::invalid_argument("moment_drift: multi-index arity mismatch");
    const size_t n = model.n_species();
    Polynomial f = Polynomial::monomial(m, 1.0);
    Polynomial drift(n);
    for (const Reaction& r : model.reactions) {
        std::vector<int64_t> v = stoich_change(r);
        Polynomial diff = shift_polynomial(f, v) - f;
        if (diff.is_zero()) continue;  // reaction does not move any species in m
        drift += diff * propensity_polynomial(r, model);
    }
    return drift;
}

double exp_time_integral(double lambda, double T) {
    if (std::abs(lambda) < kLambdaZeroTolerance) return T;
    return std::expm1(lambda * T) / lambda;
}

ConstraintExpansion constraint_expansion(const Model& model, const ControlVariateId& id, double T) {
    if (!(T > 0.0)) throw std::invalid_argument("constraint_expansion: horizon must be positive");
    const uint32_t ord = order(id.m);
    if (ord < 1) throw std::invalid_argument("constraint_expansion: moment order must be at least 1");

    ConstraintExpansion e;
    e.id = id;
    // near-zero lambda collapses to exactly 0 so the closed-form limit,
    // the accumulator branch and the key lookup all agree
    if (std::abs(e.id.lambda) < kLambdaZeroTolerance) e.id.lambda = 0.0;
    e.horizon = T;
    e.terminal_weight = std::exp(e.id.lambda * T);
    e.initial_value = eval_monomial(model.initial_state, id.m);

    e.integrand = moment_drift(model, id.m);
    if (e.id.lambda != 0.0) e.integrand += Polynomial::monomial(id.m, e.id.lambda);

    e.constant_coeff = e.integrand.constant_term();
    e.constant_integral = exp_time_integral(id.lambda, T);
    for (const auto& [mk, ck] : e.integrand.terms())
        if (order(mk) > 0) e.integral_terms.emplace_back(mk, ck);
    return e;
}

std::set<AccumulatorKey> accumulator_keys(const std::vector<ConstraintExpansion>& expansions) {
    std::set<AccumulatorKey> keys;
    for (const ConstraintExpansion& e : expansions)
        for (const auto& [mk, ck] : e.integral_terms) keys.insert(AccumulatorKey{mk, e.id.lambda});
    return keys;
}

std::string describe_expansions(const Model& model, const std::vector<ConstraintExpansion>& expansions) {
    std::ostringstream os;
    for (const ConstraintExpansion& e : expansions) {
        os << "constraint " << e.id.to_string() << " horizon " << e.horizon << "\n";
        os << "  Z = " << e.terminal_weight << " * X_T^m - " << e.initial_value
           << " - integral of e^(" << e.id.lambda << " t) * [" << e.integrand.to_string(model.species)
           << "] dt\n";
        os << "  monomial coefficients:\n";
        os << "    1 -> " << e.constant_coeff << " (closed form, integral " << e.constant_integral << ")\n";
        for (const auto& [mk, ck] : e.integral_terms) {
            os << "    " << Polynomial::monomial(mk, 1.0).to_string(model.species) << " -> " << ck << "\n";
        }
    }
    return os.str();
}

}  // namespace srncv
