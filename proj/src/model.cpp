#include "srncv/model.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace srncv {

std::optional<uint32_t> Model::species_index(const std::string& name) const {
    for (uint32_t i = 0; i < species.size(); ++i)
        if (species[i] == name) return i;
    return std::nullopt;
}

std::optional<uint32_t> Model::parameter_index(const std::string& name) const {
    for (uint32_t i = 0; i < parameter_names.size(); ++i)
        if (parameter_names[i] == name) return i;
    return std::nullopt;
}

namespace {

void check_expr_refs(const RateExpr& e, const Model& m) {
    switch (e.kind) {
        case RateExpr::Kind::Param:
            if (e.index >= m.parameter_names.size())
                throw std::invalid_argument("rate expression references unknown parameter " + e.name);
            break;
        case RateExpr::Kind::Species:
            if (e.index >= m.species.size())
                throw std::invalid_argument("rate expression references unknown species " + e.name);
            break;
        default:
            break;
    }
    for (const RateExpr& c : e.children) check_expr_refs(c, m);
}

}  // namespace

void Model::validate() const {
    std::set<std::string> seen(species.begin(), species.end());
    if (seen.size() != species.size()) throw std::invalid_argument("duplicate species name");
    if (parameter_names.size() != parameter_values.size())
        throw std::invalid_argument("parameter name/value size mismatch");
    if (initial_state.size() != species.size())
        throw std::invalid_argument("initial state length does not match species count");
    for (int64_t c : initial_state)
        if (c < 0) throw std::invalid_argument("negative initial count");
    for (const Reaction& r : reactions) {
        if (r.reactants.size() != species.size() || r.products.size() != species.size())
            throw std::invalid_argument("reaction stoichiometry arity mismatch");
        bool any = false;
        for (uint32_t v : r.reactants) any = any || v != 0;
        for (uint32_t v : r.products) any = any || v != 0;
        if (!any) throw std::invalid_argument("reaction with empty reactant and product sides");
        if (const auto* ma = std::get_if<MassAction>(&r.rate_law)) {
            if (!(ma->c > 0.0)) throw std::invalid_argument("mass-action constant must be positive");
        } else {
            check_expr_refs(std::get<RateExpr>(r.rate_law), *this);
        }
    }
}

TargetQuery TargetQuery::mean(uint32_t species, double horizon) {
    TargetQuery q;
    q.kind = Kind::Mean;
    q.species = species;
    q.horizon = horizon;
    return q;
}

TargetQuery TargetQuery::threshold_probability(uint32_t species, int64_t level, double horizon) {
    TargetQuery q;
    q.kind = Kind::ThresholdProbability;
    q.species = species;
    q.horizon = horizon;
    q.level = level;
    return q;
}

void TargetQuery::validate(const Model& model) const {
    if (!(horizon > 0.0)) throw std::invalid_argument("query horizon must be positive");
    if (species >= model.n_species()) throw std::invalid_argument("query species index out of range");
    if (kind == Kind::ThresholdProbability && level < 0)
        throw std::invalid_argument("threshold level must be non-negative");
}

std::vector<int64_t> stoich_change(const Reaction& reaction) {
    std::vector<int64_t> v(reaction.reactants.size());
    for (size_t i = 0; i < v.size(); ++i)
        v[i] = static_cast<int64_t>(reaction.products[i]) - static_cast<int64_t>(reaction.reactants[i]);
    return v;
}

double mass_action_propensity(const Reaction& reaction, const State& state) {
    const auto* ma = std::get_if<MassAction>(&reaction.rate_law);
    if (!ma) throw std::invalid_argument("mass_action_propensity: rate law is not mass action");
    double a = ma->c;
    for (size_t i = 0; i < reaction.reactants.size(); ++i) {
        const uint32_t k = reaction.reactants[i];
        if (k == 0) continue;
        const int64_t x = state[i];
        if (x < static_cast<int64_t>(k)) return 0.0;
        double binom = 1.0;
        for (uint32_t j = 0; j < k; ++j) binom *= static_cast<double>(x - j) / static_cast<double>(j + 1);
        a *= binom;
    }
    return a;
}

double target_value(const State& terminal, const TargetQuery& query) {
    if (query.species >= terminal.size()) throw std::out_of_range("target species index out of range");
    const int64_t count = terminal[query.species];
    if (query.kind == TargetQuery::Kind::Mean) return static_cast<double>(count);
    return count <= query.level ? 1.0 : 0.0;
}

double target_value(const Trajectory& trajectory, const TargetQuery& query) {
    return target_value(trajectory.terminal_state(), query);
}

Polynomial propensity_polynomial(const Reaction& reaction, const Model& model) {
    const size_t n = model.n_species();
    if (const auto* ma = std::get_if<MassAction>(&reaction.rate_law)) {
        Polynomial p = Polynomial::constant(n, ma->c);
        for (size_t i = 0; i < n; ++i) {
            const uint32_t k = reaction.reactants[i];
            if (k == 0) continue;
            double k_factorial = 1.0;
            for (uint32_t j = 2; j <= k; ++j) k_factorial *= j;
            p = p * falling_factorial_polynomial(n, i, k) * (1.0 / k_factorial);
        }
        return p;
    }
    return to_polynomial(std::get<RateExpr>(reaction.rate_law), n, model.parameter_values);
}

StackProgram compile_propensity(const Reaction& reaction, const Model& model) {
    const size_t n = model.n_species();
    if (const auto* ma = std::get_if<MassAction>(&reaction.rate_law)) {
        // c * prod_i x_i (x_i - 1) ... (x_i - k + 1) / k!
        RateExpr e = RateExpr::constant(ma->c);
        for (uint32_t i = 0; i < n; ++i) {
            const uint32_t k = reaction.reactants[i];
            if (k == 0) continue;
            RateExpr factor = RateExpr::species(i, model.species[i]);
            double k_factorial = 1.0;
            for (uint32_t j = 1; j < k; ++j) {
                factor = RateExpr::binary(
                    RateExpr::Kind::Mul, std::move(factor),
                    RateExpr::binary(RateExpr::Kind::Sub, RateExpr::species(i, model.species[i]),
                                     RateExpr::constant(static_cast<double>(j))));
                k_factorial *= j + 1;
            }
            if (k_factorial != 1.0)
                factor = RateExpr::binary(RateExpr::Kind::Div, std::move(factor),
                                          RateExpr::constant(k_factorial));
            e = RateExpr::binary(RateExpr::Kind::Mul, std::move(e), std::move(factor));
        }
        return compile(e, n, model.parameter_values.size());
    }
    return compile(std::get<RateExpr>(reaction.rate_law), n, model.parameter_values.size());
}

}  // namespace srncv
