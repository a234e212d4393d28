// Domain types for stochastic reaction networks: species, reactions with
// mass-action or expression rate laws, integer states, piecewise-constant
// trajectories and the target quantities estimated from them.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "srncv/rate_expr.hpp"

namespace srncv {

using State = std::vector<int64_t>;

struct MassAction {
    double c = 0.0;  // rate constant, strictly positive
};

using RateLaw = std::variant<MassAction, RateExpr>;

struct Reaction {
    std::vector<uint32_t> reactants;  // v-, one entry per species
    std::vector<uint32_t> products;   // v+
    RateLaw rate_law;

    bool is_mass_action() const { return std::holds_alternative<MassAction>(rate_law); }
};

struct Model {
    std::vector<std::string> species;
    std::vector<Reaction> reactions;
    std::vector<std::string> parameter_names;
    std::vector<double> parameter_values;
    State initial_state;  // Dirac initial distribution

    size_t n_species() const { return species.size(); }
    size_t n_reactions() const { return reactions.size(); }

    std::optional<uint32_t> species_index(const std::string& name) const;
    std::optional<uint32_t> parameter_index(const std::string& name) const;

    /// Throws std::invalid_argument on any broken invariant (duplicate
    /// species, stoichiometry arity, non-positive mass-action constant,
    /// negative initial counts, out-of-range expression references).
    void validate() const;
};

struct ThresholdInfo {
    int64_t level;  // event is count <= level (inclusive)
};

struct TargetQuery {
    enum class Kind { Mean, ThresholdProbability };
    Kind kind = Kind::Mean;
    uint32_t species = 0;
    double horizon = 0.0;
    int64_t level = 0;  // ThresholdProbability only

    static TargetQuery mean(uint32_t species, double horizon);
    static TargetQuery threshold_probability(uint32_t species, int64_t level, double horizon);
    void validate(const Model& model) const;
};

/// Piecewise-constant path: states[i] holds on [jump_times[i-1], jump_times[i])
/// with jump_times[-1] meaning 0, and states.back() holds to the horizon.
struct Trajectory {
    std::vector<double> jump_times;  // strictly inside (0, horizon], non-decreasing
    std::vector<State> states;       // jump_times.size() + 1 entries
    double horizon = 0.0;

    const State& terminal_state() const { return states.back(); }
    size_t n_jumps() const { return jump_times.size(); }
};

/// v+ - v-, the state change applied when the reaction fires.
std::vector<int64_t> stoich_change(const Reaction& reaction);

/// c * prod_i binom(x_i, v-_i); zero when reactants are insufficient.
double mass_action_propensity(const Reaction& reaction, const State& state);

/// One sample of the target: terminal count for Mean, indicator of
/// count <= level for ThresholdProbability.
double target_value(const State& terminal, const TargetQuery& query);
double target_value(const Trajectory& trajectory, const TargetQuery& query);

/// Propensity of a reaction as polynomial in the species counts with
/// parameters substituted. Throws PolynomialityError for non-polynomial
/// expression rates.
Polynomial propensity_polynomial(const Reaction& reaction, const Model& model);

/// Stack program computing the propensity; mass-action laws are lowered to
/// the expanded binomial product c * prod x(x-1).../(k!).
StackProgram compile_propensity(const Reaction& reaction, const Model& model);

}  // namespace srncv
