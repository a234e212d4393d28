// Independent reference answers: the truncated master equation integrated
// on a finite window reachable from the initial state, plus the birth-death
// closed form. Used by tests and the `validate` command; never by the
// estimator path.
#pragma once

#include <cstdint>
#include <vector>

#include "srncv/model.hpp"
#include "srncv/polynomial.hpp"

namespace srncv {

struct TruncationBox {
    std::vector<int64_t> upper;    // inclusive per-species bounds
    double mass_tolerance = 1e-4;  // acceptable probability mass lost at the horizon
    size_t max_states = 2'000'000;
};

struct FspWindowError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Transient distribution on the truncated window. States are enumerated by
/// breadth-first reachability from the Dirac initial state; probability
/// flowing across the boundary is tracked as lost mass. Integration is an
/// adaptive Dormand-Prince 5(4) scheme with local tolerance 1e-8.
class FspSolver {
public:
    FspSolver(const Model& model, const TruncationBox& box);

    /// Advances the distribution; t must not be behind the current time.
    void integrate_to(double t);

    double time() const { return t_; }
    size_t n_states() const { return states_.size(); }
    double lost_mass() const { return y_.back(); }
    double tracked_mass() const;

    double moment(const MultiIndex& m) const;
    double expectation(const Polynomial& p) const;
    double prob_le(uint32_t species, int64_t level) const;

    const std::vector<State>& states() const { return states_; }
    /// Probabilities clipped to [0, 1]; entries below -1e-12 never occur.
    std::vector<double> distribution() const;
    /// Smallest unclipped probability, for the negativity invariant.
    double min_raw_probability() const;

private:
    void derivative(const std::vector<double>& y, std::vector<double>& dy) const;
    void build(const Model& model, const TruncationBox& box);

    std::vector<State> states_;
    // edges grouped by target state for race-free, deterministic updates
    std::vector<size_t> in_offsets_;
    std::vector<std::pair<uint32_t, double>> in_edges_;  // (source, rate)
    std::vector<double> total_out_;                      // per state
    std::vector<std::pair<uint32_t, double>> sink_edges_;

    std::vector<double> y_;  // state probabilities + trailing lost-mass entry
    double t_ = 0.0;
    double h_ = 0.0;
    std::vector<double> k_[7], y_tmp_, y_err_;
    bool have_k1_ = false;
};

struct FspResult {
    std::vector<State> states;
    std::vector<double> probabilities;
    double lost_mass = 0.0;

    double moment(const MultiIndex& m) const;
    double prob_le(uint32_t species, int64_t level) const;
};

/// One-shot transient solve; throws FspWindowError when the lost mass at the
/// horizon exceeds the box tolerance or the window exceeds max_states.
FspResult fsp_transient(const Model& model, const TruncationBox& box, double T);

/// E[X_T] of the birth-death process started at 0: (gamma/delta)(1 - e^{-delta T}).
double bd_mean_closed_form(double gamma, double delta, double T);

}  // namespace srncv
